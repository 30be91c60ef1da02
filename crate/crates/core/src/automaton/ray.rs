use serde::Serialize;

use super::{classes, degeneracy_check, effective_drift, AnalysisError, ReducedKernel};
use crate::stream::SeedSpec;

/// How a class's region is shaped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RayKind {
    /// Nonzero drift: a half-strip along the drift direction.
    Directed,
    /// Degenerate class: positions stay in a finite offset set.
    Bounded,
    /// Zero drift without degeneracy; no direction is defined.
    ZeroDrift,
}

/// `ℛ(α̂, M) = { x : |⟨x, α̂⊥⟩| < M, ⟨x, α̂⟩ > −M }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThickRay {
    pub kind: RayKind,
    /// Unit vector; zero when `zero_flag` is set.
    pub direction: [f64; 2],
    pub zero_flag: bool,
    pub width: f64,
    /// `width` was estimated from pilot runs rather than supplied or derived.
    pub width_is_estimate: bool,
}

impl ThickRay {
    /// Ray along `direction` (normalized here).
    pub fn directed(direction: [f64; 2], width: f64) -> ThickRay {
        let n = direction[0].hypot(direction[1]);
        assert!(n > 0.0, "direction must be nonzero");
        ThickRay {
            kind: RayKind::Directed,
            direction: [direction[0] / n, direction[1] / n],
            zero_flag: false,
            width,
            width_is_estimate: false,
        }
    }

    /// Membership. Directed rays use the half-strip inequalities; zero-flag
    /// regions are the open Euclidean ball of radius `width`.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        if self.zero_flag {
            return x[0].hypot(x[1]) < self.width;
        }
        self.contains_literal(x)
    }

    /// The defining inequalities evaluated as written. With a zero direction
    /// both hold for every point.
    pub fn contains_literal(&self, x: [f64; 2]) -> bool {
        let [a, b] = self.direction;
        let along = x[0] * a + x[1] * b;
        let perp = -x[0] * b + x[1] * a;
        perp.abs() < self.width && along > -self.width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRay {
    /// Index into [`classes`].
    pub class: usize,
    pub ray: ThickRay,
    /// Set when the thick-ray definition gives no region for this class.
    pub note: Option<String>,
}

/// Pilot parameters for the width estimate.
const PILOT_RUNS: u64 = 200;
const PILOT_STEPS: u64 = 1000;

/// Thick ray for every recurrent class of a planar kernel. `width` overrides
/// the estimate for classes with a drift or zero-drift region.
pub fn ray_domain(k: &ReducedKernel, width: Option<f64>, seed: SeedSpec) -> Result<Vec<ClassRay>, AnalysisError> {
    if k.dim() != 2 {
        return Err(AnalysisError::NeedsPlane(k.dim()));
    }
    let mut out = Vec::new();
    for (ci, class) in classes(k).into_iter().enumerate() {
        if !class.recurrent {
            continue;
        }
        let deg = degeneracy_check(k, &class)?;
        if deg.degenerate {
            let m = deg.radius.expect("degenerate verdicts carry a radius") + k.len() as f64;
            let ray = ThickRay { kind: RayKind::Bounded, direction: [0.0, 0.0], zero_flag: true, width: m, width_is_estimate: false };
            out.push(ClassRay { class: ci, ray, note: None });
            continue;
        }
        let drift = effective_drift(k, &class)?;
        let pilot = |f: &dyn Fn([f64; 2]) -> f64| percentile99(k, class.root(), seed.replica ^ ci as u64, seed.root_seed, f);
        if drift.is_zero() {
            let (w, est) = match width {
                Some(w) => (w, false),
                None => (pilot(&|x| x[0].hypot(x[1])), true),
            };
            let ray = ThickRay { kind: RayKind::ZeroDrift, direction: [0.0, 0.0], zero_flag: true, width: w, width_is_estimate: est };
            out.push(ClassRay { class: ci, ray, note: Some("none (zero drift); direction undefined, ball semantics".into()) });
        } else {
            let mut ray = ThickRay::directed([drift.values[0], drift.values[1]], 1.0);
            let [a, b] = ray.direction;
            let (w, est) = match width {
                Some(w) => (w, false),
                None => (pilot(&move |x| (-x[0] * b + x[1] * a).abs()), true),
            };
            ray.width = w;
            ray.width_is_estimate = est;
            out.push(ClassRay { class: ci, ray, note: None });
        }
    }
    Ok(out)
}

/// 99th percentile over pilot runs of `max_n f(X_n)`, started at `root`.
fn percentile99(k: &ReducedKernel, root: usize, salt: u64, root_seed: u64, f: &dyn Fn([f64; 2]) -> f64) -> f64 {
    let mut maxima: Vec<f64> = (0..PILOT_RUNS)
        .map(|r| {
            let s = SeedSpec::new(root_seed, r).lane(1000 + salt);
            let (mut q, mut x) = (root, [0i64; 2]);
            let mut best = 0.0f64;
            for n in 0..PILOT_STEPS {
                let e = k.sample(q, s.uniform(n));
                q = e.to;
                x[0] += e.mv[0];
                x[1] += e.mv[1];
                best = best.max(f([x[0] as f64, x[1] as f64]));
            }
            best
        })
        .collect();
    maxima.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let idx = ((PILOT_RUNS as f64 * 0.99).ceil() as usize).clamp(1, maxima.len()) - 1;
    maxima[idx]
}

#[cfg(test)]
mod tests {
    use super::super::tests::kernel;
    use super::*;

    #[test]
    fn membership_examples() {
        let r = ThickRay::directed([1.0, 0.0], 5.0);
        assert!(r.contains([10.0, 2.0]));
        assert!(!r.contains([10.0, 7.0]));
        assert!(!r.contains([-6.0, 0.0]));
    }

    #[test]
    fn drift_direction_and_bounded_case() {
        let k = kernel(2, &["a"], &[&[(0, &[1, 0], "1/2"), (0, &[1, 1], "1/4"), (0, &[1, -1], "1/4")]]);
        let rays = ray_domain(&k, Some(5.0), SeedSpec::new(0, 0)).unwrap();
        assert_eq!(rays.len(), 1);
        assert_eq!(rays[0].ray.direction, [1.0, 0.0]);
        assert!(!rays[0].ray.width_is_estimate);

        let k = kernel(2, &["a", "b"], &[&[(1, &[1, 0], "1")], &[(0, &[-1, 0], "1")]]);
        let rays = ray_domain(&k, None, SeedSpec::new(0, 0)).unwrap();
        assert_eq!(rays[0].ray.kind, RayKind::Bounded);
        assert!(rays[0].ray.zero_flag);
        assert_eq!(rays[0].ray.width, 1.0 + 2.0);
        assert!(rays[0].ray.contains([1.0, 0.0]));
    }

    #[test]
    fn width_estimate_is_deterministic() {
        let k = kernel(2, &["a"], &[&[(0, &[1, 0], "1/2"), (0, &[0, 1], "1/4"), (0, &[0, -1], "1/4")]]);
        let a = ray_domain(&k, None, SeedSpec::new(3, 0)).unwrap();
        let b = ray_domain(&k, None, SeedSpec::new(3, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a[0].ray.width_is_estimate && a[0].ray.width > 0.0);
        assert!(ray_domain(&kernel(1, &["a"], &[&[(0, &[1], "1")]]), None, SeedSpec::new(0, 0)).is_err());
    }
}
