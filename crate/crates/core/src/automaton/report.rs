use serde::Serialize;

use super::{classes, degeneracy_check, effective_drift, ray_domain, return_moments, stationary, AnalysisError, ReducedKernel, ThickRay};
use crate::stream::SeedSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyJson {
    pub degenerate: bool,
    pub root: String,
    pub offsets: Option<Vec<(String, Vec<i64>)>>,
    pub radius: Option<f64>,
    /// `[from, to, move]` steps of a closed walk through the root.
    pub witness_cycle: Option<Vec<(String, String, Vec<i64>)>>,
    pub witness_displacement: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrentAnalysis {
    /// Stationary probabilities in class order, as fractions when exact.
    pub stationary: Vec<String>,
    pub exact: bool,
    /// Mean displacement per step, equal to the effective drift.
    pub drift: Vec<String>,
    pub drift_value: Vec<f64>,
    /// Mean return time to the root.
    pub mean_return_time: String,
    /// Mean displacement over one return to the root.
    pub mean_return_displacement: Vec<String>,
    pub degeneracy: DegeneracyJson,
    /// Unit drift vector; `None` for zero drift.
    pub ray_direction: Option<Vec<f64>>,
    /// Planar kernels only.
    pub ray: Option<ThickRay>,
    pub ray_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassEntry {
    pub states: Vec<String>,
    pub recurrent: bool,
    pub analysis: Option<RecurrentAnalysis>,
}

/// Full structural report of a reduced kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub dim: usize,
    pub states: Vec<String>,
    pub classes: Vec<ClassEntry>,
}

/// Classes, stationary laws, drifts, degeneracy verdicts and (in the plane) thick rays.
pub fn analyze(k: &ReducedKernel, seed: SeedSpec) -> Result<ClassReport, AnalysisError> {
    analyze_with_width(k, None, seed)
}

/// [`analyze`] with a fixed ray width instead of the pilot estimate.
pub fn analyze_with_width(k: &ReducedKernel, width: Option<f64>, seed: SeedSpec) -> Result<ClassReport, AnalysisError> {
    let rays = if k.dim() == 2 { Some(ray_domain(k, width, seed)?) } else { None };
    let name = |q: usize| k.name(q).to_string();
    let mut out = Vec::new();
    for (ci, c) in classes(k).into_iter().enumerate() {
        let analysis = if c.recurrent {
            let st = stationary(k, &c)?;
            let drift = effective_drift(k, &c)?;
            let (nu, zeta) = return_moments(k, &c, c.root())?;
            let deg = degeneracy_check(k, &c)?;
            let ray = rays.as_ref().and_then(|r| r.iter().find(|r| r.class == ci));
            Some(RecurrentAnalysis {
                stationary: match &st.exact {
                    Some(v) => v.iter().map(crate::scalar::format_rational).collect(),
                    None => st.values.iter().map(|x| format!("{x:e}")).collect(),
                },
                exact: st.exact.is_some(),
                drift: drift.to_strings(),
                drift_value: drift.values.clone(),
                mean_return_time: nu.to_strings().remove(0),
                mean_return_displacement: zeta.to_strings(),
                degeneracy: DegeneracyJson {
                    degenerate: deg.degenerate,
                    root: name(deg.root),
                    offsets: deg.offsets.map(|o| o.into_iter().map(|(q, x)| (name(q), x)).collect()),
                    radius: deg.radius,
                    witness_cycle: deg.witness_cycle.map(|w| w.into_iter().map(|s| (name(s.from), name(s.to), s.mv)).collect()),
                    witness_displacement: deg.witness_displacement,
                },
                ray_direction: unit(&drift.values),
                ray: ray.map(|r| r.ray),
                ray_note: ray.and_then(|r| r.note.clone()),
            })
        } else {
            None
        };
        out.push(ClassEntry { states: c.states.iter().map(|&q| name(q)).collect(), recurrent: c.recurrent, analysis });
    }
    Ok(ClassReport { dim: k.dim(), states: k.names().to_vec(), classes: out })
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
}

#[cfg(test)]
mod tests {
    use super::super::reduce_kernel;
    use super::*;
    use crate::protocol::{builtin, parse_protocol};
    use std::collections::BTreeMap;

    #[test]
    fn srw_report() {
        let k = reduce_kernel(&builtin("srw", &BTreeMap::new()).unwrap(), 0).unwrap();
        let r = analyze(&k, SeedSpec::new(0, 0)).unwrap();
        assert_eq!(r.classes.len(), 1);
        let a = r.classes[0].analysis.as_ref().unwrap();
        assert_eq!(a.drift, vec!["0"]);
        assert!(!a.degeneracy.degenerate);
        assert_eq!(a.ray_direction, None);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"stationary\":[\"1\"]"), "{json}");
    }

    #[test]
    fn zero_cycle_report() {
        let p = parse_protocol("dim 1\nscouts 1\nstates a b\ninit 1 a\ntrans a * -> 1 b (+1)\ntrans b * -> 1 a (-1)\n").unwrap();
        let r = analyze(&reduce_kernel(&p, 0).unwrap(), SeedSpec::new(0, 0)).unwrap();
        let a = r.classes[0].analysis.as_ref().unwrap();
        assert!(a.degeneracy.degenerate);
        assert_eq!(a.degeneracy.offsets, Some(vec![("a".into(), vec![0]), ("b".into(), vec![1])]));
        assert_eq!(a.stationary, vec!["1/2", "1/2"]);
        assert_eq!(a.mean_return_time, "2");
    }

    #[test]
    fn directed_walk_has_a_ray() {
        let p = parse_protocol("dim 1\nscouts 1\nstates A\ninit 1 A\ntrans A * -> 1 A (+1)\n").unwrap();
        let r = analyze(&reduce_kernel(&p, 0).unwrap(), SeedSpec::new(0, 0)).unwrap();
        let a = r.classes[0].analysis.as_ref().unwrap();
        assert_eq!(a.drift, vec!["1"]);
        assert_eq!(a.ray_direction, Some(vec![1.0]));
    }
}
