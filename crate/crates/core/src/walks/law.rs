use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::stream;

/// One support point `(ζ, ν, R)` of a step law.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub zeta: Scalar,
    pub nu: u64,
    pub r: Scalar,
    pub prob: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LawError {
    #[error("step law has no atoms")]
    Empty,
    #[error("malformed atom `{0}` (expected ζ:ν:R@p or ζ@p)")]
    Syntax(String),
    #[error("probabilities sum to {0}, not 1")]
    RowSum(String),
    #[error("negative probability")]
    NegativeProbability,
    #[error("step time ν must be at least 1")]
    StepTime,
    #[error("radius R must be at least 1")]
    Radius,
}

/// Finite-support law of the triple `(ζ, ν, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLaw {
    atoms: Vec<Atom>,
    cdf: Vec<f64>,
    mean_zeta: Scalar,
    mean_nu: Scalar,
}

/// Sampled atom in floating form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Step {
    pub zeta: f64,
    pub nu: u64,
    pub r: f64,
}

impl StepLaw {
    pub fn new(atoms: Vec<Atom>) -> Result<StepLaw, LawError> {
        if atoms.is_empty() {
            return Err(LawError::Empty);
        }
        for a in &atoms {
            if a.prob.is_negative() {
                return Err(LawError::NegativeProbability);
            }
            if a.nu < 1 {
                return Err(LawError::StepTime);
            }
            if a.r.value() < 1.0 {
                return Err(LawError::Radius);
            }
        }
        let total = Scalar::sum(atoms.iter().map(|a| &a.prob));
        if !total.is_unit_sum() {
            return Err(LawError::RowSum(total.to_string()));
        }
        let mean_zeta = Scalar::sum(&atoms.iter().map(|a| a.zeta.mul(&a.prob)).collect::<Vec<_>>());
        let mean_nu = Scalar::sum(&atoms.iter().map(|a| Scalar::integer(a.nu as i64).mul(&a.prob)).collect::<Vec<_>>());
        let cdf = stream::cumulative(atoms.iter().map(|a| a.prob.value()));
        Ok(StepLaw { atoms, cdf, mean_zeta, mean_nu })
    }

    /// Law with `ν = R = 1` and the given `(ζ, p)` pairs.
    pub fn simple(steps: &[(i64, Scalar)]) -> Result<StepLaw, LawError> {
        StepLaw::new(steps.iter().map(|(z, p)| Atom { zeta: Scalar::integer(*z), nu: 1, r: Scalar::one(), prob: p.clone() }).collect())
    }

    /// Simple random walk: `±1` with probability 1/2, `ν = R = 1`.
    pub fn srw() -> StepLaw {
        StepLaw::simple(&[(1, Scalar::ratio(1, 2)), (-1, Scalar::ratio(1, 2))]).expect("valid law")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn mean_zeta(&self) -> &Scalar {
        &self.mean_zeta
    }

    pub fn mean_nu(&self) -> &Scalar {
        &self.mean_nu
    }

    /// Sign of `E ζ`, exact when the law is rational.
    pub fn drift_sign(&self) -> i32 {
        self.mean_zeta.signum_with_tolerance(1e-12)
    }

    /// Effective drift `E ζ / E ν` as a float.
    pub fn effective_drift(&self) -> f64 {
        self.mean_zeta.value() / self.mean_nu.value()
    }

    /// `P(ζ = 0) = 1`.
    pub fn is_degenerate(&self) -> bool {
        self.atoms.iter().all(|a| a.prob.is_zero() || a.zeta.is_zero())
    }

    /// Integer displacements and exact probabilities, as the exact oracle needs.
    pub fn is_integer_exact(&self) -> bool {
        self.atoms.iter().all(|a| a.zeta.as_integer().is_some() && a.zeta.is_exact() && a.prob.is_exact())
    }

    pub fn max_abs_zeta(&self) -> f64 {
        self.atoms.iter().map(|a| a.zeta.value().abs()).fold(0.0, f64::max)
    }

    pub fn max_r(&self) -> f64 {
        self.atoms.iter().filter(|a| !a.prob.is_zero()).map(|a| a.r.value()).fold(1.0, f64::max)
    }

    #[inline]
    pub fn sample(&self, u: f64) -> Step {
        let a = &self.atoms[stream::pick(&self.cdf, u)];
        Step { zeta: a.zeta.value(), nu: a.nu, r: a.r.value() }
    }

    /// Log moment generating function `log E e^{tζ}`.
    pub fn log_mgf(&self, t: f64) -> f64 {
        // shift by the largest exponent for stability
        let m = self.atoms.iter().filter(|a| !a.prob.is_zero()).map(|a| t * a.zeta.value()).fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self.atoms.iter().map(|a| a.prob.value() * (t * a.zeta.value() - m).exp()).sum();
        m + s.ln()
    }

    /// Whether `P(|ζ| + ν + R > u) ≤ δ⁻¹ exp(−u^δ)` for all `u ≥ 0`, checked at
    /// every breakpoint of the left side (it is piecewise constant).
    pub fn satisfies_envelope(&self, delta: f64) -> bool {
        if !(delta > 0.0) {
            return false;
        }
        let sizes: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .filter(|a| !a.prob.is_zero())
            .map(|a| (a.zeta.value().abs() + a.nu as f64 + a.r.value(), a.prob.value()))
            .collect();
        // sup over u < v of P(size > u) is attained as u ↑ v
        sizes.iter().all(|&(v, _)| {
            let tail: f64 = sizes.iter().filter(|(s, _)| *s >= v).map(|(_, p)| p).sum();
            tail <= (-(v.powf(delta))).exp() / delta + 1e-15
        })
    }

    /// A `δ` for which [`StepLaw::satisfies_envelope`] holds. Finite support
    /// always admits one.
    pub fn envelope_delta(&self) -> f64 {
        let mut d = 1.0;
        while !self.satisfies_envelope(d) {
            d /= 2.0;
            assert!(d > 1e-12, "finite-support laws admit an envelope");
        }
        d
    }
}

impl fmt::Display for StepLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.atoms.iter().map(|a| format!("{}:{}:{}@{}", a.zeta, a.nu, a.r, a.prob)).collect();
        f.write_str(&parts.join(";"))
    }
}

impl FromStr for StepLaw {
    type Err = LawError;

    /// `ζ:ν:R@p;...`, where `ζ@p` is short for `ζ:1:1@p`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut atoms = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let err = || LawError::Syntax(part.to_string());
            let (body, p) = part.split_once('@').ok_or_else(err)?;
            let fields: Vec<&str> = body.split(':').map(str::trim).collect();
            let (zeta, nu, r) = match fields.as_slice() {
                [z] => (*z, "1", "1"),
                [z, n, r] => (*z, *n, *r),
                _ => return Err(err()),
            };
            atoms.push(Atom {
                zeta: zeta.parse().map_err(|_| err())?,
                nu: nu.parse().map_err(|_| err())?,
                r: r.parse().map_err(|_| err())?,
                prob: p.trim().parse().map_err(|_| err())?,
            });
        }
        StepLaw::new(atoms)
    }
}
