use serde::Serialize;
use thiserror::Error;

use crate::sim::survival::SurvivalCurve;
use crate::stats::linear_fit;

/// Fewest survivors a threshold needs to enter a fit.
pub const MIN_SURVIVORS: u64 = 30;
/// Fewest usable thresholds for a fit.
pub const MIN_POINTS: usize = 4;

/// Shape of a survival tail, by its linearizing abscissa against `ln P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailModel {
    /// `ln u`
    PowerLaw,
    /// `u`
    Exponential,
    /// `√u`
    StretchedExponential,
}

impl TailModel {
    pub fn abscissa(self, u: f64) -> f64 {
        match self {
            TailModel::PowerLaw => u.ln(),
            TailModel::Exponential => u,
            TailModel::StretchedExponential => u.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPoint {
    pub u: f64,
    pub survival: f64,
    /// `None` for analytic curves.
    pub survivors: Option<u64>,
    pub total: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    pub model: TailModel,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<FitPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("only {usable} thresholds have at least {MIN_SURVIVORS} survivors; need {MIN_POINTS}")]
    InsufficientData { usable: usize },
}

/// Least squares on `(abscissa(u), ln P)` over the given points.
pub fn fit_points(points: Vec<FitPoint>, model: TailModel) -> Result<TailFit, FitError> {
    let usable: Vec<FitPoint> =
        points.into_iter().filter(|p| p.survival > 0.0 && p.u > 0.0 && p.survivors.is_none_or(|s| s >= MIN_SURVIVORS)).collect();
    if usable.len() < MIN_POINTS {
        return Err(FitError::InsufficientData { usable: usable.len() });
    }
    let xs: Vec<f64> = usable.iter().map(|p| model.abscissa(p.u)).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.survival.ln()).collect();
    let f = linear_fit(&xs, &ys).ok_or(FitError::InsufficientData { usable: 1 })?;
    Ok(TailFit { model, slope: f.slope, intercept: f.intercept, r_squared: f.r_squared, points: usable })
}

/// Fit of an analytic survival function sampled at `us`.
pub fn fit_exact(us: &[f64], survival: impl Fn(f64) -> f64, model: TailModel) -> Result<TailFit, FitError> {
    fit_points(us.iter().map(|&u| FitPoint { u, survival: survival(u), survivors: None, total: None }).collect(), model)
}

/// Empirical points of a curve with `u ≥ min_u`.
pub fn curve_points(curve: &SurvivalCurve, min_u: u64) -> Vec<FitPoint> {
    curve
        .thresholds
        .iter()
        .enumerate()
        .filter(|(_, &u)| u >= min_u)
        .map(|(i, &u)| FitPoint { u: u as f64, survival: curve.survival(i), survivors: Some(curve.survivors[i]), total: Some(curve.total) })
        .collect()
}

pub fn fit_tail(curve: &SurvivalCurve, model: TailModel) -> Result<TailFit, FitError> {
    fit_points(curve_points(curve, 1), model)
}

/// Fit restricted to the tail window `u ≥ min_u`.
pub fn fit_tail_from(curve: &SurvivalCurve, model: TailModel, min_u: u64) -> Result<TailFit, FitError> {
    fit_points(curve_points(curve, min_u), model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::survival::HitTime;

    fn dyadic() -> Vec<f64> {
        (0..16).map(|k| (1u64 << k) as f64).collect()
    }

    #[test]
    fn analytic_shapes() {
        let f = fit_exact(&dyadic(), |u| u.powf(-0.5), TailModel::PowerLaw).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-9 && f.r_squared == 1.0);
        let f = fit_exact(&dyadic(), |u| (-u.sqrt()).exp(), TailModel::StretchedExponential).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-9 && f.r_squared == 1.0);
        let us: Vec<f64> = (1..=20).map(f64::from).collect();
        let f = fit_exact(&us, |u| (-u).exp(), TailModel::Exponential).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-9 && f.r_squared == 1.0);
    }

    #[test]
    fn sparse_curves_are_rejected() {
        let c = SurvivalCurve::from_samples((0..100).map(HitTime::Hit), 1 << 10);
        // survivors > u for u = 1,2,4,...,64 are 98,97,...; only thresholds
        // with at least 30 survivors count
        let f = fit_tail(&c, TailModel::PowerLaw).unwrap();
        assert!(f.points.iter().all(|p| p.survivors.unwrap() >= MIN_SURVIVORS));
        let c = SurvivalCurve::from_samples((0..20).map(HitTime::Hit), 1 << 10);
        assert_eq!(fit_tail(&c, TailModel::PowerLaw), Err(FitError::InsufficientData { usable: 0 }));
    }
}
