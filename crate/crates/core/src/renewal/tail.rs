use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use super::RenewalError;
use crate::protocol::ScoutProtocol;
use crate::sim::survival::{HitTime, SurvivalCurve};
use crate::sim::Simulator;
use crate::stats::{MeanEstimate, Verdict};
use crate::stream::SeedSpec;
use crate::walks::checks::MIN_R2;
use crate::walks::{fit_tail, fit_tail_from, TailFit, TailModel};

/// Gap survival for meetings `k` in a range, fitted against `√u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeetingTail {
    pub k_range: (usize, usize),
    pub trials: u64,
    pub cap: u64,
    pub seed: u64,
    pub protocol_hash: String,
    pub gaps: u64,
    pub censored_gaps: u64,
    pub fit: Option<TailFit>,
    /// `−slope` of the fit; a stand-in for the unknown decay constant.
    pub decay: Option<f64>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub curve: SurvivalCurve,
}

/// Gaps `N_k − N_{k−1}` for `k` in `ks`, each waited on for at most `cap`
/// steps. A censored gap ends the trial.
fn trial_gaps(p: &ScoutProtocol, ks: &RangeInclusive<usize>, cap: u64, seed: SeedSpec) -> Vec<HitTime> {
    let mut sim = Simulator::new(p, seed);
    let mut out = Vec::new();
    for k in 1..=*ks.end() {
        let start = sim.time();
        let gap = loop {
            sim.advance();
            let dt = sim.time() - start;
            if sim.positions()[0] == sim.positions()[1] {
                break HitTime::Hit(dt);
            }
            if dt >= cap {
                break HitTime::Censored(cap);
            }
        };
        if ks.contains(&k) {
            out.push(gap);
        }
        if gap.is_censored() {
            break;
        }
    }
    out
}

pub fn meeting_tail(p: &ScoutProtocol, ks: RangeInclusive<usize>, trials: u64, cap: u64, seed: u64) -> Result<MeetingTail, RenewalError> {
    if p.scouts() != 2 {
        return Err(RenewalError::NotTwoScouts(p.scouts()));
    }
    if *ks.start() == 0 || ks.is_empty() {
        return Err(RenewalError::InsufficientData("meeting index range must start at 1".into()));
    }
    let per: Vec<Vec<HitTime>> = (0..trials).into_par_iter().map(|i| trial_gaps(p, &ks, cap, SeedSpec::new(seed, i))).collect();
    let samples: Vec<HitTime> = per.into_iter().flatten().collect();
    if samples.iter().all(|g| g.is_censored()) {
        return Err(RenewalError::NoMeetings(cap));
    }
    let curve = SurvivalCurve::from_samples(samples, cap);
    let mut notes = Vec::new();
    let fit = match fit_tail(&curve, TailModel::StretchedExponential) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let verdict = match &fit {
        Some(f) => Verdict::from_bool(f.r_squared >= MIN_R2),
        None => Verdict::Inconclusive,
    };
    Ok(MeetingTail {
        k_range: (*ks.start(), *ks.end()),
        trials,
        cap,
        seed,
        protocol_hash: format!("{:016x}", p.content_hash()),
        gaps: curve.total,
        censored_gaps: curve.censored,
        decay: fit.as_ref().map(|f| -f.slope),
        fit,
        verdict,
        notes,
        curve,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanVerdict {
    FiniteMeanConsistent,
    InfiniteMeanConsistent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub verdict: MeanVerdict,
    pub fit: Option<TailFit>,
    /// First threshold of the fitted tail window.
    pub window_start: u64,
    pub censored_fraction: f64,
    /// `E min(T, cap)` and `E min(T, cap/2)`.
    pub capped_mean: Option<MeanEstimate>,
    pub half_capped_mean: Option<MeanEstimate>,
}

/// Classifies a survival curve by whether its tail integral can converge.
///
/// The power-law fit runs on thresholds from the first one with survival at
/// most 1/2. A slope of at least −1 with a good fit reads as an infinite
/// mean. Otherwise the mean counts as finite when under 1% of samples are
/// censored and `E min(T, u)` moves by less than its CI half-width between
/// `u = cap/2` and `u = cap`.
pub fn divergence_flag(curve: &SurvivalCurve) -> Result<DivergenceReport, RenewalError> {
    if curve.total == 0 || curve.thresholds.is_empty() {
        return Err(RenewalError::InsufficientData("empty survival curve".into()));
    }
    let window_start = (0..curve.thresholds.len()).find(|&i| curve.survival(i) <= 0.5).map_or(curve.thresholds[0], |i| curve.thresholds[i]);
    let fit = fit_tail_from(curve, TailModel::PowerLaw, window_start).ok();
    let last = curve.thresholds.len() - 1;
    let half = curve.thresholds.iter().rposition(|&u| 2 * u <= curve.censor_cap).unwrap_or(0);
    let capped_mean = curve.capped_mean(last);
    let half_capped_mean = curve.capped_mean(half);

    let infinite = fit.as_ref().is_some_and(|f| f.slope >= -1.0 && f.r_squared >= MIN_R2);
    let stable = match (&capped_mean, &half_capped_mean) {
        (Some(a), Some(b)) => (a.mean - b.mean).abs() <= a.ci_half_width,
        _ => false,
    };
    let verdict = if infinite {
        MeanVerdict::InfiniteMeanConsistent
    } else if curve.censored_fraction() < 0.01 && stable {
        MeanVerdict::FiniteMeanConsistent
    } else {
        MeanVerdict::Inconclusive
    };
    Ok(DivergenceReport { verdict, fit, window_start, censored_fraction: curve.censored_fraction(), capped_mean, half_capped_mean })
}
