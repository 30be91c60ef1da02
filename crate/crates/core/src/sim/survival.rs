use serde::Serialize;

use crate::stats::MeanEstimate;

/// A sampled stopping time, possibly truncated at the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum HitTime {
    Hit(u64),
    /// Not observed within the cap; only `T > cap` is known.
    Censored(u64),
}

impl HitTime {
    pub fn time(self) -> Option<u64> {
        match self {
            HitTime::Hit(t) => Some(t),
            HitTime::Censored(_) => None,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, HitTime::Censored(_))
    }

    /// Whether `T > u`.
    pub fn exceeds(self, u: u64) -> bool {
        match self {
            HitTime::Hit(t) => t > u,
            HitTime::Censored(cap) => cap >= u,
        }
    }
}

/// Moments of the uncensored samples not exceeding one threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Moments {
    pub count: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl Moments {
    fn add(&mut self, t: u64) {
        self.count += 1;
        self.sum += t as u128;
        self.sum_sq += (t as u128) * (t as u128);
    }

    pub fn mean(&self) -> Option<MeanEstimate> {
        MeanEstimate::from_moments(self.count, self.sum as f64, self.sum_sq as f64)
    }
}

/// Empirical survival `P(T > u)` on dyadic thresholds up to the cap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub thresholds: Vec<u64>,
    /// Number of samples with `T > u` for each threshold.
    pub survivors: Vec<u64>,
    pub total: u64,
    pub censor_cap: u64,
    pub censored: u64,
    /// Per threshold `u`, moments of samples with `T ≤ u`.
    pub moments: Vec<Moments>,
}

/// `1, 2, 4, ...` up to `cap`, with `cap` itself appended when it is not a power of two.
pub fn dyadic_thresholds(cap: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut u = 1u64;
    while u <= cap {
        out.push(u);
        match u.checked_mul(2) {
            Some(v) => u = v,
            None => break,
        }
    }
    if out.last() != Some(&cap) && cap > 0 {
        out.push(cap);
    }
    out
}

impl SurvivalCurve {
    pub fn with_thresholds(thresholds: Vec<u64>, cap: u64) -> SurvivalCurve {
        let m = thresholds.len();
        SurvivalCurve { thresholds, survivors: vec![0; m], total: 0, censor_cap: cap, censored: 0, moments: vec![Moments::default(); m] }
    }

    /// Dyadic curve over `samples`, in order.
    pub fn from_samples(samples: impl IntoIterator<Item = HitTime>, cap: u64) -> SurvivalCurve {
        let mut c = SurvivalCurve::with_thresholds(dyadic_thresholds(cap), cap);
        for s in samples {
            c.record(s);
        }
        c
    }

    pub fn record(&mut self, s: HitTime) {
        self.total += 1;
        if s.is_censored() {
            self.censored += 1;
        }
        for (i, &u) in self.thresholds.iter().enumerate() {
            if s.exceeds(u) {
                self.survivors[i] += 1;
            } else if let HitTime::Hit(t) = s {
                self.moments[i].add(t);
            }
        }
    }

    /// Combines two curves over the same thresholds. Counts add, so the
    /// result does not depend on merge order.
    pub fn merge(&mut self, other: &SurvivalCurve) {
        assert_eq!(self.thresholds, other.thresholds, "merging curves with different thresholds");
        self.total += other.total;
        self.censored += other.censored;
        for i in 0..self.thresholds.len() {
            self.survivors[i] += other.survivors[i];
            let (a, b) = (&mut self.moments[i], &other.moments[i]);
            a.count += b.count;
            a.sum += b.sum;
            a.sum_sq += b.sum_sq;
        }
    }

    pub fn survival(&self, i: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.survivors[i] as f64 / self.total as f64
        }
    }

    pub fn censored_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.censored as f64 / self.total as f64
        }
    }

    /// Mean over uncensored samples, i.e. samples with `T ≤ cap`.
    pub fn uncensored_mean(&self) -> Option<MeanEstimate> {
        self.moments.last().and_then(|m| m.mean())
    }

    /// Mean of the samples with `T ≤ u` for the largest threshold `u ≤ limit`.
    pub fn truncated_mean(&self, limit: u64) -> Option<MeanEstimate> {
        let i = self.thresholds.iter().rposition(|&u| u <= limit)?;
        self.moments[i].mean()
    }

    /// Mean of `min(T, u)` for threshold index `i`; defined for censored samples too.
    pub fn capped_mean(&self, i: usize) -> Option<MeanEstimate> {
        let (m, k, u) = (&self.moments[i], self.survivors[i] as f64, self.thresholds[i] as f64);
        MeanEstimate::from_moments(self.total, m.sum as f64 + k * u, m.sum_sq as f64 + k * u * u)
    }

    /// A censored fraction above 1% makes the uncensored mean a lower bound only.
    pub fn mean_is_lower_bound_only(&self) -> bool {
        self.censored_fraction() > 0.01
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("u,survivors,total\n");
        for (u, k) in self.thresholds.iter().zip(&self.survivors) {
            s.push_str(&format!("{u},{k},{}\n", self.total));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert_eq!(dyadic_thresholds(8), vec![1, 2, 4, 8]);
        assert_eq!(dyadic_thresholds(10), vec![1, 2, 4, 8, 10]);
        assert!(dyadic_thresholds(0).is_empty());
    }

    #[test]
    fn survivors_nonincreasing_and_merge_commutes() {
        let a: Vec<HitTime> = [0, 3, 7, 1, 100].iter().map(|&t| HitTime::Hit(t)).chain([HitTime::Censored(64)]).collect();
        let mut c = SurvivalCurve::from_samples(a.iter().copied().take(3), 64);
        let d = SurvivalCurve::from_samples(a.iter().copied().skip(3), 64);
        let mut e = d.clone();
        c.merge(&d);
        e.merge(&SurvivalCurve::from_samples(a.iter().copied().take(3), 64));
        assert_eq!(c, e);
        assert!(c.survivors.windows(2).all(|w| w[0] >= w[1]));
        // T > 1 for 3, 7, 100 and the censored sample
        assert_eq!(c.survivors[0], 4);
        assert_eq!(c.censored, 1);
    }

    #[test]
    fn degenerate_curve() {
        let c = SurvivalCurve::from_samples(std::iter::repeat_n(HitTime::Hit(3), 10), 16);
        let m = c.uncensored_mean().unwrap();
        assert_eq!((m.mean, m.std_dev), (3.0, 0.0));
        assert_eq!(c.survivors, vec![10, 10, 0, 0, 0]);
    }
}
