use rayon::prelude::*;
use serde::Serialize;

use super::law::{Step, StepLaw};
use crate::sim::survival::HitTime;
use crate::stats::{wilson_interval, Z95};
use crate::stream::{SeedSpec, Stream};

/// Look-around walk `S_n = s₀ + ζ₁ + … + ζ_n` with radii `R_k` drawn jointly with `ζ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LookAroundWalk {
    pub law: StepLaw,
    pub s0: f64,
}

impl LookAroundWalk {
    pub fn new(law: StepLaw, s0: f64) -> LookAroundWalk {
        LookAroundWalk { law, s0 }
    }

    /// Triple `k ≥ 1` of the walk on `stream`.
    #[inline]
    pub fn step(&self, stream: &Stream, k: u64) -> Step {
        self.law.sample(stream.uniform(k - 1))
    }
}

/// A point of a sampled path: position `S_n` and the look radius `R_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathPoint {
    pub n: u64,
    pub s: f64,
    pub r_next: f64,
}

/// `S_0, …, S_horizon` with their look radii.
pub fn sample_walk(w: &LookAroundWalk, horizon: u64, seed: SeedSpec) -> Vec<PathPoint> {
    let stream = seed.lane(0);
    let mut s = w.s0;
    let mut out = Vec::with_capacity(horizon as usize + 1);
    for n in 0..=horizon {
        let st = w.step(&stream, n + 1);
        out.push(PathPoint { n, s, r_next: st.r });
        s += st.zeta;
    }
    out
}

/// Stopping condition evaluated at time `n` on `(S_n, R_{n+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "at", rename_all = "kebab-case")]
pub enum Target {
    /// `S_n = x`.
    Visit(f64),
    /// `|S_n − x| ≤ R_{n+1}`.
    LookAround(f64),
    /// `S_n + R_{n+1} ≥ x`.
    Reach(f64),
    /// `|S_n| > ρ`.
    ExitBand(f64),
    /// `S_n > ρ`.
    Above(f64),
    /// `S_n < −ρ`.
    Below(f64),
}

impl Target {
    #[inline]
    pub fn hit(&self, s: f64, r: f64) -> bool {
        match *self {
            Target::Visit(x) => s == x,
            Target::LookAround(x) => (s - x).abs() <= r,
            Target::Reach(x) => s + r >= x,
            Target::ExitBand(rho) => s.abs() > rho,
            Target::Above(rho) => s > rho,
            Target::Below(rho) => s < -rho,
        }
    }

    /// The event ignores the radius.
    pub fn uses_radius(&self) -> bool {
        matches!(self, Target::LookAround(_) | Target::Reach(_))
    }

    /// `τ_ρ`: leaving the band in the direction of the drift sign.
    pub fn exit_for_drift(sign: i32, rho: f64) -> Target {
        match sign {
            0 => Target::ExitBand(rho),
            s if s > 0 => Target::Above(rho),
            _ => Target::Below(rho),
        }
    }
}

/// `inf{n ≥ 0 : target hit}`, censored after time `cap`.
pub fn stopping_time(w: &LookAroundWalk, target: &Target, cap: u64, stream: &Stream) -> HitTime {
    let mut s = w.s0;
    for n in 0..=cap {
        let st = w.step(stream, n + 1);
        if target.hit(s, st.r) {
            return HitTime::Hit(n);
        }
        s += st.zeta;
    }
    HitTime::Censored(cap)
}

/// Stopping times for `trials` replicas; replica `i` uses `SeedSpec::new(root_seed, i)`.
pub fn stopping_times(w: &LookAroundWalk, target: &Target, cap: u64, trials: u64, root_seed: u64) -> Vec<HitTime> {
    (0..trials).into_par_iter().map(|i| stopping_time(w, target, cap, &SeedSpec::new(root_seed, i).lane(0))).collect()
}

/// Path events with an exact oracle counterpart.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// `τ > n` for the given target.
    NotHitBy { target: Target, n: u64 },
    /// `S_n = y`.
    PositionAt { n: u64, y: f64 },
    /// Two independent walks (steps in lockstep) have not met by time `n`.
    NoMeetingBy { other: StepLaw, other_start: f64, n: u64 },
}

/// Monte Carlo frequency of an event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventEstimate {
    pub successes: u64,
    pub trials: u64,
    pub frequency: f64,
    /// 95% Wilson interval.
    pub ci: (f64, f64),
}

fn occurs(w: &LookAroundWalk, ev: &Event, seed: SeedSpec) -> bool {
    match ev {
        Event::NotHitBy { target, n } => stopping_time(w, target, *n, &seed.lane(0)).is_censored(),
        Event::PositionAt { n, y } => {
            let stream = seed.lane(0);
            let s = w.s0 + (1..=*n).map(|k| w.step(&stream, k).zeta).sum::<f64>();
            s == *y
        }
        Event::NoMeetingBy { other, other_start, n } => {
            let other = LookAroundWalk::new(other.clone(), *other_start);
            let (a, b) = (seed.lane(0), seed.lane(1));
            let (mut x, mut y) = (w.s0, other.s0);
            for k in 0..=*n {
                if x == y {
                    return false;
                }
                x += w.step(&a, k + 1).zeta;
                y += other.step(&b, k + 1).zeta;
            }
            true
        }
    }
}

pub fn estimate_event(w: &LookAroundWalk, ev: &Event, trials: u64, root_seed: u64) -> EventEstimate {
    let successes = (0..trials).into_par_iter().filter(|&i| occurs(w, ev, SeedSpec::new(root_seed, i))).count() as u64;
    EventEstimate {
        successes,
        trials,
        frequency: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        ci: wilson_interval(successes, trials, Z95),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_starts_at_s0_and_is_reproducible() {
        let w = LookAroundWalk::new(StepLaw::srw(), 3.0);
        let a = sample_walk(&w, 50, SeedSpec::new(1, 0));
        assert_eq!(a[0].s, 3.0);
        assert_eq!(a.len(), 51);
        assert!(a.windows(2).all(|p| (p[1].s - p[0].s).abs() == 1.0));
        assert_eq!(a, sample_walk(&w, 50, SeedSpec::new(1, 0)));
    }

    #[test]
    fn look_radius_counts_at_time_zero() {
        let w = LookAroundWalk::new(StepLaw::srw(), 0.0);
        let s = SeedSpec::new(0, 0).lane(0);
        assert_eq!(stopping_time(&w, &Target::LookAround(1.0), 10, &s), HitTime::Hit(0));
        assert_eq!(stopping_time(&w, &Target::Reach(1.0), 10, &s), HitTime::Hit(0));
        assert_eq!(stopping_time(&w, &Target::Visit(0.0), 10, &s), HitTime::Hit(0));
    }

    #[test]
    fn deterministic_exit_time() {
        let w = LookAroundWalk::new("1@1".parse().unwrap(), 0.0);
        let s = SeedSpec::new(0, 0).lane(0);
        assert_eq!(stopping_time(&w, &Target::exit_for_drift(1, 5.0), 100, &s), HitTime::Hit(6));
        assert_eq!(stopping_time(&w, &Target::Below(5.0), 100, &s), HitTime::Censored(100));
    }
}
