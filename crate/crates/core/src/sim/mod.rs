//! Seeded simulation of scout processes.
//!
//! Scout `i` of replica `r` draws its step-`n` uniform from lane `i` of
//! `SeedSpec { root_seed, replica: r }` at counter `n`, so every trajectory is a
//! pure function of the seed. Monte Carlo layers run replicas on the rayon
//! pool, collect per-replica results in replica order and fold them
//! sequentially.

pub mod survival;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::protocol::{environment_at, Configuration, Point, ScoutProtocol, StateId};
use crate::stats::MeanEstimate;
use crate::stream::{SeedSpec, Stream};

pub use survival::{dyadic_thresholds, HitTime, Moments, SurvivalCurve};

/// Largest trace, in scout-time cells, that [`run`] will materialize.
pub const MAX_TRACE_CELLS: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("no rule for state {state} under environment {environment}")]
    NoMatchingRule { state: String, environment: String },
    #[error("configuration has {found} scouts, protocol has {expected}")]
    ScoutMismatch { expected: usize, found: usize },
    #[error("expected {expected} draws, got {found}")]
    DrawCount { expected: usize, found: usize },
    #[error("trace of {cells} cells exceeds the limit of {MAX_TRACE_CELLS}; use streaming measurement")]
    TraceTooLarge { cells: u64 },
    #[error("operation needs exactly 2 scouts, protocol has {0}")]
    NotTwoScouts(usize),
}

/// One synchronous step. `draws[i]` is scout `i`'s uniform on `[0, 1)`. All
/// environments are read from `cfg` before any scout moves.
pub fn step(p: &ScoutProtocol, cfg: &Configuration, draws: &[f64]) -> Result<Configuration, SimError> {
    let c = p.scouts();
    if cfg.scouts() != c || cfg.states.len() != c {
        return Err(SimError::ScoutMismatch { expected: c, found: cfg.scouts() });
    }
    if draws.len() != c {
        return Err(SimError::DrawCount { expected: c, found: draws.len() });
    }
    let mut next = cfg.clone();
    for i in 0..c {
        let env = environment_at(&cfg.positions, &cfg.states, i);
        let rule = p
            .rule_index(cfg.states[i], env)
            .ok_or_else(|| SimError::NoMatchingRule { state: p.state_name(cfg.states[i]).to_string(), environment: p.format_set(env) })?;
        let o = p.sample_outcome(rule, draws[i]);
        next.positions[i] = o.mv.apply(cfg.positions[i]);
        next.states[i] = o.to;
    }
    next.time += 1;
    Ok(next)
}

/// Streaming simulator holding only the current configuration.
#[derive(Debug, Clone)]
pub struct Simulator<'p> {
    protocol: &'p ScoutProtocol,
    positions: Vec<Point>,
    states: Vec<StateId>,
    scratch: Vec<usize>,
    streams: Vec<Stream>,
    time: u64,
}

impl<'p> Simulator<'p> {
    pub fn new(protocol: &'p ScoutProtocol, seed: SeedSpec) -> Self {
        let cfg = protocol.initial_configuration();
        let c = protocol.scouts();
        Simulator {
            protocol,
            positions: cfg.positions,
            states: cfg.states,
            scratch: vec![0; c],
            streams: (0..c as u64).map(|i| seed.lane(i)).collect(),
            time: 0,
        }
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn configuration(&self) -> Configuration {
        Configuration { positions: self.positions.clone(), states: self.states.clone(), time: self.time }
    }

    /// Advances one step.
    #[inline]
    pub fn advance(&mut self) {
        let p = self.protocol;
        for i in 0..self.positions.len() {
            let env = environment_at(&self.positions, &self.states, i);
            // validated protocols cover every realizable environment
            self.scratch[i] = p.rule_index(self.states[i], env).expect("validated protocol covers every environment");
        }
        for i in 0..self.positions.len() {
            let u = self.streams[i].uniform(self.time);
            let o = p.sample_outcome(self.scratch[i], u);
            self.positions[i] = o.mv.apply(self.positions[i]);
            self.states[i] = o.to;
        }
        self.time += 1;
    }

    #[inline]
    pub fn occupies(&self, x: Point) -> bool {
        self.positions.contains(&x)
    }
}

/// Full history of one replica, stored time-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub protocol_hash: u64,
    pub seed: SeedSpec,
    pub dim: usize,
    pub scouts: usize,
    positions: Vec<Point>,
    states: Vec<StateId>,
}

impl Trace {
    /// Number of configurations, `horizon + 1`.
    pub fn len(&self) -> usize {
        self.positions.len() / self.scouts
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn horizon(&self) -> u64 {
        self.len() as u64 - 1
    }

    pub fn positions_at(&self, n: usize) -> &[Point] {
        &self.positions[n * self.scouts..(n + 1) * self.scouts]
    }

    pub fn states_at(&self, n: usize) -> &[StateId] {
        &self.states[n * self.scouts..(n + 1) * self.scouts]
    }

    pub fn configuration(&self, n: usize) -> Configuration {
        Configuration { positions: self.positions_at(n).to_vec(), states: self.states_at(n).to_vec(), time: n as u64 }
    }

    /// Position sequence of one scout.
    pub fn path(&self, scout: usize) -> Vec<Point> {
        (0..self.len()).map(|n| self.positions_at(n)[scout]).collect()
    }

    /// CSV with columns `n,scout,x[,y],state`.
    pub fn to_csv(&self, p: &ScoutProtocol) -> String {
        let mut s = String::from(if self.dim == 1 { "n,scout,x,state\n" } else { "n,scout,x,y,state\n" });
        for n in 0..self.len() {
            for (i, (pt, q)) in self.positions_at(n).iter().zip(self.states_at(n)).enumerate() {
                if self.dim == 1 {
                    s.push_str(&format!("{n},{},{},{}\n", i + 1, pt[0], p.state_name(*q)));
                } else {
                    s.push_str(&format!("{n},{},{},{},{}\n", i + 1, pt[0], pt[1], p.state_name(*q)));
                }
            }
        }
        s
    }
}

/// Simulates `horizon` steps and keeps every configuration.
pub fn run(p: &ScoutProtocol, horizon: u64, seed: SeedSpec) -> Result<Trace, SimError> {
    let c = p.scouts() as u64;
    let cells = horizon.saturating_add(1).saturating_mul(c);
    if cells > MAX_TRACE_CELLS {
        return Err(SimError::TraceTooLarge { cells });
    }
    let mut sim = Simulator::new(p, seed);
    let mut positions = Vec::with_capacity(cells as usize);
    let mut states = Vec::with_capacity(cells as usize);
    positions.extend_from_slice(sim.positions());
    states.extend_from_slice(sim.states());
    for _ in 0..horizon {
        sim.advance();
        positions.extend_from_slice(sim.positions());
        states.extend_from_slice(sim.states());
    }
    Ok(Trace { protocol_hash: p.content_hash(), seed, dim: p.dim(), scouts: p.scouts(), positions, states })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HittingResult {
    pub target: Point,
    pub time: HitTime,
}

/// First `n ≤ cap` at which some scout occupies `x`, simulated without storing the trace.
pub fn hitting_time(p: &ScoutProtocol, x: Point, cap: u64, seed: SeedSpec) -> HittingResult {
    let mut sim = Simulator::new(p, seed);
    let time = loop {
        if sim.occupies(x) {
            break HitTime::Hit(sim.time());
        }
        if sim.time() >= cap {
            break HitTime::Censored(cap);
        }
        sim.advance();
    };
    HittingResult { target: x, time }
}

/// Hitting times of several targets from one trajectory; stops once all are hit.
pub fn hitting_times_many(p: &ScoutProtocol, targets: &[Point], cap: u64, seed: SeedSpec) -> Vec<HitTime> {
    let mut out = vec![HitTime::Censored(cap); targets.len()];
    let mut pending: HashMap<Point, Vec<usize>> = HashMap::new();
    for (i, &t) in targets.iter().enumerate() {
        pending.entry(t).or_default().push(i);
    }
    let mut sim = Simulator::new(p, seed);
    loop {
        for q in sim.positions() {
            if let Some(ids) = pending.remove(q) {
                for i in ids {
                    out[i] = HitTime::Hit(sim.time());
                }
            }
        }
        if pending.is_empty() || sim.time() >= cap {
            return out;
        }
        sim.advance();
    }
}

/// Monte Carlo summary for one target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingSummary {
    pub target: Vec<i64>,
    pub replicas: u64,
    pub cap: u64,
    pub root_seed: u64,
    pub protocol_hash: String,
    pub censored: u64,
    pub censored_fraction: f64,
    /// Mean over uncensored samples.
    pub mean: Option<MeanEstimate>,
    /// Set when more than 1% of samples are censored.
    pub mean_lower_bound_only: bool,
    #[serde(skip)]
    pub curve: SurvivalCurve,
}

impl HittingSummary {
    fn new(p: &ScoutProtocol, target: Point, curve: SurvivalCurve, root_seed: u64) -> Self {
        HittingSummary {
            target: target[..p.dim()].to_vec(),
            replicas: curve.total,
            cap: curve.censor_cap,
            root_seed,
            protocol_hash: format!("{:016x}", p.content_hash()),
            censored: curve.censored,
            censored_fraction: curve.censored_fraction(),
            mean: curve.uncensored_mean(),
            mean_lower_bound_only: curve.mean_is_lower_bound_only(),
            curve,
        }
    }
}

/// Survival curves for several targets from `replicas` independent runs.
pub fn monte_carlo_hitting_many(p: &ScoutProtocol, targets: &[Point], replicas: u64, cap: u64, root_seed: u64) -> Vec<HittingSummary> {
    let per_replica: Vec<Vec<HitTime>> =
        (0..replicas).into_par_iter().map(|r| hitting_times_many(p, targets, cap, SeedSpec::new(root_seed, r))).collect();
    targets
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let curve = SurvivalCurve::from_samples(per_replica.iter().map(|v| v[j]), cap);
            HittingSummary::new(p, t, curve, root_seed)
        })
        .collect()
}

pub fn monte_carlo_hitting(p: &ScoutProtocol, x: Point, replicas: u64, cap: u64, root_seed: u64) -> HittingSummary {
    monte_carlo_hitting_many(p, &[x], replicas, cap, root_seed).remove(0)
}

/// All `n` with both scouts at the same point, starting with `N_0 = 0`.
pub fn meeting_times(t: &Trace) -> Result<Vec<u64>, SimError> {
    if t.scouts != 2 {
        return Err(SimError::NotTwoScouts(t.scouts));
    }
    let mut out = vec![0];
    for n in 1..t.len() {
        let ps = t.positions_at(n);
        if ps[0] == ps[1] {
            out.push(n as u64);
        }
    }
    Ok(out)
}

/// First `n > 0` with both scouts of a two-scout protocol together.
pub fn first_meeting_time(p: &ScoutProtocol, cap: u64, seed: SeedSpec) -> Result<HitTime, SimError> {
    if p.scouts() != 2 {
        return Err(SimError::NotTwoScouts(p.scouts()));
    }
    let mut sim = Simulator::new(p, seed);
    while sim.time() < cap {
        sim.advance();
        if sim.positions()[0] == sim.positions()[1] {
            return Ok(HitTime::Hit(sim.time()));
        }
    }
    Ok(HitTime::Censored(cap))
}

/// Survival curve of the first meeting time `N_1`.
pub fn monte_carlo_meeting(p: &ScoutProtocol, replicas: u64, cap: u64, root_seed: u64) -> Result<SurvivalCurve, SimError> {
    if p.scouts() != 2 {
        return Err(SimError::NotTwoScouts(p.scouts()));
    }
    let samples: Vec<HitTime> =
        (0..replicas).into_par_iter().map(|r| first_meeting_time(p, cap, SeedSpec::new(root_seed, r)).expect("two scouts")).collect();
    Ok(SurvivalCurve::from_samples(samples, cap))
}

/// Per-epoch visit counts, see [`epoch_frequencies`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochStats {
    pub epochs: u64,
    pub steps: u64,
    pub targets: Vec<Point>,
    /// Number of epochs during which each target was occupied by some scout.
    pub hits: Vec<u64>,
}

impl EpochStats {
    pub fn frequency(&self, j: usize) -> f64 {
        self.hits[j] as f64 / self.epochs as f64
    }
}

/// Runs one trajectory and splits it into epochs at the times where
/// `is_boundary(states)` holds (time 0 must be one). Counts, per target, the
/// completed epochs whose configurations `[start, end)` occupy it. At most 128 targets.
pub fn epoch_frequencies(
    p: &ScoutProtocol,
    is_boundary: impl Fn(&[StateId]) -> bool,
    targets: &[Point],
    epochs: u64,
    max_steps: u64,
    seed: SeedSpec,
) -> EpochStats {
    assert!(targets.len() <= 128, "at most 128 targets");
    let mut index: HashMap<Point, u128> = HashMap::new();
    for (j, &t) in targets.iter().enumerate() {
        *index.entry(t).or_default() |= 1u128 << j;
    }
    let mut hits = vec![0u64; targets.len()];
    let mut sim = Simulator::new(p, seed);
    let mut mask = 0u128;
    let mut done = 0u64;
    while done < epochs && sim.time() < max_steps {
        for q in sim.positions() {
            if let Some(m) = index.get(q) {
                mask |= m;
            }
        }
        sim.advance();
        if is_boundary(sim.states()) {
            done += 1;
            for (j, h) in hits.iter_mut().enumerate() {
                *h += ((mask >> j) & 1) as u64;
            }
            mask = 0;
        }
    }
    EpochStats { epochs: done, steps: sim.time(), targets: targets.to_vec(), hits }
}
