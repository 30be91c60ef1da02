//! Meeting renewals of two-scout traces and diagnostics built on them.
//!
//! `N_0 = 0` and `N_k` is the `k`-th later time the two scouts share a site.
//! The renewal entry `k` records the meeting point `Y_k`, the joint state
//! `A_k` and the gap `R_k = N_k − N_{k−1}` (with `R_0 = 0`). Distances are
//! sup-norm throughout.

mod homogeneity;
mod tail;
mod trap;

use serde::Serialize;
use thiserror::Error;

use crate::protocol::{Point, ScoutProtocol, StateId};
use crate::sim::survival::HitTime;
use crate::sim::Trace;

pub use homogeneity::{homogeneity_test, HomogeneityReport};
pub use tail::{divergence_flag, meeting_tail, DivergenceReport, MeanVerdict, MeetingTail};
pub use trap::{trap_detect, TrapReport, DEFAULT_MIN_DWELL};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenewalError {
    #[error("meeting renewals need exactly 2 scouts, got {0}")]
    NotTwoScouts(usize),
    #[error("scout {0} out of range")]
    ScoutOutOfRange(usize),
    #[error("scouts start apart; the renewal needs a common start")]
    StartApart,
    #[error("scout {scout} at time {n} is farther than R_{k} from the meeting points")]
    BoundViolated { k: usize, n: u64, scout: usize },
    #[error("no meetings within the cap of {0} steps")]
    NoMeetings(u64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenewalEntry {
    pub k: usize,
    /// Meeting time `N_k`.
    pub n: u64,
    pub y: Point,
    pub a: Vec<StateId>,
    /// `N_k − N_{k−1}`, zero for `k = 0`.
    pub r: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeetingRenewal {
    pub dim: usize,
    pub pair: (usize, usize),
    pub entries: Vec<RenewalEntry>,
    /// Last time covered by the source trace.
    pub horizon: u64,
}

fn sup_dist(a: Point, b: Point) -> i64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

/// Renewal of a two-scout trace, checked against the gap bound.
pub fn extract_renewal(t: &Trace) -> Result<MeetingRenewal, RenewalError> {
    if t.scouts != 2 {
        return Err(RenewalError::NotTwoScouts(t.scouts));
    }
    extract_renewal_pair(t, (0, 1))
}

/// Renewal of the meetings of scouts `i` and `j` of any trace. `A_k` is the
/// full state vector.
pub fn extract_renewal_pair(t: &Trace, pair: (usize, usize)) -> Result<MeetingRenewal, RenewalError> {
    let (i, j) = pair;
    for s in [i, j] {
        if s >= t.scouts {
            return Err(RenewalError::ScoutOutOfRange(s));
        }
    }
    if t.positions_at(0)[i] != t.positions_at(0)[j] {
        return Err(RenewalError::StartApart);
    }
    let mut entries = vec![RenewalEntry { k: 0, n: 0, y: t.positions_at(0)[i], a: t.states_at(0).to_vec(), r: 0 }];
    for n in 1..t.len() {
        let ps = t.positions_at(n);
        if ps[i] == ps[j] {
            let prev = entries.last().expect("N_0 recorded").n;
            entries.push(RenewalEntry { k: entries.len(), n: n as u64, y: ps[i], a: t.states_at(n).to_vec(), r: n as u64 - prev });
        }
    }
    let mr = MeetingRenewal { dim: t.dim, pair, entries, horizon: t.horizon() };
    verify_gap_bound(t, &mr)?;
    Ok(mr)
}

/// Every position between consecutive meetings lies within `R_k` of both
/// meeting points. Single steps move at most one site per coordinate, so a
/// violation means the trace is corrupt.
pub fn verify_gap_bound(t: &Trace, mr: &MeetingRenewal) -> Result<(), RenewalError> {
    let (i, j) = mr.pair;
    for w in mr.entries.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        for n in prev.n..=cur.n {
            let ps = t.positions_at(n as usize);
            for s in [i, j] {
                if sup_dist(ps[s], prev.y).max(sup_dist(ps[s], cur.y)) > cur.r as i64 {
                    return Err(RenewalError::BoundViolated { k: cur.k, n, scout: s + 1 });
                }
            }
        }
    }
    Ok(())
}

impl MeetingRenewal {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Gaps `R_1, R_2, …`.
    pub fn gaps(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().skip(1).map(|e| e.r)
    }

    /// CSV with columns `k,N,y1[,y2],A,R`; `A` joins state names with `|`.
    pub fn to_csv(&self, p: &ScoutProtocol) -> String {
        let mut s = String::from(if self.dim == 1 { "k,N,y1,A,R\n" } else { "k,N,y1,y2,A,R\n" });
        for e in &self.entries {
            let a: Vec<&str> = e.a.iter().map(|&q| p.state_name(q)).collect();
            let y = if self.dim == 1 { e.y[0].to_string() } else { format!("{},{}", e.y[0], e.y[1]) };
            s.push_str(&format!("{},{},{},{},{}\n", e.k, e.n, y, a.join("|"), e.r));
        }
        s
    }
}

/// `inf{k ≥ 0 : ‖Y_k − x‖ ≤ R_{k+1}}`. Censored at the last `k` whose
/// `R_{k+1}` the renewal knows.
pub fn explorer_cover_time(mr: &MeetingRenewal, x: Point) -> HitTime {
    for w in mr.entries.windows(2) {
        if sup_dist(w[0].y, x) <= w[1].r as i64 {
            return HitTime::Hit(w[0].k as u64);
        }
    }
    HitTime::Censored(mr.entries.len().saturating_sub(1) as u64)
}
