use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::MeetingRenewal;
use crate::protocol::StateId;
use crate::stats::Verdict;

/// Smallest expected cell count kept as its own column.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    /// Entries with `k < split` form the early sample.
    pub split: usize,
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
    /// Joint states `A_k` that contributed a table.
    pub categories: usize,
    pub transitions: u64,
    /// PASS iff `p ≥ level`.
    pub level: f64,
    pub verdict: Verdict,
}

type Outcome = (Point2, Vec<StateId>, u64);
type Point2 = [i64; 2];

/// Chi-square test that the law of `(Y_{k+1} − Y_k, A_{k+1}, R_{k+1})`
/// given `A_k` is the same for `k < split` as for `k ≥ split`.
///
/// One 2-row contingency table per value of `A_k`; columns whose expected
/// count falls below 5 in either row are pooled, and a pooled column that is
/// still too small joins the smallest remaining one. Statistics and degrees
/// of freedom add across tables. `split` defaults to the median `k`.
pub fn homogeneity_test(renewals: &[MeetingRenewal], split: Option<usize>, level: f64) -> HomogeneityReport {
    let mut ks: Vec<usize> = renewals.iter().flat_map(|m| m.entries.windows(2).map(|w| w[0].k)).collect();
    ks.sort_unstable();
    let split = split.unwrap_or_else(|| ks.get(ks.len() / 2).copied().unwrap_or(1).max(1));

    let mut tables: BTreeMap<Vec<StateId>, BTreeMap<Outcome, [u64; 2]>> = BTreeMap::new();
    for m in renewals {
        for w in m.entries.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let o: Outcome = ([b.y[0] - a.y[0], b.y[1] - a.y[1]], b.a.clone(), b.r);
            let row = usize::from(a.k >= split);
            tables.entry(a.a.clone()).or_default().entry(o).or_insert([0, 0])[row] += 1;
        }
    }

    let (mut stat, mut dof, mut used) = (0.0, 0u64, 0usize);
    for cols in tables.values() {
        let rows = [cols.values().map(|c| c[0]).sum::<u64>(), cols.values().map(|c| c[1]).sum::<u64>()];
        let n = rows[0] + rows[1];
        if rows[0] == 0 || rows[1] == 0 {
            continue;
        }
        let frac = [rows[0] as f64 / n as f64, rows[1] as f64 / n as f64];
        let small = |c: &[u64; 2]| {
            let t = (c[0] + c[1]) as f64;
            t * frac[0] < MIN_EXPECTED || t * frac[1] < MIN_EXPECTED
        };
        let mut kept: Vec<[u64; 2]> = Vec::new();
        let mut pooled = [0u64; 2];
        for c in cols.values() {
            if small(c) {
                pooled[0] += c[0];
                pooled[1] += c[1];
            } else {
                kept.push(*c);
            }
        }
        if pooled != [0, 0] {
            if small(&pooled) && !kept.is_empty() {
                let i = (0..kept.len()).min_by_key(|&i| kept[i][0] + kept[i][1]).expect("nonempty");
                kept[i][0] += pooled[0];
                kept[i][1] += pooled[1];
            } else {
                kept.push(pooled);
            }
        }
        if kept.len() < 2 {
            continue;
        }
        for c in &kept {
            let t = (c[0] + c[1]) as f64;
            for r in 0..2 {
                let e = t * frac[r];
                stat += (c[r] as f64 - e).powi(2) / e;
            }
        }
        dof += kept.len() as u64 - 1;
        used += 1;
    }
    let p_value = if dof == 0 { 1.0 } else { ChiSquared::new(dof as f64).expect("positive dof").sf(stat) };
    HomogeneityReport {
        split,
        statistic: stat,
        dof,
        p_value,
        categories: used,
        transitions: ks.len() as u64,
        level,
        verdict: if dof == 0 { Verdict::Inconclusive } else { Verdict::from_bool(p_value >= level) },
    }
}
