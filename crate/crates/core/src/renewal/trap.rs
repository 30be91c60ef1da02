use serde::Serialize;

use crate::protocol::Point;

/// Shortest trapped suffix, as a fraction of the sequence, that counts as a trap.
pub const DEFAULT_MIN_DWELL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapReport {
    pub found: bool,
    /// Settling index `τ̂`.
    pub tau: Option<usize>,
    pub center: Option<Point>,
    pub radius: Option<u64>,
    /// Last index of the sequence.
    pub horizon: usize,
}

/// Smallest `r` in the grid (default `1, 2, …, 2^10`) and earliest `τ̂` with
/// `‖X_n − X_τ̂‖∞ < r` for every `n ≥ τ̂`, counting only suffixes that cover
/// at least `min_dwell` of the sequence.
pub fn trap_detect(positions: &[Point], r_grid: Option<&[u64]>, min_dwell: f64) -> TrapReport {
    assert!(!positions.is_empty(), "trap detection needs a nonempty sequence");
    let len = positions.len();
    let horizon = len - 1;
    let default: Vec<u64> = (0..=10).map(|k| 1u64 << k).collect();
    let mut grid = r_grid.map_or(default, <[u64]>::to_vec);
    grid.sort_unstable();

    // suffix bounding boxes, one linear scan from the end
    let mut lo = vec![[0i64; 2]; len];
    let mut hi = vec![[0i64; 2]; len];
    for n in (0..len).rev() {
        for c in 0..2 {
            let x = positions[n][c];
            lo[n][c] = if n + 1 < len { lo[n + 1][c].min(x) } else { x };
            hi[n][c] = if n + 1 < len { hi[n + 1][c].max(x) } else { x };
        }
    }
    let spread = |n: usize| (0..2).map(|c| (hi[n][c] - positions[n][c]).max(positions[n][c] - lo[n][c])).max().unwrap_or(0);
    let latest = ((len as f64) * (1.0 - min_dwell)).floor() as usize;
    let latest = latest.min(horizon);

    for &r in &grid {
        if let Some(tau) = (0..=latest).find(|&n| (spread(n) as u64) < r) {
            return TrapReport { found: true, tau: Some(tau), center: Some(positions[tau]), radius: Some(r), horizon };
        }
    }
    TrapReport { found: false, tau: None, center: None, radius: None, horizon }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sequence() {
        let r = trap_detect(&[[3, 4]; 50], None, DEFAULT_MIN_DWELL);
        assert_eq!((r.found, r.tau, r.radius, r.center), (true, Some(0), Some(1), Some([3, 4])));
    }

    #[test]
    fn increasing_path_is_never_trapped() {
        let path: Vec<Point> = (0..5000).map(|n| [n, 0]).collect();
        assert!(!trap_detect(&path, None, DEFAULT_MIN_DWELL).found);
    }

    #[test]
    fn frozen_suffix() {
        let mut path: Vec<Point> = (0..100).map(|n| [if n % 3 == 0 { n / 3 } else { -(n / 2) }, 0]).collect();
        let last = *path.last().unwrap();
        path.extend(std::iter::repeat_n(last, 1000));
        let r = trap_detect(&path, None, DEFAULT_MIN_DWELL);
        assert!(r.found && r.tau.unwrap() <= 100);
    }
}
