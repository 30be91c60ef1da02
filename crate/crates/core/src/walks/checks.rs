use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use super::fit::{curve_points, fit_points, FitPoint, TailFit, TailModel, MIN_SURVIVORS};
use super::law::{Step, StepLaw};
use super::sample::{stopping_times, LookAroundWalk, Target};
use crate::sim::survival::{dyadic_thresholds, HitTime, SurvivalCurve};
use crate::stats::{wilson_interval, Verdict, Z95};
use crate::stream::{SeedSpec, Stream};

/// Slope tolerance around `−1/2` for the hitting-tail check.
pub const HITTING_SLOPE_TOL: f64 = 0.07;
/// Minimum coefficient of determination for any tail fit to count.
pub const MIN_R2: f64 = 0.95;
/// Slope floor for the two-walk interval check (`−1` minus tolerance).
pub const PAIR_SLOPE_FLOOR: f64 = -1.15;
/// Default top of the hitting-tail grid.
pub const HITTING_GRID_TOP: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("interval [{x}, {y}] is malformed: need y − x > 2")]
    Interval { x: f64, y: f64 },
}

/// Machine-readable result of a statistical check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub lemma: String,
    pub parameters: BTreeMap<String, String>,
    pub estimate: Option<f64>,
    /// 95% interval for `estimate`.
    pub ci: Option<(f64, f64)>,
    pub fit: Option<TailFit>,
    pub verdict: Verdict,
    /// The PASS rule applied.
    pub criterion: String,
    pub seed: u64,
    pub notes: Vec<String>,
    pub extras: BTreeMap<String, Value>,
    /// Full estimated curve, including thresholds the fit skipped.
    pub survival: Vec<FitPoint>,
}

impl CheckResult {
    fn new(lemma: &str, seed: u64, criterion: &str) -> CheckResult {
        CheckResult {
            lemma: lemma.into(),
            parameters: BTreeMap::new(),
            estimate: None,
            ci: None,
            fit: None,
            verdict: Verdict::Inconclusive,
            criterion: criterion.into(),
            seed,
            notes: Vec::new(),
            extras: BTreeMap::new(),
            survival: Vec::new(),
        }
    }

    fn param(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.parameters.insert(k.into(), v.to_string());
        self
    }

    fn law_note(&mut self, law: &StepLaw) {
        if !law.is_integer_exact() {
            self.notes.push("law is not integer-valued with exact probabilities: Monte Carlo only, no exact oracle".into());
        }
    }

    /// `u,survival,survivors,total` rows.
    pub fn survival_csv(&self) -> String {
        let mut s = String::from("u,survival,survivors,total\n");
        for p in &self.survival {
            let opt = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{}\n", p.u, p.survival, opt(p.survivors), opt(p.total)));
        }
        s
    }
}

/// Frequency of never coming within look radius of `x`, for a walk with
/// positive drift started to the right of `x`.
pub fn check_lemma6(w: &LookAroundWalk, x: f64, trials: u64, horizon: u64, seed: u64) -> Result<CheckResult, CheckError> {
    if w.law.drift_sign() <= 0 {
        return Err(CheckError::Precondition(format!("drift E ζ = {} is not positive", w.law.mean_zeta())));
    }
    if x > w.s0 {
        return Err(CheckError::Precondition(format!("target {x} lies to the right of the start {}", w.s0)));
    }
    let mut r =
        CheckResult::new("lemma6", seed, "Wilson lower bound > 0 and doubling the horizon moves the estimate by less than the CI width");
    r.param("law", &w.law).param("s0", w.s0).param("x", x).param("trials", trials).param("horizon", horizon);
    r.law_note(&w.law);
    let times = stopping_times(w, &Target::LookAround(x), 2 * horizon, trials, seed);
    let avoid_h = times.iter().filter(|t| t.exceeds(horizon)).count() as u64;
    let avoid_2h = times.iter().filter(|t| t.is_censored()).count() as u64;
    let f_h = avoid_h as f64 / trials as f64;
    let f_2h = avoid_2h as f64 / trials as f64;
    let ci = wilson_interval(avoid_2h, trials, Z95);
    r.estimate = Some(f_2h);
    r.ci = Some(ci);
    r.extras.insert("frequency_at_horizon".into(), json!(f_h));
    r.extras.insert("frequency_at_double_horizon".into(), json!(f_2h));
    r.verdict = Verdict::from_bool(ci.0 > 0.0 && (f_h - f_2h).abs() < ci.1 - ci.0);
    Ok(r)
}

/// `inf{n : S_n + R_{n+1} ≥ x}` survival `P(T ≥ u)` on a grid, with a power-law fit.
pub fn check_lemma7(w: &LookAroundWalk, x: f64, grid: Option<Vec<u64>>, trials: u64, seed: u64) -> Result<CheckResult, CheckError> {
    if w.law.drift_sign() != 0 {
        return Err(CheckError::Precondition(format!("drift E ζ = {} is not zero", w.law.mean_zeta())));
    }
    let gap = x - w.s0;
    let grid = match grid {
        Some(g) if !g.is_empty() => {
            let mut g = g;
            g.sort_unstable();
            g.dedup();
            g
        }
        Some(_) => return Err(CheckError::Precondition("empty u-grid".into())),
        None => {
            let start = ((4.0 * gap * gap).ceil().max(1.0) as u64).next_power_of_two();
            dyadic_thresholds(HITTING_GRID_TOP).into_iter().filter(|&u| u >= start.min(HITTING_GRID_TOP / 8)).collect()
        }
    };
    let u_max = *grid.last().expect("nonempty grid");
    let mut r = CheckResult::new("lemma7", seed, "power-law fit of P(T ≥ u): |slope + 1/2| ≤ 0.07 and R² ≥ 0.95; zero steps: survival ≡ 1");
    r.param("law", &w.law).param("s0", w.s0).param("x", x).param("trials", trials);
    r.param("grid", grid.iter().map(u64::to_string).collect::<Vec<_>>().join(" "));
    r.law_note(&w.law);
    // T ≥ u iff T > u − 1; simulate to time u_max − 1
    let times = stopping_times(w, &Target::Reach(x), u_max.saturating_sub(1), trials, seed);
    r.survival = grid
        .iter()
        .map(|&u| {
            let s = times.iter().filter(|t| u == 0 || t.exceeds(u - 1)).count() as u64;
            FitPoint { u: u as f64, survival: s as f64 / trials as f64, survivors: Some(s), total: Some(trials) }
        })
        .collect();

    if w.law.is_degenerate() {
        let all = r.survival.iter().all(|p| p.survival == 1.0);
        r.notes.push(format!("zero steps: radius bounded by {}; survival ≡ 1 iff x is out of reach", w.law.max_r()));
        r.verdict = Verdict::from_bool(all);
        r.estimate = r.survival.last().map(|p| p.survival);
        return Ok(r);
    }

    match fit_points(r.survival.clone(), TailModel::PowerLaw) {
        Ok(f) => {
            r.verdict = Verdict::from_bool((f.slope + 0.5).abs() <= HITTING_SLOPE_TOL && f.r_squared >= MIN_R2);
            r.fit = Some(f);
        }
        Err(e) => r.notes.push(e.to_string()),
    }

    // upper-bound scaling: P(T ≥ u) √u / (x − s₀) over u with x − s₀ < u^{1/4}
    if gap > 0.0 {
        let mut c: Vec<f64> = r
            .survival
            .iter()
            .filter(|p| gap < p.u.powf(0.25) && p.survivors.unwrap_or(0) >= MIN_SURVIVORS)
            .map(|p| p.survival * p.u.sqrt() / gap)
            .collect();
        if !c.is_empty() {
            c.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            r.estimate = Some(c[c.len() / 2]);
            r.extras.insert("upper_constant_max".into(), json!(c[c.len() - 1]));
            r.notes.push("estimate is the median of P(T ≥ u)·√u/(x − s₀) over u > (x − s₀)⁴".into());
        }
    }

    // tail sums Σ P(T ≥ u) over the grid, a lower bound for E T by monotonicity
    let mut partial = Vec::new();
    let (mut acc, mut prev) = (0.0, 0.0);
    for p in &r.survival {
        acc += p.survival * (p.u - prev);
        prev = p.u;
        partial.push(acc);
    }
    let incs: Vec<f64> = partial.windows(2).map(|w| w[1] - w[0]).collect();
    let growing = incs.len() >= 2 && incs[incs.len() - 1] >= incs[incs.len() - 2] && incs[incs.len() - 1] > 0.0;
    r.extras.insert("tail_sum_partials".into(), json!(partial));
    r.extras.insert("tail_sum_growing".into(), json!(growing));
    Ok(r)
}

/// Runs [`check_lemma7`] for each `x` and reports the smallest that passes.
pub fn scan_lemma7(w: &LookAroundWalk, xs: &[f64], trials: u64, seed: u64) -> Result<(Option<f64>, Vec<CheckResult>), CheckError> {
    let mut out = Vec::new();
    for &x in xs {
        out.push(check_lemma7(w, x, None, trials, seed)?);
    }
    let first = xs.iter().zip(&out).find(|(_, r)| r.verdict.is_pass()).map(|(&x, _)| x);
    Ok((first, out))
}

/// Exit time of the band `[−ρ, ρ]` (one-sided for drifting walks) with an exponential fit.
pub fn check_lemma17(w: &LookAroundWalk, rho: f64, trials: u64, cap: u64, seed: u64) -> Result<CheckResult, CheckError> {
    if w.law.is_degenerate() {
        return Err(CheckError::Precondition("ζ ≡ 0: the walk never leaves the band".into()));
    }
    let sign = w.law.drift_sign();
    let target = Target::exit_for_drift(sign, rho);
    let mut r = CheckResult::new("lemma17", seed, "exponential fit of P(τ > u): slope < 0 and R² ≥ 0.95");
    r.param("law", &w.law).param("s0", w.s0).param("rho", rho).param("trials", trials).param("cap", cap);
    r.param(
        "exit",
        if sign == 0 {
            "two-sided"
        } else if sign > 0 {
            "upper"
        } else {
            "lower"
        },
    );
    r.law_note(&w.law);
    let times = stopping_times(w, &target, cap, trials, seed);
    let censored = times.iter().filter(|t| t.is_censored()).count();
    r.extras.insert("censored".into(), json!(censored));
    let mut ts: Vec<u64> = times.iter().map(|t| t.time().unwrap_or(cap + 1)).collect();
    ts.sort_unstable();
    let mean = ts.iter().map(|&t| t as f64).sum::<f64>() / ts.len().max(1) as f64;
    r.estimate = Some(mean);
    r.notes.push("estimate is the sample mean of τ".into());

    if ts.first() == ts.last() && censored == 0 {
        let t = ts.first().copied().unwrap_or(0);
        r.notes.push(format!("τ = {t} on every trial: step-function survival, bounded by any exponential"));
        r.survival = vec![
            FitPoint { u: t.saturating_sub(1) as f64, survival: 1.0, survivors: Some(trials), total: Some(trials) },
            FitPoint { u: t as f64, survival: 0.0, survivors: Some(0), total: Some(trials) },
        ];
        r.verdict = Verdict::Pass;
        return Ok(r);
    }

    // largest u with at least MIN_SURVIVORS samples above it
    let k = MIN_SURVIVORS as usize;
    if ts.len() < k {
        r.notes.push("fewer trials than the survivor floor".into());
        return Ok(r);
    }
    let u_top = ts[ts.len() - k].saturating_sub(1);
    let mut us: Vec<u64> = (1..=16).map(|i| ((u_top as f64) * i as f64 / 16.0).round() as u64).filter(|&u| u >= 1).collect();
    us.dedup();
    r.survival = us
        .iter()
        .map(|&u| {
            let s = (ts.len() - ts.partition_point(|&t| t <= u)) as u64;
            FitPoint { u: u as f64, survival: s as f64 / trials as f64, survivors: Some(s), total: Some(trials) }
        })
        .collect();
    match fit_points(r.survival.clone(), TailModel::Exponential) {
        Ok(f) => {
            r.verdict = Verdict::from_bool(f.slope < 0.0 && f.r_squared >= MIN_R2);
            r.extras.insert("decay_rate".into(), json!(-f.slope));
            r.fit = Some(f);
        }
        Err(e) => r.notes.push(e.to_string()),
    }
    Ok(r)
}

/// `inf_{t ≥ 0} exp(n L(t) − t y)` with `L` the log-MGF, and the minimizer.
pub fn chernoff_bound(law: &StepLaw, n: u64, y: f64) -> (f64, f64) {
    let f = |t: f64| n as f64 * law.log_mgf(t) - t * y;
    let mut hi = 1.0;
    while hi < 1e6 && f(2.0 * hi) < f(hi) {
        hi *= 2.0;
    }
    let hi = (2.0 * hi).min(2e6);
    // golden-section search; f is convex
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let t = (a + b) / 2.0;
    let best = [(f(0.0), 0.0), (f(t), t), (f(hi), hi)].into_iter().fold((f64::INFINITY, 0.0), |m, p| if p.0 < m.0 { p } else { m });
    (best.0.exp(), best.1)
}

/// Frequency of `S_n ≥ y` against the optimized exponential Chebyshev bound.
pub fn check_lemma50(w: &LookAroundWalk, mu: f64, n: u64, y: f64, trials: u64, seed: u64) -> Result<CheckResult, CheckError> {
    if w.s0 != 0.0 || w.law.drift_sign() != 0 {
        return Err(CheckError::Precondition("needs s₀ = 0 and E ζ = 0".into()));
    }
    if y < mu * n as f64 {
        return Err(CheckError::Precondition(format!("y = {y} is below μn = {}", mu * n as f64)));
    }
    let mut r = CheckResult::new("lemma50", seed, "empirical P(S_n ≥ y) ≤ inf_t exp(n L(t) − t y)");
    r.param("law", &w.law).param("mu", mu).param("n", n).param("y", y).param("trials", trials);
    r.law_note(&w.law);
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let s = SeedSpec::new(seed, i).lane(0);
            w.s0 + (1..=n).map(|k| w.step(&s, k).zeta).sum::<f64>() >= y
        })
        .count() as u64;
    let freq = hits as f64 / trials as f64;
    let (bound, t) = chernoff_bound(&w.law, n, y);
    r.estimate = Some(freq);
    r.ci = Some(wilson_interval(hits, trials, Z95));
    r.extras.insert("bound".into(), json!(bound));
    r.extras.insert("t_opt".into(), json!(t));
    if y > 0.0 && bound > 0.0 {
        r.extras.insert("delta".into(), json!(-bound.ln() / y));
    }
    r.verdict = Verdict::from_bool(freq <= bound);
    Ok(r)
}

/// Walk whose steps take `ν` units of time: `S_{K_m}` with `K_m = sup{k : T_k ≤ m}`.
struct TimedWalk<'a> {
    law: &'a StepLaw,
    stream: Stream,
    s: f64,
    k: u64,
    next: Step,
    next_time: u64,
}

impl<'a> TimedWalk<'a> {
    fn new(law: &'a StepLaw, s0: f64, stream: Stream) -> Self {
        let next = law.sample(stream.uniform(0));
        TimedWalk { law, stream, s: s0, k: 0, next, next_time: next.nu }
    }

    /// Moves from time `m` to `m + 1`.
    fn tick(&mut self, m: u64) {
        if self.next_time == m + 1 {
            self.s += self.next.zeta;
            self.k += 1;
            self.next = self.law.sample(self.stream.uniform(self.k));
            self.next_time += self.next.nu;
        }
    }
}

fn dist_to_interval(s: f64, x: f64, y: f64) -> f64 {
    if s < x {
        x - s
    } else if s > y {
        s - y
    } else {
        0.0
    }
}

/// `min(σ, τ¹, τ²)` for one pair of timed walks, censored after `cap`.
pub fn pair_interval_time(laws: [&StepLaw; 2], starts: [f64; 2], interval: (f64, f64), cap: u64, seed: SeedSpec) -> HitTime {
    let mut a = TimedWalk::new(laws[0], starts[0], seed.lane(0));
    let mut b = TimedWalk::new(laws[1], starts[1], seed.lane(1));
    let (x, y) = interval;
    for m in 0..=cap {
        let (ra, rb) = (a.next.r, b.next.r);
        if (a.s - b.s).abs() <= ra + rb || dist_to_interval(a.s, x, y) <= ra || dist_to_interval(b.s, x, y) <= rb {
            return HitTime::Hit(m);
        }
        a.tick(m);
        b.tick(m);
    }
    HitTime::Censored(cap)
}

/// First dyadic index where survival drops to one half, or 0.
fn tail_window_start(curve: &SurvivalCurve) -> u64 {
    (0..curve.thresholds.len()).find(|&i| curve.survival(i) <= 0.5).map_or(1, |i| curve.thresholds[i])
}

/// Survival of `min(σ, τ¹, τ²)` for two timed walks and an interval, with a
/// power-law fit on the tail window.
pub fn check_prop22(
    laws: [&StepLaw; 2],
    starts: [f64; 2],
    interval: (f64, f64),
    trials: u64,
    cap: u64,
    seed: u64,
) -> Result<CheckResult, CheckError> {
    let (x, y) = interval;
    if !(y - x > 2.0) {
        return Err(CheckError::Interval { x, y });
    }
    let mut r = CheckResult::new(
        "prop22",
        seed,
        "power-law fit of P(min > u) from the first dyadic u with survival ≤ 1/2: slope ≥ −1.15 and R² ≥ 0.95",
    );
    r.param("law1", laws[0]).param("law2", laws[1]).param("s1", starts[0]).param("s2", starts[1]);
    r.param("interval", format!("[{x},{y}]")).param("trials", trials).param("cap", cap);
    r.law_note(laws[0]);
    let d = laws[0].effective_drift() - laws[1].effective_drift();
    r.extras.insert("drift_difference".into(), json!(d));
    let times: Vec<HitTime> =
        (0..trials).into_par_iter().map(|i| pair_interval_time(laws, starts, interval, cap, SeedSpec::new(seed, i))).collect();
    let curve = SurvivalCurve::from_samples(times, cap);
    let start = tail_window_start(&curve);
    r.survival = curve_points(&curve, 1);
    r.extras.insert("censored_fraction".into(), json!(curve.censored_fraction()));
    r.extras.insert("window_start".into(), json!(start));
    match fit_points(curve_points(&curve, start), TailModel::PowerLaw) {
        Ok(f) => {
            r.verdict = Verdict::from_bool(f.slope >= PAIR_SLOPE_FLOOR && f.r_squared >= MIN_R2);
            r.estimate = Some(f.slope);
            r.fit = Some(f);
        }
        Err(e) => r.notes.push(e.to_string()),
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn det(z: i64) -> StepLaw {
        StepLaw::simple(&[(z, Scalar::one())]).unwrap()
    }

    #[test]
    fn lemma6_trivial_cases() {
        let w = LookAroundWalk::new(det(1), 0.0);
        let r = check_lemma6(&w, -10.0, 200, 100, 1).unwrap();
        assert_eq!(r.estimate, Some(1.0));
        assert!(r.verdict.is_pass());
        let r = check_lemma6(&w, 0.0, 200, 100, 1).unwrap();
        assert_eq!(r.estimate, Some(0.0));
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(check_lemma6(&LookAroundWalk::new(StepLaw::srw(), 0.0), -5.0, 10, 10, 1).is_err());
        assert!(check_lemma6(&w, 1.0, 10, 10, 1).is_err());
    }

    #[test]
    fn lemma7_trivial_cases() {
        let w = LookAroundWalk::new(det(0), 0.0);
        let r = check_lemma7(&w, 10.0, None, 100, 2).unwrap();
        assert!(r.survival.iter().all(|p| p.survival == 1.0));
        assert!(r.verdict.is_pass());
        let w = LookAroundWalk::new(StepLaw::srw(), 0.0);
        let r = check_lemma7(&w, 0.0, None, 100, 2).unwrap();
        assert_eq!(r.survival[0].u, 1.0);
        assert_eq!(r.survival[0].survival, 0.0);
        assert!(check_lemma7(&LookAroundWalk::new(det(1), 0.0), 3.0, None, 10, 2).is_err());
    }

    #[test]
    fn lemma17_deterministic_exit() {
        let r = check_lemma17(&LookAroundWalk::new(det(1), 0.0), 5.0, 50, 1000, 3).unwrap();
        assert_eq!(r.estimate, Some(6.0));
        assert!(r.verdict.is_pass());
        assert!(check_lemma17(&LookAroundWalk::new(det(0), 0.0), 5.0, 50, 1000, 3).is_err());
    }

    #[test]
    fn chernoff_bounds() {
        // S_100 = 100 needs every step up: bound is exactly 2^-100
        let (b, _) = chernoff_bound(&StepLaw::srw(), 100, 100.0);
        assert!((b.log2() + 100.0).abs() < 1e-6, "{b}");
        // y = 20: rate 0.6 ln 1.2 + 0.4 ln 0.8 per step
        let (b, _) = chernoff_bound(&StepLaw::srw(), 100, 20.0);
        let rate = 0.6 * 1.2f64.ln() + 0.4 * 0.8f64.ln();
        assert!((b.ln() + 100.0 * rate).abs() < 1e-9);
        let (b, _) = chernoff_bound(&det(0), 50, 1.0);
        assert!(b < 1e-100);
    }

    #[test]
    fn lemma50_preconditions() {
        let w = LookAroundWalk::new(StepLaw::srw(), 0.0);
        assert!(check_lemma50(&w, 0.2, 100, 10.0, 10, 0).is_err());
        assert!(check_lemma50(&LookAroundWalk::new(StepLaw::srw(), 1.0), 0.2, 100, 20.0, 10, 0).is_err());
        let r = check_lemma50(&w, 0.2, 100, 100.0, 1000, 0).unwrap();
        assert_eq!(r.estimate, Some(0.0));
        assert!(r.verdict.is_pass());
    }

    #[test]
    fn timed_walk_follows_k_m() {
        // ν = 2 always: position changes at m = 2, 4, ...
        let law: StepLaw = "1:2:1@1".parse().unwrap();
        let mut w = TimedWalk::new(&law, 0.0, SeedSpec::new(0, 0).lane(0));
        let mut seen = vec![w.s];
        for m in 0..6 {
            w.tick(m);
            seen.push(w.s);
        }
        assert_eq!(seen, vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn prop22_trivial_cases() {
        let (up, down) = (det(1), det(-1));
        assert!(check_prop22([&down, &up], [-5.0, 5.0], (0.0, 2.0), 50, 256, 4).is_err());
        // moving apart with the interval between them: nothing ever happens
        let r = check_prop22([&down, &up], [-5.0, 5.0], (-2.0, 2.0), 50, 256, 4).unwrap();
        assert!(r.survival.iter().all(|p| p.survival == 1.0));
        assert!(r.verdict.is_pass());
        let r = check_prop22([&up, &up], [0.0, 0.0], (-10.0, 10.0), 50, 256, 4).unwrap();
        assert_eq!(r.survival[0].survival, 0.0);
    }
}
