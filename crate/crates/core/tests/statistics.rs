//! Seeded statistical invariants. Each test runs once at a fixed seed.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_kernel;
use scoutgrid::automaton::{effective_drift, kernel_renewal_samples, recurrent_class_of};
use scoutgrid::protocol::{anchored_geometric, independent_walks};
use scoutgrid::renewal::{extract_renewal, homogeneity_test};
use scoutgrid::scalar::Scalar;
use scoutgrid::sim::{run, HitTime, SurvivalCurve};
use scoutgrid::stats::Verdict;
use scoutgrid::stream::SeedSpec;
use scoutgrid::walks::{check_lemma7, fit_tail_from, LookAroundWalk, StepLaw, TailModel};

#[test]
fn renewal_ratio_matches_exact_drift() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let count = 20_000usize;
    let mut misses = Vec::new();
    for i in 0..100 {
        let dim = 1 + i % 2;
        let k = random_kernel(&mut rng, 6, dim, false);
        let drift = effective_drift(&k, &recurrent_class_of(&k, 0).unwrap()).unwrap();
        let samples = kernel_renewal_samples(&k, 0, count, SeedSpec::new(0x5eed_0001, i as u64)).unwrap();
        let nu: u64 = samples.iter().map(|s| s.nu).sum();
        let mean_nu = nu as f64 / count as f64;
        for c in 0..dim {
            let zeta: i64 = samples.iter().map(|s| s.zeta[c]).sum();
            let r = zeta as f64 / nu as f64;
            let var = samples.iter().map(|s| (s.zeta[c] as f64 - r * s.nu as f64).powi(2)).sum::<f64>() / (count - 1) as f64;
            let se = var.sqrt() / (count as f64).sqrt() / mean_nu;
            let ok = if se == 0.0 { (r - drift.values[c]).abs() <= 1e-12 } else { (r - drift.values[c]).abs() <= 3.0 * se };
            if !ok {
                misses.push(format!("kernel {i} coord {c}: {r} vs {} (se {se})", drift.values[c]));
            }
        }
    }
    assert!(misses.is_empty(), "{misses:#?}");
}

#[test]
fn return_times_have_exponential_tails() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for i in 0..20 {
        let k = random_kernel(&mut rng, 6, 1, false);
        let samples = kernel_renewal_samples(&k, 0, 20_000, SeedSpec::new(0x5eed_0002, i)).unwrap();
        let max = samples.iter().map(|s| s.nu).max().unwrap();
        let mut curve = SurvivalCurve::with_thresholds((1..=max).collect(), max);
        for s in &samples {
            curve.record(HitTime::Hit(s.nu));
        }
        // tail window starts where survival first drops to one half
        let start = (0..curve.thresholds.len()).find(|&i| curve.survival(i) <= 0.5).map_or(1, |i| curve.thresholds[i]);
        match fit_tail_from(&curve, TailModel::Exponential, start) {
            Ok(fit) => assert!(fit.r_squared >= 0.95 && fit.slope < 0.0, "kernel {i}: {fit:?}"),
            // return time bounded by a handful of steps: nothing to fit
            Err(_) => assert!(curve.survivors.iter().filter(|&&s| s >= 30).count() < 4, "kernel {i}"),
        }
    }
}

#[test]
fn renewal_transitions_are_homogeneous() {
    for (name, p) in [("independent", independent_walks(1, 2).unwrap()), ("anchored", anchored_geometric(1, &Scalar::ratio(1, 2)).unwrap())]
    {
        let renewals: Vec<_> =
            (0..400).map(|r| extract_renewal(&run(&p, 2_000, SeedSpec::new(0x5eed_0003, r)).unwrap()).unwrap()).collect();
        let report = homogeneity_test(&renewals, None, 0.01);
        assert_eq!(report.verdict, Verdict::Pass, "{name}: {report:?}");
    }
}

#[test]
fn lemma7_pass_implies_growing_tail_sums() {
    let w = LookAroundWalk::new(StepLaw::srw(), 0.0);
    let r = check_lemma7(&w, 10.0, None, 10_000, 0x5eed_0004).unwrap();
    assert!(r.verdict.is_pass());
    assert_eq!(r.extras["tail_sum_growing"], serde_json::json!(true));
}
