mod common;

use std::collections::BTreeMap;

use num::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_kernel, random_protocol};
use scoutgrid::automaton::{effective_drift, product_kernel, recurrent_class_of, reduce_kernel, stationary, ProductMoves};
use scoutgrid::protocol::{environment_of, parse_protocol, Configuration, StateId};
use scoutgrid::renewal::{explorer_cover_time, extract_renewal, trap_detect, MeetingRenewal};
use scoutgrid::sim::{hitting_time, run, HitTime, SurvivalCurve};
use scoutgrid::stream::SeedSpec;
use scoutgrid::walks::{distribution, fit_exact, StepLaw, TailModel};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_text_round_trips(seed in any::<u64>(), scouts in 1usize..=3) {
        let p = random_protocol(&mut rng(seed), scouts);
        let q = parse_protocol(&p.to_canonical_string()).unwrap();
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(q.content_hash(), p.content_hash());
    }

    #[test]
    fn outcome_rows_are_stochastic(seed in any::<u64>()) {
        let p = random_protocol(&mut rng(seed), 2);
        for r in p.rules() {
            let total: f64 = r.outcomes.iter().map(|o| o.prob.value()).sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
        }
        for scout in 0..2 {
            let k = reduce_kernel(&p, scout).unwrap();
            for q in 0..k.len() {
                let total: f64 = k.row(q).iter().map(|e| e.prob.value()).sum();
                prop_assert!((total - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn relabeled_protocols_walk_the_same_paths(seed in any::<u64>(), run_seed in any::<u64>()) {
        let p = random_protocol(&mut rng(seed), 3);
        let q = p.relabeled(|s| format!("z{}", s.to_uppercase())).unwrap();
        let a = run(&p, 200, SeedSpec::new(run_seed, 0)).unwrap();
        let b = run(&q, 200, SeedSpec::new(run_seed, 0)).unwrap();
        for n in 0..a.len() {
            prop_assert_eq!(a.positions_at(n), b.positions_at(n));
            let names_a: Vec<String> = a.states_at(n).iter().map(|&s| format!("z{}", p.state_name(s).to_uppercase())).collect();
            let names_b: Vec<&str> = b.states_at(n).iter().map(|&s| q.state_name(s)).collect();
            prop_assert_eq!(names_a, names_b);
        }
    }

    #[test]
    fn environment_ignores_scouts_elsewhere(
        positions in prop::collection::vec((-2i64..=2, -2i64..=2), 2..6),
        states in prop::collection::vec(0u32..3, 6),
        mover in 0usize..6,
        to in (-2i64..=2, -2i64..=2),
        new_state in 0u32..3,
    ) {
        let c = positions.len();
        let cfg = Configuration {
            positions: positions.iter().map(|&(x, y)| [x, y]).collect(),
            states: states[..c].iter().map(|&s| StateId(s)).collect(),
            time: 0,
        };
        let j = mover % c;
        let mut moved = cfg.clone();
        moved.positions[j] = [to.0, to.1];
        moved.states[j] = StateId(new_state);
        for i in 0..c {
            let untouched = i != j && cfg.positions[j] != cfg.positions[i] && moved.positions[j] != cfg.positions[i];
            if untouched {
                prop_assert_eq!(environment_of(&cfg, i).unwrap(), environment_of(&moved, i).unwrap());
            }
            let expected: Vec<StateId> =
                (0..c).filter(|&k| k != i && cfg.positions[k] == cfg.positions[i]).map(|k| cfg.states[k]).collect();
            let env = environment_of(&cfg, i).unwrap();
            prop_assert!(expected.iter().all(|&s| env.contains(s)));
            prop_assert_eq!(env.len(), expected.iter().collect::<std::collections::BTreeSet<_>>().len());
        }
    }

    #[test]
    fn traces_are_legal_and_reproducible(seed in any::<u64>(), run_seed in any::<u64>()) {
        let p = random_protocol(&mut rng(seed), 2);
        let a = run(&p, 300, SeedSpec::new(run_seed, 1)).unwrap();
        let b = run(&p, 300, SeedSpec::new(run_seed, 1)).unwrap();
        prop_assert_eq!(a.path(0), b.path(0));
        prop_assert_eq!(a.path(1), b.path(1));
        for n in 1..a.len() {
            for i in 0..2 {
                let (x, y) = (a.positions_at(n - 1)[i], a.positions_at(n)[i]);
                prop_assert!((x[0] - y[0]).abs() <= 1 && (x[1] - y[1]).abs() <= 1);
                prop_assert!(a.states_at(n)[i].index() < p.state_count());
            }
        }
    }

    #[test]
    fn survivors_never_increase(times in prop::collection::vec(0u64..5000, 1..200), cap in 1u64..4096) {
        let samples = times.iter().map(|&t| if t > cap { HitTime::Censored(cap) } else { HitTime::Hit(t) });
        let c = SurvivalCurve::from_samples(samples, cap);
        prop_assert!(c.survivors.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(c.survivors.iter().all(|&s| s <= c.total));
    }

    #[test]
    fn uncensored_mean_grows_with_the_cap(run_seed in 0u64..1000, small in 4u64..200, extra in 1u64..2000) {
        let p = scoutgrid::protocol::srw(1).unwrap();
        let collect = |cap: u64| -> Vec<HitTime> { (0..100).map(|r| hitting_time(&p, [3, 0], cap, SeedSpec::new(run_seed, r)).time).collect() };
        let mean = |cap: u64| SurvivalCurve::from_samples(collect(cap), cap).uncensored_mean().map_or(0.0, |m| m.mean);
        prop_assert!(mean(small) <= mean(small + extra));
    }

    #[test]
    fn exact_stationary_laws_have_no_residual(seed in any::<u64>(), dim in 1usize..=2) {
        let k = random_kernel(&mut rng(seed), 6, dim, false);
        let class = recurrent_class_of(&k, 0).unwrap();
        let st = stationary(&k, &class).unwrap();
        prop_assert_eq!(st.residual, 0.0);
        let pi = st.exact.unwrap();
        let total = pi.iter().fold(num::rational::BigRational::zero(), |a, x| a + x);
        prop_assert!(total.is_one());
    }

    #[test]
    fn difference_chain_drift_is_the_drift_difference(seed in any::<u64>(), dim in 1usize..=2) {
        let mut r = rng(seed);
        let k1 = random_kernel(&mut r, 4, dim, true);
        let k2 = random_kernel(&mut r, 4, dim, true);
        let d = |k: &scoutgrid::automaton::ReducedKernel| effective_drift(k, &recurrent_class_of(k, 0).unwrap()).unwrap().exact.unwrap();
        let prod = product_kernel(&k1, &k2, ProductMoves::Difference).unwrap();
        let expected: Vec<_> = d(&k1).iter().zip(d(&k2)).map(|(a, b)| a - b).collect();
        prop_assert_eq!(d(&prod), expected);
    }

    #[test]
    fn position_laws_sum_to_one(weights in prop::collection::vec(1i64..6, 2..5), zetas in prop::collection::vec(-2i64..=2, 5), n in 0u64..20) {
        let total: i64 = weights.iter().sum();
        let steps: Vec<(i64, scoutgrid::scalar::Scalar)> =
            weights.iter().zip(&zetas).map(|(&w, &z)| (z, scoutgrid::scalar::Scalar::ratio(w, total))).collect();
        let law = StepLaw::simple(&steps).unwrap();
        let mass = distribution(&law, 0, n).unwrap().into_values().fold(num::rational::BigRational::zero(), |a, m| a + m);
        prop_assert!(mass.is_one());
    }

    #[test]
    fn analytic_power_tails_are_recovered(alpha in 0.1f64..3.0, scale in 0.01f64..1.0) {
        let us: Vec<f64> = (0..12).map(|k| (1u64 << k) as f64).collect();
        let fit = fit_exact(&us, |u| scale * u.powf(-alpha), TailModel::PowerLaw).unwrap();
        prop_assert!((fit.slope + alpha).abs() < 1e-9);
    }

    #[test]
    fn gap_bound_holds_on_random_pairs(seed in any::<u64>(), run_seed in any::<u64>()) {
        let p = random_protocol(&mut rng(seed), 2);
        let t = run(&p, 500, SeedSpec::new(run_seed, 0)).unwrap();
        prop_assert!(extract_renewal(&t).is_ok());
    }

    #[test]
    fn traps_persist_at_larger_radii(
        steps in prop::collection::vec((-1i64..=1, -1i64..=1), 1..300),
        r in 1u64..16,
        extra in 1u64..16,
    ) {
        let mut x = [0i64, 0];
        let mut path = vec![x];
        for (dx, dy) in steps {
            x = [x[0] + dx, x[1] + dy];
            path.push(x);
        }
        let small = trap_detect(&path, Some(&[r]), 0.5);
        let large = trap_detect(&path, Some(&[r + extra]), 0.5);
        if small.found {
            prop_assert!(large.found);
            prop_assert!(large.tau.unwrap() <= small.tau.unwrap());
        }
    }

    #[test]
    fn explorer_index_is_fixed_once_reached(seed in any::<u64>(), run_seed in any::<u64>(), x in -6i64..=6, cut in 1usize..50) {
        let p = random_protocol(&mut rng(seed), 2);
        let t = run(&p, 400, SeedSpec::new(run_seed, 0)).unwrap();
        let full = extract_renewal(&t).unwrap();
        let prefix = MeetingRenewal { entries: full.entries[..cut.min(full.entries.len())].to_vec(), ..full.clone() };
        if let HitTime::Hit(k) = explorer_cover_time(&prefix, [x, 0]) {
            prop_assert_eq!(explorer_cover_time(&full, [x, 0]), HitTime::Hit(k));
        }
    }
}

/// Empirical outcome frequencies of one rule over 10^5 firings.
#[test]
fn outcome_frequencies_match_probabilities() {
    let p = parse_protocol("dim 1\nscouts 1\nstates A\ninit 1 A\ntrans A * -> 1/6 A (-1) | 1/3 A (0) | 1/2 A (+1)\n").unwrap();
    let n = 100_000u64;
    let t = run(&p, n, SeedSpec::new(11, 0)).unwrap();
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for k in 1..t.len() {
        *counts.entry(t.positions_at(k)[0][0] - t.positions_at(k - 1)[0][0]).or_default() += 1;
    }
    for (mv, prob) in [(-1, 1.0 / 6.0), (0, 1.0 / 3.0), (1, 0.5)] {
        let f = counts[&mv] as f64 / n as f64;
        let sigma = (prob * (1.0 - prob) / n as f64).sqrt();
        assert!((f - prob).abs() <= 4.0 * sigma, "move {mv}: {f} vs {prob}");
    }
}
