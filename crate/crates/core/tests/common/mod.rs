//! Random protocols and kernels shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use scoutgrid::automaton::ReducedKernel;
use scoutgrid::protocol::{parse_protocol, ScoutProtocol};
use scoutgrid::scalar::Scalar;

pub fn ratio(num: u64, den: u64) -> Scalar {
    Scalar::ratio(num as i64, den as i64)
}

/// Protocol text with a wildcard rule per state and some exact-set rules.
pub fn random_protocol_text(rng: &mut ChaCha8Rng, scouts: usize) -> String {
    let dim = rng.gen_range(1..=2);
    let states = ["a", "b", "c"];
    let mut text = format!("dim {dim}\nscouts {scouts}\nstates a b c\n");
    for i in 1..=scouts {
        text.push_str(&format!("init {i} {}\n", states[rng.gen_range(0..3)]));
    }
    let mv = |rng: &mut ChaCha8Rng| {
        let c: Vec<String> = (0..dim).map(|_| rng.gen_range(-1..=1).to_string()).collect();
        format!("({})", c.join(","))
    };
    for s in states {
        for pattern in ["*", "{a}", "{b,c}", "{}"] {
            if pattern != "*" && rng.gen_bool(0.5) {
                continue;
            }
            let n = rng.gen_range(1..=3);
            let w: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
            let total: u64 = w.iter().sum();
            let outs: Vec<String> = w.iter().map(|&wi| format!("{wi}/{total} {} {}", states[rng.gen_range(0..3)], mv(rng))).collect();
            text.push_str(&format!("trans {s} {pattern} -> {}\n", outs.join(" | ")));
        }
    }
    text
}

pub fn random_protocol(rng: &mut ChaCha8Rng, scouts: usize) -> ScoutProtocol {
    let text = random_protocol_text(rng, scouts);
    parse_protocol(&text).unwrap_or_else(|e| panic!("generated protocol rejected: {e}\n{text}"))
}

/// Irreducible kernel on `2..=max_states` states (a ring plus random edges);
/// `aperiodic` adds a self-loop at state 0.
pub fn random_kernel(rng: &mut ChaCha8Rng, max_states: usize, dim: usize, aperiodic: bool) -> ReducedKernel {
    let n = rng.gen_range(2..=max_states);
    let rows = (0..n)
        .map(|q| {
            let mut targets = vec![(q + 1) % n];
            if aperiodic && q == 0 {
                targets.push(0);
            }
            for _ in 0..rng.gen_range(0..=2) {
                targets.push(rng.gen_range(0..n));
            }
            let weights: Vec<u64> = targets.iter().map(|_| rng.gen_range(1..=5)).collect();
            let total: u64 = weights.iter().sum();
            targets.iter().zip(&weights).map(|(&to, &w)| (to, (0..dim).map(|_| rng.gen_range(-2..=2)).collect(), ratio(w, total))).collect()
        })
        .collect();
    ReducedKernel::new(dim, (0..n).map(|q| format!("q{q}")).collect(), rows).expect("rows sum to one")
}
