//! Built-in protocols: simple random walk, independent walkers and the anchored
//! geometric-excursion explorers on ℤ and ℤ².
//!
//! The anchored explorers keep scout 1 at the origin as a beacon. On ℤ, scout 2
//! repeats epochs: pick a side with probability `p/2` each (or idle with
//! `1 - p`), run outward continuing with probability `p` per step, then walk
//! back until it senses the beacon. On ℤ², scout 2 runs along the horizontal
//! axis the same way, pausing at every column it enters (including column 0)
//! while scout 3 makes a vertical excursion of the same geometric shape from
//! that column. When scout 2 stops, both walk back to the beacon together.
//!
//! A target `(k, m)` is visited during an epoch with probability
//! [`anchored_epoch_hit_probability`]; for `k, m ≠ 0` that is `p^{|k|+|m|}/4`.

use std::collections::BTreeMap;

use num::rational::BigRational;
use thiserror::Error;

use super::validate::{DraftOutcome, DraftPattern, DraftRule, ProtocolDraft};
use super::{ProtocolError, ScoutProtocol, StateId};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum BuiltinError {
    #[error("unknown builtin protocol `{0}` (expected srw, independent_walks or anchored_geometric)")]
    UnknownName(String),
    #[error("invalid parameter {name}: {message}")]
    InvalidParam { name: String, message: String },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

fn invalid(name: &str, message: impl Into<String>) -> BuiltinError {
    BuiltinError::InvalidParam { name: name.to_string(), message: message.into() }
}

/// Instantiates a builtin by name. Parameters: `d` (dimension, default 1),
/// `c` (scout count for `independent_walks`, default 1), `p` (excursion
/// continuation probability for `anchored_geometric`, default 1/2).
pub fn builtin(name: &str, params: &BTreeMap<String, String>) -> Result<ScoutProtocol, BuiltinError> {
    let allowed: &[&str] = match name {
        "srw" => &["d"],
        "independent_walks" => &["d", "c"],
        "anchored_geometric" => &["d", "p"],
        other => return Err(BuiltinError::UnknownName(other.to_string())),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(invalid(k, format!("not accepted by {name}")));
    }
    let int = |key: &str, default: i64| -> Result<i64, BuiltinError> {
        match params.get(key) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|_| invalid(key, format!("`{v}` is not an integer"))),
        }
    };
    let d = int("d", 1)?;
    if !(1..=2).contains(&d) {
        return Err(invalid("d", format!("dimension {d} unsupported (expected 1 or 2)")));
    }
    let d = d as usize;
    match name {
        "srw" => srw(d),
        "independent_walks" => {
            let c = int("c", 1)?;
            if !(1..=64).contains(&c) {
                return Err(invalid("c", format!("scout count {c} outside 1..=64")));
            }
            independent_walks(d, c as usize)
        }
        _ => {
            let p: Scalar = match params.get("p") {
                None => Scalar::ratio(1, 2),
                Some(v) => v.parse().map_err(|_| invalid("p", format!("`{v}` is not a number")))?,
            };
            anchored_geometric(d, &p)
        }
    }
}

fn unit_moves(d: usize) -> Vec<Vec<i64>> {
    if d == 1 {
        vec![vec![1], vec![-1]]
    } else {
        vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]]
    }
}

fn walk_rule(state: &str, d: usize) -> DraftRule {
    let moves = unit_moves(d);
    let prob = Scalar::ratio(1, moves.len() as i64);
    DraftRule {
        from: state.to_string(),
        pattern: DraftPattern::Wildcard,
        outcomes: moves.into_iter().map(|mv| DraftOutcome { prob: prob.clone(), to: state.to_string(), mv }).collect(),
        line: 0,
    }
}

/// One scout doing a simple random walk on ℤᵈ.
pub fn srw(d: usize) -> Result<ScoutProtocol, BuiltinError> {
    independent_walks_named(d, &["A".to_string()])
}

/// `c` simple random walkers with disjoint single-state automata and no
/// environment dependence.
pub fn independent_walks(d: usize, c: usize) -> Result<ScoutProtocol, BuiltinError> {
    let names: Vec<String> = (1..=c).map(|i| format!("W{i}")).collect();
    independent_walks_named(d, &names)
}

fn independent_walks_named(d: usize, names: &[String]) -> Result<ScoutProtocol, BuiltinError> {
    let draft = ProtocolDraft {
        dim: d as i64,
        scouts: names.len() as i64,
        states: names.to_vec(),
        origin: None,
        init: names.iter().enumerate().map(|(i, n)| (i as i64 + 1, n.clone())).collect(),
        rules: names.iter().map(|n| walk_rule(n, d)).collect(),
    };
    Ok(ScoutProtocol::from_draft(&draft)?)
}

struct RuleBook {
    d: usize,
    rules: Vec<DraftRule>,
}

impl RuleBook {
    fn mv(&self, dx: i64, dy: i64) -> Vec<i64> {
        if self.d == 1 {
            vec![dx]
        } else {
            vec![dx, dy]
        }
    }

    fn add(&mut self, from: &str, env: Option<&[&str]>, outcomes: Vec<(Scalar, &str, (i64, i64))>) {
        let pattern = match env {
            None => DraftPattern::Wildcard,
            Some(names) => DraftPattern::Exact(names.iter().map(|s| s.to_string()).collect()),
        };
        let outcomes = outcomes
            .into_iter()
            .filter(|(p, _, _)| !p.is_zero())
            .map(|(prob, to, (dx, dy))| DraftOutcome { prob, to: to.to_string(), mv: self.mv(dx, dy) })
            .collect();
        self.rules.push(DraftRule { from: from.to_string(), pattern, outcomes, line: 0 });
    }

    fn det(&mut self, from: &str, env: Option<&[&str]>, to: &str, mv: (i64, i64)) {
        self.add(from, env, vec![(Scalar::one(), to, mv)]);
    }
}

/// Anchored geometric-excursion explorer with `d + 1` scouts.
pub fn anchored_geometric(d: usize, p: &Scalar) -> Result<ScoutProtocol, BuiltinError> {
    if !(1..=2).contains(&d) {
        return Err(invalid("d", format!("dimension {d} unsupported (expected 1 or 2)")));
    }
    if !(p.value() > 0.0 && p.value() < 1.0) {
        return Err(invalid("p", format!("{p} not in (0,1)")));
    }
    let half_p = p.mul(&Scalar::ratio(1, 2));
    let q = Scalar::one().sub(p);
    let mut b = RuleBook { d, rules: Vec::new() };
    b.det("Anchor", None, "Anchor", (0, 0));

    let (states, init): (Vec<&str>, Vec<&str>) = if d == 1 {
        b.add("Home", None, vec![(half_p.clone(), "OutE", (1, 0)), (half_p.clone(), "OutW", (-1, 0)), (q.clone(), "Home", (0, 0))]);
        for (out, back, s) in [("OutE", "BackE", 1), ("OutW", "BackW", -1)] {
            b.add(out, None, vec![(p.clone(), out, (s, 0)), (q.clone(), back, (-s, 0))]);
            b.det(back, None, back, (-s, 0));
            b.det(back, Some(&["Anchor"]), "Home", (0, 0));
        }
        (vec!["Anchor", "BackE", "BackW", "Home", "OutE", "OutW"], vec!["Anchor", "Home"])
    } else {
        // horizontal runner
        b.det("B0", None, "B0", (0, 0));
        for ret in ["CretS", "CretN"] {
            b.add(
                "B0",
                Some(&["Anchor", ret]),
                vec![(half_p.clone(), "BgE", (0, 0)), (half_p.clone(), "BgW", (0, 0)), (q.clone(), "B0", (0, 0))],
            );
        }
        for (go, wait, back, s) in [("BgE", "BwE", "BrE", 1), ("BgW", "BwW", "BrW", -1)] {
            b.det(go, None, wait, (s, 0));
            b.det(wait, None, wait, (0, 0));
            for ret in ["CretS", "CretN"] {
                b.add(wait, Some(&[ret]), vec![(p.clone(), go, (0, 0)), (q.clone(), back, (0, 0))]);
            }
            b.det(back, None, back, (-s, 0));
            b.det(back, Some(&["Anchor", "Cride"]), "B0", (0, 0));
            b.det(back, Some(&["Anchor", "Cback"]), "B0", (0, 0));
        }
        // vertical explorer
        b.add("Cready", None, vec![(half_p.clone(), "CupN", (0, 1)), (half_p.clone(), "CupS", (0, -1)), (q.clone(), "CretS", (0, 0))]);
        b.add("CupN", None, vec![(p.clone(), "CupN", (0, 1)), (q.clone(), "CretS", (0, -1))]);
        b.add("CupS", None, vec![(p.clone(), "CupS", (0, -1)), (q.clone(), "CretN", (0, 1))]);
        for (ret, s) in [("CretS", -1), ("CretN", 1)] {
            b.det(ret, None, ret, (0, s));
            b.det(ret, Some(&["BwE"]), "Cback", (0, 0));
            b.det(ret, Some(&["BwW"]), "Cback", (0, 0));
            b.det(ret, Some(&["Anchor", "B0"]), "Cback", (0, 0));
        }
        b.det("Cback", None, "Cback", (0, 0));
        b.det("Cback", Some(&["Anchor", "B0"]), "Cready", (0, 0));
        for (go, back, s) in [("BgE", "BrE", 1), ("BgW", "BrW", -1)] {
            b.det("Cback", Some(&[go]), "Cready", (s, 0));
            b.det("Cback", Some(&["Anchor", go]), "Cready", (s, 0));
            b.det("Cback", Some(&[back]), "Cride", (-s, 0));
            b.det("Cride", Some(&[back]), "Cride", (-s, 0));
            b.det("Cride", Some(&["Anchor", back]), "Cready", (0, 0));
        }
        b.det("Cride", None, "Cride", (0, 0));
        (
            vec!["Anchor", "B0", "BgE", "BgW", "BrE", "BrW", "BwE", "BwW", "Cback", "CretN", "CretS", "Cready", "Cride", "CupN", "CupS"],
            vec!["Anchor", "B0", "Cready"],
        )
    };
    let draft = ProtocolDraft {
        dim: d as i64,
        scouts: d as i64 + 1,
        states: states.iter().map(|s| s.to_string()).collect(),
        origin: None,
        init: init.iter().enumerate().map(|(i, s)| (i as i64 + 1, s.to_string())).collect(),
        rules: b.rules,
    };
    Ok(ScoutProtocol::from_draft(&draft)?)
}

/// Whether the scout states mark the start of an epoch of an anchored
/// explorer: the runner is home and (in ℤ²) the vertical explorer is ready.
pub fn is_anchored_epoch_start(p: &ScoutProtocol, states: &[StateId]) -> bool {
    match p.dim() {
        1 => states.len() == 2 && p.state_name(states[1]) == "Home",
        _ => states.len() == 3 && p.state_name(states[1]) == "B0" && p.state_name(states[2]) == "Cready",
    }
}

/// Probability that one epoch of `anchored_geometric(d, p)` visits `target`.
pub fn anchored_epoch_hit_probability(p: f64, target: &[i64]) -> f64 {
    let k = target.first().copied().unwrap_or(0).unsigned_abs() as i32;
    let m = target.get(1).copied().unwrap_or(0).unsigned_abs() as i32;
    match (k, m) {
        (0, 0) => 1.0,
        (_, 0) | (0, _) => 0.5 * p.powi(k + m),
        _ => 0.25 * p.powi(k + m),
    }
}

/// Exact variant of [`anchored_epoch_hit_probability`] for rational `p`.
pub fn anchored_epoch_hit_probability_exact(p: &BigRational, target: &[i64]) -> BigRational {
    let k = target.first().copied().unwrap_or(0).unsigned_abs() as usize;
    let m = target.get(1).copied().unwrap_or(0).unsigned_abs() as usize;
    let pow = num::pow(p.clone(), k + m);
    let factor = match (k, m) {
        (0, 0) => return BigRational::from_integer(1.into()),
        (_, 0) | (0, _) => BigRational::new(1.into(), 2.into()),
        _ => BigRational::new(1.into(), 4.into()),
    };
    factor * pow
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn srw_shape() {
        let p = builtin("srw", &params(&[("d", "1")])).unwrap();
        assert_eq!((p.scouts(), p.state_count()), (1, 1));
        let r = &p.rules()[0];
        assert_eq!(r.outcomes.len(), 2);
        assert!(r.outcomes.iter().all(|o| o.prob == Scalar::ratio(1, 2)));
    }

    #[test]
    fn independent_walks_are_disjoint() {
        let p = builtin("independent_walks", &params(&[("c", "3")])).unwrap();
        assert_eq!(p.scouts(), 3);
        assert_eq!(p.state_count(), 3);
        let init: std::collections::BTreeSet<_> = p.initial_states().iter().collect();
        assert_eq!(init.len(), 3);
        assert!(p.rules().iter().all(|r| r.pattern == super::super::EnvPattern::Wildcard));
    }

    #[test]
    fn anchored_has_d_plus_one_scouts() {
        for d in ["1", "2"] {
            let p = builtin("anchored_geometric", &params(&[("d", d), ("p", "0.5")])).unwrap();
            assert_eq!(p.scouts(), d.parse::<usize>().unwrap() + 1);
            let text = p.to_canonical_string();
            assert_eq!(super::super::parse_protocol(&text).unwrap(), p);
        }
    }

    #[test]
    fn bad_params_rejected() {
        assert!(matches!(builtin("nope", &params(&[])), Err(BuiltinError::UnknownName(_))));
        for p in ["0", "1", "1.5", "-0.1"] {
            assert!(builtin("anchored_geometric", &params(&[("p", p)])).is_err(), "{p}");
        }
        assert!(builtin("srw", &params(&[("d", "3")])).is_err());
        assert!(builtin("srw", &params(&[("p", "0.5")])).is_err());
    }

    #[test]
    fn epoch_probabilities() {
        assert_eq!(anchored_epoch_hit_probability(0.5, &[4]), 1.0 / 32.0);
        assert_eq!(anchored_epoch_hit_probability(0.5, &[2, 1]), 1.0 / 32.0);
        assert_eq!(anchored_epoch_hit_probability(0.5, &[0, -3]), 1.0 / 16.0);
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(anchored_epoch_hit_probability_exact(&half, &[2, 1]), BigRational::new(1.into(), 32.into()));
    }
}
