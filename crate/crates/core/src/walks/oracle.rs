use std::collections::BTreeMap;

use num::{BigRational, Zero};
use thiserror::Error;

use super::law::{Atom, StepLaw};
use super::sample::{Event, LookAroundWalk};
use crate::scalar::Scalar;

/// Largest number of `(position, atom)` updates the oracle will perform.
pub const DP_BUDGET: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("exact oracle needs integer displacements and exact probabilities")]
    NotExact,
    #[error("exact oracle needs an integer start")]
    Start,
    #[error("dynamic program of {0} updates exceeds the budget of {DP_BUDGET}")]
    Budget(u128),
}

fn exact(s: &Scalar) -> BigRational {
    s.exact().cloned().expect("checked exact")
}

/// Exact probability of `ev` by forward dynamic programming over positions.
///
/// At time `n` the pending triple `(ζ_{n+1}, R_{n+1})` is independent of `S_n`,
/// so the state is the position alone and the stopping check splits each
/// position's mass by atom.
pub fn exact_dp_oracle(w: &LookAroundWalk, ev: &Event) -> Result<BigRational, OracleError> {
    if !w.law.is_integer_exact() {
        return Err(OracleError::NotExact);
    }
    if w.s0.fract() != 0.0 {
        return Err(OracleError::Start);
    }
    match ev {
        Event::NotHitBy { target, n } => {
            let atoms = w.law.atoms();
            budget(&w.law, *n)?;
            let mut mass: BTreeMap<i64, BigRational> = BTreeMap::from([(w.s0 as i64, one())]);
            for step in 0..=*n {
                let mut next: BTreeMap<i64, BigRational> = BTreeMap::new();
                for (&x, m) in &mass {
                    for a in atoms {
                        if target.hit(x as f64, a.r.value()) {
                            continue;
                        }
                        let x2 = x + displacement(a);
                        *next.entry(x2).or_insert_with(BigRational::zero) += m * exact(&a.prob);
                    }
                }
                if step == *n {
                    // the last check only needs the surviving mass, not its positions
                    return Ok(next.into_values().fold(BigRational::zero(), |s, m| s + m));
                }
                mass = next;
            }
            unreachable!()
        }
        Event::PositionAt { n, y } => {
            if y.fract() != 0.0 {
                return Ok(BigRational::zero());
            }
            let d = distribution(&w.law, w.s0 as i64, *n)?;
            Ok(d.get(&(*y as i64)).cloned().unwrap_or_else(BigRational::zero))
        }
        Event::NoMeetingBy { other, other_start, n } => {
            if !other.is_integer_exact() {
                return Err(OracleError::NotExact);
            }
            if other_start.fract() != 0.0 {
                return Err(OracleError::Start);
            }
            let diff = difference_law(&w.law, other);
            let dw = LookAroundWalk::new(diff, w.s0 - other_start);
            exact_dp_oracle(&dw, &Event::NotHitBy { target: super::sample::Target::Visit(0.0), n: *n })
        }
    }
}

fn one() -> BigRational {
    BigRational::from_integer(1.into())
}

fn displacement(a: &Atom) -> i64 {
    a.zeta.as_integer().expect("checked integer")
}

fn budget(law: &StepLaw, n: u64) -> Result<(), OracleError> {
    let width = 2 * (n as u128) * (law.max_abs_zeta() as u128) + 1;
    let cost = width * law.atoms().len() as u128 * (n as u128 + 1);
    if cost > DP_BUDGET {
        Err(OracleError::Budget(cost))
    } else {
        Ok(())
    }
}

/// Exact law of `S_n`.
pub fn distribution(law: &StepLaw, s0: i64, n: u64) -> Result<BTreeMap<i64, BigRational>, OracleError> {
    if !law.is_integer_exact() {
        return Err(OracleError::NotExact);
    }
    budget(law, n)?;
    let mut mass = BTreeMap::from([(s0, one())]);
    for _ in 0..n {
        let mut next: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (&x, m) in &mass {
            for a in law.atoms() {
                *next.entry(x + displacement(a)).or_insert_with(BigRational::zero) += m * exact(&a.prob);
            }
        }
        mass = next;
    }
    Ok(mass)
}

/// Law of `ζ − ζ'` for independent steps, with `ν = R = 1`.
fn difference_law(a: &StepLaw, b: &StepLaw) -> StepLaw {
    let mut acc: BTreeMap<i64, BigRational> = BTreeMap::new();
    for x in a.atoms() {
        for y in b.atoms() {
            *acc.entry(displacement(x) - displacement(y)).or_insert_with(BigRational::zero) += exact(&x.prob) * exact(&y.prob);
        }
    }
    StepLaw::new(
        acc.into_iter().map(|(z, p)| Atom { zeta: Scalar::integer(z), nu: 1, r: Scalar::one(), prob: Scalar::from_rational(p) }).collect(),
    )
    .expect("product of laws is a law")
}

#[cfg(test)]
mod tests {
    use super::super::sample::Target;
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn srw_hits_one_after_three() {
        let w = LookAroundWalk::new(StepLaw::srw(), 0.0);
        let p = exact_dp_oracle(&w, &Event::NotHitBy { target: Target::Visit(1.0), n: 3 }).unwrap();
        assert_eq!(p, q(3, 8));
    }

    #[test]
    fn binomial_position_law() {
        let w = LookAroundWalk::new(StepLaw::srw(), 0.0);
        let p = exact_dp_oracle(&w, &Event::PositionAt { n: 4, y: 0.0 }).unwrap();
        assert_eq!(p, q(6, 16));
        assert_eq!(exact_dp_oracle(&w, &Event::PositionAt { n: 4, y: 1.0 }).unwrap(), q(0, 1));
    }

    #[test]
    fn meeting_reduces_to_difference_walk() {
        // two SRWs from 0 and 2: the gap moves by ±2 w.p. 1/4 each, so the
        // first step meets w.p. 1/4
        let w = LookAroundWalk::new(StepLaw::srw(), 0.0);
        let ev = Event::NoMeetingBy { other: StepLaw::srw(), other_start: 2.0, n: 1 };
        assert_eq!(exact_dp_oracle(&w, &ev).unwrap(), q(3, 4));
    }

    #[test]
    fn rejects_float_laws_and_huge_horizons() {
        let w = LookAroundWalk::new("0.5@1".parse().unwrap(), 0.0);
        assert_eq!(exact_dp_oracle(&w, &Event::PositionAt { n: 1, y: 0.0 }), Err(OracleError::NotExact));
        let w = LookAroundWalk::new(StepLaw::srw(), 0.0);
        assert!(matches!(exact_dp_oracle(&w, &Event::NotHitBy { target: Target::Visit(1e9), n: 100_000 }), Err(OracleError::Budget(_))));
    }
}
