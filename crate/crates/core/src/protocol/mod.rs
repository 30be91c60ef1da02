//! Scout protocols: the state set, initial placement and the
//! environment-dependent transition kernel shared by all scouts.

mod builtin;
mod parse;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::stream;

pub use builtin::{
    anchored_epoch_hit_probability, anchored_epoch_hit_probability_exact, anchored_geometric, builtin, independent_walks,
    is_anchored_epoch_start, srw, BuiltinError,
};
pub use parse::{parse_draft, parse_protocol};
pub use validate::{validate, DraftOutcome, DraftPattern, DraftRule, ProtocolDraft, ValidationReport, Violation};

/// Largest supported state set; environments are stored as 64-bit masks.
pub const MAX_STATES: usize = 64;

/// Grid point. One-dimensional protocols keep the second coordinate at zero.
pub type Point = [i64; 2];

/// Index of a state in the protocol's (sorted) state list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A displacement with every component in {-1, 0, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Move(pub [i8; 2]);

impl Move {
    pub const STAY: Move = Move([0, 0]);

    pub fn new(components: &[i64]) -> Option<Move> {
        if components.is_empty() || components.len() > 2 {
            return None;
        }
        let mut m = [0i8; 2];
        for (slot, &c) in m.iter_mut().zip(components) {
            if !(-1..=1).contains(&c) {
                return None;
            }
            *slot = c as i8;
        }
        Some(Move(m))
    }

    #[inline]
    pub fn apply(self, p: Point) -> Point {
        [p[0] + self.0[0] as i64, p[1] + self.0[1] as i64]
    }

    pub fn components(self, dim: usize) -> Vec<i64> {
        self.0[..dim].iter().map(|&c| c as i64).collect()
    }

    pub(crate) fn format(self, dim: usize) -> String {
        let parts: Vec<String> = self.0[..dim]
            .iter()
            .map(|&c| match c {
                1 => "+1".to_string(),
                -1 => "-1".to_string(),
                _ => "0".to_string(),
            })
            .collect();
        format!("({})", parts.join(","))
    }
}

/// Set of states, used for environments and exact-set patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StateSet(pub u64);

impl StateSet {
    pub const EMPTY: StateSet = StateSet(0);

    #[inline]
    pub fn insert(&mut self, s: StateId) {
        self.0 |= 1u64 << s.0;
    }

    #[inline]
    pub fn contains(self, s: StateId) -> bool {
        self.0 & (1u64 << s.0) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = StateId> {
        (0..64u32).filter(move |i| self.0 & (1u64 << i) != 0).map(StateId)
    }

    pub fn from_states(states: impl IntoIterator<Item = StateId>) -> Self {
        let mut s = StateSet::EMPTY;
        for q in states {
            s.insert(q);
        }
        s
    }
}

/// Environment pattern of a transition rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvPattern {
    /// Fires only when the observed set of co-located states equals this set.
    Exact(StateSet),
    /// Fires when no exact-set rule of the same state matches.
    Wildcard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub prob: Scalar,
    pub to: StateId,
    pub mv: Move,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRule {
    pub from: StateId,
    pub pattern: EnvPattern,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Dispatch {
    exact: Vec<(StateSet, usize)>,
    wildcard: Option<usize>,
}

/// A validated scout protocol. Immutable after construction.
///
/// States are kept in lexicographic order and rules sorted by
/// `(from, pattern)`, so two protocols with the same content compare equal and
/// serialize identically.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoutProtocol {
    dim: usize,
    states: Vec<String>,
    origin: Point,
    initial_states: Vec<StateId>,
    rules: Vec<TransitionRule>,
    dispatch: Vec<Dispatch>,
    cdfs: Vec<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvironmentError {
    #[error("scout index {index} out of range for {scouts} scouts")]
    ScoutOutOfRange { index: usize, scouts: usize },
    #[error("no rule for state {state} under environment {environment}")]
    NoMatchingRule { state: String, environment: String },
}

impl ScoutProtocol {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scouts(&self) -> usize {
        self.initial_states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.index()]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.binary_search_by(|s| s.as_str().cmp(name)).ok().map(|i| StateId(i as u32))
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn initial_states(&self) -> &[StateId] {
        &self.initial_states
    }

    pub fn rules(&self) -> &[TransitionRule] {
        &self.rules
    }

    /// Rule that fires for a scout in `state` observing `env`.
    #[inline]
    pub fn rule_index(&self, state: StateId, env: StateSet) -> Option<usize> {
        let d = &self.dispatch[state.index()];
        for &(set, idx) in &d.exact {
            if set == env {
                return Some(idx);
            }
        }
        d.wildcard
    }

    pub fn rule_for(&self, state: StateId, env: StateSet) -> Option<&TransitionRule> {
        self.rule_index(state, env).map(|i| &self.rules[i])
    }

    /// Samples an outcome of rule `rule` with the uniform draw `u`.
    #[inline]
    pub(crate) fn sample_outcome(&self, rule: usize, u: f64) -> &Outcome {
        let k = stream::pick(&self.cdfs[rule], u);
        &self.rules[rule].outcomes[k]
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration { positions: vec![self.origin; self.scouts()], states: self.initial_states.clone(), time: 0 }
    }

    /// Renders a point with as many coordinates as the protocol dimension.
    pub fn format_point(&self, p: Point) -> String {
        format_point(p, self.dim)
    }

    pub fn format_set(&self, set: StateSet) -> String {
        let names: Vec<&str> = set.iter().map(|s| self.state_name(s)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Canonical text form; see [`parse_protocol`] for the format.
    pub fn to_canonical_string(&self) -> String {
        parse::serialize(self)
    }

    /// 64-bit FNV-1a over the canonical serialization.
    pub fn content_hash(&self) -> u64 {
        fnv1a64(self.to_canonical_string().as_bytes())
    }

    /// Protocol with every state renamed through `rename`. Rules and outcome
    /// order are preserved, so simulations of the result with the same seed
    /// produce the same positions.
    pub fn relabeled(&self, rename: impl Fn(&str) -> String) -> Result<ScoutProtocol, ProtocolError> {
        let mut draft = self.to_draft();
        draft.rename_states(&rename);
        ScoutProtocol::from_draft(&draft)
    }

    fn build(dim: usize, states: Vec<String>, origin: Point, initial_states: Vec<StateId>, mut rules: Vec<TransitionRule>) -> Self {
        rules.sort_by(|a, b| (a.from, pattern_order(&states, a.pattern)).cmp(&(b.from, pattern_order(&states, b.pattern))));
        let mut dispatch = vec![Dispatch::default(); states.len()];
        for (i, r) in rules.iter().enumerate() {
            let d = &mut dispatch[r.from.index()];
            match r.pattern {
                EnvPattern::Exact(set) => d.exact.push((set, i)),
                EnvPattern::Wildcard => d.wildcard = Some(i),
            }
        }
        let cdfs = rules.iter().map(|r| stream::cumulative(r.outcomes.iter().map(|o| o.prob.value()))).collect();
        Self { dim, states, origin, initial_states, rules, dispatch, cdfs }
    }
}

impl fmt::Display for ScoutProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

/// Sort key for patterns: the wildcard first, then exact sets by their sorted
/// name lists.
fn pattern_order(states: &[String], p: EnvPattern) -> (u8, Vec<&str>) {
    match p {
        EnvPattern::Wildcard => (0, Vec::new()),
        EnvPattern::Exact(set) => (1, set.iter().map(|s| states[s.index()].as_str()).collect()),
    }
}

pub(crate) fn pattern_key(states: &[String], p: EnvPattern) -> String {
    match p {
        EnvPattern::Wildcard => "*".to_string(),
        EnvPattern::Exact(set) => {
            let names: Vec<&str> = set.iter().map(|s| states[s.index()].as_str()).collect();
            format!("{{{}}}", names.join(","))
        }
    }
}

pub fn format_point(p: Point, dim: usize) -> String {
    if dim == 1 {
        format!("({})", p[0])
    } else {
        format!("({},{})", p[0], p[1])
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Joint positions and states of all scouts at one time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub positions: Vec<Point>,
    pub states: Vec<StateId>,
    pub time: u64,
}

impl Configuration {
    pub fn scouts(&self) -> usize {
        self.positions.len()
    }
}

/// Set of states held by the other scouts sharing scout `i`'s grid point.
pub fn environment_of(cfg: &Configuration, i: usize) -> Result<StateSet, EnvironmentError> {
    let c = cfg.scouts();
    if i >= c {
        return Err(EnvironmentError::ScoutOutOfRange { index: i, scouts: c });
    }
    Ok(environment_at(&cfg.positions, &cfg.states, i))
}

#[inline]
pub(crate) fn environment_at(positions: &[Point], states: &[StateId], i: usize) -> StateSet {
    let mut env = StateSet::EMPTY;
    let here = positions[i];
    for (j, (&p, &q)) in positions.iter().zip(states).enumerate() {
        if j != i && p == here {
            env.insert(q);
        }
    }
    env
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(positions: Vec<Point>, states: Vec<u32>) -> Configuration {
        Configuration { positions, states: states.into_iter().map(StateId).collect(), time: 0 }
    }

    #[test]
    fn environment_sees_colocated_states_only() {
        let c = cfg(vec![[0, 0], [0, 0]], vec![0, 1]);
        assert_eq!(environment_of(&c, 0).unwrap(), StateSet::from_states([StateId(1)]));
        let c = cfg(vec![[0, 0], [1, 0]], vec![0, 1]);
        assert!(environment_of(&c, 0).unwrap().is_empty());
        assert!(environment_of(&c, 1).unwrap().is_empty());
    }

    #[test]
    fn environment_has_set_semantics() {
        let c = cfg(vec![[0, 0]; 3], vec![0, 1, 1]);
        let e = environment_of(&c, 0).unwrap();
        assert_eq!(e, StateSet::from_states([StateId(1)]));
        assert_eq!(e.len(), 1);
        // own state is visible through another scout holding it
        assert_eq!(environment_of(&c, 1).unwrap(), StateSet::from_states([StateId(0), StateId(1)]));
    }

    #[test]
    fn environment_index_checked() {
        let c = cfg(vec![[0, 0]], vec![0]);
        assert!(matches!(environment_of(&c, 1), Err(EnvironmentError::ScoutOutOfRange { .. })));
    }

    #[test]
    fn move_rejects_out_of_range() {
        assert!(Move::new(&[2]).is_none());
        assert!(Move::new(&[1, -1]).is_some());
        assert!(Move::new(&[1, 0, 0]).is_none());
    }
}
