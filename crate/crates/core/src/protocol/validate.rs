use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use super::{EnvPattern, Move, Outcome, ProtocolError, ScoutProtocol, StateId, StateSet, TransitionRule, MAX_STATES};
use crate::scalar::Scalar;

/// Unchecked protocol as written in a file: states are referenced by name and
/// moves are raw integer vectors. [`validate`] reports everything wrong with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolDraft {
    pub dim: i64,
    pub scouts: i64,
    pub states: Vec<String>,
    pub origin: Option<Vec<i64>>,
    /// `(scout index starting at 1, state name)`
    pub init: Vec<(i64, String)>,
    pub rules: Vec<DraftRule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DraftPattern {
    Wildcard,
    Exact(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DraftRule {
    pub from: String,
    pub pattern: DraftPattern,
    pub outcomes: Vec<DraftOutcome>,
    /// Source line, 0 when built programmatically.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DraftOutcome {
    pub prob: Scalar,
    pub to: String,
    pub mv: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnsupportedDimension(i64),
    InvalidScoutCount(i64),
    NoStates,
    InvalidStateName(String),
    DuplicateState(String),
    TooManyStates(usize),
    UnknownState { name: String, context: String },
    OriginDimension { expected: usize, found: usize },
    InitOutOfRange { scout: i64 },
    DuplicateInit { scout: i64 },
    MissingInit { scout: i64 },
    MoveDimension { line: usize, expected: usize, found: usize },
    MoveComponent { line: usize, value: i64 },
    NegativeProbability { line: usize },
    EmptyRow { line: usize },
    RowSum { line: usize, sum: f64 },
    RepeatedPatternState { line: usize, name: String },
    DuplicatePattern { state: String, pattern: String, line: usize },
    Uncovered { state: String },
}

fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" (line {line})")
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            UnsupportedDimension(d) => write!(f, "dimension {d} unsupported (expected 1 or 2)"),
            InvalidScoutCount(c) => write!(f, "scout count {c} must be at least 1"),
            NoStates => write!(f, "no states declared"),
            InvalidStateName(s) => write!(f, "invalid state name `{s}`"),
            DuplicateState(s) => write!(f, "state {s} declared twice"),
            TooManyStates(n) => write!(f, "{n} states exceed the limit of {MAX_STATES}"),
            UnknownState { name, context } => write!(f, "unknown state {name} in {context}"),
            OriginDimension { expected, found } => {
                write!(f, "dimension mismatch: origin has {found} coordinates, protocol dimension is {expected}")
            }
            InitOutOfRange { scout } => write!(f, "init for scout {scout} out of range"),
            DuplicateInit { scout } => write!(f, "scout {scout} initialized twice"),
            MissingInit { scout } => write!(f, "scout {scout} has no initial state"),
            MoveDimension { line, expected, found } => {
                write!(f, "dimension mismatch: move has {found} components, protocol dimension is {expected}{}", at_line(*line))
            }
            MoveComponent { line, value } => {
                write!(f, "move component out of {{−1,0,+1}}: {value}{}", at_line(*line))
            }
            NegativeProbability { line } => write!(f, "negative probability{}", at_line(*line)),
            EmptyRow { line } => write!(f, "rule without outcomes{}", at_line(*line)),
            RowSum { line, sum } => write!(f, "row sum {sum} ≠ 1{}", at_line(*line)),
            RepeatedPatternState { line, name } => {
                write!(f, "state {name} repeated in pattern{}", at_line(*line))
            }
            DuplicatePattern { state, pattern, line } => {
                write!(f, "duplicate rule for state {state} with pattern {pattern}{}", at_line(*line))
            }
            Uncovered { state } => write!(f, "state {state} uncovered"),
        }
    }
}

/// Outcome of [`validate`]. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s != "*" && s != "->" && !s.chars().any(|c| c.is_whitespace() || "{}(),|#".contains(c))
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Number of distinct environments a scout can observe: subsets of the state
/// set of size at most `c - 1`.
fn realizable_environments(states: usize, scouts: usize) -> u128 {
    let kmax = scouts.saturating_sub(1).min(states);
    (0..=kmax).fold(0u128, |acc, k| acc.saturating_add(binomial(states as u128, k as u128)))
}

/// Reports every invariant the draft breaks.
pub fn validate(d: &ProtocolDraft) -> ValidationReport {
    let mut v = Vec::new();
    let dim = match d.dim {
        1 | 2 => Some(d.dim as usize),
        other => {
            v.push(Violation::UnsupportedDimension(other));
            None
        }
    };
    if d.scouts < 1 {
        v.push(Violation::InvalidScoutCount(d.scouts));
    }
    if d.states.is_empty() {
        v.push(Violation::NoStates);
    }
    if d.states.len() > MAX_STATES {
        v.push(Violation::TooManyStates(d.states.len()));
    }
    let mut declared = BTreeSet::new();
    for s in &d.states {
        if !valid_name(s) {
            v.push(Violation::InvalidStateName(s.clone()));
        }
        if !declared.insert(s.as_str()) {
            v.push(Violation::DuplicateState(s.clone()));
        }
    }
    let check_state = |v: &mut Vec<Violation>, name: &str, context: String| {
        if !declared.contains(name) {
            v.push(Violation::UnknownState { name: name.to_string(), context });
        }
    };

    if let (Some(dim), Some(origin)) = (dim, &d.origin) {
        if origin.len() != dim {
            v.push(Violation::OriginDimension { expected: dim, found: origin.len() });
        }
    }

    let mut seen_init = BTreeSet::new();
    for (scout, state) in &d.init {
        if *scout < 1 || *scout > d.scouts {
            v.push(Violation::InitOutOfRange { scout: *scout });
        } else if !seen_init.insert(*scout) {
            v.push(Violation::DuplicateInit { scout: *scout });
        }
        check_state(&mut v, state, format!("init of scout {scout}"));
    }
    for scout in 1..=d.scouts.max(0) {
        if !seen_init.contains(&scout) {
            v.push(Violation::MissingInit { scout });
        }
    }

    let mut patterns: BTreeMap<&str, HashSet<Vec<&str>>> = BTreeMap::new();
    let mut wildcards: BTreeSet<&str> = BTreeSet::new();
    for r in &d.rules {
        let ctx = if r.line > 0 { format!("rule on line {}", r.line) } else { format!("rule for {}", r.from) };
        check_state(&mut v, &r.from, ctx.clone());
        match &r.pattern {
            DraftPattern::Wildcard => {
                if !wildcards.insert(r.from.as_str()) {
                    v.push(Violation::DuplicatePattern { state: r.from.clone(), pattern: "*".into(), line: r.line });
                }
            }
            DraftPattern::Exact(names) => {
                let mut set: Vec<&str> = Vec::new();
                for n in names {
                    check_state(&mut v, n, ctx.clone());
                    if set.contains(&n.as_str()) {
                        v.push(Violation::RepeatedPatternState { line: r.line, name: n.clone() });
                    } else {
                        set.push(n);
                    }
                }
                set.sort_unstable();
                let pattern = format!("{{{}}}", set.join(","));
                if !patterns.entry(r.from.as_str()).or_default().insert(set) {
                    v.push(Violation::DuplicatePattern { state: r.from.clone(), pattern, line: r.line });
                }
            }
        }
        if r.outcomes.is_empty() {
            v.push(Violation::EmptyRow { line: r.line });
            continue;
        }
        for o in &r.outcomes {
            check_state(&mut v, &o.to, ctx.clone());
            if let Some(dim) = dim {
                if o.mv.len() != dim {
                    v.push(Violation::MoveDimension { line: r.line, expected: dim, found: o.mv.len() });
                }
            }
            for &c in &o.mv {
                if !(-1..=1).contains(&c) {
                    v.push(Violation::MoveComponent { line: r.line, value: c });
                }
            }
            if o.prob.is_negative() {
                v.push(Violation::NegativeProbability { line: r.line });
            }
        }
        let sum = Scalar::sum(r.outcomes.iter().map(|o| &o.prob));
        if !sum.is_unit_sum() {
            v.push(Violation::RowSum { line: r.line, sum: sum.value() });
        }
    }

    if d.scouts >= 1 {
        let needed = realizable_environments(d.states.len(), d.scouts as usize);
        for s in &d.states {
            if wildcards.contains(s.as_str()) {
                continue;
            }
            let covered = patterns
                .get(s.as_str())
                .map(|ps| ps.iter().filter(|p| p.len() < d.scouts as usize && p.iter().all(|n| declared.contains(n))).count() as u128)
                .unwrap_or(0);
            if covered < needed {
                v.push(Violation::Uncovered { state: s.clone() });
            }
        }
    }

    ValidationReport { violations: v }
}

impl ProtocolDraft {
    pub fn rename_states(&mut self, rename: &impl Fn(&str) -> String) {
        for s in &mut self.states {
            *s = rename(s);
        }
        for (_, s) in &mut self.init {
            *s = rename(s);
        }
        for r in &mut self.rules {
            r.from = rename(&r.from);
            if let DraftPattern::Exact(names) = &mut r.pattern {
                for n in names.iter_mut() {
                    *n = rename(n);
                }
            }
            for o in &mut r.outcomes {
                o.to = rename(&o.to);
            }
        }
    }
}

impl ScoutProtocol {
    /// Validates and freezes a draft.
    pub fn from_draft(d: &ProtocolDraft) -> Result<ScoutProtocol, ProtocolError> {
        let report = validate(d);
        if !report.is_valid() {
            return Err(ProtocolError::Invalid(report));
        }
        let dim = d.dim as usize;
        let mut states = d.states.clone();
        states.sort();
        let id = |name: &str| StateId(states.binary_search_by(|s| s.as_str().cmp(name)).expect("validated") as u32);
        let mut origin = [0i64; 2];
        if let Some(o) = &d.origin {
            origin[..o.len()].copy_from_slice(o);
        }
        let mut init: Vec<(i64, StateId)> = d.init.iter().map(|(i, s)| (*i, id(s))).collect();
        init.sort_by_key(|(i, _)| *i);
        let initial_states = init.into_iter().map(|(_, s)| s).collect();
        let rules = d
            .rules
            .iter()
            .map(|r| TransitionRule {
                from: id(&r.from),
                pattern: match &r.pattern {
                    DraftPattern::Wildcard => EnvPattern::Wildcard,
                    DraftPattern::Exact(names) => EnvPattern::Exact(StateSet::from_states(names.iter().map(|n| id(n)))),
                },
                outcomes: r
                    .outcomes
                    .iter()
                    .map(|o| Outcome { prob: o.prob.clone(), to: id(&o.to), mv: Move::new(&o.mv).expect("validated") })
                    .collect(),
            })
            .collect();
        Ok(ScoutProtocol::build(dim, states, origin, initial_states, rules))
    }

    /// Draft with the same content; `from_draft(to_draft(p)) == p`.
    pub fn to_draft(&self) -> ProtocolDraft {
        let name = |s: StateId| self.states[s.index()].clone();
        ProtocolDraft {
            dim: self.dim as i64,
            scouts: self.scouts() as i64,
            states: self.states.clone(),
            origin: Some(self.origin[..self.dim].to_vec()),
            init: self.initial_states.iter().enumerate().map(|(i, &s)| (i as i64 + 1, name(s))).collect(),
            rules: self
                .rules
                .iter()
                .map(|r| DraftRule {
                    from: name(r.from),
                    pattern: match r.pattern {
                        EnvPattern::Wildcard => DraftPattern::Wildcard,
                        EnvPattern::Exact(set) => DraftPattern::Exact(set.iter().map(name).collect()),
                    },
                    outcomes: r
                        .outcomes
                        .iter()
                        .map(|o| DraftOutcome { prob: o.prob.clone(), to: name(o.to), mv: o.mv.components(self.dim) })
                        .collect(),
                    line: 0,
                })
                .collect(),
        }
    }
}
