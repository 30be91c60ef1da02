//! Structure of the single-scout automaton under the empty environment:
//! classes, stationary laws, drifts, degeneracy, product chains and thick rays.

mod degeneracy;
mod linalg;
mod ray;
mod report;

use num::rational::BigRational;
use num::{One, Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;
use thiserror::Error;

use crate::protocol::{ScoutProtocol, StateId, StateSet};
use crate::scalar::{format_rational, rational_to_f64, Scalar};
use crate::stream::{self, SeedSpec};

pub use degeneracy::{degeneracy_check, DegeneracyVerdict, WitnessStep};
pub use ray::{ray_domain, ClassRay, RayKind, ThickRay};
pub use report::{analyze, analyze_with_width, ClassEntry, ClassReport, RecurrentAnalysis};

/// Moves of product chains need up to four coordinates.
pub const MAX_KERNEL_DIM: usize = 4;

pub type Disp = [i64; MAX_KERNEL_DIM];

/// Largest stationary-distribution residual accepted on the floating path.
pub const STATIONARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("row of state {state} sums to {sum}, not 1")]
    RowSum { state: String, sum: f64 },
    #[error("row of state {state} points to missing state {to}")]
    BadTarget { state: String, to: usize },
    #[error("move of dimension {found} in a kernel of dimension {expected}")]
    MoveDimension { expected: usize, found: usize },
    #[error("kernel dimension {0} unsupported")]
    Dimension(usize),
    #[error("class {{{0}}} is transient")]
    Transient(String),
    #[error("state {0} is not in a recurrent class")]
    NotRecurrent(String),
    #[error("state {0} is unreachable from the initial state")]
    Unreachable(String),
    #[error("scout index {index} out of range for {scouts} scouts")]
    ScoutOutOfRange { index: usize, scouts: usize },
    #[error("operation needs exactly 2 scouts, protocol has {0}")]
    NotTwoScouts(usize),
    #[error("operation needs a two-dimensional kernel, got dimension {0}")]
    NeedsPlane(usize),
    #[error("stationary equations are singular on class {{{0}}}")]
    Singular(String),
    #[error("stationary residual {residual:e} exceeds {STATIONARY_TOLERANCE:e}")]
    Residual { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelEntry {
    pub to: usize,
    pub mv: Disp,
    pub prob: Scalar,
}

/// Transition law `Π'(q, (q', ξ))` of one scout that never observes company.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedKernel {
    dim: usize,
    names: Vec<String>,
    rows: Vec<Vec<KernelEntry>>,
    cdfs: Vec<Vec<f64>>,
}

impl ReducedKernel {
    /// Builds a kernel from rows of `(target, move, probability)`.
    pub fn new(dim: usize, names: Vec<String>, rows: Vec<Vec<(usize, Vec<i64>, Scalar)>>) -> Result<Self, AnalysisError> {
        if dim == 0 || dim > MAX_KERNEL_DIM {
            return Err(AnalysisError::Dimension(dim));
        }
        let n = names.len();
        let mut out = Vec::with_capacity(rows.len());
        for (q, row) in rows.into_iter().enumerate() {
            let mut entries = Vec::with_capacity(row.len());
            for (to, mv, prob) in row {
                if to >= n {
                    return Err(AnalysisError::BadTarget { state: names[q].clone(), to });
                }
                if mv.len() != dim {
                    return Err(AnalysisError::MoveDimension { expected: dim, found: mv.len() });
                }
                let mut d = [0i64; MAX_KERNEL_DIM];
                d[..dim].copy_from_slice(&mv);
                entries.push(KernelEntry { to, mv: d, prob });
            }
            let sum = Scalar::sum(entries.iter().map(|e| &e.prob));
            if entries.iter().any(|e| e.prob.is_negative()) || !sum.is_unit_sum() {
                return Err(AnalysisError::RowSum { state: names[q].clone(), sum: sum.value() });
            }
            out.push(entries);
        }
        assert_eq!(out.len(), n, "one row per state");
        let cdfs = out.iter().map(|r| stream::cumulative(r.iter().map(|e| e.prob.value()))).collect();
        Ok(ReducedKernel { dim, names, rows: out, cdfs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn row(&self, q: usize) -> &[KernelEntry] {
        &self.rows[q]
    }

    /// Whether every probability is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.rows.iter().flatten().all(|e| e.prob.is_exact())
    }

    /// Transitions with positive probability.
    pub fn support(&self, q: usize) -> impl Iterator<Item = &KernelEntry> {
        self.rows[q].iter().filter(|e| !e.prob.is_zero())
    }

    #[inline]
    pub fn sample(&self, q: usize, u: f64) -> &KernelEntry {
        &self.rows[q][stream::pick(&self.cdfs[q], u)]
    }

    pub fn disp_vec(&self, d: &Disp) -> Vec<i64> {
        d[..self.dim].to_vec()
    }
}

/// Kernel of scout `scout` (0-based) under the empty environment.
pub fn reduce_kernel(p: &ScoutProtocol, scout: usize) -> Result<ReducedKernel, AnalysisError> {
    if scout >= p.scouts() {
        return Err(AnalysisError::ScoutOutOfRange { index: scout, scouts: p.scouts() });
    }
    let rows = (0..p.state_count())
        .map(|q| {
            let rule = p.rule_for(StateId(q as u32), StateSet::EMPTY).expect("validated protocol covers the empty environment");
            rule.outcomes.iter().map(|o| (o.to.index(), o.mv.components(p.dim()), o.prob.clone())).collect()
        })
        .collect();
    ReducedKernel::new(p.dim(), p.state_names().to_vec(), rows)
}

/// A strongly connected component of the support graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelClass {
    pub states: Vec<usize>,
    /// No support edge leaves the class.
    pub recurrent: bool,
}

impl KernelClass {
    pub fn root(&self) -> usize {
        self.states[0]
    }

    pub fn contains(&self, q: usize) -> bool {
        self.states.binary_search(&q).is_ok()
    }

    pub fn label(&self, k: &ReducedKernel) -> String {
        self.states.iter().map(|&q| k.name(q)).collect::<Vec<_>>().join(",")
    }
}

/// SCC decomposition, classes ordered by smallest member.
pub fn classes(k: &ReducedKernel) -> Vec<KernelClass> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(k.len(), 0);
    let nodes: Vec<_> = (0..k.len()).map(|_| g.add_node(())).collect();
    for q in 0..k.len() {
        for e in k.support(q) {
            g.update_edge(nodes[q], nodes[e.to], ());
        }
    }
    let mut comp = vec![0usize; k.len()];
    let mut out: Vec<KernelClass> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut states: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            states.sort_unstable();
            KernelClass { states, recurrent: true }
        })
        .collect();
    out.sort_by_key(|c| c.states[0]);
    for (ci, c) in out.iter().enumerate() {
        for &q in &c.states {
            comp[q] = ci;
        }
    }
    for ci in 0..out.len() {
        let leaves = out[ci].states.iter().any(|&q| k.support(q).any(|e| comp[e.to] != ci));
        out[ci].recurrent = !leaves;
    }
    out
}

/// Recurrent class containing `q`, if any.
pub fn recurrent_class_of(k: &ReducedKernel, q: usize) -> Option<KernelClass> {
    classes(k).into_iter().find(|c| c.contains(q) && c.recurrent)
}

/// Stationary law on a recurrent class, in the class's state order.
#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub states: Vec<usize>,
    pub exact: Option<Vec<BigRational>>,
    pub values: Vec<f64>,
    /// `max_j |(πP)_j − π_j|`; zero on the exact path.
    pub residual: f64,
}

fn require_recurrent(k: &ReducedKernel, class: &KernelClass) -> Result<(), AnalysisError> {
    if class.recurrent {
        Ok(())
    } else {
        Err(AnalysisError::Transient(class.label(k)))
    }
}

fn class_matrix<T: Clone + Zero>(k: &ReducedKernel, class: &KernelClass, conv: impl Fn(&Scalar) -> T) -> Vec<Vec<T>>
where
    T: std::ops::Add<Output = T>,
{
    let n = class.states.len();
    let mut m = vec![vec![T::zero(); n]; n];
    for (i, &q) in class.states.iter().enumerate() {
        for e in k.support(q) {
            if let Ok(j) = class.states.binary_search(&e.to) {
                m[i][j] = m[i][j].clone() + conv(&e.prob);
            }
        }
    }
    m
}

/// Stationary equations `πP = π`, `Σπ = 1` as a square system.
fn stationary_system<T>(p: &[Vec<T>]) -> (Vec<Vec<T>>, Vec<T>)
where
    T: Clone + Zero + One + std::ops::Sub<Output = T>,
{
    let n = p.len();
    let mut a = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        for i in 0..n {
            a[j][i] = p[i][j].clone();
        }
        a[j][j] = a[j][j].clone() - T::one();
    }
    a[n - 1] = vec![T::one(); n];
    let mut b = vec![T::zero(); n];
    b[n - 1] = T::one();
    (a, b)
}

pub fn stationary(k: &ReducedKernel, class: &KernelClass) -> Result<Stationary, AnalysisError> {
    require_recurrent(k, class)?;
    if k.is_exact() {
        let p = class_matrix(k, class, |s| s.exact().expect("exact kernel").clone());
        let (a, b) = stationary_system(&p);
        let pi = linalg::solve(a, b).ok_or_else(|| AnalysisError::Singular(class.label(k)))?;
        let n = pi.len();
        for j in 0..n {
            let flow = (0..n).fold(BigRational::zero(), |acc, i| acc + &pi[i] * &p[i][j]);
            assert_eq!(flow, pi[j], "exact stationary solution must satisfy πP = π");
        }
        let values = pi.iter().map(rational_to_f64).collect();
        Ok(Stationary { states: class.states.clone(), exact: Some(pi), values, residual: 0.0 })
    } else {
        let p = class_matrix(k, class, |s| s.value());
        let (a, b) = stationary_system(&p);
        let pi = linalg::solve(a, b).ok_or_else(|| AnalysisError::Singular(class.label(k)))?;
        let n = pi.len();
        let residual = (0..n).map(|j| ((0..n).map(|i| pi[i] * p[i][j]).sum::<f64>() - pi[j]).abs()).fold(0.0, f64::max);
        if residual > STATIONARY_TOLERANCE {
            return Err(AnalysisError::Residual { residual });
        }
        Ok(Stationary { states: class.states.clone(), exact: None, values: pi, residual })
    }
}

/// A vector carried exactly when the kernel is rational.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactVector {
    pub exact: Option<Vec<BigRational>>,
    pub values: Vec<f64>,
}

impl ExactVector {
    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(v) => v.iter().all(|x| x.is_zero()),
            None => self.values.iter().all(|x| x.abs() <= 1e-12),
        }
    }

    /// Entries as fraction strings when exact, else decimal.
    pub fn to_strings(&self) -> Vec<String> {
        match &self.exact {
            Some(v) => v.iter().map(format_rational).collect(),
            None => self.values.iter().map(|x| format!("{x:e}")).collect(),
        }
    }

    pub fn signs(&self) -> Vec<i32> {
        match &self.exact {
            Some(v) => v
                .iter()
                .map(|x| {
                    if x.is_zero() {
                        0
                    } else if x.is_positive() {
                        1
                    } else {
                        -1
                    }
                })
                .collect(),
            None => self
                .values
                .iter()
                .map(|x| {
                    if x.abs() <= 1e-12 {
                        0
                    } else if *x > 0.0 {
                        1
                    } else {
                        -1
                    }
                })
                .collect(),
        }
    }

    fn scale(&self, factor_exact: Option<&BigRational>, factor: f64) -> ExactVector {
        ExactVector {
            exact: match (&self.exact, factor_exact) {
                (Some(v), Some(f)) => Some(v.iter().map(|x| x * f).collect()),
                _ => None,
            },
            values: self.values.iter().map(|x| x * factor).collect(),
        }
    }
}

/// Effective drift `Σ_q π(q) Σ Π'(q,(q',ξ)) ξ` of a recurrent class.
pub fn effective_drift(k: &ReducedKernel, class: &KernelClass) -> Result<ExactVector, AnalysisError> {
    let st = stationary(k, class)?;
    Ok(drift_from(k, &st))
}

fn drift_from(k: &ReducedKernel, st: &Stationary) -> ExactVector {
    let d = k.dim();
    let values = (0..d)
        .map(|c| {
            st.states.iter().zip(&st.values).map(|(&q, pi)| pi * k.support(q).map(|e| e.prob.value() * e.mv[c] as f64).sum::<f64>()).sum()
        })
        .collect();
    let exact = st.exact.as_ref().map(|pi| {
        (0..d)
            .map(|c| {
                st.states.iter().zip(pi).fold(BigRational::zero(), |acc, (&q, w)| {
                    let row = k.support(q).fold(BigRational::zero(), |a, e| {
                        a + e.prob.exact().expect("exact kernel") * BigRational::from_integer(e.mv[c].into())
                    });
                    acc + w * row
                })
            })
            .collect()
    });
    ExactVector { exact, values }
}

/// Mean return time `E ν = 1/π(q0)` and mean return displacement `E ζ = d / π(q0)`.
pub fn return_moments(k: &ReducedKernel, class: &KernelClass, q0: usize) -> Result<(ExactVector, ExactVector), AnalysisError> {
    let st = stationary(k, class)?;
    let i = st.states.iter().position(|&q| q == q0).ok_or_else(|| AnalysisError::NotRecurrent(k.name(q0).to_string()))?;
    let inv_exact = st.exact.as_ref().map(|pi| BigRational::one() / &pi[i]);
    let inv = 1.0 / st.values[i];
    let nu = ExactVector { exact: inv_exact.clone().map(|x| vec![x]), values: vec![inv] };
    let zeta = drift_from(k, &st).scale(inv_exact.as_ref(), inv);
    Ok((nu, zeta))
}

/// One excursion between consecutive visits to the observed state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenewalSample {
    /// Displacement over the excursion.
    pub zeta: Vec<i64>,
    /// Return time.
    pub nu: u64,
    /// Look-around radius, `2ν`.
    pub r: u64,
}

/// `count` consecutive excursions of the kernel chain started at `q0`.
pub fn kernel_renewal_samples(k: &ReducedKernel, q0: usize, count: usize, seed: SeedSpec) -> Result<Vec<RenewalSample>, AnalysisError> {
    if recurrent_class_of(k, q0).is_none() {
        return Err(AnalysisError::NotRecurrent(k.name(q0).to_string()));
    }
    let s = seed.lane(0);
    let mut counter = 0u64;
    let mut out = Vec::with_capacity(count);
    let mut q = q0;
    for _ in 0..count {
        let mut disp = [0i64; MAX_KERNEL_DIM];
        let mut nu = 0u64;
        loop {
            let e = k.sample(q, s.uniform(counter));
            counter += 1;
            nu += 1;
            for (a, b) in disp.iter_mut().zip(e.mv) {
                *a += b;
            }
            q = e.to;
            if q == q0 {
                break;
            }
        }
        out.push(RenewalSample { zeta: k.disp_vec(&disp), nu, r: 2 * nu });
    }
    Ok(out)
}

/// Renewal triples of scout `scout` observed at returns to `q0`.
pub fn renewal_samples(
    p: &ScoutProtocol,
    scout: usize,
    q0: StateId,
    count: usize,
    seed: SeedSpec,
) -> Result<Vec<RenewalSample>, AnalysisError> {
    let k = reduce_kernel(p, scout)?;
    let start = p.initial_states()[scout].index();
    if !reachable(&k, start)[q0.index()] {
        return Err(AnalysisError::Unreachable(k.name(q0.index()).to_string()));
    }
    kernel_renewal_samples(&k, q0.index(), count, seed)
}

/// States reachable from `from` along support edges.
pub fn reachable(k: &ReducedKernel, from: usize) -> Vec<bool> {
    let mut seen = vec![false; k.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(q) = stack.pop() {
        for e in k.support(q) {
            if !seen[e.to] {
                seen[e.to] = true;
                stack.push(e.to);
            }
        }
    }
    seen
}

/// How the moves of a product chain are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMoves {
    /// `(ξ¹, ξ²)` concatenated.
    Joint,
    /// `ξ¹ − ξ²`.
    Difference,
}

/// Chain of two independent kernels on `S¹ × S²`; state `(a, b)` has index `a·|S²| + b`.
pub fn product_kernel(k1: &ReducedKernel, k2: &ReducedKernel, moves: ProductMoves) -> Result<ReducedKernel, AnalysisError> {
    let dim = match moves {
        ProductMoves::Joint => k1.dim() + k2.dim(),
        ProductMoves::Difference => {
            if k1.dim() != k2.dim() {
                return Err(AnalysisError::MoveDimension { expected: k1.dim(), found: k2.dim() });
            }
            k1.dim()
        }
    };
    if dim > MAX_KERNEL_DIM {
        return Err(AnalysisError::Dimension(dim));
    }
    let n2 = k2.len();
    let mut names = Vec::with_capacity(k1.len() * n2);
    let mut rows = Vec::with_capacity(k1.len() * n2);
    for a in 0..k1.len() {
        for b in 0..n2 {
            names.push(format!("({},{})", k1.name(a), k2.name(b)));
            let mut row = Vec::new();
            for e1 in k1.row(a) {
                for e2 in k2.row(b) {
                    let mv: Vec<i64> = match moves {
                        ProductMoves::Joint => k1.disp_vec(&e1.mv).into_iter().chain(k2.disp_vec(&e2.mv)).collect(),
                        ProductMoves::Difference => (0..dim).map(|c| e1.mv[c] - e2.mv[c]).collect(),
                    };
                    row.push((e1.to * n2 + e2.to, mv, e1.prob.mul(&e2.prob)));
                }
            }
            rows.push(row);
        }
    }
    ReducedKernel::new(dim, names, rows)
}

/// Product of the reduced kernels of the two scouts, with joint moves in ℤ^{2d}.
pub fn joint_product_chain(p: &ScoutProtocol) -> Result<ReducedKernel, AnalysisError> {
    if p.scouts() != 2 {
        return Err(AnalysisError::NotTwoScouts(p.scouts()));
    }
    product_kernel(&reduce_kernel(p, 0)?, &reduce_kernel(p, 1)?, ProductMoves::Joint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{builtin, parse_protocol};
    use std::collections::BTreeMap;

    pub(crate) fn kernel(dim: usize, names: &[&str], rows: &[&[(usize, &[i64], &str)]]) -> ReducedKernel {
        ReducedKernel::new(
            dim,
            names.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|r| r.iter().map(|(to, mv, p)| (*to, mv.to_vec(), p.parse().unwrap())).collect()).collect(),
        )
        .unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn srw_kernel() {
        let k = reduce_kernel(&builtin("srw", &BTreeMap::new()).unwrap(), 0).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k.row(0).len(), 2);
        assert!(k.row(0).iter().all(|e| e.prob == Scalar::ratio(1, 2)));
    }

    #[test]
    fn reduced_kernel_ignores_colocation_rules() {
        let p = parse_protocol("dim 1\nscouts 2\nstates a\ninit 1 a\ninit 2 a\ntrans a {} -> 1 a (+1)\ntrans a {a} -> 1 a (-1)\n").unwrap();
        let k = reduce_kernel(&p, 1).unwrap();
        assert_eq!(k.row(0).len(), 1);
        assert_eq!(k.row(0)[0].mv[0], 1);
        assert!(reduce_kernel(&p, 2).is_err());
    }

    #[test]
    fn anchored_runner_is_absorbed_by_return_states() {
        // without sensing the beacon, the homeward states never turn around
        let p = builtin("anchored_geometric", &[("d".to_string(), "1".to_string())].into()).unwrap();
        let k = reduce_kernel(&p, 1).unwrap();
        let rec: Vec<Vec<&str>> =
            classes(&k).into_iter().filter(|c| c.recurrent).map(|c| c.states.iter().map(|&s| k.name(s)).collect()).collect();
        assert_eq!(rec, vec![vec!["Anchor"], vec!["BackE"], vec!["BackW"]]);
        let back_e = recurrent_class_of(&k, k.state_index("BackE").unwrap()).unwrap();
        assert_eq!(effective_drift(&k, &back_e).unwrap().exact.unwrap(), vec![q(-1, 1)]);
    }

    #[test]
    fn class_examples() {
        let k = kernel(1, &["a"], &[&[(0, &[1], "1")]]);
        assert_eq!(classes(&k), vec![KernelClass { states: vec![0], recurrent: true }]);
        let k = kernel(1, &["a", "b"], &[&[(1, &[0], "1")], &[(1, &[0], "1")]]);
        assert_eq!(classes(&k), vec![KernelClass { states: vec![0], recurrent: false }, KernelClass { states: vec![1], recurrent: true }]);
        let k = kernel(1, &["a", "b"], &[&[(0, &[0], "1")], &[(1, &[0], "1")]]);
        assert!(classes(&k).iter().all(|c| c.recurrent));
    }

    #[test]
    fn drift_examples() {
        let k = kernel(1, &["a"], &[&[(0, &[1], "1")]]);
        assert_eq!(effective_drift(&k, &classes(&k)[0]).unwrap().exact.unwrap(), vec![q(1, 1)]);
        let k = kernel(1, &["a", "b"], &[&[(1, &[1], "1")], &[(0, &[-1], "1")]]);
        assert!(effective_drift(&k, &classes(&k)[0]).unwrap().is_zero());
        let k = kernel(1, &["a", "b"], &[&[(1, &[1], "1")], &[(0, &[0], "1")]]);
        let c = &classes(&k)[0];
        assert_eq!(stationary(&k, c).unwrap().exact.unwrap(), vec![q(1, 2), q(1, 2)]);
        assert_eq!(effective_drift(&k, c).unwrap().exact.unwrap(), vec![q(1, 2)]);
        let (nu, zeta) = return_moments(&k, c, 0).unwrap();
        assert_eq!(nu.exact.unwrap(), vec![q(2, 1)]);
        assert_eq!(zeta.exact.unwrap(), vec![q(1, 1)]);
    }

    #[test]
    fn transient_class_rejected() {
        let k = kernel(1, &["a", "b"], &[&[(1, &[0], "1")], &[(1, &[0], "1")]]);
        let c = &classes(&k)[0];
        assert!(matches!(effective_drift(&k, c), Err(AnalysisError::Transient(_))));
    }

    #[test]
    fn float_kernel_path() {
        let k = kernel(1, &["a", "b"], &[&[(1, &[1], "3e-1"), (0, &[0], "7e-1")], &[(0, &[-1], "1")]]);
        let st = stationary(&k, &classes(&k)[0]).unwrap();
        assert!(st.exact.is_none());
        assert!(st.residual <= STATIONARY_TOLERANCE);
        // π = (1/1.3, 0.3/1.3)
        assert!((st.values[0] - 1.0 / 1.3).abs() < 1e-12);
        assert!(effective_drift(&k, &classes(&k)[0]).unwrap().values[0].abs() < 1e-12);
    }

    #[test]
    fn renewal_examples() {
        let k = kernel(1, &["a"], &[&[(0, &[1], "1")]]);
        let s = kernel_renewal_samples(&k, 0, 5, SeedSpec::new(0, 0)).unwrap();
        assert!(s.iter().all(|r| r == &RenewalSample { zeta: vec![1], nu: 1, r: 2 }));
        let k = kernel(1, &["a", "b"], &[&[(1, &[1], "1")], &[(0, &[0], "1")]]);
        let s = kernel_renewal_samples(&k, 0, 5, SeedSpec::new(0, 0)).unwrap();
        assert!(s.iter().all(|r| r == &RenewalSample { zeta: vec![1], nu: 2, r: 4 }));
        let k = kernel(1, &["a", "b"], &[&[(1, &[0], "1")], &[(1, &[0], "1")]]);
        assert!(kernel_renewal_samples(&k, 0, 1, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn product_drift_examples() {
        let one = kernel(1, &["a"], &[&[(0, &[1], "1")]]);
        let half = kernel(1, &["a", "b"], &[&[(1, &[1], "1")], &[(0, &[0], "1")]]);
        let diff = product_kernel(&one, &one, ProductMoves::Difference).unwrap();
        assert!(effective_drift(&diff, &classes(&diff)[0]).unwrap().is_zero());
        let diff = product_kernel(&one, &half, ProductMoves::Difference).unwrap();
        for c in classes(&diff).iter().filter(|c| c.recurrent) {
            assert_eq!(effective_drift(&diff, c).unwrap().exact.unwrap(), vec![q(1, 2)]);
        }
        let p = builtin("independent_walks", &[("c".to_string(), "2".to_string())].into()).unwrap();
        let joint = joint_product_chain(&p).unwrap();
        assert_eq!(joint.dim(), 2);
        let d = effective_drift(&joint, &classes(&joint)[0]).unwrap();
        assert!(d.is_zero());
        assert!(joint_product_chain(&builtin("srw", &BTreeMap::new()).unwrap()).is_err());
    }
}
