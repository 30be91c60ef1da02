use std::collections::VecDeque;

use serde::Serialize;

use super::{require_recurrent, AnalysisError, KernelClass, ReducedKernel, MAX_KERNEL_DIM};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessStep {
    pub from: usize,
    pub to: usize,
    pub mv: Vec<i64>,
}

/// Whether returns to the class root always have zero displacement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyVerdict {
    pub root: usize,
    pub degenerate: bool,
    /// `(state, x_q)` with `x_root = 0`; present iff degenerate.
    pub offsets: Option<Vec<(usize, Vec<i64>)>>,
    /// Closed walk through the root with nonzero displacement; present iff not degenerate.
    pub witness_cycle: Option<Vec<WitnessStep>>,
    pub witness_displacement: Option<Vec<i64>>,
    /// `max_q ‖x_q‖₂`; present iff degenerate.
    pub radius: Option<f64>,
}

impl DegeneracyVerdict {
    pub fn offset_of(&self, q: usize) -> Option<&[i64]> {
        self.offsets.as_ref()?.iter().find(|(s, _)| *s == q).map(|(_, x)| x.as_slice())
    }
}

type Edge = (usize, usize, [i64; MAX_KERNEL_DIM]);

/// Breadth-first shortest path from `from` to `to` inside the class.
fn path_within(k: &ReducedKernel, class: &KernelClass, from: usize, to: usize) -> Vec<Edge> {
    if from == to {
        return Vec::new();
    }
    let mut parent: Vec<Option<Edge>> = vec![None; k.len()];
    let mut seen = vec![false; k.len()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(q) = queue.pop_front() {
        for e in k.support(q) {
            if class.contains(e.to) && !seen[e.to] {
                seen[e.to] = true;
                parent[e.to] = Some((q, e.to, e.mv));
                if e.to == to {
                    let mut path = Vec::new();
                    let mut cur = to;
                    while cur != from {
                        let edge = parent[cur].expect("parent recorded");
                        cur = edge.0;
                        path.push(edge);
                    }
                    path.reverse();
                    return path;
                }
                queue.push_back(e.to);
            }
        }
    }
    unreachable!("recurrent classes are strongly connected")
}

/// Decides whether every closed walk of the class has zero net displacement by
/// propagating potentials `x_{q'} = x_q + ξ` from the root over support edges.
pub fn degeneracy_check(k: &ReducedKernel, class: &KernelClass) -> Result<DegeneracyVerdict, AnalysisError> {
    require_recurrent(k, class)?;
    let dim = k.dim();
    let root = class.root();
    let mut pot: Vec<Option<[i64; MAX_KERNEL_DIM]>> = vec![None; k.len()];
    let mut tree: Vec<Option<Edge>> = vec![None; k.len()];
    pot[root] = Some([0; MAX_KERNEL_DIM]);
    let mut queue = VecDeque::from([root]);
    let mut conflict: Option<Edge> = None;
    while let Some(q) = queue.pop_front() {
        let xq = pot[q].expect("visited");
        for e in k.support(q) {
            if !class.contains(e.to) {
                continue;
            }
            let mut want = xq;
            for c in 0..dim {
                want[c] += e.mv[c];
            }
            match pot[e.to] {
                None => {
                    pot[e.to] = Some(want);
                    tree[e.to] = Some((q, e.to, e.mv));
                    queue.push_back(e.to);
                }
                Some(x) if x != want => {
                    if conflict.is_none() {
                        conflict = Some((q, e.to, e.mv));
                    }
                }
                Some(_) => {}
            }
        }
    }

    let Some(star) = conflict else {
        let offsets: Vec<(usize, Vec<i64>)> =
            class.states.iter().map(|&q| (q, pot[q].expect("class is connected")[..dim].to_vec())).collect();
        let radius = offsets.iter().map(|(_, x)| x.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt()).fold(0.0, f64::max);
        return Ok(DegeneracyVerdict {
            root,
            degenerate: true,
            offsets: Some(offsets),
            witness_cycle: None,
            witness_displacement: None,
            radius: Some(radius),
        });
    };

    let tree_path = |to: usize| {
        let mut path = Vec::new();
        let mut cur = to;
        while cur != root {
            let e = tree[cur].expect("tree edge");
            cur = e.0;
            path.push(e);
        }
        path.reverse();
        path
    };
    let (a, b, _) = star;
    let back = path_within(k, class, b, root);
    // The two walks differ by x_a + ξ* − x_b ≠ 0, so at least one is nonzero.
    let w1: Vec<Edge> = tree_path(b).into_iter().chain(back.iter().copied()).collect();
    let w2: Vec<Edge> = tree_path(a).into_iter().chain([star]).chain(back.iter().copied()).collect();
    let disp = |w: &[Edge]| {
        let mut d = vec![0i64; dim];
        for (_, _, mv) in w {
            for c in 0..dim {
                d[c] += mv[c];
            }
        }
        d
    };
    let d1 = disp(&w1);
    let (walk, displacement) = if !w1.is_empty() && d1.iter().any(|&c| c != 0) {
        (w1, d1)
    } else {
        let d2 = disp(&w2);
        (w2, d2)
    };
    debug_assert!(displacement.iter().any(|&c| c != 0));
    Ok(DegeneracyVerdict {
        root,
        degenerate: false,
        offsets: None,
        witness_cycle: Some(walk.into_iter().map(|(from, to, mv)| WitnessStep { from, to, mv: mv[..dim].to_vec() }).collect()),
        witness_displacement: Some(displacement),
        radius: None,
    })
}

#[cfg(test)]
mod tests {
    use super::super::classes;
    use super::super::tests::kernel;
    use super::*;

    #[test]
    fn zero_cycle_is_degenerate() {
        let k = kernel(1, &["a", "b"], &[&[(1, &[1], "1")], &[(0, &[-1], "1")]]);
        let v = degeneracy_check(&k, &classes(&k)[0]).unwrap();
        assert!(v.degenerate);
        assert_eq!(v.offsets.unwrap(), vec![(0, vec![0]), (1, vec![1])]);
        assert_eq!(v.radius, Some(1.0));
    }

    #[test]
    fn drifting_cycle_has_witness() {
        let k = kernel(1, &["a", "b"], &[&[(1, &[1], "1")], &[(0, &[1], "1")]]);
        let v = degeneracy_check(&k, &classes(&k)[0]).unwrap();
        assert!(!v.degenerate);
        let w = v.witness_cycle.unwrap();
        assert_eq!(w.iter().map(|s| (s.from, s.to)).collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
        assert_eq!(v.witness_displacement, Some(vec![2]));
    }

    #[test]
    fn conflicting_self_loops() {
        let k = kernel(1, &["a"], &[&[(0, &[1], "1/2"), (0, &[-1], "1/2")]]);
        let v = degeneracy_check(&k, &classes(&k)[0]).unwrap();
        assert!(!v.degenerate);
        let w = v.witness_cycle.unwrap();
        assert!(w.iter().all(|s| s.from == 0 && s.to == 0));
        assert_ne!(v.witness_displacement.unwrap(), vec![0]);
    }

    #[test]
    fn witness_closes_at_root_in_larger_class() {
        // a→b→c→a with displacement +1 and a shortcut b→a with −1
        let k = kernel(2, &["a", "b", "c"], &[&[(1, &[1, 0], "1")], &[(2, &[0, 1], "1/2"), (0, &[-1, 0], "1/2")], &[(0, &[0, -1], "1")]]);
        let v = degeneracy_check(&k, &classes(&k)[0]).unwrap();
        assert!(!v.degenerate);
        let w = v.witness_cycle.unwrap();
        assert_eq!(w.first().unwrap().from, 0);
        assert_eq!(w.last().unwrap().to, 0);
        assert!(w.windows(2).all(|p| p[0].to == p[1].from));
        let total: Vec<i64> = (0..2).map(|c| w.iter().map(|s| s.mv[c]).sum()).collect();
        assert_eq!(Some(total), v.witness_displacement);
    }
}
