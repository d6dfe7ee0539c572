//! Shortest cycles and minimum cycle bases.

use std::collections::HashSet;

use super::{Loop, MetricGraph, Traversal};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Shortest simple cycle (weighted girth).
///
/// For every edge `e = uv` the shortest cycle through `e` is `e` plus a
/// shortest `v`-`u` path avoiding `e`. Among equally short candidates the
/// one with the lexicographically smallest sorted edge list wins.
pub fn shortest_cycle(g: &MetricGraph) -> Result<Loop> {
    let mut best: Option<(Rational, Vec<usize>, Loop)> = None;
    for (idx, e) in g.edges().iter().enumerate() {
        let traversals = if e.is_self_loop() {
            vec![Traversal { edge: idx, forward: true }]
        } else {
            let tree = g.path_tree(e.u, Some(idx));
            if tree.dist[e.v].is_none() {
                continue;
            }
            // u -> v along e, then back along the tree path reversed.
            let mut steps = vec![Traversal { edge: idx, forward: true }];
            let path = tree.path_to(g, e.v);
            steps.extend(path.iter().rev().map(Traversal::reversed));
            steps
        };
        let lp = Loop::new(g, traversals)?;
        let key = lp.sorted_edges();
        let better = match &best {
            None => true,
            Some((len, k, _)) => (lp.length(), &key) < (len, k),
        };
        if better {
            best = Some((lp.length().clone(), key, lp));
        }
    }
    best.map(|(_, _, lp)| lp).ok_or(Error::NoCycle)
}

/// Incremental row echelon form for signed edge vectors over the rationals.
#[derive(Clone, Debug, Default)]
pub struct CycleSpaceEchelon {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl CycleSpaceEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[i64]) -> Vec<Rational> {
        let mut w: Vec<Rational> = v.iter().map(|&x| Rational::from_integer(x)).collect();
        for (pivot, row) in &self.rows {
            if w[*pivot].is_zero() {
                continue;
            }
            let factor = w[*pivot].clone();
            for (wi, ri) in w.iter_mut().zip(row) {
                if !ri.is_zero() {
                    *wi -= &(&factor * ri);
                }
            }
        }
        w
    }

    /// Whether `v` lies in the span of the rows inserted so far.
    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(Rational::is_zero)
    }

    /// Inserts `v` if it is independent of the current rows.
    pub fn try_insert(&mut self, v: &[i64]) -> bool {
        let w = self.reduce(v);
        let Some(pivot) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = Rational::one() / &w[pivot];
        let w: Vec<Rational> = w.iter().map(|x| x * &inv).collect();
        for (_, row) in self.rows.iter_mut() {
            if !row[pivot].is_zero() {
                let factor = row[pivot].clone();
                for (ri, wi) in row.iter_mut().zip(&w) {
                    if !wi.is_zero() {
                        *ri -= &(&factor * wi);
                    }
                }
            }
        }
        self.rows.push((pivot, w));
        true
    }
}

/// Horton candidate cycles: for each root `x` and edge `uv`, the cycle
/// `P(x,u) + uv + P(v,x)` through shortest-path trees, kept when the two
/// tree paths meet only at `x`. Self-loops are their own candidates.
pub(crate) fn horton_candidates(g: &MetricGraph) -> Vec<Loop> {
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |lp: Loop, out: &mut Vec<Loop>| {
        let mut key = lp.edge_vector(g);
        if key.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
            key.iter_mut().for_each(|c| *c = -*c);
        }
        if seen.insert(key) {
            out.push(lp);
        }
    };
    for (idx, e) in g.edges().iter().enumerate() {
        if e.is_self_loop() {
            push(Loop::new(g, vec![Traversal { edge: idx, forward: true }]).expect("self-loop closes"), &mut out);
        }
    }
    for x in 0..g.vertex_count() {
        let tree = g.path_tree(x, None);
        for (idx, e) in g.edges().iter().enumerate() {
            if e.is_self_loop() {
                continue;
            }
            if tree.pred[e.v] == Some((idx, e.u)) || tree.pred[e.u] == Some((idx, e.v)) {
                continue;
            }
            let pu = tree.vertices_to(e.u);
            let pv = tree.vertices_to(e.v);
            let su: HashSet<usize> = pu.iter().skip(1).copied().collect();
            if pv.iter().skip(1).any(|w| su.contains(w)) {
                continue;
            }
            let mut steps = tree.path_to(g, e.u);
            steps.push(Traversal { edge: idx, forward: true });
            steps.extend(tree.path_to(g, e.v).iter().rev().map(Traversal::reversed));
            if let Ok(lp) = Loop::new(g, steps) {
                if lp.is_simple() {
                    push(lp, &mut out);
                }
            }
        }
    }
    out
}

/// Minimum cycle basis over the rationals.
///
/// Candidates are sorted by `(length, sorted edge list)` and added greedily
/// whenever they are independent of those already chosen; the result has
/// `E - V + 1` loops and a lexicographically minimal sorted length vector.
///
/// For graphs the first homology with any coefficients is the cycle space
/// with those coefficients, and the greedy basis over the rationals is the
/// one used throughout this crate.
pub fn minimum_cycle_basis(g: &MetricGraph) -> Vec<Loop> {
    let target = g.cycle_rank();
    let mut candidates = horton_candidates(g);
    candidates.sort_by(|a, b| (a.length(), a.sorted_edges()).cmp(&(b.length(), b.sorted_edges())));
    let mut echelon = CycleSpaceEchelon::new();
    let mut basis = Vec::with_capacity(target);
    for lp in candidates {
        if basis.len() == target {
            break;
        }
        if echelon.try_insert(&lp.edge_vector(g)) {
            basis.push(lp);
        }
    }
    debug_assert_eq!(basis.len(), target, "Horton candidates must span the cycle space");
    basis
}
