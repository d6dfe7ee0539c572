//! Necessary conditions for a contraction onto a loop and the
//! winding-number certificate that none exists.

mod counterexample;
mod harness;
mod search;

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{minimum_cycle_basis, CycleSpaceEchelon, Loop, MetricGraph};
use crate::rational::{to_i64_exact, Rational};

pub use counterexample::build_concentric_counterexample;
pub use harness::{conjecture_harness, run_instance, HarnessReport, HarnessTrial, PlanarInstance};
pub use search::{winding_obstruction_search, FunctionalWitness, ObstructionCertificate, ObstructionOutcome};

/// Integer coordinates of a loop's homology class in a fixed cycle basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CycleVector {
    pub coords: Vec<i64>,
}

impl CycleVector {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn dot(&self, lambda: &[i64]) -> i64 {
        self.coords.iter().zip(lambda).map(|(a, b)| a * b).sum()
    }
}

/// A cycle basis together with what is needed to read off coordinates:
/// a spanning tree and the inverse of the basis restricted to the
/// non-tree edges.
#[derive(Clone, Debug)]
pub(crate) struct HomologyFrame {
    edge_count: usize,
    non_tree: Vec<usize>,
    basis_vectors: Vec<Vec<i64>>,
    /// `inverse[i][k]`: coefficient of non-tree edge `non_tree[k]` in coordinate `i`.
    inverse: Vec<Vec<Rational>>,
}

fn spanning_tree_edges(g: &MetricGraph) -> Vec<bool> {
    let mut in_tree = vec![false; g.edge_count()];
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &(e, w) in g.incident(v) {
            if !seen[w] {
                seen[w] = true;
                in_tree[e] = true;
                queue.push_back(w);
            }
        }
    }
    in_tree
}

fn invert(mut a: Vec<Vec<Rational>>) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut inv: Vec<Vec<Rational>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = Rational::one() / &a[col][col];
        for j in 0..n {
            a[col][j] = &a[col][j] * &scale;
            inv[col][j] = &inv[col][j] * &scale;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                let x = &factor * &a[col][j];
                a[r][j] -= &x;
                let y = &factor * &inv[col][j];
                inv[r][j] -= &y;
            }
        }
    }
    Some(inv)
}

impl HomologyFrame {
    pub(crate) fn new(g: &MetricGraph, basis: &[Loop]) -> Result<Self> {
        if basis.len() != g.cycle_rank() {
            return Err(Error::InvalidInput(format!(
                "a cycle basis of this graph has {} loops, got {}",
                g.cycle_rank(),
                basis.len()
            )));
        }
        let in_tree = spanning_tree_edges(g);
        let non_tree: Vec<usize> = (0..g.edge_count()).filter(|&e| !in_tree[e]).collect();
        let basis_vectors: Vec<Vec<i64>> = basis.iter().map(|l| l.edge_vector(g)).collect();
        // square matrix: rows = non-tree edges, columns = basis loops
        let restricted: Vec<Vec<Rational>> = non_tree
            .iter()
            .map(|&e| basis_vectors.iter().map(|v| Rational::from_integer(v[e])).collect())
            .collect();
        let inverse = invert(restricted).ok_or_else(|| Error::InvalidInput("loops do not form a cycle basis".into()))?;
        Ok(HomologyFrame { edge_count: g.edge_count(), non_tree, basis_vectors, inverse })
    }

    pub(crate) fn rank(&self) -> usize {
        self.basis_vectors.len()
    }

    pub(crate) fn coordinates_of_vector(&self, z: &[i64]) -> Result<CycleVector> {
        let m = self.rank();
        let mut coords = Vec::with_capacity(m);
        for i in 0..m {
            let c: Rational = self
                .non_tree
                .iter()
                .enumerate()
                .map(|(k, &e)| &self.inverse[i][k] * Rational::from_integer(z[e]))
                .sum();
            let c = to_i64_exact(&c).ok_or_else(|| {
                Error::InvalidInput(format!("coordinate {c} is not an integer: the basis is not integral"))
            })?;
            coords.push(c);
        }
        for e in 0..self.edge_count {
            let back: i64 = (0..m).map(|i| coords[i] * self.basis_vectors[i][e]).sum();
            if back != z[e] {
                return Err(Error::Internal("edge vector is not in the span of the basis".into()));
            }
        }
        Ok(CycleVector { coords })
    }

    /// Integer edge weights `w` with `λ(coords(c)) = Σ_e w_e c_e` for every cycle `c`.
    pub(crate) fn cochain(&self, lambda: &[i64]) -> Result<Vec<i64>> {
        let mut w = vec![0i64; self.edge_count];
        for (k, &e) in self.non_tree.iter().enumerate() {
            let v: Rational =
                (0..self.rank()).map(|i| &self.inverse[i][k] * Rational::from_integer(lambda[i])).sum();
            w[e] = to_i64_exact(&v).ok_or_else(|| Error::InvalidInput("basis is not integral".into()))?;
        }
        Ok(w)
    }
}

/// Coordinates of `lp` in the cycle basis `basis` of `g`.
pub fn homology_coordinates(g: &MetricGraph, basis: &[Loop], lp: &Loop) -> Result<CycleVector> {
    HomologyFrame::new(g, basis)?.coordinates_of_vector(&lp.edge_vector(g))
}

/// Whether `alpha` belongs to some minimum-length cycle basis: its class
/// must not be spanned by strictly shorter cycles, and the minimum basis
/// loops shorter than `alpha` span all of those.
pub fn shortest_basis_membership(g: &MetricGraph, alpha: &Loop) -> bool {
    let z = alpha.edge_vector(g);
    if z.iter().all(|&c| c == 0) {
        return false;
    }
    let mut lighter = CycleSpaceEchelon::new();
    for b in minimum_cycle_basis(g) {
        if b.length() < alpha.length() {
            lighter.try_insert(&b.edge_vector(g));
        }
    }
    !lighter.contains(&z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Traversal;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn theta() -> MetricGraph {
        MetricGraph::from_edges(2, &[(0, 1, q("3")), (0, 1, q("4")), (0, 1, q("5"))]).unwrap()
    }

    #[test]
    fn theta_coordinates() {
        let g = theta();
        let b34 = Loop::from_edge_cycle(&g, &[0, 1]).unwrap();
        let b35 = Loop::from_edge_cycle(&g, &[0, 2]).unwrap();
        let basis = vec![b34.clone(), b35.clone()];
        assert_eq!(homology_coordinates(&g, &basis, &b34).unwrap().coords, vec![1, 0]);
        assert_eq!(homology_coordinates(&g, &basis, &b35).unwrap().coords, vec![0, 1]);
        // arc 4 out, arc 5 back; oriented against the basis loops' shared arc 3
        let orient = |lp: &Loop, e: usize| lp.traversals().iter().find(|t| t.edge == e).unwrap().forward;
        let t4 = Traversal { edge: 1, forward: !orient(&b34, 1) };
        let t5 = Traversal { edge: 2, forward: orient(&b35, 2) };
        let l45 = Loop::new(&g, vec![t4, t5]).unwrap();
        assert_eq!(homology_coordinates(&g, &basis, &l45).unwrap().coords, vec![-1, 1]);
        assert_eq!(homology_coordinates(&g, &basis, &l45.reversed()).unwrap().coords, vec![1, -1]);
        let back = Loop::new(&g, vec![Traversal { edge: 0, forward: true }, Traversal { edge: 0, forward: false }])
            .unwrap();
        assert!(homology_coordinates(&g, &basis, &back).unwrap().is_zero());
        assert!(homology_coordinates(&g, &basis[..1], &b34).is_err());
    }

    #[test]
    fn membership() {
        let g = theta();
        assert!(shortest_basis_membership(&g, &Loop::from_edge_cycle(&g, &[0, 1]).unwrap()));
        assert!(shortest_basis_membership(&g, &Loop::from_edge_cycle(&g, &[0, 2]).unwrap()));
        assert!(!shortest_basis_membership(&g, &Loop::from_edge_cycle(&g, &[1, 2]).unwrap()));
    }
}
