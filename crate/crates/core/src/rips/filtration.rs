use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::SampledSpace;
use crate::rational::Rational;

/// Default cap on the number of simplices a filtration may contain.
pub const DEFAULT_SIMPLEX_BUDGET: u128 = 5_000_000;

/// A simplex of a Rips filtration: strictly increasing vertex indices and
/// the diameter of the vertex set (0 for a vertex).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub diameter: Rational,
}

/// The Vietoris-Rips filtration of a finite metric space, truncated at
/// dimension `max_dim + 1`.
///
/// Simplices are sorted by `(diameter, dimension, lexicographic vertices)`,
/// so every face precedes its cofaces and the open complex at scale `r`
/// (all simplices of diameter `< r`) is a prefix of the order.
#[derive(Clone, Debug)]
pub struct Filtration {
    point_count: usize,
    max_dim: usize,
    values: Vec<Rational>,
    dims: Vec<u8>,
    diam: Vec<u32>,
    vertex_start: Vec<u32>,
    vertex_flat: Vec<u32>,
    facet_start: Vec<u32>,
    facet_flat: Vec<u32>,
}

pub(crate) fn binomial_table(n: usize, k: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; k + 1]; n + 1];
    for row in t.iter_mut() {
        row[0] = 1;
    }
    for i in 1..=n {
        for j in 1..=k.min(i) {
            t[i][j] = t[i - 1][j - 1].saturating_add(t[i - 1][j]);
        }
    }
    t
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of simplices of dimension `<= top` on `n` points.
pub fn complete_simplex_count(n: usize, top: usize) -> u128 {
    (0..=top).map(|d| binomial(n, d + 1)).sum()
}

/// Builds the Rips filtration with the default simplex budget.
pub fn build_rips_filtration(space: &SampledSpace, max_dim: usize) -> Result<Filtration> {
    build_rips_filtration_with_budget(space, max_dim, DEFAULT_SIMPLEX_BUDGET)
}

pub fn build_rips_filtration_with_budget(space: &SampledSpace, max_dim: usize, budget: u128) -> Result<Filtration> {
    let n = space.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    if n > u32::MAX as usize / 2 {
        return Err(Error::InvalidInput("sample too large".into()));
    }
    let top = (max_dim + 1).min(n - 1);
    let count = complete_simplex_count(n, top);
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }

    let mut values: Vec<Rational> = vec![Rational::zero()];
    for i in 0..n {
        for j in 0..i {
            values.push(space.distance(i, j).clone());
        }
    }
    values.par_sort_unstable();
    values.dedup();
    let rank: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| values.binary_search(space.distance(i, j)).expect("distance is listed") as u32)
                .collect()
        })
        .collect();

    // Enumerate simplices, one block per leading vertex.
    let mut entries: Vec<(u32, u8, Vec<u32>)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut block = Vec::new();
            let mut stack = vec![first as u32];
            enumerate_from(&rank, n, top, &mut stack, 0, &mut block);
            block
        })
        .collect();
    entries.par_sort_unstable_by(|a, b| match a.0.cmp(&b.0) {
        Ordering::Equal => a.1.cmp(&b.1).then_with(|| a.2.cmp(&b.2)),
        other => other,
    });

    let binom = binomial_table(n, top + 1);
    let mut position: Vec<Vec<u32>> = (0..=top).map(|d| vec![u32::MAX; binom[n][d + 1] as usize]).collect();
    for (idx, (_, d, verts)) in entries.iter().enumerate() {
        position[*d as usize][combinadic(&binom, verts) as usize] = idx as u32;
    }

    let mut dims = Vec::with_capacity(entries.len());
    let mut diam = Vec::with_capacity(entries.len());
    let mut vertex_start = Vec::with_capacity(entries.len() + 1);
    let mut vertex_flat = Vec::new();
    let mut facet_start = Vec::with_capacity(entries.len() + 1);
    let mut facet_flat = Vec::new();
    let mut scratch = Vec::new();
    for (dr, d, verts) in &entries {
        vertex_start.push(vertex_flat.len() as u32);
        vertex_flat.extend_from_slice(verts);
        facet_start.push(facet_flat.len() as u32);
        dims.push(*d);
        diam.push(*dr);
        if *d > 0 {
            for skip in 0..verts.len() {
                scratch.clear();
                scratch.extend(verts.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, v)| *v));
                facet_flat.push(position[*d as usize - 1][combinadic(&binom, &scratch) as usize]);
            }
        }
    }
    vertex_start.push(vertex_flat.len() as u32);
    facet_start.push(facet_flat.len() as u32);

    Ok(Filtration {
        point_count: n,
        max_dim,
        values,
        dims,
        diam,
        vertex_start,
        vertex_flat,
        facet_start,
        facet_flat,
    })
}

fn enumerate_from(
    rank: &[Vec<u32>],
    n: usize,
    top: usize,
    stack: &mut Vec<u32>,
    diameter: u32,
    out: &mut Vec<(u32, u8, Vec<u32>)>,
) {
    out.push((diameter, (stack.len() - 1) as u8, stack.clone()));
    if stack.len() > top {
        return;
    }
    let last = *stack.last().expect("non-empty") as usize;
    for next in (last + 1)..n {
        let d = stack.iter().map(|&v| rank[v as usize][next]).max().unwrap_or(0).max(diameter);
        stack.push(next as u32);
        enumerate_from(rank, n, top, stack, d, out);
        stack.pop();
    }
}

/// Lexicographic rank of a sorted vertex set in the combinatorial number system.
fn combinadic(binom: &[Vec<u64>], verts: &[u32]) -> u64 {
    verts.iter().enumerate().map(|(k, &v)| binom[v as usize][k + 1]).sum()
}

impl Filtration {
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    /// Highest homology dimension this filtration supports.
    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Highest simplex dimension present.
    pub fn top_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn dim(&self, i: usize) -> usize {
        self.dims[i] as usize
    }

    pub fn vertices(&self, i: usize) -> &[u32] {
        &self.vertex_flat[self.vertex_start[i] as usize..self.vertex_start[i + 1] as usize]
    }

    /// Filtration indices of the facets of simplex `i`, in the order
    /// obtained by deleting vertex 0, 1, ... (boundary signs alternate).
    pub fn facets(&self, i: usize) -> &[u32] {
        &self.facet_flat[self.facet_start[i] as usize..self.facet_start[i + 1] as usize]
    }

    pub fn diameter_rank(&self, i: usize) -> u32 {
        self.diam[i]
    }

    pub fn diameter(&self, i: usize) -> &Rational {
        &self.values[self.diam[i] as usize]
    }

    /// Sorted distinct diameters present in the filtration, starting at 0.
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn simplex(&self, i: usize) -> Simplex {
        Simplex {
            vertices: self.vertices(i).iter().map(|&v| v as usize).collect(),
            diameter: self.diameter(i).clone(),
        }
    }

    /// Number of simplices in each dimension.
    pub fn count_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.top_dim() + 1];
        for &d in &self.dims {
            counts[d as usize] += 1;
        }
        counts
    }

    /// Number of simplices of diameter strictly below `scale`: the open Rips
    /// complex at that scale is this prefix.
    pub fn prefix_len(&self, scale: &Rational) -> usize {
        let below = self.values.partition_point(|v| v < scale) as u32;
        self.diam.partition_point(|&d| d < below)
    }

    /// The sub-filtration on simplices whose vertices all lie in `subset`,
    /// with the same vertex labels, plus the parent index of each kept simplex.
    pub fn restrict(&self, subset: &[usize]) -> (Filtration, Vec<usize>) {
        let mut member = vec![false; self.point_count];
        for &v in subset {
            member[v] = true;
        }
        let mut child_of = vec![u32::MAX; self.len()];
        let mut parents = Vec::new();
        let mut out = Filtration {
            point_count: self.point_count,
            max_dim: self.max_dim,
            values: self.values.clone(),
            dims: Vec::new(),
            diam: Vec::new(),
            vertex_start: Vec::new(),
            vertex_flat: Vec::new(),
            facet_start: Vec::new(),
            facet_flat: Vec::new(),
        };
        for i in 0..self.len() {
            if !self.vertices(i).iter().all(|&v| member[v as usize]) {
                continue;
            }
            child_of[i] = parents.len() as u32;
            parents.push(i);
            out.vertex_start.push(out.vertex_flat.len() as u32);
            out.vertex_flat.extend_from_slice(self.vertices(i));
            out.facet_start.push(out.facet_flat.len() as u32);
            out.dims.push(self.dims[i]);
            out.diam.push(self.diam[i]);
            for &f in self.facets(i) {
                out.facet_flat.push(child_of[f as usize]);
            }
        }
        out.vertex_start.push(out.vertex_flat.len() as u32);
        out.facet_start.push(out.facet_flat.len() as u32);
        (out, parents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(d: &[&[i64]]) -> SampledSpace {
        let labels = (0..d.len()).map(|i| format!("p{i}")).collect();
        let m = d.iter().map(|row| row.iter().map(|&x| Rational::from_integer(x)).collect()).collect();
        SampledSpace::from_matrix(labels, m).unwrap()
    }

    #[test]
    fn equilateral_triangle() {
        let s = space(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        let f = build_rips_filtration(&s, 1).unwrap();
        assert_eq!(f.count_by_dim(), vec![3, 3, 1]);
        for i in 0..3 {
            assert_eq!(f.diameter(i), &Rational::zero());
        }
        for i in 3..7 {
            assert_eq!(f.diameter(i), &Rational::one());
        }
        assert_eq!(f.dim(6), 2);
        assert_eq!(f.facets(6), &[5, 4, 3]);
    }

    #[test]
    fn two_far_points() {
        let s = space(&[&[0, 5], &[5, 0]]);
        let f = build_rips_filtration(&s, 3).unwrap();
        assert_eq!(f.count_by_dim(), vec![2, 1]);
        assert_eq!(f.diameter(2), &Rational::from_integer(5));
        assert_eq!(f.facets(2), &[1, 0]);
    }

    #[test]
    fn faces_precede_cofaces_and_order_is_sorted() {
        let s = space(&[&[0, 1, 2, 1], &[1, 0, 1, 2], &[2, 1, 0, 1], &[1, 2, 1, 0]]);
        let f = build_rips_filtration(&s, 2).unwrap();
        assert_eq!(f.len(), 15);
        for i in 0..f.len() {
            for &fa in f.facets(i) {
                assert!((fa as usize) < i);
                assert_eq!(f.dim(fa as usize) + 1, f.dim(i));
            }
            if i > 0 {
                let prev = (f.diameter_rank(i - 1), f.dim(i - 1), f.vertices(i - 1));
                let cur = (f.diameter_rank(i), f.dim(i), f.vertices(i));
                assert!(prev < cur);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let s = space(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        match build_rips_filtration_with_budget(&s, 1, 6) {
            Err(Error::BudgetExceeded { count, budget }) => assert_eq!((count, budget), (7, 6)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn restriction_keeps_order_and_facets() {
        let s = space(&[&[0, 1, 2, 1], &[1, 0, 1, 2], &[2, 1, 0, 1], &[1, 2, 1, 0]]);
        let f = build_rips_filtration(&s, 1).unwrap();
        let (sub, parents) = f.restrict(&[0, 1, 3]);
        assert_eq!(sub.count_by_dim(), vec![3, 3, 1]);
        for i in 0..sub.len() {
            assert_eq!(sub.vertices(i), f.vertices(parents[i]));
            for (&a, &b) in sub.facets(i).iter().zip(f.facets(parents[i])) {
                assert_eq!(parents[a as usize], b as usize);
            }
        }
    }
}
