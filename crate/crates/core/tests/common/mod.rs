//! Independent oracles and generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use contraction_ph::graph::{Loop, MetricGraph};
use contraction_ph::rips::{Bar, Barcode, Death};
use contraction_ph::Rational;
use rand::Rng;

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn theta() -> MetricGraph {
    MetricGraph::from_edges(2, &[(0, 1, q("3")), (0, 1, q("4")), (0, 1, q("5"))]).unwrap()
}

pub fn unit_circle() -> MetricGraph {
    MetricGraph::from_edges(1, &[(0, 0, q("1"))]).unwrap()
}

/// Connected multigraph on `2..=max_vertices` vertices: a random tree plus
/// `extra` further edges, which may be parallel edges or self-loops.
pub fn random_graph(rng: &mut impl Rng, max_vertices: usize, extra: usize) -> MetricGraph {
    let n = rng.random_range(2..=max_vertices);
    let mut edges = Vec::new();
    let len = |rng: &mut dyn rand::RngCore| Rational::new(rng.random_range(1..=20), rng.random_range(1..=3));
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((u, v, len(rng)));
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        edges.push((u, v, len(rng)));
    }
    MetricGraph::from_edges(n, &edges).unwrap()
}

/// A cycle of `cycle_len` edges with random trees hanging off it.
pub fn loop_plus_trees(rng: &mut impl Rng, cycle_len: usize, tree_vertices: usize) -> (MetricGraph, Vec<usize>) {
    let mut edges = Vec::new();
    for i in 0..cycle_len {
        edges.push((i, (i + 1) % cycle_len, Rational::new(rng.random_range(2..=4), 2)));
    }
    for v in cycle_len..cycle_len + tree_vertices {
        let u = rng.random_range(0..v);
        edges.push((u, v, Rational::new(rng.random_range(1..=4), 2)));
    }
    let g = MetricGraph::from_edges(cycle_len + tree_vertices, &edges).unwrap();
    (g, (0..cycle_len).collect())
}

/// Every simple cycle, as sorted edge-index sets, found by testing each
/// element of the binary cycle space for being connected and 2-regular.
pub fn all_simple_cycles(g: &MetricGraph) -> Vec<Vec<usize>> {
    let m = g.edge_count();
    // fundamental cycles over GF(2) from a DFS tree
    let n = g.vertex_count();
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut tree = vec![false; m];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for (e, edge) in g.edges().iter().enumerate() {
            if edge.u == edge.v {
                continue;
            }
            let w = if edge.u == v {
                edge.v
            } else if edge.v == v {
                edge.u
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                tree[e] = true;
                parent_edge[w] = Some(e);
                stack.push(w);
            }
        }
    }
    let path_to_root = |mut v: usize| {
        let mut set = vec![false; m];
        while let Some(e) = parent_edge[v] {
            set[e] = !set[e];
            let edge = g.edge(e);
            v = if edge.u == v { edge.v } else { edge.u };
        }
        set
    };
    let mut fundamentals = Vec::new();
    for (e, edge) in g.edges().iter().enumerate() {
        if tree[e] {
            continue;
        }
        let mut set = path_to_root(edge.u);
        for (x, y) in set.iter_mut().zip(path_to_root(edge.v)) {
            *x ^= y;
        }
        set[e] = !set[e];
        fundamentals.push(set);
    }
    let r = fundamentals.len();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << r) {
        let mut set = vec![false; m];
        for (i, f) in fundamentals.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for (x, y) in set.iter_mut().zip(f) {
                    *x ^= *y;
                }
            }
        }
        let support: Vec<usize> = (0..m).filter(|&e| set[e]).collect();
        if is_single_cycle(g, &support) {
            out.push(support);
        }
    }
    out
}

fn is_single_cycle(g: &MetricGraph, support: &[usize]) -> bool {
    if support.is_empty() {
        return false;
    }
    let mut degree = vec![0usize; g.vertex_count()];
    for &e in support {
        degree[g.edge(e).u] += 1;
        degree[g.edge(e).v] += 1;
    }
    if degree.iter().any(|&d| d != 0 && d != 2) {
        return false;
    }
    // connected: walk from the first edge's endpoint through support edges
    let mut reached = vec![false; g.vertex_count()];
    let mut stack = vec![g.edge(support[0]).u];
    reached[stack[0]] = true;
    while let Some(v) = stack.pop() {
        for &e in support {
            let edge = g.edge(e);
            for (a, b) in [(edge.u, edge.v), (edge.v, edge.u)] {
                if a == v && !reached[b] {
                    reached[b] = true;
                    stack.push(b);
                }
            }
        }
    }
    (0..g.vertex_count()).all(|v| degree[v] == 0 || reached[v])
}

pub fn cycle_length(g: &MetricGraph, support: &[usize]) -> Rational {
    support.iter().map(|&e| g.edge(e).length.clone()).sum()
}

/// Rank over the rationals of integer vectors, by fraction-free elimination.
pub fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let (a, b) = (m[rank][c], m[r][c]);
                for k in 0..cols {
                    m[r][k] = m[r][k] * a - m[rank][k] * b;
                }
                let g = m[r].iter().fold(0i128, |g, &x| gcd(g, x.abs()));
                if g > 1 {
                    m[r].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Sorted lengths of a minimum cycle basis, by greedy selection over all
/// simple cycles with independence over the rationals.
pub fn exhaustive_basis_lengths(g: &MetricGraph) -> Vec<Rational> {
    let mut cycles = all_simple_cycles(g);
    cycles.sort_by_key(|c| cycle_length(g, c));
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut lengths = Vec::new();
    for c in cycles {
        let v = Loop::from_edge_cycle(g, &c).unwrap().edge_vector(g);
        chosen.push(v);
        if rational_rank(&chosen) == chosen.len() {
            lengths.push(cycle_length(g, &c));
        } else {
            chosen.pop();
        }
    }
    lengths
}

/// Rank of a matrix over `F_p` (rows of residues).
pub fn rank_mod_p(mut m: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] % p != 0) else { continue };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for k in 0..cols {
            m[rank][k] = m[rank][k] * inv % p;
        }
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                for k in 0..cols {
                    m[r][k] = (m[r][k] + p * p - f * m[rank][k] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Barcode of the Rips filtration of a finite metric, through dimension
/// `max_dim`, from ranks of maps between closed complexes `diam <= v`.
/// A class present in the complex at `v_i` and dead at `v_j` is the bar
/// `(v_i, v_j]`.
pub fn rank_barcode(d: &[Vec<Rational>], max_dim: usize, p: u64) -> Barcode {
    let n = d.len();
    // all simplices with at most max_dim + 2 vertices
    let mut simplices: Vec<(Vec<usize>, Rational)> = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    while let Some(s) = stack.pop() {
        let diam = s
            .iter()
            .flat_map(|&a| s.iter().map(move |&b| (a, b)))
            .map(|(a, b)| d[a][b].clone())
            .max()
            .unwrap();
        if s.len() < max_dim + 2 {
            for w in (s[s.len() - 1] + 1)..n {
                let mut t = s.clone();
                t.push(w);
                stack.push(t);
            }
        }
        simplices.push((s, diam));
    }
    let mut values: Vec<Rational> = simplices.iter().map(|s| s.1.clone()).collect();
    values.sort();
    values.dedup();
    let by_dim = |k: usize| -> Vec<&(Vec<usize>, Rational)> { simplices.iter().filter(|s| s.0.len() == k + 1).collect() };
    let mut bars = Vec::new();
    for k in 0..=max_dim {
        let cells = by_dim(k);
        let cofaces = by_dim(k + 1);
        let faces = if k == 0 { Vec::new() } else { by_dim(k - 1) };
        let face_index: BTreeMap<&[usize], usize> = faces.iter().enumerate().map(|(i, s)| (s.0.as_slice(), i)).collect();
        let cell_index: BTreeMap<&[usize], usize> = cells.iter().enumerate().map(|(i, s)| (s.0.as_slice(), i)).collect();
        let boundary = |s: &[usize], index: &BTreeMap<&[usize], usize>, len: usize| -> Vec<u64> {
            let mut col = vec![0u64; len];
            if s.len() == 1 {
                return col;
            }
            for i in 0..s.len() {
                let mut f = s.to_vec();
                f.remove(i);
                col[index[f.as_slice()]] = if i % 2 == 0 { 1 } else { p - 1 };
            }
            col
        };
        // persistent Betti number beta(i, j) = dim Z_k(K_i) - dim(Z_k(K_i) ∩ B_k(K_j))
        let cycles_at = |i: usize| -> Vec<Vec<u64>> {
            let alive: Vec<usize> = (0..cells.len()).filter(|&c| cells[c].1 <= values[i]).collect();
            let cols: Vec<Vec<u64>> = alive.iter().map(|&c| boundary(&cells[c].0, &face_index, faces.len())).collect();
            kernel_mod_p(&cols, faces.len(), p)
                .into_iter()
                .map(|coeffs| {
                    let mut v = vec![0u64; cells.len()];
                    for (k, &c) in alive.iter().enumerate() {
                        v[c] = coeffs[k];
                    }
                    v
                })
                .collect()
        };
        let boundaries_at = |j: usize| -> Vec<Vec<u64>> {
            cofaces
                .iter()
                .filter(|s| s.1 <= values[j])
                .map(|s| boundary(&s.0, &cell_index, cells.len()))
                .collect()
        };
        let m = values.len();
        let mut beta = vec![vec![0i64; m]; m];
        for i in 0..m {
            let z = cycles_at(i);
            for j in i..m {
                let b = boundaries_at(j);
                let rb = rank_mod_p(b.clone(), p);
                let mut both = b;
                both.extend(z.iter().cloned());
                let meet = z.len() + rb - rank_mod_p(both, p);
                beta[i][j] = (z.len() - meet) as i64;
            }
        }
        let get = |i: isize, j: usize| if i < 0 { 0 } else { beta[i as usize][j] };
        for i in 0..m {
            for j in (i + 1)..m {
                let mult = get(i as isize, j - 1) - get(i as isize - 1, j - 1) - get(i as isize, j) + get(i as isize - 1, j);
                for _ in 0..mult {
                    bars.push(Bar::new(k, values[i].clone(), Death::Finite(values[j].clone())));
                }
            }
            let mult = get(i as isize, m - 1) - get(i as isize - 1, m - 1);
            for _ in 0..mult {
                bars.push(Bar::new(k, values[i].clone(), Death::Infinite));
            }
        }
    }
    Barcode::new(p as u32, bars)
}

/// Basis of the null space of the matrix whose columns are `cols`.
fn kernel_mod_p(cols: &[Vec<u64>], rows: usize, p: u64) -> Vec<Vec<u64>> {
    let ncols = cols.len();
    let mut a: Vec<Vec<u64>> = (0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..ncols {
        let Some(piv) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, piv);
        let inv = pow_mod(a[rank][c], p - 2, p);
        for k in 0..ncols {
            a[rank][k] = a[rank][k] * inv % p;
        }
        for r in 0..rows {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c];
                for k in 0..ncols {
                    a[r][k] = (a[r][k] + p * p - f * a[rank][k] % p) % p;
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - a[r][f] % p) % p;
            }
            v
        })
        .collect()
}

/// Random metric on `n` points: shortest paths in a random complete graph
/// with integer weights, so ties and non-Euclidean metrics both occur.
pub fn random_metric(rng: &mut impl Rng, n: usize) -> Vec<Vec<Rational>> {
    let mut d = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.random_range(1..=12);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d.into_iter().map(|row| row.into_iter().map(Rational::from_integer).collect()).collect()
}
