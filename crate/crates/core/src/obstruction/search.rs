use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{minimum_cycle_basis, Loop, MetricGraph, Traversal};
use crate::rational::Rational;

use super::{CycleVector, HomologyFrame};

/// Cap on the number of listed functionals in a certificate.
const FUNCTIONAL_BUDGET: u128 = 2_000_000;
/// Cap on the search nodes visited while enumerating functionals.
const NODE_BUDGET: u128 = 10_000_000;
/// Functionals sent to the cover search at a time; one surviving functional
/// already rules out a certificate.
const COVER_BATCH: usize = 16;

/// A functional together with a loop it cannot map short enough.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalWitness {
    pub lambda: Vec<i64>,
    pub beta: Loop,
    pub beta_length: Rational,
    /// `λ([β])`; any contraction would send `β` to a loop winding this many
    /// times around the target, of length at least `|winding| · length(α)`.
    pub winding: i64,
}

/// Proof that no contraction onto `α` exists.
///
/// A contraction `f` induces `λ = f_*` on first homology with `λ([α]) = 1`,
/// and `|λ(c)| · length(α) <= length(c)` for every loop `c`, in particular for
/// the basis loops; this bounds each coordinate of `λ`. Every functional in
/// that box is listed with a loop violating the inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionCertificate {
    pub alpha: Loop,
    pub alpha_length: Rational,
    pub alpha_coords: CycleVector,
    pub basis: Vec<Loop>,
    /// `floor(length(basis_i) / length(α))`, the largest admissible `|λ_i|`.
    pub coordinate_bounds: Vec<i64>,
    pub bound: u32,
    pub functionals: Vec<FunctionalWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObstructionOutcome {
    Certificate(ObstructionCertificate),
    /// Every functional inside the enumeration bound is violated, but some
    /// coordinate could exceed the bound, so nothing is proved.
    Inconclusive { capped_coordinates: Vec<usize>, search_nodes: usize },
    /// Some functionals admit no violating loop among the candidates; this
    /// does not prove that a contraction exists.
    /// `survivors` lists every surviving functional when `exhaustive` holds,
    /// and otherwise those found before the search stopped.
    NoObstructionFound { survivors: Vec<Vec<i64>>, exhaustive: bool, search_nodes: usize },
}

impl ObstructionOutcome {
    pub fn verdict(&self) -> &'static str {
        match self {
            ObstructionOutcome::Certificate(_) => "no_contraction",
            ObstructionOutcome::Inconclusive { .. } => "inconclusive_bound_hit",
            ObstructionOutcome::NoObstructionFound { .. } => "no_obstruction_found",
        }
    }

    /// Certificate JSON, or the verdict with its survivors or capped coordinates.
    pub fn to_json(&self, g: &MetricGraph) -> String {
        let value = match self {
            ObstructionOutcome::Certificate(c) => return c.to_json(g),
            ObstructionOutcome::Inconclusive { capped_coordinates, search_nodes } => serde_json::json!({
                "verdict": self.verdict(),
                "capped_coordinates": capped_coordinates,
                "search_nodes": search_nodes,
            }),
            ObstructionOutcome::NoObstructionFound { survivors, exhaustive, search_nodes } => serde_json::json!({
                "verdict": self.verdict(),
                "survivors": survivors,
                "exhaustive": exhaustive,
                "search_nodes": search_nodes,
            }),
        };
        serde_json::to_string_pretty(&value).expect("outcome serializes")
    }

    pub fn certificate(&self) -> Option<&ObstructionCertificate> {
        match self {
            ObstructionOutcome::Certificate(c) => Some(c),
            _ => None,
        }
    }
}

struct Candidate {
    lp: Loop,
    coords: CycleVector,
}

/// Values tried for one coordinate, zero first.
fn coordinate_values(b: i64) -> Vec<i64> {
    let mut values = vec![0i64];
    for v in 1..=b {
        values.push(v);
        values.push(-v);
    }
    values
}

/// Whether the coordinates from `i` on can still bring `λ([α])` to 1.
fn alpha_reachable(alpha: &CycleVector, bounds: &[i64], i: usize, current: &[i64]) -> bool {
    let rest: i64 = (i..bounds.len()).map(|k| bounds[k] * alpha.coords[k].abs()).sum();
    let partial: i64 = (0..i).map(|k| current[k] * alpha.coords[k]).sum();
    (1 - partial).abs() <= rest
}

/// Appends every completion of `current[..i]` inside the box with
/// `λ([α]) = 1`, failing once more than `limit` are found.
fn completions(
    alpha: &CycleVector,
    bounds: &[i64],
    i: usize,
    current: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
    limit: usize,
) -> Result<()> {
    if !alpha_reachable(alpha, bounds, i, current) {
        return Ok(());
    }
    if i == bounds.len() {
        if out.len() >= limit {
            return Err(Error::BudgetExceeded { count: limit as u128 + 1, budget: limit as u128 });
        }
        out.push(current.clone());
        return Ok(());
    }
    for v in coordinate_values(bounds[i]) {
        current[i] = v;
        completions(alpha, bounds, i + 1, current, out, limit)?;
    }
    current[i] = 0;
    Ok(())
}

/// All admissible functionals in lexicographic order.
fn admissible_functionals(alpha: &CycleVector, bounds: &[i64], limit: usize) -> Result<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    completions(alpha, bounds, 0, &mut vec![0; bounds.len()], &mut out, limit)?;
    out.sort();
    Ok(out)
}

type CoverCheck<'a> = dyn Fn(&Vec<i64>) -> Result<Option<FunctionalWitness>> + Sync + 'a;

/// Depth-first enumeration of the admissible box that cuts a branch as soon
/// as a pool loop supported on the assigned coordinates violates it.
/// Functionals reaching a leaf go to the cover search in batches, and the
/// enumeration stops at the first batch with a survivor.
struct PrunedSearch<'a> {
    alpha: &'a CycleVector,
    bounds: &'a [i64],
    l_alpha: &'a Rational,
    pool: &'a [Candidate],
    cover: &'a CoverCheck<'a>,
    /// Pool indices grouped by their last nonzero coordinate.
    by_last: Vec<Vec<usize>>,
    nodes: u128,
    pending: Vec<Vec<i64>>,
    witnesses: Vec<FunctionalWitness>,
    survivors: Vec<Vec<i64>>,
    /// Filled only in expansion mode: every pool-violated functional with its loop.
    expanded: Option<Vec<(Vec<i64>, usize)>>,
}

impl<'a> PrunedSearch<'a> {
    fn new(
        alpha: &'a CycleVector,
        bounds: &'a [i64],
        l_alpha: &'a Rational,
        pool: &'a [Candidate],
        cover: &'a CoverCheck<'a>,
    ) -> Self {
        let mut by_last = vec![Vec::new(); bounds.len()];
        for (k, c) in pool.iter().enumerate() {
            if let Some(last) = c.coords.coords.iter().rposition(|&x| x != 0) {
                by_last[last].push(k);
            }
        }
        PrunedSearch {
            alpha,
            bounds,
            l_alpha,
            pool,
            cover,
            by_last,
            nodes: 0,
            pending: Vec::new(),
            witnesses: Vec::new(),
            survivors: Vec::new(),
            expanded: None,
        }
    }

    /// Returns `false` if the search stopped early on a survivor.
    fn run(&mut self) -> Result<bool> {
        let mut current = vec![0; self.bounds.len()];
        if !self.visit(0, &mut current)? {
            return Ok(false);
        }
        self.flush()
    }

    /// Lists every pool-violated functional; valid once `run` found no survivor.
    fn expand(&mut self) -> Result<Vec<(Vec<i64>, usize)>> {
        self.nodes = 0;
        self.expanded = Some(Vec::new());
        let mut current = vec![0; self.bounds.len()];
        self.visit(0, &mut current)?;
        Ok(self.expanded.take().unwrap_or_default())
    }

    fn flush(&mut self) -> Result<bool> {
        let batch = std::mem::take(&mut self.pending);
        let cover = self.cover;
        let checked: Vec<Result<Option<FunctionalWitness>>> = batch.par_iter().map(cover).collect();
        for (lambda, r) in batch.into_iter().zip(checked) {
            match r? {
                Some(w) => self.witnesses.push(w),
                None => self.survivors.push(lambda),
            }
        }
        Ok(self.survivors.is_empty())
    }

    fn visit(&mut self, i: usize, current: &mut Vec<i64>) -> Result<bool> {
        if !alpha_reachable(self.alpha, self.bounds, i, current) {
            return Ok(true);
        }
        if i == self.bounds.len() {
            if self.expanded.is_some() {
                return Ok(true);
            }
            self.pending.push(current.clone());
            if self.pending.len() >= COVER_BATCH {
                return self.flush();
            }
            return Ok(true);
        }
        for v in coordinate_values(self.bounds[i]) {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                return Err(Error::BudgetExceeded { count: self.nodes, budget: NODE_BUDGET });
            }
            current[i] = v;
            let violated = self.by_last[i].iter().copied().find(|&k| {
                let c = &self.pool[k];
                violates(c.coords.dot(current), self.l_alpha, c.lp.length())
            });
            match violated {
                Some(k) => {
                    if let Some(list) = self.expanded.as_mut() {
                        let mut leaves = Vec::new();
                        let room = (FUNCTIONAL_BUDGET as usize).saturating_sub(list.len());
                        completions(self.alpha, self.bounds, i + 1, current, &mut leaves, room)?;
                        list.extend(leaves.into_iter().map(|l| (l, k)));
                    }
                }
                None => {
                    if !self.visit(i + 1, current)? {
                        current[i] = 0;
                        return Ok(false);
                    }
                }
            }
        }
        current[i] = 0;
        Ok(true)
    }
}

/// Pairwise signed sums of basis loops whose class is carried by a simple cycle.
fn pairwise_simple_sums(g: &MetricGraph, basis: &[Loop]) -> Vec<Loop> {
    let vectors: Vec<Vec<i64>> = basis.iter().map(|b| b.edge_vector(g)).collect();
    let mut out = Vec::new();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            for sign in [1i64, -1] {
                let sum: Vec<i64> = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a + sign * b).collect();
                if sum.iter().any(|x| x.abs() > 1) {
                    continue;
                }
                let support: Vec<usize> = (0..sum.len()).filter(|&e| sum[e] != 0).collect();
                if let Ok(lp) = Loop::from_edge_cycle(g, &support) {
                    out.push(lp);
                }
            }
        }
    }
    out
}

fn violates(winding: i64, alpha_length: &Rational, beta_length: &Rational) -> bool {
    Rational::from_integer(winding.abs()) * alpha_length > *beta_length
}

/// Edge lengths scaled by their common denominator, if the total fits in `u64`.
fn integer_lengths(g: &MetricGraph) -> Option<Vec<u64>> {
    let mut denom = BigInt::one();
    for e in g.edges() {
        denom = denom.lcm(e.length.denom());
    }
    let scaled: Option<Vec<u64>> = g
        .edges()
        .iter()
        .map(|e| u64::try_from(e.length.numer() * (&denom / e.length.denom())).ok())
        .collect();
    let scaled = scaled?;
    let mut total: u64 = 0;
    for &x in &scaled {
        total = total.checked_add(x)?;
    }
    Some(scaled)
}

/// Shortest closed walks whose `λ`-winding is `1..=max_winding`, found by
/// Dijkstra on the cyclic cover defined by the edge weights `w`.
fn cover_walks(g: &MetricGraph, w: &[i64], max_winding: i64) -> Vec<(i64, Loop)> {
    match integer_lengths(g) {
        Some(lengths) => cover_walks_with(g, &lengths, 0u64, w, max_winding),
        None => {
            let lengths: Vec<Rational> = g.edges().iter().map(|e| e.length.clone()).collect();
            cover_walks_with(g, &lengths, Rational::zero(), w, max_winding)
        }
    }
}

fn cover_walks_with<L>(g: &MetricGraph, lengths: &[L], zero: L, w: &[i64], max_winding: i64) -> Vec<(i64, Loop)>
where
    L: Ord + Clone + for<'x> Add<&'x L, Output = L>,
{
    let spread = w.iter().map(|x| x.abs()).max().unwrap_or(0);
    let lo = -(max_winding + spread);
    let hi = max_winding + spread;
    let levels = (hi - lo + 1) as usize;
    let n = g.vertex_count();
    let state = |v: usize, level: i64| v * levels + (level - lo) as usize;
    let mut best: Vec<Option<(L, Loop)>> = vec![None; max_winding as usize + 1];
    for start in 0..n {
        let mut dist: Vec<Option<L>> = vec![None; n * levels];
        let mut pred: Vec<Option<(usize, Traversal)>> = vec![None; n * levels];
        let mut heap = BinaryHeap::new();
        let s0 = state(start, 0);
        dist[s0] = Some(zero.clone());
        heap.push(Reverse((zero.clone(), s0)));
        while let Some(Reverse((d, s))) = heap.pop() {
            if dist[s].as_ref().is_some_and(|cur| *cur < d) {
                continue;
            }
            let v = s / levels;
            let level = (s % levels) as i64 + lo;
            for &(e, _) in g.incident(v) {
                let edge = g.edge(e);
                let mut moves = Vec::with_capacity(2);
                if edge.u == v {
                    moves.push((Traversal { edge: e, forward: true }, edge.v, level + w[e]));
                }
                if edge.v == v {
                    moves.push((Traversal { edge: e, forward: false }, edge.u, level - w[e]));
                }
                for (t, to, next_level) in moves {
                    if next_level < lo || next_level > hi {
                        continue;
                    }
                    let ns = state(to, next_level);
                    let nd = d.clone() + &lengths[e];
                    if dist[ns].as_ref().is_none_or(|cur| nd < *cur) {
                        dist[ns] = Some(nd.clone());
                        pred[ns] = Some((s, t));
                        heap.push(Reverse((nd, ns)));
                    }
                }
            }
        }
        for k in 1..=max_winding {
            let target = state(start, k);
            let Some(d) = &dist[target] else { continue };
            if best[k as usize].as_ref().is_some_and(|(b, _)| b <= d) {
                continue;
            }
            let mut walk = Vec::new();
            let mut s = target;
            while let Some((prev, t)) = pred[s] {
                walk.push(t);
                s = prev;
                if s == s0 {
                    break;
                }
            }
            walk.reverse();
            if let Ok(lp) = Loop::new(g, walk) {
                best[k as usize] = Some((d.clone(), lp));
            }
        }
    }
    best.into_iter().enumerate().filter_map(|(k, b)| b.map(|(_, l)| (k as i64, l))).collect()
}

/// Searches for a winding-number obstruction to a contraction of `g` onto
/// `alpha`, using the minimum cycle basis for coordinates.
///
/// Every integer functional `λ` with `λ([α]) = 1` and admissible
/// coordinates (`|λ_i| <= min(bound, floor(length(basis_i) / length(α)))`) is
/// tested against the candidate loops, the basis loops and the shortest
/// closed walks of `λ`-winding `1..=2·bound`.
pub fn winding_obstruction_search(
    g: &MetricGraph,
    alpha: &Loop,
    candidates: &[Loop],
    bound: u32,
) -> Result<ObstructionOutcome> {
    if bound == 0 {
        return Err(Error::InvalidInput("enumeration bound must be at least 1".into()));
    }
    if !alpha.is_simple() {
        return Err(Error::InvalidInput("target loop is not simple".into()));
    }
    let basis = minimum_cycle_basis(g);
    let frame = HomologyFrame::new(g, &basis)?;
    let alpha_coords = frame.coordinates_of_vector(&alpha.edge_vector(g))?;
    if alpha_coords.is_zero() {
        return Err(Error::InvalidInput("target loop is nullhomologous; no functional sends it to 1".into()));
    }
    let l_alpha = alpha.length().clone();
    let natural: Vec<i64> = basis
        .iter()
        .map(|b| (b.length() / &l_alpha).floor().try_into().unwrap_or(i64::MAX))
        .collect();
    let bounds: Vec<i64> = natural.iter().map(|&b| b.min(bound as i64)).collect();
    let capped: Vec<usize> = (0..natural.len()).filter(|&i| natural[i] > bound as i64).collect();

    let mut pool = Vec::new();
    for lp in candidates.iter().chain(&basis).chain(&pairwise_simple_sums(g, &basis)) {
        pool.push(Candidate { lp: lp.clone(), coords: frame.coordinates_of_vector(&lp.edge_vector(g))? });
    }
    let max_winding = 2 * bound as i64;
    let cover_check = |lambda: &Vec<i64>| -> Result<Option<FunctionalWitness>> {
        let w = frame.cochain(lambda)?;
        for (k, lp) in cover_walks(g, &w, max_winding) {
            if violates(k, &l_alpha, lp.length()) {
                let winding = frame.coordinates_of_vector(&lp.edge_vector(g))?.dot(lambda);
                return Ok(Some(FunctionalWitness {
                    lambda: lambda.clone(),
                    beta_length: lp.length().clone(),
                    beta: lp,
                    winding,
                }));
            }
        }
        Ok(None)
    };
    let mut search = PrunedSearch::new(&alpha_coords, &bounds, &l_alpha, &pool, &cover_check);
    let exhaustive = search.run()?;
    let visited = search.nodes as usize;
    if !search.survivors.is_empty() {
        let survivors = std::mem::take(&mut search.survivors);
        return Ok(ObstructionOutcome::NoObstructionFound { survivors, exhaustive, search_nodes: visited });
    }
    if !capped.is_empty() {
        return Ok(ObstructionOutcome::Inconclusive { capped_coordinates: capped, search_nodes: visited });
    }
    let mut witnesses = std::mem::take(&mut search.witnesses);
    for (lambda, k) in search.expand()? {
        let c = &pool[k];
        witnesses.push(FunctionalWitness {
            winding: c.coords.dot(&lambda),
            lambda,
            beta: c.lp.clone(),
            beta_length: c.lp.length().clone(),
        });
    }
    witnesses.sort_by(|a, b| a.lambda.cmp(&b.lambda));
    let cert = ObstructionCertificate {
        alpha: alpha.clone(),
        alpha_length: l_alpha,
        alpha_coords,
        basis,
        coordinate_bounds: natural,
        bound,
        functionals: witnesses,
    };
    cert.verify(g)?;
    Ok(ObstructionOutcome::Certificate(cert))
}

fn fail<T>(msg: String) -> Result<T> {
    Err(Error::Internal(format!("certificate check failed: {msg}")))
}

impl ObstructionCertificate {
    /// Re-derives every claim from scratch: coordinates, windings, the
    /// inequalities, and that the listed functionals are exactly the
    /// admissible ones.
    pub fn verify(&self, g: &MetricGraph) -> Result<()> {
                let frame = HomologyFrame::new(g, &self.basis)?;
        let alpha = frame.coordinates_of_vector(&self.alpha.edge_vector(g))?;
        if alpha != self.alpha_coords || self.alpha.length() != &self.alpha_length {
            return fail("target loop data".into());
        }
        for (b, &k) in self.basis.iter().zip(&self.coordinate_bounds) {
            if Rational::from_integer(k) * &self.alpha_length > *b.length()
                || Rational::from_integer(k + 1) * &self.alpha_length <= *b.length()
            {
                return fail(format!("coordinate bound {k} for a basis loop of length {}", b.length()));
            }
            if k > self.bound as i64 {
                return fail("coordinate bound exceeds the enumeration bound".into());
            }
        }
        let expected = admissible_functionals(&alpha, &self.coordinate_bounds, self.functionals.len())
            .or_else(|_| fail("more admissible functionals than listed".into()))?;
        let listed: Vec<Vec<i64>> = self.functionals.iter().map(|f| f.lambda.clone()).collect();
        if expected != listed {
            return fail("listed functionals differ from the admissible set".into());
        }
        for f in &self.functionals {
            if alpha.dot(&f.lambda) != 1 {
                return fail(format!("λ = {:?} does not send α to 1", f.lambda));
            }
            let coords = frame.coordinates_of_vector(&f.beta.edge_vector(g))?;
            let winding = coords.dot(&f.lambda);
            if winding != f.winding || f.beta.length() != &f.beta_length {
                return fail(format!("recorded winding or length of β for λ = {:?}", f.lambda));
            }
            if !violates(winding, &self.alpha_length, &f.beta_length) {
                return fail(format!(
                    "|{winding}| · {} does not exceed {} for λ = {:?}",
                    self.alpha_length, f.beta_length, f.lambda
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, g: &MetricGraph) -> String {
        #[derive(Serialize)]
        struct Entry {
            lambda: Vec<i64>,
            beta_length: String,
            winding: i64,
            beta_edges: Vec<(u64, bool)>,
        }
        #[derive(Serialize)]
        struct Dump {
            alpha_length: String,
            alpha_edges: Vec<(u64, bool)>,
            basis_lengths: Vec<String>,
            coordinate_bounds: Vec<i64>,
            functionals: Vec<Entry>,
            bound: u32,
            verdict: &'static str,
        }
        let dump = Dump {
            alpha_length: self.alpha_length.to_string(),
            alpha_edges: self.alpha.edge_ids(g),
            basis_lengths: self.basis.iter().map(|b| b.length().to_string()).collect(),
            coordinate_bounds: self.coordinate_bounds.clone(),
            functionals: self
                .functionals
                .iter()
                .map(|f| Entry {
                    lambda: f.lambda.clone(),
                    beta_length: f.beta_length.to_string(),
                    winding: f.winding,
                    beta_edges: f.beta.edge_ids(g),
                })
                .collect(),
            bound: self.bound,
            verdict: "no_contraction",
        };
        serde_json::to_string_pretty(&dump).expect("certificate serializes")
    }
}
