//! Metric graphs with exact edge lengths.
//!
//! A [`MetricGraph`] is a connected weighted multigraph; self-loops and
//! parallel edges are allowed. Points of the geodesic space are
//! [`GraphPoint`]s, either a vertex or an interior point of an edge.
//! Vertex-to-vertex geodesic distances are computed once at construction.

mod cycles;
mod geodesic;
pub mod io;
mod sample;

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;

pub use cycles::{minimum_cycle_basis, shortest_cycle, CycleSpaceEchelon};
pub use geodesic::{is_geodesic_circle, CircleWitness, GeodesicCircleCheck, LoopChart};
pub use sample::{sample_space, SampledSpace};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: u64,
    pub u: usize,
    pub v: usize,
    pub length: Rational,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.u == self.v
    }

    pub fn other(&self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Connected weighted multigraph with exact positive edge lengths.
///
/// Edges are stored sorted by id, so an edge *index* order coincides with
/// id order. All algorithms that break ties do so on edge indices.
#[derive(Clone)]
pub struct MetricGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    vertex_distances: Vec<Vec<Rational>>,
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count && self.edges == other.edges
    }
}

impl Eq for MetricGraph {}

impl fmt::Debug for MetricGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricGraph")
            .field("vertex_count", &self.vertex_count)
            .field("edges", &self.edges)
            .finish()
    }
}

/// Shortest-path tree from a single source.
#[derive(Clone, Debug)]
pub(crate) struct PathTree {
    pub dist: Vec<Option<Rational>>,
    /// `(edge index, previous vertex)` on the chosen shortest path.
    pub pred: Vec<Option<(usize, usize)>>,
}

impl PathTree {
    /// Traversals from the tree root to `target`.
    pub fn path_to(&self, graph: &MetricGraph, target: usize) -> Vec<Traversal> {
        let mut steps = Vec::new();
        let mut w = target;
        while let Some((e, prev)) = self.pred[w] {
            steps.push(Traversal::from_to(graph, e, prev));
            w = prev;
        }
        steps.reverse();
        steps
    }

    /// Vertices on the tree path from the root to `target`, root first.
    pub fn vertices_to(&self, target: usize) -> Vec<usize> {
        let mut out = vec![target];
        let mut w = target;
        while let Some((_, prev)) = self.pred[w] {
            out.push(prev);
            w = prev;
        }
        out.reverse();
        out
    }
}

impl MetricGraph {
    /// Builds a graph, validating lengths, endpoints, id uniqueness and connectivity.
    pub fn new(vertex_count: usize, mut edges: Vec<Edge>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidInput("graph has no vertices".into()));
        }
        edges.sort_by_key(|e| e.id);
        for pair in edges.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::InvalidInput(format!("duplicate edge id {}", pair[0].id)));
            }
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (idx, e) in edges.iter().enumerate() {
            if e.u >= vertex_count || e.v >= vertex_count {
                return Err(Error::InvalidInput(format!(
                    "edge {} has an endpoint outside 0..{vertex_count}",
                    e.id
                )));
            }
            if !e.length.is_positive() {
                return Err(Error::InvalidInput(format!("edge {} has non-positive length {}", e.id, e.length)));
            }
            adjacency[e.u].push((idx, e.v));
            if !e.is_self_loop() {
                adjacency[e.v].push((idx, e.u));
            }
        }
        let mut graph = MetricGraph {
            vertex_count,
            edges,
            adjacency,
            vertex_distances: Vec::new(),
        };
        let mut table = Vec::with_capacity(vertex_count);
        for s in 0..vertex_count {
            let tree = graph.path_tree(s, None);
            let row: Option<Vec<Rational>> = tree.dist.into_iter().collect();
            table.push(row.ok_or(Error::Disconnected)?);
        }
        graph.vertex_distances = table;
        Ok(graph)
    }

    /// Convenience constructor from `(u, v, length)` triples; ids are assigned 0, 1, 2, ...
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize, Rational)]) -> Result<Self> {
        let edges = edges
            .iter()
            .enumerate()
            .map(|(i, (u, v, l))| Edge { id: i as u64, u: *u, v: *v, length: l.clone() })
            .collect();
        Self::new(vertex_count, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    /// Index of the edge carrying the given id.
    pub fn edge_index(&self, id: u64) -> Option<usize> {
        self.edges.binary_search_by_key(&id, |e| e.id).ok()
    }

    /// `(edge index, neighbour)` pairs incident to `v`; a self-loop is listed once.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// First Betti number `E - V + 1`.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    pub fn total_length(&self) -> Rational {
        self.edges.iter().map(|e| &e.length).sum()
    }

    /// Geodesic distance between two vertices.
    pub fn vertex_distance(&self, a: usize, b: usize) -> &Rational {
        &self.vertex_distances[a][b]
    }

    /// Dijkstra from `source`, optionally ignoring one edge.
    ///
    /// Equal lengths are broken by an infinitesimal perturbation `2^-k * eps`
    /// on edge `k` (compared as a bitmask, highest edge first), which makes
    /// shortest paths unique and subpath-consistent across all roots.
    pub(crate) fn path_tree(&self, source: usize, skip_edge: Option<usize>) -> PathTree {
        let n = self.vertex_count;
        let words = self.edges.len().div_ceil(64).max(1);
        let mut key: Vec<Option<PathKey>> = vec![None; n];
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        let start = PathKey { length: Rational::zero(), mask: vec![0; words] };
        key[source] = Some(start.clone());
        heap.push(Reverse((start, source)));
        while let Some(Reverse((k, w))) = heap.pop() {
            if done[w] {
                continue;
            }
            done[w] = true;
            for &(e, x) in &self.adjacency[w] {
                if Some(e) == skip_edge || x == w || done[x] {
                    continue;
                }
                let mut mask = k.mask.clone();
                mask[e / 64] |= 1u64 << (e % 64);
                let cand = PathKey { length: &k.length + &self.edges[e].length, mask };
                if key[x].as_ref().is_none_or(|cur| cand < *cur) {
                    key[x] = Some(cand.clone());
                    pred[x] = Some((e, w));
                    heap.push(Reverse((cand, x)));
                }
            }
        }
        PathTree { dist: key.into_iter().map(|k| k.map(|k| k.length)).collect(), pred }
    }

    /// Builds a point at `offset` along edge `edge` (measured from its `u` end),
    /// canonicalizing the two ends to vertices.
    pub fn point_on_edge(&self, edge: usize, offset: Rational) -> Result<GraphPoint> {
        let e = self
            .edges
            .get(edge)
            .ok_or_else(|| Error::InvalidInput(format!("edge index {edge} out of range")))?;
        if offset.is_negative() || offset > e.length {
            return Err(Error::InvalidInput(format!(
                "offset {offset} outside [0, {}] on edge {}",
                e.length, e.id
            )));
        }
        Ok(if offset.is_zero() {
            GraphPoint::Vertex(e.u)
        } else if offset == e.length {
            GraphPoint::Vertex(e.v)
        } else {
            GraphPoint::Interior { edge, offset }
        })
    }

    /// Midpoint of an edge.
    pub fn edge_midpoint(&self, edge: usize) -> GraphPoint {
        let half = &self.edges[edge].length / Rational::from_integer(2);
        GraphPoint::Interior { edge, offset: half }
    }

    pub fn validate_point(&self, p: &GraphPoint) -> Result<()> {
        match p {
            GraphPoint::Vertex(v) if *v < self.vertex_count => Ok(()),
            GraphPoint::Vertex(v) => Err(Error::InvalidInput(format!("vertex {v} out of range"))),
            GraphPoint::Interior { edge, offset } => {
                let e = self
                    .edges
                    .get(*edge)
                    .ok_or_else(|| Error::InvalidInput(format!("edge index {edge} out of range")))?;
                if offset.is_positive() && *offset < e.length {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!(
                        "interior offset {offset} not strictly inside edge {} of length {}",
                        e.id, e.length
                    )))
                }
            }
        }
    }

    /// Exits of a point towards the vertex set: `(vertex, distance along the edge)`.
    pub(crate) fn exits(&self, p: &GraphPoint) -> Exits {
        match p {
            GraphPoint::Vertex(v) => Exits::One(*v),
            GraphPoint::Interior { edge, offset } => {
                let e = &self.edges[*edge];
                Exits::Two((e.u, offset.clone()), (e.v, &e.length - offset))
            }
        }
    }

    /// Distance from a point to a vertex.
    pub fn point_vertex_distance(&self, p: &GraphPoint, w: usize) -> Rational {
        match self.exits(p) {
            Exits::One(v) => self.vertex_distance(v, w).clone(),
            Exits::Two((a, da), (b, db)) => {
                let x = da + self.vertex_distance(a, w);
                let y = db + self.vertex_distance(b, w);
                x.min(y)
            }
        }
    }

    /// Length of a shortest path between two points; unchecked variant of
    /// [`geodesic_distance`].
    pub fn distance(&self, p: &GraphPoint, q: &GraphPoint) -> Rational {
        let mut best = match (p, q) {
            (GraphPoint::Interior { edge: e1, offset: s }, GraphPoint::Interior { edge: e2, offset: t }) if e1 == e2 => {
                Some((s - t).abs())
            }
            _ => None,
        };
        let pe = self.exits(p);
        let qe = self.exits(q);
        for (a, da) in pe.iter() {
            for (b, db) in qe.iter() {
                let cand = &da + self.vertex_distance(a, b) + &db;
                if best.as_ref().is_none_or(|cur| cand < *cur) {
                    best = Some(cand);
                }
            }
        }
        best.expect("every point has an exit")
    }

    /// Human-readable point label, `e<id>@<offset>`.
    pub fn point_label(&self, p: &GraphPoint) -> String {
        match self.point_key(p) {
            (usize::MAX, _) => match p {
                GraphPoint::Vertex(v) => format!("v{v}"),
                GraphPoint::Interior { .. } => unreachable!(),
            },
            (e, off) => format!("e{}@{}", self.edges[e].id, off),
        }
    }

    /// Parses `v<index>` or `e<id>@<offset>`, the forms produced by [`Self::point_label`].
    pub fn parse_point(&self, text: &str) -> Result<GraphPoint> {
        let bad = || Error::InvalidInput(format!("cannot parse point {text:?}; expected v<index> or e<id>@<offset>"));
        if let Some(rest) = text.strip_prefix('v') {
            let v: usize = rest.parse().map_err(|_| bad())?;
            let p = GraphPoint::Vertex(v);
            self.validate_point(&p)?;
            return Ok(p);
        }
        let (id, offset) = text.strip_prefix('e').and_then(|r| r.split_once('@')).ok_or_else(bad)?;
        let id: u64 = id.parse().map_err(|_| bad())?;
        let edge = self.edge_index(id).ok_or_else(|| Error::InvalidInput(format!("no edge with id {id}")))?;
        let offset: Rational = offset.parse().map_err(|_| bad())?;
        self.point_on_edge(edge, offset)
    }

    /// Deterministic sort key `(edge index, offset)`; a vertex uses the
    /// smallest incident edge index.
    pub(crate) fn point_key(&self, p: &GraphPoint) -> (usize, Rational) {
        match p {
            GraphPoint::Interior { edge, offset } => (*edge, offset.clone()),
            GraphPoint::Vertex(v) => {
                match self.adjacency[*v].iter().map(|&(e, _)| e).min() {
                    None => (usize::MAX, Rational::from_integer(*v as i64)),
                    Some(e) => {
                        let edge = &self.edges[e];
                        if edge.u == *v {
                            (e, Rational::zero())
                        } else {
                            (e, edge.length.clone())
                        }
                    }
                }
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
struct PathKey {
    length: Rational,
    mask: Vec<u64>,
}

impl Ord for PathKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.length
            .cmp(&other.length)
            .then_with(|| self.mask.iter().rev().cmp(other.mask.iter().rev()))
    }
}

impl PartialOrd for PathKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) enum Exits {
    One(usize),
    Two((usize, Rational), (usize, Rational)),
}

impl Exits {
    pub fn iter(&self) -> impl Iterator<Item = (usize, Rational)> + '_ {
        let (first, second) = match self {
            Exits::One(v) => ((*v, Rational::zero()), None),
            Exits::Two(a, b) => (a.clone(), Some(b.clone())),
        };
        std::iter::once(first).chain(second)
    }
}

/// Checked geodesic distance between two points of `g`.
pub fn geodesic_distance(g: &MetricGraph, p: &GraphPoint, q: &GraphPoint) -> Result<Rational> {
    g.validate_point(p)?;
    g.validate_point(q)?;
    Ok(g.distance(p, q))
}

/// A point of a metric graph. Interior offsets are strictly between 0 and
/// the edge length; endpoints are always represented as vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphPoint {
    Vertex(usize),
    Interior { edge: usize, offset: Rational },
}

impl GraphPoint {
    pub fn is_vertex(&self) -> bool {
        matches!(self, GraphPoint::Vertex(_))
    }
}

/// One directed pass over a full edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Traversal {
    pub edge: usize,
    /// `true` when the edge is walked from `u` to `v`.
    pub forward: bool,
}

impl Traversal {
    pub fn from_to(graph: &MetricGraph, edge: usize, start: usize) -> Self {
        Traversal { edge, forward: graph.edge(edge).u == start }
    }

    pub fn start(&self, graph: &MetricGraph) -> usize {
        let e = graph.edge(self.edge);
        if self.forward {
            e.u
        } else {
            e.v
        }
    }

    pub fn end(&self, graph: &MetricGraph) -> usize {
        let e = graph.edge(self.edge);
        if self.forward {
            e.v
        } else {
            e.u
        }
    }

    pub fn reversed(&self) -> Self {
        Traversal { edge: self.edge, forward: !self.forward }
    }
}

/// A closed walk: a cyclic sequence of directed edge traversals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    traversals: Vec<Traversal>,
    length: Rational,
    simple: bool,
}

impl Loop {
    /// Validates that consecutive traversals share endpoints and that the walk closes.
    pub fn new(graph: &MetricGraph, traversals: Vec<Traversal>) -> Result<Self> {
        if traversals.is_empty() {
            return Err(Error::InvalidInput("empty loop".into()));
        }
        for t in &traversals {
            if t.edge >= graph.edge_count() {
                return Err(Error::InvalidInput(format!("edge index {} out of range", t.edge)));
            }
        }
        for i in 0..traversals.len() {
            let next = &traversals[(i + 1) % traversals.len()];
            if traversals[i].end(graph) != next.start(graph) {
                return Err(Error::InvalidInput(format!(
                    "traversal {i} ends at vertex {} but the next starts at {}",
                    traversals[i].end(graph),
                    next.start(graph)
                )));
            }
        }
        let length = traversals.iter().map(|t| &graph.edge(t.edge).length).sum();
        let mut seen_vertices = std::collections::HashSet::new();
        let mut seen_edges = std::collections::HashSet::new();
        let simple = traversals
            .iter()
            .all(|t| seen_vertices.insert(t.start(graph)) && seen_edges.insert(t.edge));
        Ok(Loop { traversals, length, simple })
    }

    /// Orients an unordered set of edge indices forming one simple cycle.
    pub fn from_edge_cycle(graph: &MetricGraph, edge_set: &[usize]) -> Result<Self> {
        let not_cycle = || Error::InvalidInput(format!("edges {edge_set:?} do not form a simple cycle"));
        let mut remaining: Vec<usize> = edge_set.to_vec();
        remaining.sort_unstable();
        remaining.dedup();
        if remaining.len() != edge_set.len() || remaining.is_empty() {
            return Err(not_cycle());
        }
        if remaining.iter().any(|&e| e >= graph.edge_count()) {
            return Err(not_cycle());
        }
        let first = remaining.remove(0);
        let start = graph.edge(first).u;
        let mut traversals = vec![Traversal { edge: first, forward: true }];
        let mut at = graph.edge(first).v;
        while at != start {
            let pos = remaining
                .iter()
                .position(|&e| graph.edge(e).u == at || graph.edge(e).v == at)
                .ok_or_else(not_cycle)?;
            let e = remaining.remove(pos);
            let t = Traversal::from_to(graph, e, at);
            at = t.end(graph);
            traversals.push(t);
        }
        if !remaining.is_empty() {
            return Err(not_cycle());
        }
        let lp = Loop::new(graph, traversals)?;
        if !lp.is_simple() {
            return Err(not_cycle());
        }
        Ok(lp)
    }

    pub fn traversals(&self) -> &[Traversal] {
        &self.traversals
    }

    pub fn length(&self) -> &Rational {
        &self.length
    }

    /// No vertex and no edge is visited twice.
    pub fn is_simple(&self) -> bool {
        self.simple
    }

    /// Start vertices of the traversals, in walk order.
    pub fn vertices(&self, graph: &MetricGraph) -> Vec<usize> {
        self.traversals.iter().map(|t| t.start(graph)).collect()
    }

    /// Signed traversal count per edge: the loop's class in the cycle space.
    pub fn edge_vector(&self, graph: &MetricGraph) -> Vec<i64> {
        let mut v = vec![0i64; graph.edge_count()];
        for t in &self.traversals {
            v[t.edge] += if t.forward { 1 } else { -1 };
        }
        v
    }

    /// Sorted edge indices, used for lexicographic tie-breaking.
    pub fn sorted_edges(&self) -> Vec<usize> {
        let mut es: Vec<usize> = self.traversals.iter().map(|t| t.edge).collect();
        es.sort_unstable();
        es
    }

    pub fn reversed(&self) -> Loop {
        Loop {
            traversals: self.traversals.iter().rev().map(Traversal::reversed).collect(),
            length: self.length.clone(),
            simple: self.simple,
        }
    }

    /// `(edge id, forward)` along the walk.
    pub fn edge_ids(&self, graph: &MetricGraph) -> Vec<(u64, bool)> {
        self.traversals.iter().map(|t| (graph.edge(t.edge).id, t.forward)).collect()
    }
}
