use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{shortest_cycle, GraphPoint, Loop, LoopChart, MetricGraph};
use crate::rational::Rational;

use super::verify::{verify_lipschitz, LipschitzReport};

/// A map from a metric graph onto one of its simple loops.
pub trait LoopMap: Sync {
    fn graph(&self) -> &MetricGraph;

    fn chart(&self) -> &LoopChart;

    fn evaluate(&self, x: &GraphPoint) -> GraphPoint;

    /// Offsets on `edge` (from its `u` end, strictly inside) where the map
    /// may change its linear behaviour.
    fn breakpoints(&self, _edge: usize) -> Vec<Rational> {
        Vec::new()
    }
}

/// A loop map given by a closure, for controls and comparisons.
pub struct FnLoopMap<F> {
    graph: Arc<MetricGraph>,
    chart: LoopChart,
    f: F,
}

impl<F: Fn(&MetricGraph, &GraphPoint) -> GraphPoint + Sync> FnLoopMap<F> {
    pub fn new(graph: Arc<MetricGraph>, target: &Loop, f: F) -> Result<Self> {
        let chart = LoopChart::new(&graph, target)?;
        Ok(FnLoopMap { graph, chart, f })
    }
}

impl<F: Fn(&MetricGraph, &GraphPoint) -> GraphPoint + Sync> LoopMap for FnLoopMap<F> {
    fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    fn chart(&self) -> &LoopChart {
        &self.chart
    }

    fn evaluate(&self, x: &GraphPoint) -> GraphPoint {
        (self.f)(&self.graph, x)
    }
}

/// The map combing the neighbourhood
/// `U = ⋃_{q ∈ α} B(q, d(a, q))` of a shortest loop `α` towards the
/// basepoint `a`, sending the rest of the graph to `a`.
///
/// A point `x` off the loop with nearest loop point `p` and `d(x, p) < d(a, p)`
/// goes to the point at distance `d(x, p)` from `p` on the shorter arc from
/// `p` to `a`; loop points are fixed.
#[derive(Clone, Debug)]
pub struct CombingMap {
    graph: Arc<MetricGraph>,
    chart: LoopChart,
    requested: GraphPoint,
    shift: Rational,
    a: GraphPoint,
    a_prime: GraphPoint,
    theta_a: Rational,
    half: Rational,
    /// Loop vertices with their arc coordinates, in walk order.
    loop_vertices: Vec<(usize, Rational)>,
}

/// Builds the combing map. `a` must lie on `alpha`; if `a` or its antipode
/// is a vertex, `a` is moved forward along the loop in steps of 1/1000 of
/// the shortest loop edge until neither is.
pub fn build_combing_contraction(g: Arc<MetricGraph>, alpha: &Loop, a: &GraphPoint) -> Result<CombingMap> {
    if !alpha.is_simple() {
        return Err(Error::HypothesisViolation("target loop is not simple".into()));
    }
    let girth = shortest_cycle(&g)?;
    if alpha.length() != girth.length() {
        return Err(Error::HypothesisViolation(format!(
            "target loop has length {} but the shortest cycle has length {}",
            alpha.length(),
            girth.length()
        )));
    }
    g.validate_point(a).map_err(|e| Error::InvalidBasepoint(e.to_string()))?;
    let chart = LoopChart::new(&g, alpha)?;
    let theta0 = chart
        .theta(&g, a)
        .ok_or_else(|| Error::InvalidBasepoint(format!("{} is not on the target loop", g.point_label(a))))?;
    let half = chart.length() / Rational::from_integer(2);
    let step = alpha
        .traversals()
        .iter()
        .map(|t| g.edge(t.edge).length.clone())
        .min()
        .expect("a loop has edges")
        / Rational::from_integer(1000);

    let mut chosen = None;
    for k in 0..1000i64 {
        let shift = &step * Rational::from_integer(k);
        let theta = chart.wrap(&(&theta0 + &shift));
        let p = chart.point(&g, &theta);
        let q = chart.point(&g, &(&theta + &half));
        if !p.is_vertex() && !q.is_vertex() {
            chosen = Some((shift, theta, p, q));
            break;
        }
    }
    let (shift, theta_a, a_pt, a_prime) = chosen.ok_or_else(|| {
        Error::InvalidBasepoint(format!("no admissible perturbation of {} found", g.point_label(a)))
    })?;
    if !shift.is_zero() {
        log::info!("basepoint {} moved by {shift} along the loop", g.point_label(a));
    }
    let loop_vertices = chart.vertices(&g).map(|(v, th)| (v, th.clone())).collect();
    Ok(CombingMap {
        requested: a.clone(),
        graph: g,
        chart,
        shift,
        a: a_pt,
        a_prime,
        theta_a,
        half,
        loop_vertices,
    })
}

impl CombingMap {
    pub fn graph_arc(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn target(&self) -> &Loop {
        self.chart.loop_ref()
    }

    pub fn basepoint(&self) -> &GraphPoint {
        &self.a
    }

    pub fn antipode(&self) -> &GraphPoint {
        &self.a_prime
    }

    /// Basepoint as supplied, before any perturbation.
    pub fn requested_basepoint(&self) -> &GraphPoint {
        &self.requested
    }

    /// Arc-length shift applied to the requested basepoint.
    pub fn basepoint_shift(&self) -> &Rational {
        &self.shift
    }

    /// Half the loop length, `d(a, a')`.
    pub fn half_length(&self) -> &Rational {
        &self.half
    }

    /// Loop vertices closest to an off-loop point, with that distance.
    /// Several vertices are returned only on exact ties.
    pub fn nearest_loop_vertices(&self, x: &GraphPoint) -> (Vec<usize>, Rational) {
        let g = &*self.graph;
        let mut best: Option<Rational> = None;
        let mut who = Vec::new();
        for (k, (v, _)) in self.loop_vertices.iter().enumerate() {
            let d = g.point_vertex_distance(x, *v);
            match best.as_ref().map(|b| d.cmp(b)) {
                None | Some(std::cmp::Ordering::Less) => {
                    best = Some(d);
                    who = vec![k];
                }
                Some(std::cmp::Ordering::Equal) => who.push(k),
                Some(std::cmp::Ordering::Greater) => {}
            }
        }
        (who.into_iter().map(|k| self.loop_vertices[k].0).collect(), best.expect("loop has vertices"))
    }

    /// Whether `x` lies in `U`, i.e. `d(x, q) < d(a, q)` for some loop point `q`.
    ///
    /// `q ↦ d(x, q) - d(a, q)` is piecewise linear along the loop, so it is
    /// enough to test its breakpoints.
    pub fn in_neighbourhood(&self, x: &GraphPoint) -> bool {
        let g = &*self.graph;
        let chart = &self.chart;
        if chart.contains(g, x) {
            return *x != self.a;
        }
        let mut candidates: Vec<Rational> = vec![self.theta_a.clone(), chart.wrap(&(&self.theta_a + &self.half))];
        for (k, t) in chart.loop_ref().traversals().iter().enumerate() {
            let e = g.edge(t.edge);
            let start = &chart.vertex_thetas()[k];
            candidates.push(start.clone());
            let (near, far) = if t.forward { (e.u, e.v) } else { (e.v, e.u) };
            // kink of d(x, ·) along this loop edge
            let s = (&e.length + g.point_vertex_distance(x, far) - g.point_vertex_distance(x, near))
                / Rational::from_integer(2);
            if s.is_positive() && s < e.length {
                candidates.push(start + &s);
            }
        }
        candidates.into_iter().any(|th| {
            let q = chart.point(g, &th);
            g.distance(x, &q) < chart.arc_distance(&th, &self.theta_a)
        })
    }

    fn theta_of_vertex(&self, v: usize) -> &Rational {
        &self.loop_vertices.iter().find(|(w, _)| *w == v).expect("vertex on loop").1
    }
}

impl LoopMap for CombingMap {
    fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    fn chart(&self) -> &LoopChart {
        &self.chart
    }

    fn evaluate(&self, x: &GraphPoint) -> GraphPoint {
        let g = &*self.graph;
        if self.chart.contains(g, x) {
            return x.clone();
        }
        let (nearest, d) = self.nearest_loop_vertices(x);
        if nearest.len() > 1 {
            log::debug!(
                "{} has {} nearest loop points; using vertex {}",
                g.point_label(x),
                nearest.len(),
                nearest[0]
            );
        }
        let p = nearest[0];
        let theta_p = self.theta_of_vertex(p);
        let to_a = self.chart.arc_distance(theta_p, &self.theta_a);
        if d >= to_a {
            return self.a.clone();
        }
        let forward = self.chart.wrap(&(&self.theta_a - theta_p));
        let sign = if forward < self.half {
            Rational::one()
        } else if forward > self.half {
            -Rational::one()
        } else {
            log::debug!("vertex {p} is antipodal to the basepoint; combing in the positive direction");
            Rational::one()
        };
        self.chart.point(g, &(theta_p + &(sign * d)))
    }

    fn breakpoints(&self, edge: usize) -> Vec<Rational> {
        let g = &*self.graph;
        let e = g.edge(edge);
        let len = &e.length;
        let mut out = Vec::new();
        if self.chart.loop_ref().traversals().iter().any(|t| t.edge == edge) {
            for p in [&self.a, &self.a_prime] {
                if let GraphPoint::Interior { edge: pe, offset } = p {
                    if *pe == edge {
                        out.push(offset.clone());
                    }
                }
            }
        } else {
            let two = Rational::from_integer(2);
            for (w1, _) in &self.loop_vertices {
                let du = g.vertex_distance(e.u, *w1);
                let to_a = self.chart.arc_distance(self.theta_of_vertex(*w1), &self.theta_a);
                out.push(&to_a - du);
                out.push(len + g.vertex_distance(e.v, *w1) - &to_a);
                for (w2, _) in &self.loop_vertices {
                    out.push((len + g.vertex_distance(e.v, *w2) - du) / &two);
                }
            }
        }
        out.retain(|t| t.is_positive() && t < len);
        out.sort();
        out.dedup();
        out
    }
}

/// Tries basepoints at the midpoints of the loop's edges, in walk order, and
/// returns the first map that certifies as 1-Lipschitz at `mesh`, or the
/// first candidate with its failing report when none does.
pub fn choose_basepoint(g: Arc<MetricGraph>, alpha: &Loop, mesh: &Rational) -> Result<(CombingMap, LipschitzReport)> {
    let mut first = None;
    for t in alpha.traversals() {
        let a = g.edge_midpoint(t.edge);
        let map = match build_combing_contraction(g.clone(), alpha, &a) {
            Ok(m) => m,
            Err(Error::InvalidBasepoint(_)) => continue,
            Err(e) => return Err(e),
        };
        let report = verify_lipschitz(&map, mesh)?;
        if report.passes() {
            return Ok((map, report));
        }
        first.get_or_insert((map, report));
    }
    first.ok_or_else(|| Error::InvalidBasepoint("no loop edge admits a basepoint".into()))
}
