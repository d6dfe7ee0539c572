//! Geodesic-circle verification and the arc-coordinate chart of a simple loop.

use super::{GraphPoint, Loop, MetricGraph};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Arc-length parametrization of a simple loop, `theta` in `[0, length)`.
#[derive(Clone, Debug)]
pub struct LoopChart {
    lp: Loop,
    starts: Vec<Rational>,
}

impl LoopChart {
    pub fn new(g: &MetricGraph, lp: &Loop) -> Result<Self> {
        if !lp.is_simple() {
            return Err(Error::InvalidInput("loop is not simple".into()));
        }
        let mut starts = Vec::with_capacity(lp.traversals().len());
        let mut acc = Rational::zero();
        for t in lp.traversals() {
            starts.push(acc.clone());
            acc += &g.edge(t.edge).length;
        }
        let _ = g;
        Ok(LoopChart { lp: lp.clone(), starts })
    }

    pub fn loop_ref(&self) -> &Loop {
        &self.lp
    }

    pub fn length(&self) -> &Rational {
        self.lp.length()
    }

    /// Arc coordinate of a point, or `None` if the point is not on the loop.
    pub fn theta(&self, g: &MetricGraph, p: &GraphPoint) -> Option<Rational> {
        match p {
            GraphPoint::Vertex(v) => self
                .lp
                .traversals()
                .iter()
                .position(|t| t.start(g) == *v)
                .map(|k| self.starts[k].clone()),
            GraphPoint::Interior { edge, offset } => {
                let k = self.lp.traversals().iter().position(|t| t.edge == *edge)?;
                let t = &self.lp.traversals()[k];
                let along = if t.forward { offset.clone() } else { &g.edge(*edge).length - offset };
                Some(&self.starts[k] + along)
            }
        }
    }

    /// Reduces an arbitrary rational into `[0, length)`.
    pub fn wrap(&self, theta: &Rational) -> Rational {
        let len = self.length();
        let turns = Rational::from((theta / len).floor());
        theta - &(turns * len)
    }

    /// The loop point with arc coordinate `theta` (taken modulo the length).
    pub fn point(&self, g: &MetricGraph, theta: &Rational) -> GraphPoint {
        let theta = self.wrap(theta);
        let k = match self.starts.binary_search(&theta) {
            Ok(k) => return GraphPoint::Vertex(self.lp.traversals()[k].start(g)),
            Err(k) => k - 1,
        };
        let t = &self.lp.traversals()[k];
        let along = &theta - &self.starts[k];
        let offset = if t.forward { along } else { &g.edge(t.edge).length - &along };
        g.point_on_edge(t.edge, offset).expect("chart offsets stay inside the edge")
    }

    /// Intrinsic distance along the loop.
    pub fn arc_distance(&self, a: &Rational, b: &Rational) -> Rational {
        let d = (a - b).abs();
        let other = self.length() - &d;
        d.min(other)
    }

    /// Arc coordinates of the loop's vertices, in walk order.
    pub fn vertex_thetas(&self) -> &[Rational] {
        &self.starts
    }

    /// Vertices of the loop together with their arc coordinates.
    pub fn vertices<'a>(&'a self, g: &'a MetricGraph) -> impl Iterator<Item = (usize, &'a Rational)> + 'a {
        self.lp.traversals().iter().zip(&self.starts).map(move |(t, th)| (t.start(g), th))
    }

    /// Whether a point lies on the loop.
    pub fn contains(&self, g: &MetricGraph, p: &GraphPoint) -> bool {
        self.theta(g, p).is_some()
    }
}

/// Outcome of [`is_geodesic_circle`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicCircleCheck {
    pub is_geodesic: bool,
    pub witness: Option<CircleWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleWitness {
    pub p: GraphPoint,
    pub q: GraphPoint,
    pub graph_distance: Rational,
    pub loop_distance: Rational,
}

/// Decides whether a simple loop is isometrically embedded, i.e. graph
/// distance equals arc distance for every pair of loop points.
///
/// Pairs of loop vertices decide the question: a shortest path between two
/// loop points that leaves the loop does so through a loop vertex and
/// re-enters through another, so each excursion can be replaced by an arc
/// no longer than it whenever all vertex pairs are fine. Edge midpoints are
/// checked as well and serve as witnesses on loops with a single vertex.
pub fn is_geodesic_circle(g: &MetricGraph, lp: &Loop) -> Result<GeodesicCircleCheck> {
    let chart = LoopChart::new(g, lp)?;
    let mut points: Vec<(GraphPoint, Rational)> = Vec::new();
    for (t, start) in lp.traversals().iter().zip(chart.vertex_thetas()) {
        points.push((GraphPoint::Vertex(t.start(g)), start.clone()));
    }
    for (t, start) in lp.traversals().iter().zip(chart.vertex_thetas()) {
        let half = &g.edge(t.edge).length / Rational::from_integer(2);
        points.push((g.edge_midpoint(t.edge), start + &half));
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let (p, tp) = &points[i];
            let (q, tq) = &points[j];
            let along = chart.arc_distance(tp, tq);
            let direct = g.distance(p, q);
            if direct < along {
                return Ok(GeodesicCircleCheck {
                    is_geodesic: false,
                    witness: Some(CircleWitness {
                        p: p.clone(),
                        q: q.clone(),
                        graph_distance: direct,
                        loop_distance: along,
                    }),
                });
            }
        }
    }
    Ok(GeodesicCircleCheck { is_geodesic: true, witness: None })
}
