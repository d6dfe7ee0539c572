use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{GraphPoint, MetricGraph, SampledSpace};
use crate::rational::Rational;
use crate::rips::DEFAULT_SIMPLEX_BUDGET;

use super::combing::LoopMap;

fn samples_on_edge(g: &MetricGraph, edge: usize, mesh: &Rational, extra: &[Rational]) -> Vec<Rational> {
    let len = &g.edge(edge).length;
    let pieces = crate::rational::ceil_usize(&(len / mesh)).unwrap_or(1).max(1);
    let step = len / Rational::from_integer(pieces as i64);
    let mut out: Vec<Rational> = (1..pieces).map(|k| &step * Rational::from_integer(k as i64)).collect();
    out.extend(extra.iter().cloned());
    out.sort();
    out.dedup();
    out
}

/// Vertices, mesh samples on every edge and every breakpoint of the map.
fn certification_points<M: LoopMap + ?Sized>(map: &M, mesh: &Rational, loop_only: bool) -> Vec<GraphPoint> {
    let g = map.graph();
    let on_loop: Vec<usize> = map.chart().loop_ref().traversals().iter().map(|t| t.edge).collect();
    let mut points = Vec::new();
    let mut vertex_seen = vec![false; g.vertex_count()];
    for edge in 0..g.edge_count() {
        if loop_only && !on_loop.contains(&edge) {
            continue;
        }
        let e = g.edge(edge);
        for v in [e.u, e.v] {
            if !vertex_seen[v] {
                vertex_seen[v] = true;
                points.push(GraphPoint::Vertex(v));
            }
        }
        for t in samples_on_edge(g, edge, mesh, &map.breakpoints(edge)) {
            points.push(GraphPoint::Interior { edge, offset: t });
        }
    }
    if !loop_only {
        for (v, seen) in vertex_seen.iter().enumerate() {
            if !seen {
                points.push(GraphPoint::Vertex(v));
            }
        }
    }
    points
}

fn check_mesh(mesh: &Rational) -> Result<()> {
    if mesh.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("mesh must be positive, got {mesh}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RetractionReport {
    pub holds: bool,
    pub points_checked: usize,
    /// First loop point not fixed, with its image.
    pub witness: Option<(GraphPoint, GraphPoint)>,
}

/// Checks exactly that the map fixes loop vertices, mesh samples on loop
/// edges and the map's breakpoints there.
pub fn verify_retraction<M: LoopMap + ?Sized>(map: &M, mesh: &Rational) -> Result<RetractionReport> {
    check_mesh(mesh)?;
    let points = certification_points(map, mesh, true);
    let witness = points.iter().find_map(|x| {
        let y = map.evaluate(x);
        (y != *x).then(|| (x.clone(), y))
    });
    Ok(RetractionReport { holds: witness.is_none(), points_checked: points.len(), witness })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LipschitzWitness {
    pub x: GraphPoint,
    pub y: GraphPoint,
    pub distance: Rational,
    pub image_distance: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LipschitzReport {
    pub pairs_checked: usize,
    /// Largest `d(f(x), f(y)) / d(x, y)`; `None` when no pair was checked.
    pub max_ratio: Option<Rational>,
    /// First pair, in sample order, with ratio above 1.
    pub witness: Option<LipschitzWitness>,
}

impl LipschitzReport {
    pub fn passes(&self) -> bool {
        self.max_ratio.as_ref().is_none_or(|r| *r <= Rational::one())
    }
}

/// Compares `d(f(x), f(y))` with `d(x, y)` over all pairs of vertices, mesh
/// samples and breakpoints of the map.
pub fn verify_lipschitz<M: LoopMap + ?Sized>(map: &M, mesh: &Rational) -> Result<LipschitzReport> {
    check_mesh(mesh)?;
    let g = map.graph();
    let points = certification_points(map, mesh, false);
    let images: Vec<GraphPoint> = points.par_iter().map(|x| map.evaluate(x)).collect();
    let rows: Vec<(Option<Rational>, Option<LipschitzWitness>)> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut best: Option<Rational> = None;
            let mut witness = None;
            for j in (i + 1)..points.len() {
                let d = g.distance(&points[i], &points[j]);
                let fd = g.distance(&images[i], &images[j]);
                let ratio = &fd / &d;
                if witness.is_none() && ratio > Rational::one() {
                    witness = Some(LipschitzWitness {
                        x: points[i].clone(),
                        y: points[j].clone(),
                        distance: d,
                        image_distance: fd,
                    });
                }
                if best.as_ref().is_none_or(|b| ratio > *b) {
                    best = Some(ratio);
                }
            }
            (best, witness)
        })
        .collect();
    let mut max_ratio: Option<Rational> = None;
    let mut witness = None;
    for (best, w) in rows {
        if let Some(b) = best {
            if max_ratio.as_ref().is_none_or(|m| b > *m) {
                max_ratio = Some(b);
            }
        }
        if witness.is_none() {
            witness = w;
        }
    }
    let n = points.len();
    Ok(LipschitzReport { pairs_checked: n * n.saturating_sub(1) / 2, max_ratio, witness })
}

/// Checks that between consecutive breakpoints and mesh samples on each
/// edge the image moves along the loop with slope -1, 0 or 1, using three
/// points per piece. Returns the first offending `(edge, from, to)`.
pub fn verify_piecewise_slopes<M: LoopMap + ?Sized>(map: &M, mesh: &Rational) -> Result<Option<(usize, Rational, Rational)>> {
    check_mesh(mesh)?;
    let g = map.graph();
    let chart = map.chart();
    let half = chart.length() / Rational::from_integer(2);
    let signed = |from: &GraphPoint, to: &GraphPoint| -> Option<Rational> {
        let a = chart.theta(g, &map.evaluate(from))?;
        let b = chart.theta(g, &map.evaluate(to))?;
        let mut d = chart.wrap(&(&b - &a));
        if d > half {
            d -= chart.length();
        }
        Some(d)
    };
    for edge in 0..g.edge_count() {
        let mut cuts = vec![Rational::zero()];
        cuts.extend(samples_on_edge(g, edge, mesh, &map.breakpoints(edge)));
        cuts.push(g.edge(edge).length.clone());
        for w in cuts.windows(2) {
            let mid = w[0].midpoint(&w[1]);
            let p0 = g.point_on_edge(edge, w[0].clone())?;
            let pm = g.point_on_edge(edge, mid.clone())?;
            let p1 = g.point_on_edge(edge, w[1].clone())?;
            let (Some(d1), Some(d2)) = (signed(&p0, &pm), signed(&pm, &p1)) else {
                return Ok(Some((edge, w[0].clone(), w[1].clone())));
            };
            let step = &mid - &w[0];
            let slope = &d1 / &step;
            let ok = d1 == d2 && (slope.is_zero() || slope.abs() == Rational::one());
            if !ok {
                return Ok(Some((edge, w[0].clone(), w[1].clone())));
            }
        }
    }
    Ok(None)
}

/// A map on the points of a sampled space, by index.
#[derive(Clone, Debug)]
pub struct InducedPointMap {
    /// The original samples followed by any image points that were missing.
    pub space: SampledSpace,
    /// `images[i]` is the index of the image of point `i`, for every point
    /// of `space`.
    pub images: Vec<usize>,
}

/// Discretizes a loop map on a sample of its source graph, appending image
/// points that are not yet samples.
pub fn induced_point_map<M: LoopMap + ?Sized>(map: &M, s: &SampledSpace) -> Result<InducedPointMap> {
    let (Some(graph), Some(points)) = (s.graph(), s.points()) else {
        return Err(Error::InvalidInput("sample does not come from a graph".into()));
    };
    if **graph != *map.graph() {
        return Err(Error::InvalidInput("sample comes from a different graph".into()));
    }
    let points = points.to_vec();
    let mut space = s.clone();
    let mut images = Vec::with_capacity(points.len());
    for x in &points {
        let y = map.evaluate(x);
        let idx = match space.index_of(&y) {
            Some(i) => i,
            None => space.push_point(y)?,
        };
        images.push(idx);
    }
    for i in points.len()..space.len() {
        let x = space.points().expect("graph sample")[i].clone();
        let y = map.evaluate(&x);
        let idx = space.index_of(&y).ok_or_else(|| Error::Internal("image of an image point is new".into()))?;
        images.push(idx);
    }
    Ok(InducedPointMap { space, images })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionCheck {
    pub holds: bool,
    pub pairs_checked: usize,
    /// First pair `(i, j)`, `i < j`, with `d(i, j) < r <= d(f i, f j)`.
    pub witness: Option<(usize, usize)>,
}

fn check_images(images: &[usize], s: &SampledSpace, r: &Rational) -> Result<()> {
    if !r.is_positive() {
        return Err(Error::InvalidInput(format!("scale must be positive, got {r}")));
    }
    if images.len() != s.len() || images.iter().any(|&i| i >= s.len()) {
        return Err(Error::InvalidInput("point map does not match the sample".into()));
    }
    Ok(())
}

/// Whether `d(x, y) < r` implies `d(f(x), f(y)) < r` on all sample pairs.
pub fn verify_r_contraction(images: &[usize], s: &SampledSpace, r: &Rational) -> Result<ContractionCheck> {
    check_images(images, s, r)?;
    let n = s.len();
    let witness = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .find(|&(i, j)| s.distance(i, j) < r && s.distance(images[i], images[j]) >= r);
    Ok(ContractionCheck { holds: witness.is_none(), pairs_checked: n * n.saturating_sub(1) / 2, witness })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialCheck {
    pub holds: bool,
    pub simplices_checked: usize,
    /// A simplex whose image is not a simplex, or a single point `[i]`
    /// with `f(f(i)) != f(i)`.
    pub witness: Option<Vec<usize>>,
}

/// Whether the point map is an idempotent simplicial map of `Rips(s, r)`
/// to itself through dimension `max_dim`.
pub fn verify_simplicial_retraction(
    images: &[usize],
    s: &SampledSpace,
    r: &Rational,
    max_dim: usize,
) -> Result<SimplicialCheck> {
    check_images(images, s, r)?;
    let n = s.len();
    if let Some(i) = (0..n).find(|&i| images[images[i]] != images[i]) {
        return Ok(SimplicialCheck { holds: false, simplices_checked: 0, witness: Some(vec![i]) });
    }
    let close: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i != j && s.distance(i, j) < r).collect()).collect();
    let mut checked = 0usize;
    let mut stack = Vec::new();
    for v in 0..n {
        stack.clear();
        stack.push(v);
        if let Some(w) = walk_cliques(&close, images, max_dim + 1, &mut stack, &mut checked)? {
            return Ok(SimplicialCheck { holds: false, simplices_checked: checked, witness: Some(w) });
        }
    }
    Ok(SimplicialCheck { holds: true, simplices_checked: checked, witness: None })
}

fn walk_cliques(
    close: &[Vec<bool>],
    images: &[usize],
    max_size: usize,
    stack: &mut Vec<usize>,
    checked: &mut usize,
) -> Result<Option<Vec<usize>>> {
    *checked += 1;
    if *checked as u128 > DEFAULT_SIMPLEX_BUDGET {
        return Err(Error::BudgetExceeded { count: *checked as u128, budget: DEFAULT_SIMPLEX_BUDGET });
    }
    let img: Vec<usize> = stack.iter().map(|&i| images[i]).collect();
    for (k, &a) in img.iter().enumerate() {
        for &b in &img[k + 1..] {
            if a != b && !close[a][b] {
                return Ok(Some(stack.clone()));
            }
        }
    }
    if stack.len() == max_size {
        return Ok(None);
    }
    let last = *stack.last().expect("non-empty");
    for next in (last + 1)..close.len() {
        if stack.iter().all(|&v| close[v][next]) {
            stack.push(next);
            let found = walk_cliques(close, images, max_size, stack, checked)?;
            stack.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::{build_combing_contraction, FnLoopMap};
    use std::sync::Arc;

    use crate::graph::{sample_space, shortest_cycle, Loop};

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn theta() -> Arc<MetricGraph> {
        Arc::new(MetricGraph::from_edges(2, &[(0, 1, q("3")), (0, 1, q("4")), (0, 1, q("5"))]).unwrap())
    }

    #[test]
    fn theta_combing_certifies() {
        let g = theta();
        let alpha = shortest_cycle(&g).unwrap();
        let map = build_combing_contraction(g.clone(), &alpha, &g.edge_midpoint(0)).unwrap();
        assert!(verify_retraction(&map, &q("1/10")).unwrap().holds);
        let report = verify_lipschitz(&map, &q("1/2")).unwrap();
        assert!(report.passes(), "{report:?}");
        assert_eq!(report.max_ratio, Some(Rational::one()));
        assert_eq!(verify_piecewise_slopes(&map, &q("1/2")).unwrap(), None);
    }

    #[test]
    fn bad_basepoint_breaks_continuity() {
        let g = theta();
        let alpha = shortest_cycle(&g).unwrap();
        let edge4 = alpha.traversals().iter().find(|t| g.edge(t.edge).length == q("4")).unwrap().edge;
        let a = g.point_on_edge(edge4, q("3/5")).unwrap();
        let map = build_combing_contraction(g.clone(), &alpha, &a).unwrap();
        let report = verify_lipschitz(&map, &q("1/2")).unwrap();
        assert!(!report.passes());
        assert!(report.witness.is_some());
    }

    #[test]
    fn controls() {
        let g = Arc::new(MetricGraph::from_edges(1, &[(0, 0, q("6"))]).unwrap());
        let lp = shortest_cycle(&g).unwrap();
        let id = FnLoopMap::new(g.clone(), &lp, |_, x| x.clone()).unwrap();
        assert_eq!(verify_lipschitz(&id, &q("1")).unwrap().max_ratio, Some(Rational::one()));
        let a = g.edge_midpoint(0);
        let constant = FnLoopMap::new(g.clone(), &lp, move |_, _| a.clone()).unwrap();
        assert_eq!(verify_lipschitz(&constant, &q("1")).unwrap().max_ratio, Some(Rational::zero()));
        let report = verify_retraction(&constant, &q("1")).unwrap();
        assert!(!report.holds);
        assert_eq!(report.witness.unwrap().0, GraphPoint::Vertex(0));
    }

    #[test]
    fn stretching_map_is_not_an_r_contraction() {
        let labels = vec!["0".into(), "1".into(), "2".into()];
        let m = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from_integer(x)).collect())
            .collect();
        let s = SampledSpace::from_matrix(labels, m).unwrap();
        let f = [0, 2, 2];
        let check = verify_r_contraction(&f, &s, &q("3/2")).unwrap();
        assert_eq!(check.witness, Some((0, 1)));
        let simp = verify_simplicial_retraction(&f, &s, &q("3/2"), 1).unwrap();
        assert_eq!(simp.witness, Some(vec![0, 1]));
        assert!(verify_r_contraction(&[0, 1, 2], &s, &q("3/2")).unwrap().holds);
        assert!(verify_r_contraction(&f, &s, &q("0")).is_err());
    }

    #[test]
    fn induced_map_on_lollipop() {
        let g = Arc::new(MetricGraph::from_edges(3, &[(0, 1, q("3")), (1, 0, q("3")), (0, 2, q("1"))]).unwrap());
        let alpha = Loop::from_edge_cycle(&g, &[0, 1]).unwrap();
        let map = build_combing_contraction(g.clone(), &alpha, &g.point_on_edge(0, q("2")).unwrap()).unwrap();
        let s = sample_space(&g, &q("1/4")).unwrap();
        let induced = induced_point_map(&map, &s).unwrap();
        assert_eq!(induced.space.len(), s.len());
        let stick_end = s.index_of(&GraphPoint::Vertex(2)).unwrap();
        assert_eq!(induced.space.points().unwrap()[induced.images[stick_end]], g.point_on_edge(0, q("1")).unwrap());
        for r in ["1/2", "1", "3"] {
            assert!(verify_r_contraction(&induced.images, &induced.space, &q(r)).unwrap().holds);
        }
        assert!(verify_simplicial_retraction(&induced.images, &induced.space, &q("1/2"), 2).unwrap().holds);
    }
}
