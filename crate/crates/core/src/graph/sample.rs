//! Finite samples of a metric graph and general finite metric spaces.

use std::fmt::Write as _;
use std::sync::Arc;

use super::{GraphPoint, MetricGraph};
use crate::error::{Error, Result};
use crate::rational::{ceil_usize, Rational};

/// A finite metric space with exact distances, optionally sampled from a graph.
#[derive(Clone, Debug)]
pub struct SampledSpace {
    labels: Vec<String>,
    distances: Vec<Vec<Rational>>,
    source: Option<(Arc<MetricGraph>, Vec<GraphPoint>)>,
}

impl SampledSpace {
    /// A finite metric space from an explicit matrix. The matrix is validated.
    pub fn from_matrix(labels: Vec<String>, distances: Vec<Vec<Rational>>) -> Result<Self> {
        let space = SampledSpace { labels, distances, source: None };
        space.validate()?;
        Ok(space)
    }

    /// Samples at the given points of `g`, in the given order.
    pub fn from_points(g: Arc<MetricGraph>, points: Vec<GraphPoint>) -> Result<Self> {
        for p in &points {
            g.validate_point(p)?;
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::InvalidInput(format!("duplicate sample point {}", g.point_label(&points[i]))));
                }
            }
        }
        let labels = points.iter().map(|p| g.point_label(p)).collect();
        let distances = points
            .iter()
            .map(|p| points.iter().map(|q| g.distance(p, q)).collect())
            .collect();
        Ok(SampledSpace { labels, distances, source: Some((g, points)) })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distance(&self, i: usize, j: usize) -> &Rational {
        &self.distances[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.distances
    }

    pub fn graph(&self) -> Option<&Arc<MetricGraph>> {
        self.source.as_ref().map(|(g, _)| g)
    }

    /// Graph points behind the samples, when the space came from a graph.
    pub fn points(&self) -> Option<&[GraphPoint]> {
        self.source.as_ref().map(|(_, pts)| pts.as_slice())
    }

    pub fn index_of(&self, p: &GraphPoint) -> Option<usize> {
        self.points()?.iter().position(|q| q == p)
    }

    /// Appends a graph point (no-op if present) and returns its index.
    pub fn push_point(&mut self, p: GraphPoint) -> Result<usize> {
        let Some((g, pts)) = self.source.as_mut() else {
            return Err(Error::InvalidInput("space has no source graph".into()));
        };
        if let Some(i) = pts.iter().position(|q| *q == p) {
            return Ok(i);
        }
        g.validate_point(&p)?;
        let row: Vec<Rational> = pts.iter().map(|q| g.distance(&p, q)).collect();
        for (existing, d) in self.distances.iter_mut().zip(&row) {
            existing.push(d.clone());
        }
        let mut row = row;
        row.push(Rational::zero());
        self.distances.push(row);
        self.labels.push(g.point_label(&p));
        pts.push(p);
        Ok(pts.len() - 1)
    }

    /// Sub-space on the given indices, keeping their order.
    pub fn subspace(&self, indices: &[usize]) -> SampledSpace {
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        let distances = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.distances[i][j].clone()).collect())
            .collect();
        let source = self
            .source
            .as_ref()
            .map(|(g, pts)| (g.clone(), indices.iter().map(|&i| pts[i].clone()).collect()));
        SampledSpace { labels, distances, source }
    }

    /// Checks the metric axioms exactly: square, symmetric, zero diagonal,
    /// positive off-diagonal, triangle inequality.
    pub fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        if self.distances.len() != n || self.distances.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("distance matrix is not square or does not match labels".into()));
        }
        for i in 0..n {
            if !self.distances[i][i].is_zero() {
                return Err(Error::InvalidInput(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..i {
                if self.distances[i][j] != self.distances[j][i] {
                    return Err(Error::InvalidInput(format!("asymmetric entries at ({i}, {j})")));
                }
                if !self.distances[i][j].is_positive() {
                    return Err(Error::InvalidInput(format!("non-positive distance at ({i}, {j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.distances[i][k] > &self.distances[i][j] + &self.distances[j][k] {
                        return Err(Error::InvalidInput(format!("triangle inequality fails for ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// CSV export: a header of point labels followed by the distance matrix.
    pub fn to_csv(&self) -> String {
        let mut out = self.labels.join(",");
        out.push('\n');
        for row in &self.distances {
            let cells: Vec<String> = row.iter().map(Rational::to_string).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// All vertices plus equally spaced interior points, so consecutive samples
/// along each edge are at most `mesh` apart. Points are ordered by
/// `(edge id, offset)`.
pub fn sample_space(g: &MetricGraph, mesh: &Rational) -> Result<SampledSpace> {
    if !mesh.is_positive() {
        return Err(Error::InvalidInput(format!("mesh must be positive, got {mesh}")));
    }
    let mut points: Vec<GraphPoint> = (0..g.vertex_count()).map(GraphPoint::Vertex).collect();
    for (idx, e) in g.edges().iter().enumerate() {
        let pieces = ceil_usize(&(&e.length / mesh))
            .ok_or_else(|| Error::InvalidInput("subdivision count overflows".into()))?;
        let step = &e.length / Rational::from_integer(pieces as i64);
        for i in 1..pieces {
            let offset = &step * Rational::from_integer(i as i64);
            points.push(GraphPoint::Interior { edge: idx, offset });
        }
    }
    points.sort_by_cached_key(|p| g.point_key(p));
    SampledSpace::from_points(Arc::new(g.clone()), points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_quarter_mesh() {
        let g = MetricGraph::from_edges(1, &[(0, 0, Rational::one())]).unwrap();
        let s = sample_space(&g, &Rational::new(1, 4)).unwrap();
        assert_eq!(s.len(), 4);
        let mut values: Vec<Rational> = (0..4).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| s.distance(i, j).clone()).collect();
        values.sort();
        values.dedup();
        assert_eq!(values, vec![Rational::new(1, 4), Rational::new(1, 2)]);
        s.validate().unwrap();
    }

    #[test]
    fn single_edge_subdivision() {
        let g = MetricGraph::from_edges(2, &[(0, 1, Rational::one())]).unwrap();
        let s = sample_space(&g, &Rational::new(3, 10)).unwrap();
        let labels: Vec<&str> = s.labels().iter().map(String::as_str).collect();
        assert_eq!(labels, ["e0@0", "e0@1/4", "e0@1/2", "e0@3/4", "e0@1"]);
        assert_eq!(s.distance(0, 4), &Rational::one());
    }

    #[test]
    fn mesh_must_be_positive() {
        let g = MetricGraph::from_edges(1, &[(0, 0, Rational::one())]).unwrap();
        assert!(sample_space(&g, &Rational::zero()).is_err());
        assert!(sample_space(&g, &Rational::new(-1, 2)).is_err());
    }

    #[test]
    fn matrix_validation_catches_violations() {
        let r = Rational::from_integer;
        let bad = SampledSpace::from_matrix(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![r(0), r(1), r(5)], vec![r(1), r(0), r(1)], vec![r(5), r(1), r(0)]],
        );
        assert!(bad.is_err());
        let ok = SampledSpace::from_matrix(
            vec!["a".into(), "b".into()],
            vec![vec![r(0), r(5)], vec![r(5), r(0)]],
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn csv_layout() {
        let g = MetricGraph::from_edges(2, &[(0, 1, Rational::new(1, 2))]).unwrap();
        let s = sample_space(&g, &Rational::one()).unwrap();
        assert_eq!(s.to_csv(), "e0@0,e0@1/2\n0,1/2\n1/2,0\n");
    }
}
