//! Graph JSON: `{"vertices": N, "edges": [{"id": 0, "u": 0, "v": 1, "length": "3/2"}]}`.

use serde::{Deserialize, Serialize};

use super::{Edge, Loop, MetricGraph};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub vertices: usize,
    pub edges: Vec<EdgeJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct EdgeJson {
    pub id: u64,
    pub u: usize,
    pub v: usize,
    pub length: Rational,
}

/// Parses graph JSON; malformed input reports the offending JSON path.
pub fn parse_graph(text: &str) -> Result<MetricGraph> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let parsed: GraphJson = serde_path_to_error::deserialize(de).map_err(|err| Error::Schema {
        path: err.path().to_string(),
        message: err.inner().to_string(),
    })?;
    graph_from_json(&parsed)
}

pub fn graph_from_json(parsed: &GraphJson) -> Result<MetricGraph> {
    let edges = parsed
        .edges
        .iter()
        .map(|e| Edge { id: e.id, u: e.u, v: e.v, length: e.length.clone() })
        .collect();
    MetricGraph::new(parsed.vertices, edges)
}

pub fn graph_to_json(g: &MetricGraph) -> GraphJson {
    GraphJson {
        vertices: g.vertex_count(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeJson { id: e.id, u: e.u, v: e.v, length: e.length.clone() })
            .collect(),
    }
}

/// Canonical JSON text for a graph (edges sorted by id, lengths normalized).
pub fn write_graph(g: &MetricGraph) -> String {
    serde_json::to_string_pretty(&graph_to_json(g)).expect("graph JSON serializes")
}

/// JSON view of a loop: its length and the directed edge ids along it.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LoopJson {
    pub length: Rational,
    pub edges: Vec<TraversalJson>,
    pub simple: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TraversalJson {
    pub id: u64,
    pub forward: bool,
}

pub fn loop_to_json(g: &MetricGraph, lp: &Loop) -> LoopJson {
    LoopJson {
        length: lp.length().clone(),
        edges: lp
            .edge_ids(g)
            .into_iter()
            .map(|(id, forward)| TraversalJson { id, forward })
            .collect(),
        simple: lp.is_simple(),
    }
}
