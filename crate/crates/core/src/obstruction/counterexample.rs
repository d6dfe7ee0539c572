use crate::graph::{Loop, MetricGraph, Traversal};
use crate::rational::Rational;

/// Two concentric circles of lengths 999 and 1000 joined by three short
/// spokes and a crossing pair of diagonals at the bottom.
///
/// Each circle has five vertices: top, left, bottom-left, bottom-right and
/// right, with a bottom arc of length 5 and the other four arcs equal. The
/// diagonals join inner bottom-left to outer bottom-right and outer
/// bottom-left to inner bottom-right. Every cycle other than the two
/// circles and the loops running once around is shorter than 999, so a
/// contraction onto the inner circle must send the outer one to a loop of
/// winding 1. The returned witness runs the long way round the inner circle,
/// crosses, runs the long way round the outer circle and crosses back: it
/// has length 1993 but winds twice, and `2 · 999 > 1993`.
pub fn build_concentric_counterexample() -> (MetricGraph, Loop, Loop) {
    let q = |n: i64, d: i64| Rational::new(n, d);
    // inner: 0 top, 1 left, 2 bottom-left, 3 bottom-right, 4 right
    // outer: 5 top, 6 left, 7 bottom-left, 8 bottom-right, 9 right
    let inner_arc = q(994, 4);
    let outer_arc = q(995, 4);
    let mut edges = Vec::new();
    for (base, arc) in [(0usize, &inner_arc), (5, &outer_arc)] {
        edges.push((base, base + 1, arc.clone()));
        edges.push((base + 1, base + 2, arc.clone()));
        edges.push((base + 2, base + 3, q(5, 1)));
        edges.push((base + 3, base + 4, arc.clone()));
        edges.push((base + 4, base, arc.clone()));
    }
    edges.push((0, 5, q(4, 1)));
    edges.push((1, 6, q(4, 1)));
    edges.push((4, 9, q(4, 1)));
    edges.push((2, 8, q(2, 1)));
    edges.push((7, 3, q(2, 1)));
    let g = MetricGraph::from_edges(10, &edges).expect("counterexample graph is valid");
    let alpha = Loop::from_edge_cycle(&g, &[0, 1, 2, 3, 4]).expect("inner circle is a cycle");
    let walk = [
        // inner long way: bottom-right, right, top, left, bottom-left
        (3, 3usize),
        (4, 4),
        (0, 0),
        (1, 1),
        (13, 2),
        // outer long way: bottom-right, right, top, left, bottom-left
        (8, 8),
        (9, 9),
        (5, 5),
        (6, 6),
        (14, 7),
    ];
    let traversals = walk.iter().map(|&(e, from)| Traversal::from_to(&g, e, from)).collect();
    let witness = Loop::new(&g, traversals).expect("witness is a closed walk");
    (g, alpha, witness)
}
