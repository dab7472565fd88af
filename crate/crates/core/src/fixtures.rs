//! Small reference instances.

use crate::ears::EarDecomposition;
use crate::extended::{build_extended_graph, ExtendedGraph};
use crate::graph::{Graph, Link};
use crate::solver::MetricAssignment;

/// K4 on `a, b, c, d`.
pub fn k4() -> Graph {
    Graph::build(
        &["a", "b", "c", "d"],
        &[
            ("a", "b"),
            ("a", "c"),
            ("a", "d"),
            ("b", "c"),
            ("b", "d"),
            ("c", "d"),
        ],
    )
    .expect("static graph")
}

/// K4 monitored at `a, b, c`; `a` sits on the first ear and `b` is
/// root-adjacent.
pub fn f1() -> ExtendedGraph {
    build_extended_graph(&k4(), &[0, 1, 2], None).expect("static instance")
}

/// Ground truth for [`f1`]: ab=1, ac=2, ad=3, bc=4, bd=5, cd=6.
pub fn f1_metrics() -> MetricAssignment {
    let mut w = MetricAssignment::default();
    for (i, &(a, b)) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        .iter()
        .enumerate()
    {
        w.insert(Link::new(a, b), (i + 1) as f64);
    }
    w
}

/// A hand-checked decomposition of [`f1`]:
/// `(r,mu1',a,mu2',r), (mu1',c,mu2'), (a,d,c), (a,b,c)`.
pub fn f1_reference_ears(gex: &ExtendedGraph) -> EarDecomposition {
    let id = |s: &str| gex.full.id(s).expect("fixture node");
    let (r, v1, v2) = (gex.root(), gex.mu1_virtual(), gex.mu2_virtual());
    let (a, b, c, d) = (id("a"), id("b"), id("c"), id("d"));
    EarDecomposition::from_ears(
        gex.full.node_count(),
        vec![
            vec![r, v1, a, v2, r],
            vec![v1, c, v2],
            vec![a, d, c],
            vec![a, b, c],
        ],
    )
}
