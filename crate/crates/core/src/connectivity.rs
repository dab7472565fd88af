//! Vertex-connectivity gate.

use crate::flow::local_connectivity;
use crate::graph::Graph;

/// Graphs up to this many nodes are decided by enumerating node subsets.
pub const ENUMERATION_LIMIT: usize = 12;

/// True iff `g` has more than `k` nodes and no set of fewer than `k` nodes
/// disconnects it.
pub fn vertex_connectivity_at_least(g: &Graph, k: usize) -> bool {
    if g.node_count() <= ENUMERATION_LIMIT {
        connectivity_by_enumeration(g, k)
    } else {
        connectivity_by_flow(g, k)
    }
}

/// Exhaustive check over all node subsets of size below `k`.
pub fn connectivity_by_enumeration(g: &Graph, k: usize) -> bool {
    let n = g.node_count();
    if n <= k {
        return false;
    }
    let mut removed = vec![false; n];
    fn rec(g: &Graph, removed: &mut [bool], start: usize, left: usize) -> bool {
        if !g.is_connected_without(removed) {
            return false;
        }
        if left == 0 {
            return true;
        }
        for v in start..g.node_count() {
            removed[v] = true;
            let ok = rec(g, removed, v + 1, left - 1);
            removed[v] = false;
            if !ok {
                return false;
            }
        }
        true
    }
    rec(g, &mut removed, 0, k - 1)
}

/// Flow-based check. Any separator of size below `k` misses one of the first
/// `k` nodes, so it suffices to test local connectivity from those nodes to
/// every node not adjacent to them.
pub fn connectivity_by_flow(g: &Graph, k: usize) -> bool {
    let n = g.node_count();
    if n <= k {
        return false;
    }
    if !g.is_connected() {
        return false;
    }
    for s in 0..k {
        for t in g.nodes() {
            if t == s || g.has_link(s, t) {
                continue;
            }
            if local_connectivity(g, s, t, k) < k {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k4() -> Graph {
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
        .unwrap()
    }

    #[test]
    fn complete_and_path() {
        assert!(vertex_connectivity_at_least(&k4(), 3));
        assert!(!vertex_connectivity_at_least(&k4(), 4));
        let p = Graph::build(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert!(!vertex_connectivity_at_least(&p, 2));
        assert!(vertex_connectivity_at_least(&p, 1));
        assert!(connectivity_by_flow(&k4(), 3));
        assert!(!connectivity_by_flow(&p, 2));
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..=10).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .collect();
            let m = pairs.len();
            proptest::collection::vec(any::<bool>(), m).prop_map(move |mask| {
                let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
                let links: Vec<(usize, usize)> = pairs
                    .iter()
                    .zip(&mask)
                    .filter(|(_, &keep)| keep)
                    .map(|(&p, _)| p)
                    .collect();
                Graph::from_indexed(names, &links).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn flow_agrees_with_enumeration(g in arb_graph(), k in 1usize..5) {
            prop_assert_eq!(connectivity_by_flow(&g, k), connectivity_by_enumeration(&g, k));
        }
    }
}
