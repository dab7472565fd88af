//! Unit-capacity augmenting-path max flow on node-split graphs.
//!
//! Every graph node `v` becomes `v_in = 2v` and `v_out = 2v + 1` joined by an
//! arc of capacity one, so flow paths are internally vertex-disjoint.

use std::collections::VecDeque;

use crate::graph::{Graph, NodeId};

#[derive(Clone, Copy, Debug)]
struct Arc {
    to: usize,
    cap: u32,
}

#[derive(Debug)]
pub(crate) struct FlowNetwork {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub(crate) fn new(vertices: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            out: vec![Vec::new(); vertices],
        }
    }

    pub(crate) fn add_vertex(&mut self) -> usize {
        self.out.push(Vec::new());
        self.out.len() - 1
    }

    /// Adds `from -> to` with capacity `cap` and its zero-capacity reverse.
    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cap: u32) {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap });
        self.arcs.push(Arc { to: from, cap: 0 });
        self.out[from].push(id);
        self.out[to].push(id + 1);
    }

    /// Node-split network of `g` restricted to the links accepted by `keep`.
    /// `v_in -> v_out` has capacity `node_cap(v)`.
    pub(crate) fn split(
        g: &Graph,
        node_cap: impl Fn(NodeId) -> u32,
        keep: impl Fn(NodeId, NodeId) -> bool,
    ) -> Self {
        let mut net = FlowNetwork::new(2 * g.node_count());
        for v in g.nodes() {
            net.add_arc(2 * v, 2 * v + 1, node_cap(v));
        }
        for l in g.links() {
            let (a, b) = (l.lo(), l.hi());
            if keep(a, b) {
                net.add_arc(2 * a + 1, 2 * b, 1);
                net.add_arc(2 * b + 1, 2 * a, 1);
            }
        }
        net
    }

    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut pred = vec![usize::MAX; self.out.len()];
        let mut queue = VecDeque::from([s]);
        pred[s] = usize::MAX - 1;
        while let Some(v) = queue.pop_front() {
            if v == t {
                break;
            }
            for &a in &self.out[v] {
                let arc = self.arcs[a];
                if arc.cap > 0 && pred[arc.to] == usize::MAX {
                    pred[arc.to] = a;
                    queue.push_back(arc.to);
                }
            }
        }
        if pred[t] == usize::MAX {
            return false;
        }
        let mut v = t;
        while v != s {
            let a = pred[v];
            self.arcs[a].cap -= 1;
            self.arcs[a ^ 1].cap += 1;
            v = self.arcs[a ^ 1].to;
        }
        true
    }

    /// Pushes unit augmenting paths from `s` to `t`, stopping at `limit`.
    pub(crate) fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        let mut flow = 0;
        while flow < limit && self.augment(s, t) {
            flow += 1;
        }
        flow
    }

    /// Follows saturated forward arcs from `from` until `t`, consuming them.
    /// Returns the visited vertices excluding `from` and `t`.
    pub(crate) fn take_flow_path(&mut self, from: usize, t: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut v = from;
        while v != t {
            let next = self.out[v]
                .iter()
                .copied()
                .find(|&a| a % 2 == 0 && self.arcs[a ^ 1].cap > 0)
                .expect("flow conservation");
            self.arcs[next ^ 1].cap -= 1;
            v = self.arcs[next].to;
            if v != t {
                path.push(v);
            }
        }
        path
    }
}

/// Number of internally vertex-disjoint `s`-`t` paths in `g`, capped at `limit`.
pub fn local_connectivity(g: &Graph, s: NodeId, t: NodeId, limit: usize) -> usize {
    let mut net = FlowNetwork::split(
        g,
        |v| if v == s || v == t { limit as u32 } else { 1 },
        |_, _| true,
    );
    net.max_flow(2 * s + 1, 2 * t, limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_paths_in_cycle_and_k4() {
        let c4 = Graph::build(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        )
        .unwrap();
        assert_eq!(local_connectivity(&c4, 0, 2, 5), 2);
        let k4 = Graph::build(
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
        .unwrap();
        // the direct link counts as one path
        assert_eq!(local_connectivity(&k4, 0, 1, 5), 3);
        assert_eq!(local_connectivity(&k4, 0, 1, 2), 2);
    }
}
