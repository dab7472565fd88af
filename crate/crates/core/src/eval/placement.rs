//! Monitor placement.
//!
//! The greedy policy grows the monitor set until the extended graph is
//! 3-vertex-connected. Each round it lists every separating set of at most
//! two nodes in the current extended graph and adds the non-monitor lying,
//! over the most such cuts, in a component cut off from the virtual
//! monitors. Monitoring such a node wires that component to the virtual
//! monitors and so dissolves the cut.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::GraphError;
use crate::extended::{build_extended_graph, ExtendedGraph};
use crate::graph::{Graph, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum PlacementPolicy {
    Greedy,
    /// `k` monitors drawn uniformly at random.
    Random {
        k: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Placement {
    pub monitors: Vec<NodeId>,
    pub gate: bool,
}

/// Separating sets of one or two nodes.
fn small_cuts(g: &Graph) -> Vec<Vec<NodeId>> {
    let n = g.node_count();
    let mut removed = vec![false; n];
    let mut cuts = Vec::new();
    let single = g.articulation_points(&removed);
    for x in g.nodes() {
        if single[x] {
            cuts.push(vec![x]);
            continue;
        }
        removed[x] = true;
        let second = g.articulation_points(&removed);
        for y in x + 1..n {
            if second[y] && !single[y] {
                cuts.push(vec![x, y]);
            }
        }
        removed[x] = false;
    }
    cuts
}

/// Picks the next monitor for an extended graph that fails the gate.
fn next_monitor(gex: &ExtendedGraph) -> Option<NodeId> {
    let g = &gex.full;
    let real = gex.base.node_count();
    let mut score = vec![0usize; real];
    let mut removed = vec![false; g.node_count()];
    for cut in small_cuts(g) {
        for &x in &cut {
            removed[x] = true;
        }
        let comps = g.components_without(&removed);
        let hub = comps
            .iter()
            .position(|c| c.iter().any(|&v| v >= real))
            .unwrap_or(0);
        for (i, comp) in comps.iter().enumerate() {
            if i == hub {
                continue;
            }
            for &v in comp {
                if v < real && !gex.is_monitor(v) {
                    score[v] += 1;
                }
            }
        }
        for &x in &cut {
            removed[x] = false;
        }
    }
    let candidates = (0..real).filter(|&v| !gex.is_monitor(v));
    // max score, smallest identifier on ties
    candidates.max_by_key(|&v| (score[v], std::cmp::Reverse(v)))
}

/// Greedy placement starting from the two lowest-degree nodes.
pub fn place_monitors_greedy(g: &Graph) -> Placement {
    let m = g.node_count();
    let mut order: Vec<NodeId> = g.nodes().collect();
    order.sort_by_key(|&v| (g.degree(v), v));
    let mut monitors: Vec<NodeId> = order.into_iter().take(2).collect();
    monitors.sort_unstable();
    loop {
        let next = match build_extended_graph(g, &monitors, None) {
            Ok(gex) => {
                if gex.is_identifiable() {
                    return Placement {
                        monitors,
                        gate: true,
                    };
                }
                next_monitor(&gex)
            }
            Err(GraphError::NoNonCutvertexMonitor) => {
                let cut = g.articulation_points(&vec![false; m]);
                g.nodes()
                    .find(|&v| !cut[v] && monitors.binary_search(&v).is_err())
            }
            Err(_) => None,
        };
        match next {
            Some(v) => {
                let at = monitors.binary_search(&v).unwrap_err();
                monitors.insert(at, v);
            }
            None => {
                let gate = build_extended_graph(g, &monitors, None)
                    .map(|x| x.is_identifiable())
                    .unwrap_or(false);
                return Placement { monitors, gate };
            }
        }
    }
}

/// `k` distinct monitors chosen uniformly with a seeded generator.
pub fn place_monitors_random(g: &Graph, k: usize, seed: u64) -> Placement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = k.min(g.node_count());
    let mut monitors = sample(&mut rng, g.node_count(), k).into_vec();
    monitors.sort_unstable();
    let gate = build_extended_graph(g, &monitors, None)
        .map(|x| x.is_identifiable())
        .unwrap_or(false);
    Placement { monitors, gate }
}

pub fn place_monitors(g: &Graph, policy: PlacementPolicy, seed: u64) -> Placement {
    match policy {
        PlacementPolicy::Greedy => place_monitors_greedy(g),
        PlacementPolicy::Random { k } => place_monitors_random(g, k, seed),
    }
}
