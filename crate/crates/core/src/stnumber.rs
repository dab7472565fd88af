//! s-t numbering computed ear by ear.

use serde::Serialize;

use crate::ears::EarDecomposition;
use crate::extended::ExtendedGraph;
use crate::graph::NodeId;

/// Bijection from nodes onto `1..=N` with `f(r) = 1` and `f(mu1') = N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StNumbering {
    pub f: Vec<usize>,
}

impl StNumbering {
    pub fn get(&self, v: NodeId) -> usize {
        self.f[v]
    }
}

/// Numbers the first ear `r, mu2', mu1, mu1'` as 1..4; each later ear has its
/// internal nodes inserted, in order from the lower-numbered endpoint,
/// directly below the higher-numbered endpoint, which shifts it and every
/// node above it up by the number of internal nodes.
pub fn st_number(d: &EarDecomposition) -> StNumbering {
    let n = d.ear_level.len();
    let e1 = &d.ears[0];
    // e1 = r, mu1', mu1, mu2', r
    let mut order: Vec<NodeId> = vec![e1[0], e1[3], e1[2], e1[1]];
    for ear in &d.ears[1..] {
        let (a, b) = (ear[0], ear[ear.len() - 1]);
        let pos = |v: NodeId, order: &[NodeId]| order.iter().position(|&x| x == v);
        let (Some(pa), Some(pb)) = (pos(a, &order), pos(b, &order)) else {
            continue;
        };
        let internals = &ear[1..ear.len() - 1];
        let at = pa.max(pb);
        if pa < pb {
            order.splice(at..at, internals.iter().copied());
        } else {
            order.splice(at..at, internals.iter().rev().copied());
        }
    }
    let mut f = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        f[v] = i + 1;
    }
    StNumbering { f }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StCondition {
    NotBijective,
    SourceNotFirst,
    SinkNotLast,
    NoLowerNeighbor,
    NoHigherNeighbor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StViolation {
    pub node: Option<String>,
    pub condition: StCondition,
}

/// Empty iff `f` is an s-t numbering of the extended graph with source `r`
/// and sink `mu1'`.
pub fn validate_st(gex: &ExtendedGraph, f: &StNumbering) -> Vec<StViolation> {
    let g = &gex.full;
    let n = g.node_count();
    let mut out = Vec::new();
    let mut hit = vec![false; n + 1];
    let mut bijective = f.f.len() == n;
    for &x in &f.f {
        if x == 0 || x > n || hit[x] {
            bijective = false;
        } else {
            hit[x] = true;
        }
    }
    if !bijective {
        out.push(StViolation {
            node: None,
            condition: StCondition::NotBijective,
        });
    }
    if f.f.len() != n {
        return out;
    }
    let (s, t) = (gex.root(), gex.mu1_virtual());
    if f.f[s] != 1 {
        out.push(StViolation {
            node: Some(g.name(s).to_string()),
            condition: StCondition::SourceNotFirst,
        });
    }
    if f.f[t] != n {
        out.push(StViolation {
            node: Some(g.name(t).to_string()),
            condition: StCondition::SinkNotLast,
        });
    }
    for v in g.nodes() {
        if v == s || v == t {
            continue;
        }
        let nb = g.neighbors(v);
        if !nb.iter().any(|&u| f.f[u] < f.f[v]) {
            out.push(StViolation {
                node: Some(g.name(v).to_string()),
                condition: StCondition::NoLowerNeighbor,
            });
        }
        if !nb.iter().any(|&w| f.f[w] > f.f[v]) {
            out.push(StViolation {
                node: Some(g.name(v).to_string()),
                condition: StCondition::NoHigherNeighbor,
            });
        }
    }
    out
}
