//! Nonseparating ear decompositions of the extended graph.
//!
//! The first ear is always the cycle `r, mu1', mu1, mu2', r`. Every later ear
//! is a path whose endpoints are already covered and whose internal nodes are
//! new; the nodes left uncovered after each ear stay connected, and every
//! internal node keeps a neighbor among them. The root-adjacent monitor `mu2`
//! is held back and forms the single internal node of the last ear.
//!
//! Links between the two endpoints of an ear are allowed. Links from an
//! internal node to any non-consecutive node of the same ear are not.

use serde::Serialize;

use crate::error::DecompositionError;
use crate::extended::ExtendedGraph;
use crate::graph::{Graph, NodeId};

/// Upper bound on ears tried (including backtracked ones) per decomposition.
const MAX_TRIALS: usize = 200_000;
/// Upper bound on path extensions while enumerating long ears for one step.
const MAX_EXTENSIONS_PER_STEP: usize = 2_000_000;
/// Longest ear (in internal nodes) preferred over a deferred one.
const DEFER_LENGTH: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EarDecomposition {
    /// `ears[0]` is the closed cycle starting and ending at the root; every
    /// other ear lists its endpoints first and last.
    pub ears: Vec<Vec<NodeId>>,
    /// Ear level `g(v)`, 1-based; 0 marks a node no ear covers.
    pub ear_level: Vec<usize>,
}

impl EarDecomposition {
    /// Wraps an ear list over a graph with `node_count` nodes.
    pub fn from_ears(node_count: usize, ears: Vec<Vec<NodeId>>) -> Self {
        let mut ear_level = vec![0; node_count];
        for (i, ear) in ears.iter().enumerate() {
            for &v in ear {
                if v < node_count && ear_level[v] == 0 {
                    ear_level[v] = i + 1;
                }
            }
        }
        EarDecomposition { ears, ear_level }
    }

    pub fn ear_count(&self) -> usize {
        self.ears.len()
    }

    /// Nodes introduced by ear `i` (0-based), in ear order.
    pub fn new_nodes(&self, i: usize) -> &[NodeId] {
        let ear = &self.ears[i];
        if i == 0 {
            &ear[..ear.len().saturating_sub(1)]
        } else {
            &ear[1..ear.len().saturating_sub(1)]
        }
    }

    /// Number of nodes introduced by ear `i` (0-based).
    pub fn delta(&self, i: usize) -> usize {
        self.new_nodes(i).len()
    }

    /// Ears as identifier sequences.
    pub fn named(&self, g: &Graph) -> Vec<Vec<String>> {
        self.ears
            .iter()
            .map(|e| e.iter().map(|&v| g.name(v).to_string()).collect())
            .collect()
    }
}

/// The fixed first ear `r, mu1', mu1, mu2', r`.
pub fn first_ear(gex: &ExtendedGraph) -> Vec<NodeId> {
    let r = gex.root();
    vec![r, gex.mu1_virtual(), gex.mu1, gex.mu2_virtual(), r]
}

struct Search<'a> {
    g: &'a Graph,
    root: NodeId,
    mu2: NodeId,
    covered: Vec<bool>,
    remaining: usize,
}

impl Search<'_> {
    fn apply(&mut self, ear: &[NodeId]) {
        for &v in &ear[1..ear.len() - 1] {
            self.covered[v] = true;
            self.remaining -= 1;
        }
    }

    fn undo(&mut self, ear: &[NodeId]) {
        for &v in &ear[1..ear.len() - 1] {
            self.covered[v] = false;
            self.remaining += 1;
        }
    }

    /// Ears that close a cycle of virtual links only: a single internal node
    /// between the two virtual monitors, or a last ear with a virtual
    /// endpoint. Such ears are valid but tried last.
    fn closes_virtual_cycle(&self, ear: &[NodeId]) -> bool {
        let (x, z) = (ear[0], ear[ear.len() - 1]);
        let virt = |v: NodeId| v >= self.root;
        if ear.len() == 3 && ear[1] == self.mu2 {
            virt(x) || virt(z)
        } else {
            ear.len() == 3 && virt(x) && virt(z)
        }
    }

    fn prefer(&self, mut ears: Vec<Vec<NodeId>>) -> Vec<Vec<NodeId>> {
        ears.sort();
        ears
    }

    /// Candidates with `k` internal nodes, split into preferred and deferred.
    fn split_candidates(&self, k: usize) -> (Vec<Vec<NodeId>>, Vec<Vec<NodeId>>) {
        self.candidates(k)
            .into_iter()
            .partition(|e| !self.closes_virtual_cycle(e))
    }

    fn endpoint_candidates(&self, y: NodeId) -> Vec<NodeId> {
        self.g
            .neighbors(y)
            .iter()
            .copied()
            .filter(|&x| self.covered[x] && x != self.root)
            .collect()
    }

    /// Valid ears with `k` internal nodes, sorted by node sequence.
    fn candidates(&self, k: usize) -> Vec<Vec<NodeId>> {
        let g = self.g;
        let only_mu2_left = self.remaining == 1 && !self.covered[self.mu2];
        if only_mu2_left {
            if k != 1 {
                return Vec::new();
            }
            let ends = self.endpoint_candidates(self.mu2);
            let mut out = Vec::new();
            for (i, &x) in ends.iter().enumerate() {
                for &z in &ends[i + 1..] {
                    out.push(vec![x, self.mu2, z]);
                }
            }
            return self.prefer(out);
        }

        let mut out = Vec::new();
        if k == 1 {
            let cut = g.articulation_points(&self.covered);
            for y in g.nodes() {
                if self.covered[y] || y == self.mu2 || cut[y] {
                    continue;
                }
                if !g.neighbors(y).iter().any(|&w| !self.covered[w]) {
                    continue;
                }
                let ends = self.endpoint_candidates(y);
                for (i, &x) in ends.iter().enumerate() {
                    for &z in &ends[i + 1..] {
                        out.push(vec![x, y, z]);
                    }
                }
            }
            return self.prefer(out);
        }

        let mut budget = MAX_EXTENSIONS_PER_STEP;
        let mut in_path = vec![false; g.node_count()];
        let mut path = Vec::with_capacity(k);
        for y1 in g.nodes() {
            if self.covered[y1] || y1 == self.mu2 || self.endpoint_candidates(y1).is_empty() {
                continue;
            }
            path.push(y1);
            in_path[y1] = true;
            self.extend_path(k, &mut path, &mut in_path, &mut out, &mut budget);
            in_path[y1] = false;
            path.pop();
            if budget == 0 {
                break;
            }
        }
        out.sort();
        out
    }

    fn extend_path(
        &self,
        k: usize,
        path: &mut Vec<NodeId>,
        in_path: &mut [bool],
        out: &mut Vec<Vec<NodeId>>,
        budget: &mut usize,
    ) {
        if *budget == 0 {
            return;
        }
        *budget -= 1;
        let g = self.g;
        if path.len() == k {
            self.close_path(path, out);
            return;
        }
        let last = *path.last().unwrap();
        for &w in g.neighbors(last) {
            if self.covered[w] || w == self.mu2 || in_path[w] {
                continue;
            }
            // induced: w may only touch `last` among path nodes
            if path[..path.len() - 1].iter().any(|&p| g.has_link(p, w)) {
                continue;
            }
            path.push(w);
            in_path[w] = true;
            self.extend_path(k, path, in_path, out, budget);
            in_path[w] = false;
            path.pop();
        }
    }

    fn close_path(&self, path: &[NodeId], out: &mut Vec<Vec<NodeId>>) {
        let g = self.g;
        let (first, last) = (path[0], path[path.len() - 1]);
        let mut removed = self.covered.clone();
        for &v in path {
            removed[v] = true;
        }
        if !path
            .iter()
            .all(|&v| g.neighbors(v).iter().any(|&w| !removed[w]))
        {
            return;
        }
        let mut connected = None;
        for &x in &self.endpoint_candidates(first) {
            // x may only touch the first internal node
            if path[1..].iter().any(|&p| g.has_link(p, x)) {
                continue;
            }
            for &z in &self.endpoint_candidates(last) {
                if z <= x || path[..path.len() - 1].iter().any(|&p| g.has_link(p, z)) {
                    continue;
                }
                let ok = *connected.get_or_insert_with(|| g.is_connected_without(&removed));
                if !ok {
                    return;
                }
                let mut ear = Vec::with_capacity(path.len() + 2);
                ear.push(x);
                ear.extend_from_slice(path);
                ear.push(z);
                out.push(ear);
            }
        }
    }
}

struct Frame {
    k: usize,
    candidates: Vec<Vec<NodeId>>,
    next: usize,
    /// Ears closing an all-virtual cycle; they have a single internal node
    /// and are tried once the short lengths are spent.
    deferred: Vec<Vec<NodeId>>,
    deferred_done: bool,
}

impl Frame {
    fn new(search: &Search<'_>) -> Self {
        let (candidates, deferred) = search.split_candidates(1);
        Frame {
            k: 1,
            candidates,
            next: 0,
            deferred,
            deferred_done: false,
        }
    }
}

/// Greedy nonseparating ear decomposition with backtracking. At each step
/// the shortest valid ear wins, ties broken by node sequence. Ears closing
/// an all-virtual cycle are held back until no ear of up to three internal
/// nodes fits.
pub fn ear_decompose(gex: &ExtendedGraph) -> Result<EarDecomposition, DecompositionError> {
    let g = &gex.full;
    let n = g.node_count();
    let e1 = first_ear(gex);
    let mut search = Search {
        g,
        root: gex.root(),
        mu2: gex.mu2,
        covered: vec![false; n],
        remaining: n,
    };
    for &v in &e1[..4] {
        search.covered[v] = true;
        search.remaining -= 1;
    }
    let mut ears = vec![e1];
    let fail = |ears: &[Vec<NodeId>], reason: String| DecompositionError {
        partial: EarDecomposition::from_ears(n, ears.to_vec()).named(g),
        reason,
    };
    if search.remaining == 0 {
        return Ok(EarDecomposition::from_ears(n, ears));
    }
    if !g.is_connected_without(&search.covered) {
        return Err(fail(
            &ears,
            "graph minus the first ear is disconnected".into(),
        ));
    }

    let mut stack = vec![Frame::new(&search)];
    let mut trials = 0usize;
    while let Some(frame) = stack.last_mut() {
        if frame.next < frame.candidates.len() {
            let ear = frame.candidates[frame.next].clone();
            frame.next += 1;
            trials += 1;
            if trials > MAX_TRIALS {
                return Err(fail(&ears, "backtracking budget exhausted".into()));
            }
            search.apply(&ear);
            ears.push(ear);
            if search.remaining == 0 {
                return Ok(EarDecomposition::from_ears(n, ears));
            }
            stack.push(Frame::new(&search));
        } else if !frame.deferred_done
            && (frame.k >= DEFER_LENGTH || frame.k >= search.remaining.saturating_sub(1))
        {
            frame.deferred_done = true;
            frame.candidates = std::mem::take(&mut frame.deferred);
            frame.next = 0;
        } else if frame.k < search.remaining.saturating_sub(1) {
            frame.k += 1;
            let (candidates, deferred) = search.split_candidates(frame.k);
            debug_assert!(deferred.is_empty());
            frame.candidates = candidates;
            frame.next = 0;
        } else {
            stack.pop();
            if stack.is_empty() {
                break;
            }
            let ear = ears.pop().expect("one ear per frame");
            search.undo(&ear);
        }
    }
    Err(fail(
        &ears,
        "no valid ear extends the partial decomposition".into(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EarCondition {
    /// The first ear is not `r, mu1', mu1, mu2', r`.
    FixedFirstEar,
    /// An ear has no internal node.
    TooShort,
    EndpointNotCovered,
    RepeatedEndpoint,
    RootEndpoint,
    InternalNotNew,
    NotAdjacent,
    /// A link joins an internal node to a non-consecutive node of its ear.
    Chord,
    RemainderDisconnected,
    NoRemainderNeighbor,
    LastEar,
    NodeCoverage,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EarViolation {
    /// 1-based ear index; `None` for whole-decomposition conditions.
    pub ear: Option<usize>,
    pub condition: EarCondition,
    pub detail: String,
}

/// Lists every violated decomposition condition. Empty iff valid.
pub fn validate_ears(gex: &ExtendedGraph, d: &EarDecomposition) -> Vec<EarViolation> {
    let g = &gex.full;
    let n = g.node_count();
    let mut out = Vec::new();
    let mut push = |ear: Option<usize>, condition, detail: String| {
        out.push(EarViolation {
            ear,
            condition,
            detail,
        })
    };
    if d.ears.is_empty() {
        push(None, EarCondition::NodeCoverage, "no ears".into());
        return out;
    }
    let e1 = &d.ears[0];
    if *e1 != first_ear(gex) {
        push(
            Some(1),
            EarCondition::FixedFirstEar,
            format!("first ear is {:?}", names(g, e1)),
        );
    }
    let mut covered = vec![false; n];
    let mut seen_new = vec![0usize; n];
    let body = &e1[..e1.len().saturating_sub(1)];
    for &v in body {
        if v < n {
            covered[v] = true;
            seen_new[v] += 1;
        }
    }
    for w in e1.windows(2) {
        if !g.has_link(w[0], w[1]) {
            push(
                Some(1),
                EarCondition::NotAdjacent,
                format!("{} and {}", g.name(w[0]), g.name(w[1])),
            );
        }
    }
    let len = body.len();
    for i in 0..len {
        for j in i + 1..len {
            let consecutive = j == i + 1 || (i == 0 && j == len - 1);
            if !consecutive && g.has_link(body[i], body[j]) {
                push(
                    Some(1),
                    EarCondition::Chord,
                    format!("{} and {}", g.name(body[i]), g.name(body[j])),
                );
            }
        }
    }
    check_remainder(g, &covered, &body[1..], 1, &mut push);

    for (idx, ear) in d.ears.iter().enumerate().skip(1) {
        let i = idx + 1;
        if ear.len() < 3 {
            push(
                Some(i),
                EarCondition::TooShort,
                format!("{} nodes", ear.len()),
            );
            continue;
        }
        let (a, b) = (ear[0], ear[ear.len() - 1]);
        for v in [a, b] {
            if !covered[v] {
                push(
                    Some(i),
                    EarCondition::EndpointNotCovered,
                    g.name(v).to_string(),
                );
            }
            if v == gex.root() {
                push(Some(i), EarCondition::RootEndpoint, g.name(v).to_string());
            }
        }
        if a == b {
            push(
                Some(i),
                EarCondition::RepeatedEndpoint,
                g.name(a).to_string(),
            );
        }
        for w in ear.windows(2) {
            if !g.has_link(w[0], w[1]) {
                push(
                    Some(i),
                    EarCondition::NotAdjacent,
                    format!("{} and {}", g.name(w[0]), g.name(w[1])),
                );
            }
        }
        let internals = &ear[1..ear.len() - 1];
        for &v in internals {
            if covered[v] {
                push(Some(i), EarCondition::InternalNotNew, g.name(v).to_string());
            }
        }
        'chord: for (j, &y) in ear.iter().enumerate().take(ear.len() - 1).skip(1) {
            for (l, &u) in ear.iter().enumerate() {
                if l.abs_diff(j) > 1 && g.has_link(y, u) {
                    push(
                        Some(i),
                        EarCondition::Chord,
                        format!("{} and {}", g.name(y), g.name(u)),
                    );
                    break 'chord;
                }
            }
        }
        for &v in internals {
            covered[v] = true;
            seen_new[v] += 1;
        }
        check_remainder(g, &covered, internals, i, &mut push);
    }

    let last = d.ears.len();
    let last_ear = &d.ears[last - 1];
    if last < 2 || last_ear.len() != 3 || last_ear[1] != gex.mu2 {
        push(
            Some(last),
            EarCondition::LastEar,
            format!("last ear is {:?}", names(g, last_ear)),
        );
    }
    for v in g.nodes() {
        if seen_new[v] != 1 {
            push(
                None,
                EarCondition::NodeCoverage,
                format!("{} introduced {} times", g.name(v), seen_new[v]),
            );
        }
    }
    out
}

fn check_remainder(
    g: &Graph,
    covered: &[bool],
    internals: &[NodeId],
    ear: usize,
    push: &mut impl FnMut(Option<usize>, EarCondition, String),
) {
    if covered.iter().all(|&c| c) {
        return;
    }
    if !g.is_connected_without(covered) {
        push(
            Some(ear),
            EarCondition::RemainderDisconnected,
            String::new(),
        );
    }
    for &v in internals {
        if !g.neighbors(v).iter().any(|&w| !covered[w]) {
            push(
                Some(ear),
                EarCondition::NoRemainderNeighbor,
                g.name(v).to_string(),
            );
        }
    }
}

fn names(g: &Graph, seq: &[NodeId]) -> Vec<String> {
    seq.iter()
        .map(|&v| {
            if v < g.node_count() {
                g.name(v).to_string()
            } else {
                v.to_string()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extended::build_extended_graph;
    use crate::fixtures::{f1, f1_reference_ears};

    #[test]
    fn reference_decomposition_is_valid() {
        let gex = f1();
        let d = f1_reference_ears(&gex);
        assert!(validate_ears(&gex, &d).is_empty());
        let id = |s: &str| gex.full.id(s).unwrap();
        assert_eq!(d.ear_level[gex.root()], 1);
        assert_eq!(d.ear_level[gex.mu1_virtual()], 1);
        assert_eq!(d.ear_level[id("a")], 1);
        assert_eq!(d.ear_level[gex.mu2_virtual()], 1);
        assert_eq!(d.ear_level[id("c")], 2);
        assert_eq!(d.ear_level[id("d")], 3);
        assert_eq!(d.ear_level[id("b")], 4);
    }

    #[test]
    fn computed_decomposition_is_valid() {
        let gex = f1();
        let d = ear_decompose(&gex).unwrap();
        assert_eq!(validate_ears(&gex, &d), vec![]);
        let last = d.ears.last().unwrap();
        assert_eq!(last.len(), 3);
        assert_eq!(last[1], gex.mu2);
        let total: usize = (0..d.ear_count()).map(|i| d.delta(i)).sum();
        assert_eq!(total, gex.full.node_count());
    }

    #[test]
    fn reordered_first_ear_is_reported() {
        let gex = f1();
        let mut d = f1_reference_ears(&gex);
        let (r, v1, v2) = (gex.root(), gex.mu1_virtual(), gex.mu2_virtual());
        d.ears[0] = vec![r, v2, gex.mu1, v1, r];
        let v = validate_ears(&gex, &d);
        assert!(v
            .iter()
            .any(|x| x.condition == EarCondition::FixedFirstEar && x.ear == Some(1)));
    }

    #[test]
    fn missing_node_is_reported() {
        let gex = f1();
        let mut d = f1_reference_ears(&gex);
        d.ears.remove(2);
        let v = validate_ears(&gex, &d);
        assert!(v.iter().any(|x| x.condition == EarCondition::NodeCoverage));
    }

    #[test]
    fn triangle_with_all_monitors_decomposes() {
        let t = Graph::build(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]).unwrap();
        let gex = build_extended_graph(&t, &[0, 1, 2], None).unwrap();
        let d = ear_decompose(&gex).unwrap();
        assert!(validate_ears(&gex, &d).is_empty());
    }
}
