//! Measurement path construction.
//!
//! Every tree path is built from segments: the part of a node's root path in
//! one tree that ends at the first monitor after the node. A non-monitor
//! contributes the three pairwise unions of its segments; a monitor
//! contributes each of its segments that avoids the virtual nodes. Each link
//! outside the tree union then gets one path in which it is the only link
//! not already identified by the tree paths.

use std::collections::HashMap;

use serde::Serialize;

use crate::ears::{ear_decompose, EarDecomposition};
use crate::error::{Error, PathError};
use crate::extended::ExtendedGraph;
use crate::flow::FlowNetwork;
use crate::graph::{Graph, Link, NodeId};
use crate::par::{map_range, Schedule};
use crate::rank::{exact_rank, IncidenceMatrix};
use crate::stnumber::{st_number, StNumbering};
use crate::trees::{build_trees, Tree, TreeSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub owner: NodeId,
    pub tree: Tree,
    /// From the owner to the terminal monitor (or to the first virtual node
    /// when invalid).
    pub nodes: Vec<NodeId>,
    pub valid: bool,
}

/// Walks the parent chain of `tree` from the real node `v` to the first
/// monitor. The segment is invalid if a virtual node comes first.
pub fn segment(t: &TreeSet, v: NodeId, tree: Tree) -> Segment {
    let mut nodes = vec![v];
    let mut cur = v;
    let valid = loop {
        match t.parent(tree, cur) {
            None => break false,
            Some(p) => {
                nodes.push(p);
                if t.is_virtual(p) {
                    break false;
                }
                if t.is_monitor(p) {
                    break true;
                }
                if nodes.len() > t.node_count() {
                    break false;
                }
                cur = p;
            }
        }
    };
    Segment {
        owner: v,
        tree,
        nodes,
        valid,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "link", rename_all = "snake_case")]
pub enum PathKind {
    Tree,
    NonTree(Link),
}

/// A simple monitor-to-monitor path. Two paths are the same measurement iff
/// their link sets are equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasurementPath {
    /// Starts at the smaller endpoint.
    pub nodes: Vec<NodeId>,
    /// Sorted.
    pub links: Vec<Link>,
    pub kind: PathKind,
}

impl MeasurementPath {
    pub fn new(mut nodes: Vec<NodeId>, kind: PathKind) -> Self {
        if nodes.last() < nodes.first() {
            nodes.reverse();
        }
        let mut links: Vec<Link> = nodes.windows(2).map(|w| Link::new(w[0], w[1])).collect();
        links.sort_unstable();
        MeasurementPath { nodes, links, kind }
    }

    pub fn key(&self) -> &[Link] {
        &self.links
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.nodes.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

/// Deduplicated paths keyed by link set.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PathSet {
    pub paths: Vec<MeasurementPath>,
    #[serde(skip)]
    by_key: HashMap<Vec<Link>, usize>,
}

impl PathSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Adds `p` unless a path with the same link set is stored; true if added.
    pub fn insert(&mut self, p: MeasurementPath) -> bool {
        if self.by_key.contains_key(&p.links) {
            return false;
        }
        self.by_key.insert(p.links.clone(), self.paths.len());
        self.paths.push(p);
        true
    }

    pub fn contains_key(&self, links: &[Link]) -> bool {
        self.by_key.contains_key(links)
    }

    pub fn get(&self, links: &[Link]) -> Option<&MeasurementPath> {
        self.by_key.get(links).map(|&i| &self.paths[i])
    }

    pub fn position(&self, links: &[Link]) -> Option<usize> {
        self.by_key.get(links).copied()
    }

    /// Orders paths by key.
    pub fn sort(&mut self) {
        self.paths.sort_by(|a, b| a.links.cmp(&b.links));
        self.by_key = self
            .paths
            .iter()
            .enumerate()
            .map(|(i, p)| (p.links.clone(), i))
            .collect();
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MeasurementPath> {
        self.paths.iter()
    }

    /// Mean hop count, 0 for an empty set.
    pub fn mean_hops(&self) -> f64 {
        if self.paths.is_empty() {
            0.0
        } else {
            self.paths.iter().map(|p| p.hops()).sum::<usize>() as f64 / self.paths.len() as f64
        }
    }
}

impl<'a> IntoIterator for &'a PathSet {
    type Item = &'a MeasurementPath;
    type IntoIter = std::slice::Iter<'a, MeasurementPath>;
    fn into_iter(self) -> Self::IntoIter {
        self.paths.iter()
    }
}

/// The three segments of `v`, blue, green, red.
pub fn segments(t: &TreeSet, v: NodeId) -> [Segment; 3] {
    Tree::ALL.map(|tree| segment(t, v, tree))
}

/// Tree pairs forming a non-monitor's unions.
pub const UNION_PAIRS: [(Tree, Tree); 3] = [
    (Tree::Blue, Tree::Green),
    (Tree::Green, Tree::Red),
    (Tree::Blue, Tree::Red),
];

fn join(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    a.iter().rev().chain(&b[1..]).copied().collect()
}

fn disjoint_except_owner(a: &[NodeId], b: &[NodeId]) -> bool {
    a[1..].iter().all(|x| !b[1..].contains(x))
}

fn node_paths(t: &TreeSet, v: NodeId) -> Result<Vec<MeasurementPath>, PathError> {
    let segs = segments(t, v);
    let mut out = Vec::with_capacity(3);
    if t.is_monitor(v) {
        for s in segs.iter().filter(|s| s.valid) {
            out.push(MeasurementPath::new(s.nodes.clone(), PathKind::Tree));
        }
    } else {
        for (i, j) in UNION_PAIRS {
            let (a, b) = (&segs[i.index()], &segs[j.index()]);
            if !a.valid || !b.valid || !disjoint_except_owner(&a.nodes, &b.nodes) {
                return Err(PathError::NonSimpleUnion {
                    node: v.to_string(),
                    a: i.index() + 1,
                    b: j.index() + 1,
                });
            }
            out.push(MeasurementPath::new(
                join(&a.nodes, &b.nodes),
                PathKind::Tree,
            ));
        }
    }
    Ok(out)
}

/// Deduplicated tree paths: one per real link of the tree union.
pub fn tree_link_paths(t: &TreeSet, schedule: Schedule) -> Result<PathSet, PathError> {
    let real = t.roles.iter().filter(|r| !r.is_virtual()).count();
    let per_node = map_range(schedule, real, |v| node_paths(t, v));
    let mut ps = PathSet::new();
    for paths in per_node {
        for p in paths? {
            ps.insert(p);
        }
    }
    Ok(ps)
}

/// Candidate arms at an endpoint of a non-tree link: the endpoint itself if it
/// is a monitor, then its valid segments.
fn arms(t: &TreeSet, x: NodeId) -> Vec<Vec<NodeId>> {
    let mut out = Vec::with_capacity(4);
    if t.is_monitor(x) {
        out.push(vec![x]);
    }
    out.extend(
        segments(t, x)
            .into_iter()
            .filter(|s| s.valid)
            .map(|s| s.nodes),
    );
    out
}

/// Two vertex-disjoint arms from `u` and `v` to monitors over real links of
/// the tree union.
fn flow_arms(t: &TreeSet, u: NodeId, v: NodeId) -> Option<(Vec<NodeId>, Vec<NodeId>)> {
    let gm = &t.gm;
    let mut net = FlowNetwork::split(
        gm,
        |x| u32::from(!t.is_virtual(x)),
        |a, b| !t.is_virtual(a) && !t.is_virtual(b),
    );
    let s = net.add_vertex();
    let sink = net.add_vertex();
    net.add_arc(s, 2 * u, 1);
    net.add_arc(s, 2 * v, 1);
    for x in gm.nodes().filter(|&x| t.is_monitor(x)) {
        net.add_arc(2 * x + 1, sink, 1);
    }
    if net.max_flow(s, sink, 2) < 2 {
        return None;
    }
    let arm = |net: &mut FlowNetwork, start: NodeId| {
        let mut nodes = vec![start];
        for x in net.take_flow_path(2 * start + 1, sink) {
            if x % 2 == 0 {
                nodes.push(x / 2);
            }
        }
        nodes
    };
    let a = arm(&mut net, u);
    let b = arm(&mut net, v);
    Some((a, b))
}

/// A path through the non-tree link `l` whose other links are real links of
/// the tree union.
pub fn non_tree_link_path(t: &TreeSet, g: &Graph, l: Link) -> Result<MeasurementPath, PathError> {
    let (u, v) = (l.lo(), l.hi());
    let au = arms(t, u);
    let av = arms(t, v);
    let mut chosen = None;
    'outer: for a in &au {
        for b in &av {
            if a.iter().all(|x| !b.contains(x)) {
                chosen = Some((a.clone(), b.clone()));
                break 'outer;
            }
        }
    }
    let (a, b) = match chosen.or_else(|| flow_arms(t, u, v)) {
        Some(x) => x,
        None => return Err(PathError::NoEmbeddingPath(g.link_key(l))),
    };
    let mut nodes: Vec<NodeId> = a.into_iter().rev().collect();
    nodes.extend(b);
    let p = MeasurementPath::new(nodes, PathKind::NonTree(l));
    debug_assert!(p.is_simple());
    debug_assert!(p
        .links
        .iter()
        .all(|&x| x == l || t.gm.has_link(x.lo(), x.hi())));
    Ok(p)
}

/// Every intermediate product of the construction.
#[derive(Clone, Debug)]
pub struct Construction {
    pub decomposition: EarDecomposition,
    pub numbering: StNumbering,
    pub trees: TreeSet,
    /// Tree paths first (sorted by key), then one path per non-tree link in
    /// link order.
    pub paths: PathSet,
    pub tree_path_count: usize,
    pub non_tree_links: Vec<Link>,
}

impl Construction {
    /// Path-link incidence over the links of the base graph.
    pub fn incidence(&self, g: &Graph) -> IncidenceMatrix {
        incidence_matrix(&self.paths, g)
    }
}

/// Decomposes, numbers, builds trees and constructs all paths.
pub fn construct(gex: &ExtendedGraph, schedule: Schedule) -> Result<Construction, Error> {
    if !gex.is_identifiable() {
        return Err(Error::NotIdentifiable);
    }
    let d = ear_decompose(gex)?;
    let f = st_number(&d);
    let t = build_trees(gex, &d, &f)?;
    let mut paths = tree_link_paths(&t, schedule)?;
    paths.sort();
    let tree_path_count = paths.len();
    let non_tree_links: Vec<Link> = gex
        .base
        .links()
        .iter()
        .copied()
        .filter(|l| !t.gm.has_link(l.lo(), l.hi()))
        .collect();
    let nt = map_range(schedule, non_tree_links.len(), |i| {
        non_tree_link_path(&t, &gex.base, non_tree_links[i])
    });
    for (l, p) in non_tree_links.iter().zip(nt) {
        if !paths.insert(p?) {
            return Err(PathError::DuplicateNonTreePath(gex.base.link_key(*l)).into());
        }
    }
    Ok(Construction {
        decomposition: d,
        numbering: f,
        trees: t,
        paths,
        tree_path_count,
        non_tree_links,
    })
}

/// The measurement path set for an identifiable extended graph.
pub fn construct_all(gex: &ExtendedGraph) -> Result<PathSet, Error> {
    construct(gex, Schedule::default()).map(|c| c.paths)
}

/// 0/1 matrix with one row per path and one column per link of `g`.
pub fn incidence_matrix(ps: &PathSet, g: &Graph) -> IncidenceMatrix {
    let mut m = IncidenceMatrix::new(g.link_count());
    for p in ps {
        m.push_row(
            p.links
                .iter()
                .map(|&l| g.link_index(l).expect("path link belongs to the graph"))
                .collect(),
        );
    }
    m
}

/// Exact rank of the path-link incidence matrix over `g`.
pub fn path_rank(ps: &PathSet, g: &Graph) -> usize {
    exact_rank(&incidence_matrix(ps, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extended::build_extended_graph;
    use crate::fixtures::{f1, f1_reference_ears};

    fn f1_trees() -> (ExtendedGraph, TreeSet) {
        let gex = f1();
        let d = f1_reference_ears(&gex);
        let f = st_number(&d);
        let t = build_trees(&gex, &d, &f).unwrap();
        (gex, t)
    }

    fn names(g: &Graph, nodes: &[NodeId]) -> String {
        nodes
            .iter()
            .map(|&v| g.name(v))
            .collect::<Vec<_>>()
            .join("")
    }

    #[test]
    fn fixture_segments() {
        let (gex, t) = f1_trees();
        let g = &gex.full;
        let id = |s: &str| g.id(s).unwrap();
        let s = segment(&t, id("c"), Tree::Blue);
        assert!(s.valid);
        assert_eq!(names(g, &s.nodes), "cdb");
        assert!(!segment(&t, id("a"), Tree::Green).valid);
        let s = segment(&t, id("d"), Tree::Red);
        assert!(s.valid);
        assert_eq!(names(g, &s.nodes), "dc");
    }

    #[test]
    fn fixture_tree_paths() {
        let (gex, t) = f1_trees();
        let g = &gex.full;
        let ps = tree_link_paths(&t, Schedule::Sequential).unwrap();
        let mut got: Vec<String> = ps.iter().map(|p| names(g, &p.nodes)).collect();
        got.sort();
        assert_eq!(got, ["ab", "ac", "adb", "adc", "bc", "bdc"]);
        assert_eq!(ps.len(), t.real_gm_links().len());
        // mu1 = a: only the blue segment a-c survives
        let a = g.id("a").unwrap();
        let from_a: Vec<_> = Tree::ALL
            .iter()
            .filter(|&&tr| segment(&t, a, tr).valid)
            .collect();
        assert_eq!(from_a.len(), 1);
        // mu2 = b: blue parent is the root
        let b = g.id("b").unwrap();
        assert_eq!(
            Tree::ALL
                .iter()
                .filter(|&&tr| segment(&t, b, tr).valid)
                .count(),
            2
        );
    }

    #[test]
    fn fixture_construction() {
        let gex = f1();
        let c = construct(&gex, Schedule::Sequential).unwrap();
        assert_eq!(c.paths.len(), 6);
        assert!(c.non_tree_links.is_empty());
        assert_eq!(path_rank(&c.paths, &gex.base), 6);
    }

    #[test]
    fn chord_becomes_a_non_tree_path() {
        // 5-cycle a..e with chord a-c, every node a monitor except d.
        let g = Graph::build(
            &["a", "b", "c", "d", "e"],
            &[
                ("a", "b"),
                ("b", "c"),
                ("c", "d"),
                ("d", "e"),
                ("e", "a"),
                ("a", "c"),
            ],
        )
        .unwrap();
        for mons in [vec![0, 1, 2, 4], vec![0, 1, 2, 3, 4], vec![0, 2, 3]] {
            let gex = build_extended_graph(&g, &mons, None).unwrap();
            if !gex.is_identifiable() {
                continue;
            }
            let c = construct(&gex, Schedule::Sequential).unwrap();
            assert_eq!(c.paths.len(), g.link_count());
            assert_eq!(path_rank(&c.paths, &g), g.link_count());
            for p in &c.paths {
                assert!(p.is_simple());
                let (x, y) = p.endpoints();
                assert!(gex.is_monitor(x) && gex.is_monitor(y));
                if let PathKind::NonTree(l) = p.kind {
                    assert!(p.links.contains(&l));
                    let others: Vec<_> = p.links.iter().filter(|&&x| x != l).collect();
                    assert!(others.iter().all(|x| c.trees.gm.has_link(x.lo(), x.hi())));
                    assert!(others.iter().all(|x| !c.non_tree_links.contains(x)));
                }
            }
        }
    }

    #[test]
    fn gate_failure_stops_construction() {
        let gex = build_extended_graph(&crate::fixtures::k4(), &[0, 1], None).unwrap();
        assert_eq!(construct_all(&gex).unwrap_err(), Error::NotIdentifiable);
    }

    #[test]
    fn path_normalization() {
        let p = MeasurementPath::new(vec![3, 1, 0], PathKind::Tree);
        assert_eq!(p.nodes, vec![0, 1, 3]);
        assert_eq!(p.links, vec![Link::new(0, 1), Link::new(1, 3)]);
        let mut ps = PathSet::new();
        assert!(ps.insert(p.clone()));
        assert!(!ps.insert(MeasurementPath::new(vec![0, 1, 3], PathKind::Tree)));
        assert_eq!(ps.len(), 1);
    }
}
