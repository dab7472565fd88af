//! The extended graph: the base network plus a root `r` and two virtual
//! monitors that are adjacent to every real monitor.

use serde::{Deserialize, Serialize};

use crate::connectivity::vertex_connectivity_at_least;
use crate::error::GraphError;
use crate::graph::{Graph, Link, NodeId};

pub const ROOT_NAME: &str = "@r";
pub const VIRTUAL_MONITOR1_NAME: &str = "@mu1'";
pub const VIRTUAL_MONITOR2_NAME: &str = "@mu2'";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeRole {
    Interior,
    Monitor,
    VirtualMonitor1,
    VirtualMonitor2,
    Root,
}

impl NodeRole {
    pub fn is_virtual(self) -> bool {
        matches!(
            self,
            NodeRole::VirtualMonitor1 | NodeRole::VirtualMonitor2 | NodeRole::Root
        )
    }
}

/// Base graph plus virtual parts. Node `i < m` of `full` is node `i` of
/// `base`; the virtual nodes follow as `r = m`, `mu1' = m + 1`, `mu2' = m + 2`
/// and therefore order after every real node.
#[derive(Clone, Debug)]
pub struct ExtendedGraph {
    pub base: Graph,
    pub full: Graph,
    pub monitors: Vec<NodeId>,
    /// Non-cutvertex monitor on the initial cycle.
    pub mu1: NodeId,
    /// Monitor adjacent to the root.
    pub mu2: NodeId,
    pub roles: Vec<NodeRole>,
    pub virtual_links: Vec<Link>,
}

impl ExtendedGraph {
    pub fn root(&self) -> NodeId {
        self.base.node_count()
    }

    pub fn mu1_virtual(&self) -> NodeId {
        self.base.node_count() + 1
    }

    pub fn mu2_virtual(&self) -> NodeId {
        self.base.node_count() + 2
    }

    pub fn is_monitor(&self, v: NodeId) -> bool {
        self.roles[v] == NodeRole::Monitor
    }

    pub fn is_virtual(&self, v: NodeId) -> bool {
        self.roles[v].is_virtual()
    }

    pub fn is_virtual_link(&self, l: Link) -> bool {
        self.is_virtual(l.hi())
    }

    /// The 3-vertex-connectivity gate for identifiability.
    pub fn is_identifiable(&self) -> bool {
        vertex_connectivity_at_least(&self.full, 3)
    }
}

/// Smallest monitor whose removal leaves `g` connected.
pub fn find_non_cutvertex_monitor(g: &Graph, monitors: &[NodeId]) -> Result<NodeId, GraphError> {
    let cut = g.articulation_points(&vec![false; g.node_count()]);
    let mut sorted = monitors.to_vec();
    sorted.sort_unstable();
    sorted
        .into_iter()
        .find(|&m| !cut[m])
        .ok_or(GraphError::NoNonCutvertexMonitor)
}

/// Smallest monitor other than `mu1` with at least two neighbors in `g`, or
/// the smallest other monitor if none has.
///
/// A root-adjacent monitor of degree one forces the last ear to end at a
/// virtual monitor, which closes a second cycle made only of virtual links.
pub fn preferred_root_monitor(g: &Graph, monitors: &[NodeId], mu1: NodeId) -> Option<NodeId> {
    let mut sorted = monitors.to_vec();
    sorted.sort_unstable();
    sorted
        .iter()
        .copied()
        .find(|&v| v != mu1 && g.degree(v) >= 2)
        .or_else(|| sorted.into_iter().find(|&v| v != mu1))
}

/// Resolves monitor names against `g`.
pub fn monitor_ids<S: AsRef<str>>(g: &Graph, names: &[S]) -> Result<Vec<NodeId>, GraphError> {
    let mut ids = names
        .iter()
        .map(|s| {
            g.id(s.as_ref())
                .ok_or_else(|| GraphError::UnknownMonitor(s.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

pub fn build_extended_graph(
    g: &Graph,
    monitors: &[NodeId],
    mu2: Option<NodeId>,
) -> Result<ExtendedGraph, GraphError> {
    for name in [ROOT_NAME, VIRTUAL_MONITOR1_NAME, VIRTUAL_MONITOR2_NAME] {
        if g.id(name).is_some() {
            return Err(GraphError::ReservedIdentifier(name.to_string()));
        }
    }
    let mut monitors = monitors.to_vec();
    monitors.sort_unstable();
    monitors.dedup();
    if let Some(&bad) = monitors.iter().find(|&&v| v >= g.node_count()) {
        return Err(GraphError::UnknownMonitor(bad.to_string()));
    }
    if monitors.len() < 2 {
        return Err(GraphError::TooFewMonitors(monitors.len()));
    }
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let mu1 = find_non_cutvertex_monitor(g, &monitors)?;
    let mu2 = match mu2 {
        Some(v) if v != mu1 && monitors.binary_search(&v).is_ok() => v,
        Some(v) => {
            let name = g.names().get(v).cloned().unwrap_or_else(|| v.to_string());
            return Err(GraphError::InvalidRootMonitor(name));
        }
        None => *monitors.iter().find(|&&v| v != mu1).expect("two monitors"),
    };

    let m = g.node_count();
    let (r, v1, v2) = (m, m + 1, m + 2);
    let mut names = g.names().to_vec();
    names.extend([ROOT_NAME, VIRTUAL_MONITOR1_NAME, VIRTUAL_MONITOR2_NAME].map(String::from));
    let mut virtual_links: Vec<Link> = Vec::with_capacity(2 * monitors.len() + 3);
    for &mon in &monitors {
        virtual_links.push(Link::new(v1, mon));
        virtual_links.push(Link::new(v2, mon));
    }
    virtual_links.extend([Link::new(r, v1), Link::new(r, v2), Link::new(r, mu2)]);
    virtual_links.sort_unstable();
    let pairs: Vec<(NodeId, NodeId)> = g
        .links()
        .iter()
        .chain(&virtual_links)
        .map(|l| (l.lo(), l.hi()))
        .collect();
    let full = Graph::from_indexed(names, &pairs).expect("virtual wiring is simple");

    let mut roles = vec![NodeRole::Interior; m + 3];
    for &mon in &monitors {
        roles[mon] = NodeRole::Monitor;
    }
    roles[r] = NodeRole::Root;
    roles[v1] = NodeRole::VirtualMonitor1;
    roles[v2] = NodeRole::VirtualMonitor2;

    Ok(ExtendedGraph {
        base: g.clone(),
        full,
        monitors,
        mu1,
        mu2,
        roles,
        virtual_links,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::connectivity_by_enumeration;

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
    fn non_cutvertex_monitor() {
        assert_eq!(find_non_cutvertex_monitor(&k4(), &[0, 1, 2]), Ok(0));
        let p = Graph::build(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert_eq!(
            find_non_cutvertex_monitor(&p, &[1]),
            Err(GraphError::NoNonCutvertexMonitor)
        );
        let star =
            Graph::build(&["s", "x", "y", "z"], &[("s", "x"), ("s", "y"), ("s", "z")]).unwrap();
        let s = star.id("s").unwrap();
        let x = star.id("x").unwrap();
        assert_eq!(find_non_cutvertex_monitor(&star, &[s, x]), Ok(x));
    }

    #[test]
    fn fixture_extension() {
        let gex = build_extended_graph(&k4(), &[0, 1, 2], None).unwrap();
        assert_eq!(gex.full.node_count(), 7);
        assert_eq!(gex.full.link_count(), 15);
        assert_eq!((gex.mu1, gex.mu2), (0, 1));
        assert_eq!(gex.full.degree(gex.root()), 3);
        assert!(gex.is_identifiable());
        assert!(connectivity_by_enumeration(&gex.full, 3));
    }

    #[test]
    fn two_monitors_on_k4_fail_the_gate() {
        let gex = build_extended_graph(&k4(), &[0, 1], None).unwrap();
        let mut removed = vec![false; 7];
        removed[0] = true;
        removed[1] = true;
        assert!(!gex.full.is_connected_without(&removed));
        assert!(!gex.is_identifiable());
    }

    #[test]
    fn triangle_all_monitors() {
        let t = Graph::build(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]).unwrap();
        let gex = build_extended_graph(&t, &[0, 1, 2], None).unwrap();
        assert_eq!((gex.full.node_count(), gex.full.link_count()), (6, 12));
        assert!(gex.is_identifiable());
    }

    #[test]
    fn rejects_bad_monitor_sets() {
        assert_eq!(
            build_extended_graph(&k4(), &[0], None).unwrap_err(),
            GraphError::TooFewMonitors(1)
        );
        assert!(matches!(
            build_extended_graph(&k4(), &[0, 1], Some(0)),
            Err(GraphError::InvalidRootMonitor(_))
        ));
        assert_eq!(
            build_extended_graph(&k4(), &[0, 1, 2], Some(2))
                .unwrap()
                .mu2,
            2
        );
    }
}
