//! Simple undirected graphs over opaque string identifiers.
//!
//! Nodes are stored by dense index. [`Graph::build`] sorts identifiers
//! lexicographically, so index order and identifier order coincide for any
//! graph built from user input; every deterministic tie-break in the crate
//! compares indices.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

pub type NodeId = usize;

/// An undirected link, stored with its smaller endpoint first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Link(NodeId, NodeId);

impl Link {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Link(a, b)
        } else {
            Link(b, a)
        }
    }

    #[inline]
    pub fn lo(self) -> NodeId {
        self.0
    }

    #[inline]
    pub fn hi(self) -> NodeId {
        self.1
    }

    pub fn contains(self, v: NodeId) -> bool {
        self.0 == v || self.1 == v
    }

    /// The endpoint that is not `v`.
    pub fn other(self, v: NodeId) -> NodeId {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    adj: Vec<Vec<NodeId>>,
    links: Vec<Link>,
}

impl Graph {
    /// Builds a graph from identifiers and identifier pairs.
    pub fn build<S: AsRef<str>>(nodes: &[S], links: &[(S, S)]) -> Result<Self, GraphError> {
        let mut names: Vec<String> = nodes.iter().map(|s| s.as_ref().to_string()).collect();
        names.sort();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateNode(w[0].clone()));
            }
        }
        let index: HashMap<String, NodeId> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let mut pairs = Vec::with_capacity(links.len());
        for (a, b) in links {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index
                .get(a)
                .ok_or_else(|| GraphError::UnknownEndpoint(a.to_string()))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| GraphError::UnknownEndpoint(b.to_string()))?;
            pairs.push((ia, ib));
        }
        Self::from_indexed(names, &pairs)
    }

    /// Builds a graph whose node `i` is `names[i]`, keeping the given order.
    pub fn from_indexed(
        names: Vec<String>,
        links: &[(NodeId, NodeId)],
    ) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, s) in names.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(s.clone()));
            }
        }
        let n = names.len();
        let mut adj = vec![Vec::new(); n];
        let mut set = Vec::with_capacity(links.len());
        for &(a, b) in links {
            if a >= n {
                return Err(GraphError::UnknownEndpoint(a.to_string()));
            }
            if b >= n {
                return Err(GraphError::UnknownEndpoint(b.to_string()));
            }
            if a == b {
                return Err(GraphError::SelfLoop(names[a].clone()));
            }
            set.push(Link::new(a, b));
        }
        set.sort_unstable();
        for w in set.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateLink(
                    names[w[0].lo()].clone(),
                    names[w[0].hi()].clone(),
                ));
            }
        }
        for l in &set {
            adj[l.lo()].push(l.hi());
            adj[l.hi()].push(l.lo());
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Graph {
            names,
            index,
            adj,
            links: set,
        })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.names.len()
    }

    /// Links in ascending order.
    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    /// Neighbors in ascending index order.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn has_link(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.adj[a].binary_search(&b).is_ok()
    }

    pub fn link_index(&self, l: Link) -> Option<usize> {
        self.links.binary_search(&l).ok()
    }

    /// `"a|b"` with the endpoint names in lexicographic order.
    pub fn link_key(&self, l: Link) -> String {
        let (a, b) = (self.name(l.lo()), self.name(l.hi()));
        if a <= b {
            format!("{a}|{b}")
        } else {
            format!("{b}|{a}")
        }
    }

    /// Parses a `"a|b"` key back into a link of this graph.
    pub fn parse_link_key(&self, key: &str) -> Option<Link> {
        let (a, b) = key.split_once('|')?;
        let (a, b) = (self.id(a)?, self.id(b)?);
        let l = Link::new(a, b);
        self.link_index(l).map(|_| l)
    }

    /// True if the nodes not flagged in `removed` induce a connected graph.
    /// An empty remainder counts as connected.
    pub fn is_connected_without(&self, removed: &[bool]) -> bool {
        let n = self.node_count();
        let Some(start) = (0..n).find(|&v| !removed[v]) else {
            return true;
        };
        let mut seen = removed.to_vec();
        seen[start] = true;
        let mut stack = vec![start];
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == removed.iter().filter(|&&r| !r).count()
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_without(&vec![false; self.node_count()])
    }

    /// Connected components of the subgraph induced by nodes not in `removed`.
    pub fn components_without(&self, removed: &[bool]) -> Vec<Vec<NodeId>> {
        let mut seen = removed.to_vec();
        let mut out = Vec::new();
        for s in self.nodes() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Articulation points of the subgraph induced by nodes not in `removed`.
    pub fn articulation_points(&self, removed: &[bool]) -> Vec<bool> {
        let n = self.node_count();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut cut = vec![false; n];
        let mut time = 0;
        // iterative DFS: (node, parent, next neighbor position)
        let mut stack: Vec<(NodeId, usize, usize)> = Vec::new();
        for root in 0..n {
            if removed[root] || disc[root] != usize::MAX {
                continue;
            }
            disc[root] = time;
            low[root] = time;
            time += 1;
            let mut root_children = 0;
            stack.push((root, usize::MAX, 0));
            while let Some(&mut (v, parent, ref mut pos)) = stack.last_mut() {
                if *pos < self.adj[v].len() {
                    let w = self.adj[v][*pos];
                    *pos += 1;
                    if removed[w] || w == parent {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = time;
                        low[w] = time;
                        time += 1;
                        if v == root {
                            root_children += 1;
                        }
                        stack.push((w, v, 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[v]);
                        if p != root && low[v] >= disc[p] {
                            cut[p] = true;
                        }
                    }
                }
            }
            if root_children > 1 {
                cut[root] = true;
            }
        }
        cut
    }
}
