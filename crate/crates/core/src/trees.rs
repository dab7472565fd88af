//! Three independent spanning trees rooted at `r`.
//!
//! Blue parents have a strictly higher ear level. Green parents have a lower
//! s-t number and an ear level no higher; red parents a higher s-t number and
//! an ear level no higher. Green and red parents are taken from the ear that
//! introduced the node, so every ear link lands in the union of the trees.

use serde::Serialize;

use crate::ears::EarDecomposition;
use crate::error::TreeError;
use crate::extended::{ExtendedGraph, NodeRole};
use crate::graph::{Graph, Link, NodeId};
use crate::stnumber::StNumbering;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tree {
    Blue,
    Green,
    Red,
}

impl Tree {
    pub const ALL: [Tree; 3] = [Tree::Blue, Tree::Green, Tree::Red];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Tree::Blue => "blue",
            Tree::Green => "green",
            Tree::Red => "red",
        }
    }
}

/// Monitors whose virtual links enter the tree union.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialNodes {
    /// Blue parent of `mu2'`.
    pub mu_a: NodeId,
    /// Blue parent of `mu1'`.
    pub mu_b: NodeId,
    /// Monitors other than `mu1` and `mu_a` whose green parent is `mu2'`.
    pub greens: Vec<NodeId>,
    /// Monitors other than `mu1` and `mu_b` whose red parent is `mu1'`.
    pub reds: Vec<NodeId>,
}

#[derive(Clone, Debug)]
pub struct TreeSet {
    pub root: NodeId,
    /// `parent[tree][v]`, `None` only at the root.
    pub parent: [Vec<Option<NodeId>>; 3],
    pub roles: Vec<NodeRole>,
    /// Union of the three trees.
    pub gm: Graph,
    /// Virtual links of `gm`.
    pub virtual_in_gm: Vec<Link>,
    pub special: SpecialNodes,
}

impl TreeSet {
    pub fn parent(&self, tree: Tree, v: NodeId) -> Option<NodeId> {
        self.parent[tree.index()][v]
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn is_monitor(&self, v: NodeId) -> bool {
        self.roles[v] == NodeRole::Monitor
    }

    pub fn is_virtual(&self, v: NodeId) -> bool {
        self.roles[v].is_virtual()
    }

    pub fn in_tree(&self, tree: Tree, l: Link) -> bool {
        let p = &self.parent[tree.index()];
        p[l.lo()] == Some(l.hi()) || p[l.hi()] == Some(l.lo())
    }

    /// Links of one tree, ascending.
    pub fn tree_links(&self, tree: Tree) -> Vec<Link> {
        let mut out: Vec<Link> = self.parent[tree.index()]
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| Link::new(v, p)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Real links of `gm`, ascending.
    pub fn real_gm_links(&self) -> Vec<Link> {
        self.gm
            .links()
            .iter()
            .copied()
            .filter(|l| !self.is_virtual(l.hi()))
            .collect()
    }
}

fn select_blue(g: &Graph, d: &EarDecomposition, f: &StNumbering, v: NodeId) -> Option<NodeId> {
    let gv = d.ear_level[v];
    g.neighbors(v)
        .iter()
        .copied()
        .filter(|&w| d.ear_level[w] > gv)
        .min_by_key(|&w| (d.ear_level[w], f.get(w)))
}

pub fn build_trees(
    gex: &ExtendedGraph,
    d: &EarDecomposition,
    f: &StNumbering,
) -> Result<TreeSet, TreeError> {
    let g = &gex.full;
    let n = g.node_count();
    let (r, v1, v2, mu1, mu2) = (
        gex.root(),
        gex.mu1_virtual(),
        gex.mu2_virtual(),
        gex.mu1,
        gex.mu2,
    );
    let mut blue = vec![None; n];
    let mut green = vec![None; n];
    let mut red = vec![None; n];

    for v in g.nodes() {
        if v == r {
            continue;
        }
        blue[v] = if v == mu2 {
            Some(r)
        } else {
            Some(
                select_blue(g, d, f, v).ok_or_else(|| TreeError::NoEligibleParent {
                    tree: "blue",
                    node: g.name(v).to_string(),
                })?,
            )
        };
    }

    green[v2] = Some(r);
    red[v1] = Some(r);
    green[mu1] = Some(v2);
    red[mu1] = Some(v1);
    green[v1] = Some(mu1);
    red[v2] = Some(mu1);
    for ear in &d.ears[1..] {
        let (a, b) = (ear[0], ear[ear.len() - 1]);
        let forward: Vec<NodeId> = if f.get(a) < f.get(b) {
            ear.clone()
        } else {
            ear.iter().rev().copied().collect()
        };
        for k in 1..forward.len() - 1 {
            green[forward[k]] = Some(forward[k - 1]);
            red[forward[k]] = Some(forward[k + 1]);
        }
    }
    for (tree, parent) in [("green", &green), ("red", &red)] {
        if let Some(v) = g.nodes().find(|&v| v != r && parent[v].is_none()) {
            return Err(TreeError::NoEligibleParent {
                tree,
                node: g.name(v).to_string(),
            });
        }
    }

    let mut links: Vec<Link> = [&blue, &green, &red]
        .iter()
        .flat_map(|p| {
            p.iter()
                .enumerate()
                .filter_map(|(v, q)| q.map(|q| Link::new(v, q)))
        })
        .collect();
    links.sort_unstable();
    links.dedup();
    let pairs: Vec<(NodeId, NodeId)> = links.iter().map(|l| (l.lo(), l.hi())).collect();
    let gm = Graph::from_indexed(g.names().to_vec(), &pairs).expect("subgraph of a simple graph");
    let virtual_in_gm: Vec<Link> = links
        .iter()
        .copied()
        .filter(|l| gex.is_virtual_link(*l))
        .collect();

    let mu_a = blue[v2].expect("non-root");
    let mu_b = blue[v1].expect("non-root");
    let greens = gex
        .monitors
        .iter()
        .copied()
        .filter(|&v| v != mu1 && v != mu_a && green[v] == Some(v2))
        .collect();
    let reds = gex
        .monitors
        .iter()
        .copied()
        .filter(|&v| v != mu1 && v != mu_b && red[v] == Some(v1))
        .collect();

    Ok(TreeSet {
        root: r,
        parent: [blue, green, red],
        roles: gex.roles.clone(),
        gm,
        virtual_in_gm,
        special: SpecialNodes {
            mu_a,
            mu_b,
            greens,
            reds,
        },
    })
}

/// Parent chain from `v` to the root, or `None` if it loops or dangles.
pub fn try_root_path(t: &TreeSet, tree: Tree, v: NodeId) -> Option<Vec<NodeId>> {
    let mut path = vec![v];
    let mut cur = v;
    while cur != t.root {
        cur = t.parent(tree, cur)?;
        path.push(cur);
        if path.len() > t.node_count() {
            return None;
        }
    }
    Some(path)
}

/// Parent chain from `v` to the root in one tree.
///
/// # Panics
/// If the parent map of `tree` does not reach the root from `v`.
pub fn root_path(t: &TreeSet, tree: Tree, v: NodeId) -> Vec<NodeId> {
    try_root_path(t, tree, v).expect("tree reaches the root")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndependenceViolation {
    NotSpanning {
        node: NodeId,
        tree: Tree,
    },
    SharedNodes {
        node: NodeId,
        trees: (Tree, Tree),
        shared: Vec<NodeId>,
    },
}

/// Checks that every node's three root paths meet only at the node and the
/// root.
pub fn verify_independence(t: &TreeSet) -> Vec<IndependenceViolation> {
    let n = t.node_count();
    let mut out = Vec::new();
    let mut mark = vec![usize::MAX; n];
    for v in 0..n {
        if v == t.root {
            continue;
        }
        let mut paths = Vec::with_capacity(3);
        for tree in Tree::ALL {
            match try_root_path(t, tree, v) {
                Some(p) => paths.push((tree, p)),
                None => out.push(IndependenceViolation::NotSpanning { node: v, tree }),
            }
        }
        for i in 0..paths.len() {
            for &x in &paths[i].1 {
                mark[x] = i;
            }
            for j in i + 1..paths.len() {
                let mut shared: Vec<NodeId> = paths[j]
                    .1
                    .iter()
                    .copied()
                    .filter(|&x| x != v && x != t.root && mark[x] == i)
                    .collect();
                if !shared.is_empty() {
                    shared.sort_unstable();
                    out.push(IndependenceViolation::SharedNodes {
                        node: v,
                        trees: (paths[i].0, paths[j].0),
                        shared,
                    });
                }
            }
            for &x in &paths[i].1 {
                mark[x] = usize::MAX;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleViolation {
    pub tree: Tree,
    pub node: NodeId,
}

/// Nodes whose parent breaks the ear-level / s-t number rule of its tree.
pub fn validate_tree_rules(
    gex: &ExtendedGraph,
    d: &EarDecomposition,
    f: &StNumbering,
    t: &TreeSet,
) -> Vec<RuleViolation> {
    let g = &gex.full;
    let lvl = &d.ear_level;
    let mut out = Vec::new();
    for v in g.nodes() {
        if v == t.root {
            continue;
        }
        for tree in Tree::ALL {
            let Some(p) = t.parent(tree, v) else {
                out.push(RuleViolation { tree, node: v });
                continue;
            };
            let fixed = match tree {
                Tree::Blue => v == gex.mu2,
                Tree::Green => v == gex.mu2_virtual(),
                Tree::Red => v == gex.mu1_virtual(),
            };
            let ok = g.has_link(v, p)
                && if fixed {
                    p == t.root
                } else {
                    match tree {
                        Tree::Blue => lvl[p] > lvl[v],
                        Tree::Green => f.get(p) < f.get(v) && lvl[p] <= lvl[v],
                        Tree::Red => f.get(p) > f.get(v) && lvl[p] <= lvl[v],
                    }
                };
            if !ok {
                out.push(RuleViolation { tree, node: v });
            }
        }
    }
    out
}
