//! Per-instance verification of the counting results behind the
//! construction.
//!
//! Every non-root node owns three cycles, one per pair of trees, formed by
//! its two root paths. The distinct cycles are as many as the links of the
//! tree union and linearly independent. Stripping the virtual links from each
//! cycle leaves a monitor-to-monitor path (or nothing, for the first ear's
//! cycle); a greedy rank filter over those paths keeps exactly one path per
//! real link of the union. The per-ear cycle counts and the blue-tree link
//! split obey closed-form identities, all checked here.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::ears::EarDecomposition;
use crate::error::HarnessError;
use crate::graph::{Graph, Link, NodeId};
use crate::paths::{Construction, MeasurementPath, PathKind, PathSet};
use crate::rank::{bareiss_rank, exact_rank, IncidenceMatrix, ModularBasis};
use crate::trees::{try_root_path, verify_independence, Tree, TreeSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cycle {
    pub owner: NodeId,
    pub pair: (Tree, Tree),
    /// Sorted links, virtual ones included.
    pub links: Vec<Link>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CycleSet {
    /// Three entries per spanning non-root node, in node order.
    pub cycles: Vec<Cycle>,
    /// Distinct link sets in first-seen order.
    pub distinct: Vec<Vec<Link>>,
}

pub const CYCLE_PAIRS: [(Tree, Tree); 3] = [
    (Tree::Blue, Tree::Green),
    (Tree::Green, Tree::Red),
    (Tree::Blue, Tree::Red),
];

fn path_links(p: &[NodeId]) -> impl Iterator<Item = Link> + '_ {
    p.windows(2).map(|w| Link::new(w[0], w[1]))
}

fn cycles_of(t: &TreeSet, v: NodeId) -> Vec<Cycle> {
    let Some(roots) = Tree::ALL
        .iter()
        .map(|&tr| try_root_path(t, tr, v))
        .collect::<Option<Vec<_>>>()
    else {
        return Vec::new();
    };
    CYCLE_PAIRS
        .iter()
        .map(|&(i, j)| {
            let mut links: Vec<Link> = path_links(&roots[i.index()])
                .chain(path_links(&roots[j.index()]))
                .collect();
            links.sort_unstable();
            links.dedup();
            Cycle {
                owner: v,
                pair: (i, j),
                links,
            }
        })
        .collect()
}

/// The three cycles of every non-root node whose root paths all exist.
pub fn build_cycles(t: &TreeSet) -> CycleSet {
    let mut cs = CycleSet::default();
    let mut seen = HashSet::new();
    for v in 0..t.node_count() {
        if v == t.root {
            continue;
        }
        for c in cycles_of(t, v) {
            if seen.insert(c.links.clone()) {
                cs.distinct.push(c.links.clone());
            }
            cs.cycles.push(c);
        }
    }
    cs
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleBasisReport {
    pub distinct_cycles: usize,
    pub gm_links: usize,
    pub rank: usize,
    pub count_holds: bool,
    pub rank_holds: bool,
}

impl CycleBasisReport {
    pub fn holds(&self) -> bool {
        self.count_holds && self.rank_holds
    }
}

/// Distinct cycle count and exact cycle-link rank against the link count of
/// the tree union.
pub fn verify_cycle_basis(cs: &CycleSet, t: &TreeSet) -> CycleBasisReport {
    let mut m = IncidenceMatrix::new(t.gm.link_count());
    for c in &cs.distinct {
        m.push_row(
            c.iter()
                .map(|&l| t.gm.link_index(l).expect("tree link"))
                .collect(),
        );
    }
    let rank = exact_rank(&m);
    let gm_links = t.gm.link_count();
    CycleBasisReport {
        distinct_cycles: cs.distinct.len(),
        gm_links,
        rank,
        count_holds: cs.distinct.len() == gm_links,
        rank_holds: rank == gm_links,
    }
}

/// Residue of each distinct cycle once virtual links are removed.
#[derive(Clone, Debug, Serialize)]
pub struct Residues {
    /// `None` for an empty residue.
    pub paths: Vec<Option<MeasurementPath>>,
}

impl Residues {
    pub fn empty_count(&self) -> usize {
        self.paths.iter().filter(|p| p.is_none()).count()
    }
}

/// Orders the links of a residue into a simple path with monitor endpoints.
fn residue_path(t: &TreeSet, links: &[Link]) -> Option<MeasurementPath> {
    let mut adj: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for l in links {
        adj.entry(l.lo()).or_default().push(l.hi());
        adj.entry(l.hi()).or_default().push(l.lo());
    }
    if adj.values().any(|n| n.len() > 2) || adj.len() != links.len() + 1 {
        return None;
    }
    let start = adj
        .iter()
        .filter(|(_, n)| n.len() == 1)
        .map(|(&v, _)| v)
        .min()?;
    let mut nodes = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while let Some(&next) = adj[&cur].iter().find(|&&x| x != prev) {
        nodes.push(next);
        prev = cur;
        cur = next;
        if nodes.len() > adj.len() {
            return None;
        }
    }
    if nodes.len() != adj.len() || !t.is_monitor(start) || !t.is_monitor(cur) {
        return None;
    }
    Some(MeasurementPath::new(nodes, PathKind::Tree))
}

pub fn reduce_to_y(cs: &CycleSet, t: &TreeSet) -> Result<Residues, HarnessError> {
    let mut paths = Vec::with_capacity(cs.distinct.len());
    for (i, c) in cs.distinct.iter().enumerate() {
        let real: Vec<Link> = c
            .iter()
            .copied()
            .filter(|l| !t.is_virtual(l.hi()))
            .collect();
        if real.is_empty() {
            paths.push(None);
        } else {
            paths.push(Some(
                residue_path(t, &real).ok_or(HarnessError::NonPathResidue(i))?,
            ));
        }
    }
    Ok(Residues { paths })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Taxonomy {
    pub trivial: usize,
    pub duplicate: usize,
    pub dependent: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Filtered {
    pub paths: Vec<MeasurementPath>,
    pub rank: usize,
    pub columns: usize,
    pub taxonomy: Taxonomy,
}

fn columns(links: &[Link], p: &MeasurementPath) -> Vec<usize> {
    p.links
        .iter()
        .map(|l| {
            links
                .binary_search(l)
                .expect("residue link is a real union link")
        })
        .collect()
}

/// Greedily keeps each residue path that raises the exact rank over the real
/// links of the union.
pub fn independent_filter(y: &Residues, t: &TreeSet) -> Filtered {
    let links = t.real_gm_links();
    let mut taxonomy = Taxonomy::default();
    let mut seen = HashSet::new();
    let mut candidates = Vec::new();
    for p in &y.paths {
        match p {
            None => taxonomy.trivial += 1,
            Some(p) if !seen.insert(p.links.clone()) => taxonomy.duplicate += 1,
            Some(p) => candidates.push(p),
        }
    }
    let mut basis = ModularBasis::new(links.len());
    let mut kept: Vec<&MeasurementPath> = Vec::new();
    for p in &candidates {
        if basis.insert(&columns(&links, p)) {
            kept.push(p);
        }
    }
    if kept.len() < links.len() {
        // a modular dependency may be spurious; redo the filter exactly
        kept.clear();
        let mut m = IncidenceMatrix::new(links.len());
        for p in &candidates {
            m.push_row(columns(&links, p));
            if bareiss_rank(&m) > kept.len() {
                kept.push(p);
            } else {
                m.rows.pop();
            }
        }
    }
    taxonomy.dependent = candidates.len() - kept.len();
    Filtered {
        rank: kept.len(),
        columns: links.len(),
        paths: kept.into_iter().cloned().collect(),
        taxonomy,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, lhs: usize, rhs: i64) -> Self {
        let lhs = lhs as i64;
        IdentityCheck {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs == rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountingReport {
    /// Blue links in no other tree.
    pub b1: usize,
    /// Blue links also green or red.
    pub b2: usize,
    /// New non-root nodes per ear.
    pub delta: Vec<usize>,
    pub eps: Vec<usize>,
    pub eps_prime: Vec<usize>,
    /// New distinct cycles contributed by each ear's nodes.
    pub q: Vec<usize>,
    pub n_e: usize,
    pub gm_links: usize,
    pub gm_nodes: usize,
    pub distinct_cycles: usize,
    /// Virtual links of the union.
    pub v_count: usize,
    pub checks: Vec<IdentityCheck>,
}

impl CountingReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn first_violation(&self) -> Option<HarnessError> {
        self.checks
            .iter()
            .find(|c| !c.holds)
            .map(|c| HarnessError::IdentityViolation {
                name: c.name.clone(),
                detail: format!("{} != {}", c.lhs, c.rhs),
            })
    }
}

pub fn counting_report(t: &TreeSet, d: &EarDecomposition, cs: &CycleSet) -> CountingReport {
    let blue = t.tree_links(Tree::Blue);
    let b2 = blue
        .iter()
        .filter(|&&l| t.in_tree(Tree::Green, l) || t.in_tree(Tree::Red, l))
        .count();
    let b1 = blue.len() - b2;
    let is_blue = |a: NodeId, b: NodeId| t.in_tree(Tree::Blue, Link::new(a, b));

    let mut by_owner: HashMap<NodeId, Vec<&Cycle>> = HashMap::new();
    for c in &cs.cycles {
        by_owner.entry(c.owner).or_default().push(c);
    }
    let mut seen: HashSet<&[Link]> = HashSet::new();
    let (mut delta, mut eps, mut eps_prime, mut q) = (vec![], vec![], vec![], vec![]);
    for (i, ear) in d.ears.iter().enumerate() {
        let new: Vec<NodeId> = d
            .new_nodes(i)
            .iter()
            .copied()
            .filter(|&v| v != t.root)
            .collect();
        // the first ear is read as mu1', mu1, mu2' between two copies of r
        let path: &[NodeId] = if i == 0 { &ear[1..ear.len() - 1] } else { ear };
        let k = path.len();
        eps.push(usize::from(is_blue(path[0], path[1])));
        eps_prime.push(usize::from(is_blue(path[k - 2], path[k - 1])));
        let mut count = 0;
        for v in &new {
            for c in by_owner.get(v).into_iter().flatten() {
                if seen.insert(&c.links) {
                    count += 1;
                }
            }
        }
        delta.push(new.len());
        q.push(count);
    }

    let gm_nodes = t.gm.node_count();
    let gm_links = t.gm.link_count();
    let n_e = d.ear_count();
    let cyc = cs.distinct.len();
    let mut checks = vec![
        IdentityCheck::new(
            "parent split: b1 + b2 = |gm| - 1",
            b1 + b2,
            gm_nodes as i64 - 1,
        ),
        IdentityCheck::new(
            "union links: ||gm|| = b1 + |gm| + n_e - 1",
            gm_links,
            (b1 + gm_nodes + n_e) as i64 - 1,
        ),
    ];
    for i in 0..n_e {
        checks.push(IdentityCheck::new(
            format!("ear cycles[{}]: Q = 1 + 2 delta - eps - eps'", i + 1),
            q[i],
            1 + 2 * delta[i] as i64 - eps[i] as i64 - eps_prime[i] as i64,
        ));
    }
    checks.push(IdentityCheck::new(
        "cycle count: |C| = 2|gm| + n_e - 2 - b2",
        cyc,
        (2 * gm_nodes + n_e) as i64 - 2 - b2 as i64,
    ));
    checks.push(IdentityCheck::new(
        "cycles vs links: |C| = ||gm||",
        cyc,
        gm_links as i64,
    ));
    checks.push(IdentityCheck::new(
        "sum(eps + eps') = b2",
        eps.iter().chain(&eps_prime).sum(),
        b2 as i64,
    ));

    CountingReport {
        b1,
        b2,
        delta,
        eps,
        eps_prime,
        q,
        n_e,
        gm_links,
        gm_nodes,
        distinct_cycles: cyc,
        v_count: t.virtual_in_gm.len(),
        checks,
    }
}

/// Every verification result for one constructed instance.
#[derive(Clone, Debug, Serialize)]
pub struct HarnessReport {
    pub independence_violations: usize,
    pub cycle_basis: CycleBasisReport,
    pub counting: CountingReport,
    /// Cycles made only of virtual links. Diagnostic: one for the first
    /// ear, plus one for each ear that joins a single monitor to two virtual
    /// nodes.
    pub empty_residues: usize,
    pub y_prime_size: usize,
    pub y_prime_expected: usize,
    pub taxonomy: Taxonomy,
    /// Exact rank of the tree paths over the real union links.
    pub tree_path_rank: usize,
    pub path_count: usize,
    pub path_rank: usize,
    pub link_count: usize,
    /// Name and detail of each failed check.
    pub failures: Vec<String>,
}

impl HarnessReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn tree_path_rank(paths: &PathSet, t: &TreeSet) -> usize {
    let links = t.real_gm_links();
    let mut m = IncidenceMatrix::new(links.len());
    for p in paths.iter().filter(|p| p.kind == PathKind::Tree) {
        m.push_row(columns(&links, p));
    }
    exact_rank(&m)
}

/// Runs every check against a construction over base graph `g`.
pub fn run_harness(con: &Construction, g: &Graph) -> Result<HarnessReport, HarnessError> {
    let t = &con.trees;
    let independence_violations = verify_independence(t).len();
    let cs = build_cycles(t);
    let cycle_basis = verify_cycle_basis(&cs, t);
    let counting = counting_report(t, &con.decomposition, &cs);
    let residues = reduce_to_y(&cs, t)?;
    let filtered = independent_filter(&residues, t);
    let y_prime_expected = t.gm.link_count() - t.virtual_in_gm.len();
    let tree_rank = tree_path_rank(&con.paths, t);
    let path_rank = crate::paths::path_rank(&con.paths, g);

    let mut failures = Vec::new();
    let mut check = |ok: bool, what: String| {
        if !ok {
            failures.push(what);
        }
    };
    check(
        independence_violations == 0,
        format!("independence: {independence_violations} violations"),
    );
    check(
        cycle_basis.count_holds,
        format!(
            "cycle basis count: {} != {}",
            cycle_basis.distinct_cycles, cycle_basis.gm_links
        ),
    );
    check(
        cycle_basis.rank_holds,
        format!(
            "cycle basis rank: {} != {}",
            cycle_basis.rank, cycle_basis.gm_links
        ),
    );
    for c in counting.checks.iter().filter(|c| !c.holds) {
        check(false, format!("{}: {} != {}", c.name, c.lhs, c.rhs));
    }
    check(
        filtered.rank == y_prime_expected,
        format!("|Y'|: {} != {}", filtered.rank, y_prime_expected),
    );
    check(
        tree_rank == filtered.rank,
        format!("tree path rank: {} != {}", tree_rank, filtered.rank),
    );
    check(
        con.paths.len() == g.link_count(),
        format!("path count: {} != {}", con.paths.len(), g.link_count()),
    );
    check(
        path_rank == g.link_count(),
        format!("path rank: {} != {}", path_rank, g.link_count()),
    );

    Ok(HarnessReport {
        independence_violations,
        cycle_basis,
        counting,
        empty_residues: residues.empty_count(),
        y_prime_size: filtered.rank,
        y_prime_expected,
        taxonomy: filtered.taxonomy,
        tree_path_rank: tree_rank,
        path_count: con.paths.len(),
        path_rank,
        link_count: g.link_count(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{f1, f1_reference_ears};
    use crate::stnumber::st_number;
    use crate::trees::build_trees;

    fn f1_parts() -> (crate::extended::ExtendedGraph, EarDecomposition, TreeSet) {
        let gex = f1();
        let d = f1_reference_ears(&gex);
        let t = build_trees(&gex, &d, &st_number(&d)).unwrap();
        (gex, d, t)
    }

    #[test]
    fn fixture_cycles() {
        let (gex, _, t) = f1_parts();
        let cs = build_cycles(&t);
        assert_eq!(cs.cycles.len(), 18);
        assert_eq!(cs.distinct.len(), 13);
        let basis = verify_cycle_basis(&cs, &t);
        assert!(basis.holds());
        // green/red cycle of mu1 is the first ear
        let (r, v1, v2, a) = (gex.root(), gex.mu1_virtual(), gex.mu2_virtual(), gex.mu1);
        let c = cs
            .cycles
            .iter()
            .find(|c| c.owner == a && c.pair == (Tree::Green, Tree::Red))
            .unwrap();
        let mut e1 = vec![
            Link::new(r, v1),
            Link::new(v1, a),
            Link::new(a, v2),
            Link::new(v2, r),
        ];
        e1.sort_unstable();
        assert_eq!(c.links, e1);
    }

    #[test]
    fn fixture_residues() {
        let (gex, _, t) = f1_parts();
        let cs = build_cycles(&t);
        let y = reduce_to_y(&cs, &t).unwrap();
        // The ear (mu1', c, mu2') closes the all-virtual cycle r mu2' c mu1' r
        // alongside the first ear's, so this decomposition has two.
        assert_eq!(y.empty_count(), 2);
        let d = gex.full.id("d").unwrap();
        let bg = cs
            .cycles
            .iter()
            .find(|c| c.owner == d && c.pair == (Tree::Blue, Tree::Green))
            .unwrap();
        let i = cs.distinct.iter().position(|x| *x == bg.links).unwrap();
        let p = y.paths[i].as_ref().unwrap();
        let s: String = p.nodes.iter().map(|&v| gex.full.name(v)).collect();
        assert_eq!(s, "adb");
        let f = independent_filter(&y, &t);
        assert_eq!(f.rank, 13 - 7);
        assert_eq!(f.taxonomy.trivial, 2);
    }

    #[test]
    fn computed_fixture_has_one_empty_residue() {
        let gex = f1();
        let con = crate::paths::construct(&gex, crate::par::Schedule::Sequential).unwrap();
        let cs = build_cycles(&con.trees);
        assert_eq!(reduce_to_y(&cs, &con.trees).unwrap().empty_count(), 1);
        let rep = run_harness(&con, &gex.base).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
    }

    #[test]
    fn fixture_counting() {
        let (_, d, t) = f1_parts();
        let cs = build_cycles(&t);
        let rep = counting_report(&t, &d, &cs);
        assert_eq!((rep.b1, rep.b2), (3, 3));
        assert_eq!(rep.q[0], 7);
        assert_eq!(rep.q.iter().sum::<usize>(), 13);
        assert!(rep.holds(), "{:?}", rep.checks);
    }

    #[test]
    fn corrupted_parent_is_reported() {
        let (gex, _, mut t) = f1_parts();
        let (a, c) = (gex.mu1, gex.full.id("c").unwrap());
        t.parent[Tree::Blue.index()][c] = Some(a);
        let cs = build_cycles(&t);
        let basis = verify_cycle_basis(&cs, &t);
        assert!(!basis.count_holds);
    }
}
