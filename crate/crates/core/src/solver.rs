//! Link metric recovery from path sums.
//!
//! The structured solver reads segment sums off the tree paths, differences
//! consecutive segments into tree link metrics, and then subtracts the known
//! links from each non-tree path. The dense solver is plain Gaussian
//! elimination on the full path-link system and serves as a baseline.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, SolveError};
use crate::extended::ExtendedGraph;
use crate::graph::{Graph, Link, NodeId};
use crate::par::{map_range, Schedule};
use crate::paths::{
    construct, segments, Construction, MeasurementPath, PathKind, PathSet, UNION_PAIRS,
};
use crate::trees::{Tree, TreeSet};

/// Relative tolerance for two derivations of the same link metric.
pub const DERIVATION_TOLERANCE: f64 = 1e-6;

/// Metric per link.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MetricAssignment {
    w: BTreeMap<Link, f64>,
}

impl MetricAssignment {
    pub fn insert(&mut self, l: Link, w: f64) -> Option<f64> {
        self.w.insert(l, w)
    }

    pub fn get(&self, l: Link) -> Option<f64> {
        self.w.get(&l).copied()
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Link, f64)> + '_ {
        self.w.iter().map(|(&l, &w)| (l, w))
    }

    /// True if every link of `g` has a value.
    pub fn is_complete(&self, g: &Graph) -> bool {
        g.links().iter().all(|l| self.w.contains_key(l))
    }

    /// First link of `g` without a value.
    pub fn missing(&self, g: &Graph) -> Option<Link> {
        g.links().iter().copied().find(|l| !self.w.contains_key(l))
    }

    /// Values keyed by `"a|b"`.
    pub fn to_named(&self, g: &Graph) -> BTreeMap<String, f64> {
        self.w.iter().map(|(&l, &w)| (g.link_key(l), w)).collect()
    }

    pub fn scaled(&self, k: f64) -> Self {
        MetricAssignment {
            w: self.w.iter().map(|(&l, &w)| (l, k * w)).collect(),
        }
    }
}

impl FromIterator<(Link, f64)> for MetricAssignment {
    fn from_iter<I: IntoIterator<Item = (Link, f64)>>(iter: I) -> Self {
        MetricAssignment {
            w: iter.into_iter().collect(),
        }
    }
}

/// Path sums aligned with the order of a [`PathSet`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementVector {
    pub c: Vec<f64>,
}

fn missing(g: Option<&Graph>, l: Link) -> SolveError {
    SolveError::MissingMetric(match g {
        Some(g) => g.link_key(l),
        None => l.to_string(),
    })
}

fn path_sum(p: &MeasurementPath, w: &MetricAssignment) -> Result<f64, SolveError> {
    p.links
        .iter()
        .map(|&l| w.get(l).ok_or_else(|| missing(None, l)))
        .sum()
}

/// Noiseless sums of `truth` over every path.
pub fn simulate_measurements(
    ps: &PathSet,
    truth: &MetricAssignment,
) -> Result<MeasurementVector, SolveError> {
    let c = ps
        .iter()
        .map(|p| path_sum(p, truth))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MeasurementVector { c })
}

/// Segment sums `w(S_i(v))`, indexed `[tree][v]`; `None` for invalid
/// segments and virtual nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentMetrics {
    pub w: [Vec<Option<f64>>; 3],
}

impl SegmentMetrics {
    pub fn get(&self, v: NodeId, tree: Tree) -> Option<f64> {
        self.w[tree.index()][v]
    }
}

/// Splits the three pairwise union sums `(c12, c23, c13)` into segment sums.
pub fn split_union_sums(c12: f64, c23: f64, c13: f64) -> [f64; 3] {
    [
        (c12 + c13 - c23) / 2.0,
        (c12 + c23 - c13) / 2.0,
        (c13 + c23 - c12) / 2.0,
    ]
}

fn lookup(ps: &PathSet, c: &MeasurementVector, nodes: Vec<NodeId>) -> Result<f64, SolveError> {
    let p = MeasurementPath::new(nodes, PathKind::Tree);
    ps.position(&p.links)
        .map(|i| c.c[i])
        .ok_or_else(|| SolveError::MissingMetric(format!("path {:?}", p.nodes)))
}

pub fn segment_metrics(
    t: &TreeSet,
    ps: &PathSet,
    c: &MeasurementVector,
    schedule: Schedule,
) -> Result<SegmentMetrics, SolveError> {
    let n = t.node_count();
    let per_node = map_range(schedule, n, |v| -> Result<[Option<f64>; 3], SolveError> {
        if t.is_virtual(v) {
            return Ok([None; 3]);
        }
        let segs = segments(t, v);
        if t.is_monitor(v) {
            let mut out = [None; 3];
            for s in segs.iter().filter(|s| s.valid) {
                out[s.tree.index()] = Some(lookup(ps, c, s.nodes.clone())?);
            }
            return Ok(out);
        }
        let mut sums = [0.0; 3];
        for (k, (i, j)) in UNION_PAIRS.iter().enumerate() {
            let (a, b) = (&segs[i.index()].nodes, &segs[j.index()].nodes);
            let nodes = a.iter().rev().chain(&b[1..]).copied().collect();
            sums[k] = lookup(ps, c, nodes)?;
        }
        // pairs are (blue, green), (green, red), (blue, red)
        Ok(split_union_sums(sums[0], sums[1], sums[2]).map(Some))
    });
    let mut w = [vec![None; n], vec![None; n], vec![None; n]];
    for (v, r) in per_node.into_iter().enumerate() {
        let vals = r?;
        for k in 0..3 {
            w[k][v] = vals[k];
        }
    }
    Ok(SegmentMetrics { w })
}

fn agrees(a: f64, b: f64) -> bool {
    (a - b).abs() <= DERIVATION_TOLERANCE * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Metrics of the real tree links, each from the difference of a node's
/// segment and its parent's. Every derivation of a link must agree.
pub fn tree_link_metrics(
    t: &TreeSet,
    seg: &SegmentMetrics,
    g: &Graph,
) -> Result<MetricAssignment, SolveError> {
    let mut derived: BTreeMap<Link, Vec<f64>> = BTreeMap::new();
    for tree in Tree::ALL {
        for v in 0..t.node_count() {
            let Some(p) = t.parent(tree, v) else { continue };
            if t.is_virtual(v) || t.is_virtual(p) {
                continue;
            }
            let l = Link::new(v, p);
            let own = seg.get(v, tree).ok_or_else(|| missing(Some(g), l))?;
            let rest = if t.is_monitor(p) {
                0.0
            } else {
                seg.get(p, tree).ok_or_else(|| missing(Some(g), l))?
            };
            derived.entry(l).or_default().push(own - rest);
        }
    }
    let mut out = MetricAssignment::default();
    for (l, values) in derived {
        if !values.iter().all(|&x| agrees(x, values[0])) {
            return Err(SolveError::InconsistentDerivation {
                link: g.link_key(l),
                values,
            });
        }
        out.insert(l, values[0]);
    }
    Ok(out)
}

/// Adds the metric of each non-tree link: its path sum minus the known links.
pub fn non_tree_metrics(
    ps: &PathSet,
    c: &MeasurementVector,
    known: &MetricAssignment,
) -> Result<MetricAssignment, SolveError> {
    let mut out = known.clone();
    for (p, &cp) in ps.iter().zip(&c.c) {
        let PathKind::NonTree(l) = p.kind else {
            continue;
        };
        let mut rest = 0.0;
        for &x in p.links.iter().filter(|&&x| x != l) {
            rest += known.get(x).ok_or_else(|| missing(None, x))?;
        }
        out.insert(l, cp - rest);
    }
    Ok(out)
}

/// Full structured solve for a construction.
pub fn structured_solve(
    con: &Construction,
    c: &MeasurementVector,
    g: &Graph,
    schedule: Schedule,
) -> Result<MetricAssignment, SolveError> {
    let seg = segment_metrics(&con.trees, &con.paths, c, schedule)?;
    let tree = tree_link_metrics(&con.trees, &seg, g)?;
    let all = non_tree_metrics(&con.paths, c, &tree)?;
    match all.missing(g) {
        Some(l) => Err(missing(Some(g), l)),
        None => Ok(all),
    }
}

/// Solves the square path-link system by Gaussian elimination with partial
/// pivoting.
pub fn dense_solve(
    ps: &PathSet,
    c: &MeasurementVector,
    g: &Graph,
) -> Result<MetricAssignment, SolveError> {
    let n = g.link_count();
    let rows = ps.len();
    let singular = SolveError::SingularMatrix { rows, cols: n };
    if rows != n {
        return Err(singular);
    }
    // augmented row-major matrix
    let w = n + 1;
    let mut a = vec![0.0f64; n * w];
    for (i, p) in ps.iter().enumerate() {
        for &l in &p.links {
            let j = g.link_index(l).ok_or_else(|| missing(Some(g), l))?;
            a[i * w + j] = 1.0;
        }
        a[i * w + n] = c.c[i];
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * w + col].abs().total_cmp(&a[y * w + col].abs()))
            .expect("non-empty range");
        if a[piv * w + col].abs() < 1e-9 {
            return Err(singular);
        }
        if piv != col {
            for k in 0..w {
                a.swap(piv * w + k, col * w + k);
            }
        }
        let (top, bottom) = a.split_at_mut((col + 1) * w);
        let prow = &top[col * w..];
        let d = prow[col];
        for row in bottom.chunks_exact_mut(w) {
            let factor = row[col] / d;
            if factor != 0.0 {
                for k in col..w {
                    row[k] -= factor * prow[k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let row = &a[i * w..(i + 1) * w];
        let s: f64 = (i + 1..n).map(|k| row[k] * x[k]).sum();
        x[i] = (row[n] - s) / row[i];
    }
    Ok(g.links().iter().copied().zip(x).collect())
}

/// Largest per-link relative error of `got` against `truth`, over the links of
/// `truth`; infinite if a link is missing.
pub fn max_relative_error(truth: &MetricAssignment, got: &MetricAssignment) -> f64 {
    truth
        .iter()
        .map(|(l, w)| match got.get(l) {
            Some(x) => (x - w).abs() / w.abs().max(f64::MIN_POSITIVE),
            None => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Outcome of an end-to-end identification.
#[derive(Clone, Debug)]
pub struct Identification {
    pub construction: Construction,
    pub measurements: MeasurementVector,
    pub recovered: MetricAssignment,
}

/// Constructs paths, simulates their sums from `truth` and recovers every link.
pub fn identify_all(
    gex: &ExtendedGraph,
    truth: &MetricAssignment,
) -> Result<Identification, Error> {
    let schedule = Schedule::default();
    let construction = construct(gex, schedule)?;
    let measurements = simulate_measurements(&construction.paths, truth)?;
    let recovered = structured_solve(&construction, &measurements, &gex.base, schedule)?;
    Ok(Identification {
        construction,
        measurements,
        recovered,
    })
}
