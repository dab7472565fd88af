//! Random-instance campaigns.

use std::io;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::generate::{generate, Family, GeneratorSpec};
use super::placement::{place_monitors, PlacementPolicy};
use crate::extended::{build_extended_graph, find_non_cutvertex_monitor, preferred_root_monitor};
use crate::graph::Graph;
use crate::harness::{run_harness, HarnessReport};
use crate::par::{map_range, Schedule};
use crate::paths::{construct, Construction};
use crate::solver::{
    dense_solve, max_relative_error, simulate_measurements, structured_solve, MetricAssignment,
};

/// Relative error under which a link counts as identified.
pub const IDENT_TOLERANCE: f64 = 1e-9;

pub const CSV_HEADER: &str = "family,instances,n_bar,m,kappa_bar,gate_rate,ident_fraction,\
t_construct_ms,t_structured_ms,t_dense_ms,h_bar";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CampaignSpec {
    pub family: Family,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub specs: Vec<CampaignSpec>,
    pub instances: usize,
    pub seed: u64,
    pub placement: PlacementPolicy,
    /// Timed runs per operation; the median is reported.
    pub timing_repeats: usize,
    /// Also run the dense baseline solver.
    pub dense: bool,
    /// Also run the verification harness.
    pub harness: bool,
    #[serde(skip)]
    pub schedule: Schedule,
}

impl CampaignConfig {
    pub fn new(specs: Vec<CampaignSpec>, instances: usize, seed: u64) -> Self {
        CampaignConfig {
            specs,
            instances,
            seed,
            placement: PlacementPolicy::Greedy,
            timing_repeats: 3,
            dense: true,
            harness: true,
            schedule: Schedule::default(),
        }
    }
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one instance, derived from the campaign seed and its position.
pub fn instance_seed(campaign: u64, spec: usize, instance: usize) -> u64 {
    mix(mix(mix(campaign) ^ spec as u64) ^ instance as u64)
}

/// Uniform metrics on `[1, 10]` for every link of `g`.
pub fn random_metrics(g: &Graph, seed: u64) -> MetricAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ 0x6d65_7472_6963));
    g.links()
        .iter()
        .map(|&l| (l, rng.gen_range(1.0..=10.0)))
        .collect()
}

fn median_ms<T>(repeats: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut times = Vec::with_capacity(repeats.max(1));
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let t0 = Instant::now();
        let out = f();
        times.push(t0.elapsed());
        last = Some(out);
    }
    times.sort_unstable();
    let mid: Duration = times[times.len() / 2];
    (last.expect("at least one run"), mid.as_secs_f64() * 1e3)
}

/// Everything measured on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceOutcome {
    pub spec_index: usize,
    pub instance_index: usize,
    pub seed: u64,
    pub nodes: usize,
    pub links: usize,
    pub monitors: usize,
    pub gate: bool,
    /// First failure, naming the stage.
    pub error: Option<String>,
    pub paths: usize,
    pub mean_hops: f64,
    pub identified_links: usize,
    pub max_rel_err: f64,
    /// Largest relative difference between the structured and dense solves.
    pub solver_gap: Option<f64>,
    pub harness: Option<HarnessReport>,
    #[serde(skip)]
    pub t_construct_ms: f64,
    #[serde(skip)]
    pub t_structured_ms: f64,
    #[serde(skip)]
    pub t_dense_ms: Option<f64>,
}

impl InstanceOutcome {
    pub fn ident_fraction(&self) -> f64 {
        if self.links == 0 {
            0.0
        } else {
            self.identified_links as f64 / self.links as f64
        }
    }

    /// Gated, error-free, fully identified and (if run) harness-clean.
    pub fn fully_verified(&self) -> bool {
        self.gate
            && self.error.is_none()
            && self.identified_links == self.links
            && self.harness.as_ref().is_none_or(|h| h.passed())
    }
}

/// Runs the whole pipeline on one generated instance.
pub fn run_instance(
    cfg: &CampaignConfig,
    spec_index: usize,
    instance_index: usize,
) -> InstanceOutcome {
    let spec = cfg.specs[spec_index];
    let seed = instance_seed(cfg.seed, spec_index, instance_index);
    let mut out = InstanceOutcome {
        spec_index,
        instance_index,
        seed,
        nodes: spec.nodes,
        links: 0,
        monitors: 0,
        gate: false,
        error: None,
        paths: 0,
        mean_hops: 0.0,
        identified_links: 0,
        max_rel_err: f64::INFINITY,
        solver_gap: None,
        harness: None,
        t_construct_ms: 0.0,
        t_structured_ms: 0.0,
        t_dense_ms: None,
    };
    let g = match generate(&GeneratorSpec {
        family: spec.family,
        nodes: spec.nodes,
        seed,
    }) {
        Ok(g) => g,
        Err(e) => {
            out.error = Some(format!("generate: {e}"));
            return out;
        }
    };
    out.links = g.link_count();
    let placement = place_monitors(&g, cfg.placement, mix(seed ^ 0x0070_6c61_6365));
    out.monitors = placement.monitors.len();
    out.gate = placement.gate;
    if !placement.gate {
        return out;
    }
    let mu2 = find_non_cutvertex_monitor(&g, &placement.monitors)
        .ok()
        .and_then(|mu1| preferred_root_monitor(&g, &placement.monitors, mu1));
    let gex = match build_extended_graph(&g, &placement.monitors, mu2) {
        Ok(x) => x,
        Err(e) => {
            out.error = Some(format!("extend: {e}"));
            return out;
        }
    };
    let (con, t_construct) = median_ms(cfg.timing_repeats, || construct(&gex, cfg.schedule));
    out.t_construct_ms = t_construct;
    let con: Construction = match con {
        Ok(c) => c,
        Err(e) => {
            out.error = Some(format!("construct: {e}"));
            return out;
        }
    };
    out.paths = con.paths.len();
    out.mean_hops = con.paths.mean_hops();

    let truth = random_metrics(&g, seed);
    let c = match simulate_measurements(&con.paths, &truth) {
        Ok(c) => c,
        Err(e) => {
            out.error = Some(format!("simulate: {e}"));
            return out;
        }
    };
    let (rec, t_structured) = median_ms(cfg.timing_repeats, || {
        structured_solve(&con, &c, &g, cfg.schedule)
    });
    out.t_structured_ms = t_structured;
    match rec {
        Ok(w) => {
            out.identified_links = truth
                .iter()
                .filter(|&(l, x)| {
                    w.get(l)
                        .is_some_and(|y| (y - x).abs() <= IDENT_TOLERANCE * x.abs())
                })
                .count();
            out.max_rel_err = max_relative_error(&truth, &w);
            if cfg.dense {
                let (dense, t_dense) =
                    median_ms(cfg.timing_repeats, || dense_solve(&con.paths, &c, &g));
                out.t_dense_ms = Some(t_dense);
                match dense {
                    Ok(d) => out.solver_gap = Some(max_relative_error(&w, &d)),
                    Err(e) => out.error = Some(format!("dense solve: {e}")),
                }
            }
        }
        Err(e) => out.error = Some(format!("structured solve: {e}")),
    }
    if cfg.harness {
        match run_harness(&con, &g) {
            Ok(h) => out.harness = Some(h),
            Err(e) => out.error = out.error.take().or(Some(format!("harness: {e}"))),
        }
    }
    out
}

/// Aggregate over the instances of one spec.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationRecord {
    pub family: String,
    pub instances: usize,
    pub n_bar: f64,
    pub m: usize,
    pub kappa_bar: f64,
    pub gate_rate: f64,
    /// Mean identified fraction over gated instances.
    pub ident_fraction: f64,
    pub t_construct_ms: f64,
    pub t_structured_ms: f64,
    pub t_dense_ms: f64,
    pub h_bar: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        0.0
    } else {
        s / k as f64
    }
}

impl EvaluationRecord {
    pub fn aggregate(spec: &CampaignSpec, outcomes: &[&InstanceOutcome]) -> Self {
        let gated: Vec<&&InstanceOutcome> = outcomes.iter().filter(|o| o.gate).collect();
        let solved: Vec<&&InstanceOutcome> = gated
            .iter()
            .copied()
            .filter(|o| o.error.is_none())
            .collect();
        EvaluationRecord {
            family: spec.family.to_string(),
            instances: outcomes.len(),
            n_bar: mean(outcomes.iter().map(|o| o.links as f64)),
            m: spec.nodes,
            kappa_bar: mean(outcomes.iter().map(|o| o.monitors as f64)),
            gate_rate: if outcomes.is_empty() {
                0.0
            } else {
                gated.len() as f64 / outcomes.len() as f64
            },
            ident_fraction: mean(gated.iter().map(|o| o.ident_fraction())),
            t_construct_ms: mean(solved.iter().map(|o| o.t_construct_ms)),
            t_structured_ms: mean(solved.iter().map(|o| o.t_structured_ms)),
            t_dense_ms: mean(solved.iter().filter_map(|o| o.t_dense_ms)),
            h_bar: mean(solved.iter().map(|o| o.mean_hops)),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.4},{},{:.4},{:.4},{:.6},{:.4},{:.4},{:.4},{:.4}",
            self.family,
            self.instances,
            self.n_bar,
            self.m,
            self.kappa_bar,
            self.gate_rate,
            self.ident_fraction,
            self.t_construct_ms,
            self.t_structured_ms,
            self.t_dense_ms,
            self.h_bar
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Campaign {
    pub records: Vec<EvaluationRecord>,
    pub outcomes: Vec<InstanceOutcome>,
}

impl Campaign {
    pub fn write_csv(&self, mut w: impl io::Write) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    /// The CSV with every timing column blanked; a pure function of the
    /// configuration.
    pub fn deterministic_csv(&self) -> String {
        let mut records = self.records.clone();
        for r in &mut records {
            r.t_construct_ms = 0.0;
            r.t_structured_ms = 0.0;
            r.t_dense_ms = 0.0;
        }
        Campaign {
            records,
            outcomes: Vec::new(),
        }
        .to_csv()
    }

    /// Per-instance outcomes as JSON, timings excluded.
    pub fn outcomes_json(&self) -> String {
        serde_json::to_string(&self.outcomes).expect("plain data serializes")
    }
}

/// Runs every instance of every spec (in parallel under the configured
/// schedule) and aggregates per spec.
pub fn run_campaign(cfg: &CampaignConfig) -> Campaign {
    let total = cfg.specs.len() * cfg.instances;
    let outcomes = map_range(cfg.schedule, total, |k| {
        run_instance(cfg, k / cfg.instances.max(1), k % cfg.instances.max(1))
    });
    let records = cfg
        .specs
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let mine: Vec<&InstanceOutcome> =
                outcomes.iter().filter(|o| o.spec_index == i).collect();
            EvaluationRecord::aggregate(spec, &mine)
        })
        .collect();
    Campaign { records, outcomes }
}
