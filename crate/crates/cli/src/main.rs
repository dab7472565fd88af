use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use tomo_core::ears::validate_ears;
use tomo_core::eval::{
    generate, place_monitors, random_metrics, run_campaign, CampaignConfig, CampaignSpec, Family,
    GeneratorSpec, PlacementPolicy,
};
use tomo_core::extended::{find_non_cutvertex_monitor, preferred_root_monitor};
use tomo_core::harness::run_harness;
use tomo_core::io::GraphFile;
use tomo_core::par::{with_jobs, Schedule};
use tomo_core::paths::PathKind;
use tomo_core::solver::{dense_solve, max_relative_error, simulate_measurements, structured_solve};
use tomo_core::stnumber::validate_st;
use tomo_core::trees::{validate_tree_rules, verify_independence, Tree};
use tomo_core::{build_extended_graph, construct, Construction, Error, ExtendedGraph};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(
    name = "tomo",
    version,
    about = "Link metric identification from monitor path measurements"
)]
struct Cli {
    /// Cap on worker threads (0 keeps the default pool).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for generated metrics and graphs; TOMO_SEED overrides it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct paths, simulate their sums and recover every link metric.
    Identify(GraphArgs),
    /// List the measurement paths.
    Paths {
        #[command(flatten)]
        graph: GraphArgs,
        /// Also dump the three parent maps.
        #[arg(long)]
        emit_trees: bool,
        /// Write the trees as DOT to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Validate the decomposition, numbering and trees and run the counting checks.
    Verify(GraphArgs),
    /// Run an evaluation campaign and write the summary table.
    Eval(EvalArgs),
    /// Generate a random graph with monitors and metrics.
    Gen(GenArgs),
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FamilyArgs {
    /// er, rg or ba.
    #[arg(long)]
    family: String,
    #[arg(long)]
    nodes: usize,
    /// p for er, d_c for rg, rho for ba.
    #[arg(long)]
    param: f64,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 30)]
    instances: usize,
    /// Place this many monitors at random instead of greedily.
    #[arg(long)]
    random_monitors: Option<usize>,
    /// Skip the dense reference solve.
    #[arg(long)]
    no_dense: bool,
    /// Skip the verification harness.
    #[arg(long)]
    no_harness: bool,
    /// Per-instance outcomes as JSON.
    #[arg(long)]
    outcomes: Option<PathBuf>,
    /// CSV destination; `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    random_monitors: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: String) -> Self {
        Failure { code: 1, message }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let seed = match resolve_seed(cli.seed) {
        Ok(s) => s,
        Err(f) => {
            eprintln!("{}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let result = with_jobs(cli.jobs, || match &cli.command {
        Command::Identify(a) => identify(a, seed),
        Command::Paths {
            graph,
            emit_trees,
            dot,
        } => paths(graph, *emit_trees, dot.as_deref(), seed),
        Command::Verify(a) => verify(a, seed),
        Command::Eval(a) => eval(a, seed),
        Command::Gen(a) => gen(a, seed),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    match std::env::var("TOMO_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("TOMO_SEED: `{s}` is not an unsigned integer"))),
        Err(_) => Ok(flag.unwrap_or(DEFAULT_SEED)),
    }
}

fn schedule() -> Schedule {
    Schedule::default()
}

fn emit(out: Option<&Path>, text: &str, op: &str, seed: u64) -> CmdResult {
    match out {
        Some(p) if p.as_os_str() != "-" => fs::write(p, format!("{text}\n")).map_err(|e| {
            Failure::usage(format!(
                "{op} (seed {seed}): cannot write {}: {e}",
                p.display()
            ))
        }),
        _ => {
            let mut so = std::io::stdout().lock();
            writeln!(so, "{text}")
                .map_err(|e| Failure::usage(format!("{op} (seed {seed}): stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable output")
}

struct Loaded {
    gex: ExtendedGraph,
    file: GraphFile,
}

fn load(path: &Path, op: &str, seed: u64) -> Result<Loaded, Failure> {
    let text = fs::read_to_string(path).map_err(|e| {
        Failure::usage(format!(
            "{op} (seed {seed}): cannot read {}: {e}",
            path.display()
        ))
    })?;
    let file = GraphFile::from_json(&text)
        .map_err(|e| Failure::usage(format!("{op} (seed {seed}): {}: {e}", path.display())))?;
    let inst = file
        .to_instance()
        .map_err(|e| Failure::usage(format!("{op} (seed {seed}): {}: {e}", path.display())))?;
    let mu2 = find_non_cutvertex_monitor(&inst.graph, &inst.monitors)
        .ok()
        .and_then(|mu1| preferred_root_monitor(&inst.graph, &inst.monitors, mu1));
    let gex = build_extended_graph(&inst.graph, &inst.monitors, mu2).map_err(|e| {
        use tomo_core::error::GraphError::*;
        let code = match e {
            TooFewMonitors(_) | NoNonCutvertexMonitor => 2,
            _ => 1,
        };
        Failure {
            code,
            message: format!("{op} (seed {seed}): {e}"),
        }
    })?;
    Ok(Loaded { gex, file })
}

fn build(gex: &ExtendedGraph, op: &str, seed: u64) -> Result<Construction, Failure> {
    construct(gex, schedule()).map_err(|e| Failure {
        code: if e == Error::NotIdentifiable { 2 } else { 1 },
        message: format!("{op} (seed {seed}): {e}"),
    })
}

fn identify(a: &GraphArgs, seed: u64) -> CmdResult {
    let op = "identify";
    let Loaded { gex, file } = load(&a.graph, op, seed)?;
    let g = &gex.base;
    let truth = match file.to_instance().ok().and_then(|i| i.metrics) {
        Some(w) => w,
        None => random_metrics(g, seed),
    };
    if let Some(l) = truth.missing(g) {
        return Err(Failure::usage(format!(
            "{op} (seed {seed}): no metric for link {}",
            g.link_key(l)
        )));
    }
    let con = build(&gex, op, seed)?;
    let fail = |e: String| Failure::usage(format!("{op} (seed {seed}): {e}"));
    let c = simulate_measurements(&con.paths, &truth).map_err(|e| fail(e.to_string()))?;
    let t0 = Instant::now();
    let w = structured_solve(&con, &c, g, schedule()).map_err(|e| fail(e.to_string()))?;
    let t_structured = t0.elapsed().as_secs_f64() * 1e3;
    let t0 = Instant::now();
    let dense = dense_solve(&con.paths, &c, g);
    let t_dense = t0.elapsed().as_secs_f64() * 1e3;
    if let Err(e) = &dense {
        eprintln!("{op} (seed {seed}): dense solve: {e}");
    }
    let out = json!({
        "recovered": w.to_named(g),
        "max_rel_err": max_relative_error(&truth, &w),
        "paths_used": con.paths.len(),
        "t_structured_ms": t_structured,
        "t_dense_ms": dense.ok().map(|_| t_dense),
    });
    emit(a.out.as_deref(), &to_json(&out), op, seed)
}

#[derive(Serialize)]
struct PathRecord {
    nodes: Vec<String>,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    link: Option<String>,
}

fn parent_maps(
    gex: &ExtendedGraph,
    con: &Construction,
) -> BTreeMap<&'static str, BTreeMap<String, String>> {
    let g = &gex.full;
    Tree::ALL
        .iter()
        .map(|&tree| {
            let map = g
                .nodes()
                .filter_map(|v| {
                    con.trees
                        .parent(tree, v)
                        .map(|p| (g.name(v).to_string(), g.name(p).to_string()))
                })
                .collect();
            (tree.name(), map)
        })
        .collect()
}

fn dot(gex: &ExtendedGraph, con: &Construction) -> String {
    let g = &gex.full;
    let mut s = String::from("digraph trees {\n");
    for v in g.nodes() {
        let shape = if gex.is_virtual(v) {
            "diamond"
        } else if gex.is_monitor(v) {
            "box"
        } else {
            "ellipse"
        };
        s.push_str(&format!("  \"{}\" [shape={shape}];\n", g.name(v)));
    }
    for tree in Tree::ALL {
        for v in g.nodes() {
            if let Some(p) = con.trees.parent(tree, v) {
                s.push_str(&format!(
                    "  \"{}\" -> \"{}\" [color={}];\n",
                    g.name(v),
                    g.name(p),
                    tree.name()
                ));
            }
        }
    }
    s.push_str("}\n");
    s
}

fn paths(a: &GraphArgs, emit_trees: bool, dot_out: Option<&Path>, seed: u64) -> CmdResult {
    let op = "paths";
    let Loaded { gex, .. } = load(&a.graph, op, seed)?;
    let con = build(&gex, op, seed)?;
    let g = &gex.full;
    let records: Vec<PathRecord> = con
        .paths
        .iter()
        .map(|p| PathRecord {
            nodes: p.nodes.iter().map(|&v| g.name(v).to_string()).collect(),
            kind: match p.kind {
                PathKind::Tree => "tree",
                PathKind::NonTree(_) => "nontree",
            },
            link: match p.kind {
                PathKind::Tree => None,
                PathKind::NonTree(l) => Some(gex.base.link_key(l)),
            },
        })
        .collect();
    if let Some(p) = dot_out {
        fs::write(p, dot(&gex, &con)).map_err(|e| {
            Failure::usage(format!(
                "{op} (seed {seed}): cannot write {}: {e}",
                p.display()
            ))
        })?;
    }
    let text = if emit_trees {
        to_json(&json!({ "paths": records, "trees": parent_maps(&gex, &con) }))
    } else {
        to_json(&records)
    };
    emit(a.out.as_deref(), &text, op, seed)
}

fn verify(a: &GraphArgs, seed: u64) -> CmdResult {
    let op = "verify";
    let Loaded { gex, .. } = load(&a.graph, op, seed)?;
    let con = build(&gex, op, seed)?;
    let g = &gex.full;
    let d = &con.decomposition;
    let f: BTreeMap<String, usize> = g
        .nodes()
        .map(|v| (g.name(v).to_string(), con.numbering.get(v)))
        .collect();
    let mut violations: Vec<Value> = Vec::new();
    violations.extend(validate_ears(&gex, d).iter().map(|v| json!({ "ears": v })));
    violations.extend(
        validate_st(&gex, &con.numbering)
            .iter()
            .map(|v| json!({ "st": v })),
    );
    violations.extend(
        validate_tree_rules(&gex, d, &con.numbering, &con.trees)
            .iter()
            .map(|v| json!({ "tree_rule": v })),
    );
    violations.extend(
        verify_independence(&con.trees)
            .iter()
            .map(|v| json!({ "independence": v })),
    );
    let report = run_harness(&con, &gex.base);
    let (harness, mut failures) = match report {
        Ok(h) => {
            let failures = h.failures.clone();
            (
                serde_json::to_value(&h).expect("serializable report"),
                failures,
            )
        }
        Err(e) => (Value::Null, vec![e.to_string()]),
    };
    failures.extend(violations.iter().map(Value::to_string));
    let out = json!({
        "ears": d.named(g),
        "f": f,
        "violations": violations,
        "counting": harness.get("counting").cloned().unwrap_or(Value::Null),
        "harness": harness,
        "passed": failures.is_empty(),
    });
    emit(a.out.as_deref(), &to_json(&out), op, seed)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: 3,
            message: format!("{op} (seed {seed}): {}", failures.join("; ")),
        })
    }
}

fn family(a: &FamilyArgs, op: &str, seed: u64) -> Result<Family, Failure> {
    Family::parse(&a.family, a.param)
        .map_err(|e| Failure::usage(format!("{op} (seed {seed}): {e}")))
}

fn policy(random: Option<usize>) -> PlacementPolicy {
    match random {
        Some(k) => PlacementPolicy::Random { k },
        None => PlacementPolicy::Greedy,
    }
}

fn eval(a: &EvalArgs, seed: u64) -> CmdResult {
    let op = "eval";
    let fam = family(&a.family, op, seed)?;
    GeneratorSpec {
        family: fam,
        nodes: a.family.nodes,
        seed,
    }
    .validate()
    .map_err(|e| Failure::usage(format!("{op} (seed {seed}): {e}")))?;
    let mut cfg = CampaignConfig::new(
        vec![CampaignSpec {
            family: fam,
            nodes: a.family.nodes,
        }],
        a.instances,
        seed,
    );
    cfg.placement = policy(a.random_monitors);
    cfg.dense = !a.no_dense;
    cfg.harness = !a.no_harness;
    let campaign = run_campaign(&cfg);
    for o in &campaign.outcomes {
        if let Some(e) = &o.error {
            eprintln!("{op}: instance {} (seed {}): {e}", o.instance_index, o.seed);
        }
        if let Some(h) = o.harness.as_ref().filter(|h| !h.passed()) {
            eprintln!(
                "{op}: instance {} (seed {}): harness warnings: {}",
                o.instance_index,
                o.seed,
                h.failures.join("; ")
            );
        }
    }
    if let Some(p) = &a.outcomes {
        fs::write(p, campaign.outcomes_json()).map_err(|e| {
            Failure::usage(format!(
                "{op} (seed {seed}): cannot write {}: {e}",
                p.display()
            ))
        })?;
    }
    let csv = campaign.to_csv();
    emit(Some(Path::new(&a.out)), csv.trim_end(), op, seed)
}

fn gen(a: &GenArgs, seed: u64) -> CmdResult {
    let op = "gen";
    let spec = GeneratorSpec {
        family: family(&a.family, op, seed)?,
        nodes: a.family.nodes,
        seed,
    };
    let g = generate(&spec).map_err(|e| Failure::usage(format!("{op} (seed {seed}): {e}")))?;
    let placement = place_monitors(&g, policy(a.random_monitors), seed);
    if !placement.gate {
        eprintln!("{op} (seed {seed}): monitor placement does not pass the identifiability gate");
    }
    let w = random_metrics(&g, seed);
    let file = GraphFile::from_parts(&g, &placement.monitors, Some(&w));
    emit(a.out.as_deref(), &file.to_json(), op, seed)
}
