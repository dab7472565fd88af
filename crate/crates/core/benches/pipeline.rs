use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tomo_core::eval::{
    generate, place_monitors, random_metrics, run_campaign, CampaignConfig, CampaignSpec, Family,
    GeneratorSpec, PlacementPolicy,
};
use tomo_core::extended::{find_non_cutvertex_monitor, preferred_root_monitor};
use tomo_core::par::Schedule;
use tomo_core::solver::{dense_solve, simulate_measurements, structured_solve};
use tomo_core::{build_extended_graph, construct, ExtendedGraph};

const SCHEDULES: [(&str, Schedule); 2] = [
    ("sequential", Schedule::Sequential),
    ("parallel", Schedule::Parallel),
];

fn er150(seed: u64) -> ExtendedGraph {
    let g = generate(&GeneratorSpec {
        family: Family::Er { p: 0.039 },
        nodes: 150,
        seed,
    })
    .unwrap();
    let placement = place_monitors(&g, PlacementPolicy::Greedy, seed);
    let mu2 = find_non_cutvertex_monitor(&g, &placement.monitors)
        .ok()
        .and_then(|mu1| preferred_root_monitor(&g, &placement.monitors, mu1));
    build_extended_graph(&g, &placement.monitors, mu2).unwrap()
}

fn bench_construct(c: &mut Criterion) {
    let gex = er150(7);
    let mut group = c.benchmark_group("construct_er150");
    for (name, schedule) in SCHEDULES {
        group.bench_function(name, |b| b.iter(|| construct(&gex, schedule).unwrap()));
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let gex = er150(7);
    let con = construct(&gex, Schedule::Sequential).unwrap();
    let truth = random_metrics(&gex.base, 7);
    let m = simulate_measurements(&con.paths, &truth).unwrap();
    let mut group = c.benchmark_group("solve_er150");
    for (name, schedule) in SCHEDULES {
        group.bench_function(BenchmarkId::new("structured", name), |b| {
            b.iter(|| structured_solve(&con, &m, &gex.base, schedule).unwrap())
        });
    }
    group.bench_function("dense", |b| {
        b.iter(|| dense_solve(&con.paths, &m, &gex.base).unwrap())
    });
    group.finish();
}

fn bench_campaign(c: &mut Criterion) {
    let specs = vec![
        CampaignSpec {
            family: Family::Er { p: 0.1 },
            nodes: 60,
        },
        CampaignSpec {
            family: Family::Ba { rho: 3 },
            nodes: 60,
        },
    ];
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    for (name, schedule) in SCHEDULES {
        let mut cfg = CampaignConfig::new(specs.clone(), 8, 3);
        cfg.timing_repeats = 1;
        cfg.schedule = schedule;
        group.bench_function(name, |b| b.iter(|| run_campaign(&cfg)));
    }
    group.finish();
}

criterion_group!(benches, bench_construct, bench_solve, bench_campaign);
criterion_main!(benches);
