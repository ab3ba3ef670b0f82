use bellrand_core::binning::{bin_counts, scan_tau};
use bellrand_core::physics::{chsh_value, optimize_parameters, Objective, SourceModel};
use bellrand_core::rates::rate_summary;
use bellrand_core::sim::{simulate, SettingsSchedule, SimulationConfig};
use criterion::{criterion_group, criterion_main, Criterion};

fn analytic(c: &mut Criterion) {
    let m = SourceModel::reference_setup();
    c.bench_function("chsh_value mu=0.322", |b| b.iter(|| chsh_value(&m, 0.322, 0.322 / m.pair_rate).unwrap()));
    c.bench_function("rate_summary n=1e9", |b| {
        b.iter(|| rate_summary(2.016, 8.9e-6, 1_000_000_000, 1.0, 1e-10, 1e-10).unwrap())
    });
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("optimize poisson", |b| {
        b.iter(|| optimize_parameters(&m, Objective::Poisson { mu: 0.322, tau: 0.322 / m.pair_rate }).unwrap())
    });
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let cfg = SimulationConfig {
        model: SourceModel::reference_setup(),
        duration: 10.0,
        jitter_sigma: 170e-9,
        quantization: 2e-9,
        rng_seed: 1,
        schedule: SettingsSchedule::randomized_cycles(10_000_000_000, 10_000_000, 1).unwrap(),
    };
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("simulate 10 s", |b| b.iter(|| simulate(&cfg).unwrap()));
    let stream = simulate(&cfg).unwrap();
    g.bench_function("bin_counts tau=13us", |b| b.iter(|| bin_counts(&stream, &cfg.schedule, 13e-6).unwrap()));
    let taus: Vec<f64> = (1..=40).map(|i| i as f64 * 1e-6).collect();
    g.bench_function("scan_tau 40 widths", |b| b.iter(|| scan_tau(&stream, &cfg.schedule, &taus).unwrap()));
    g.finish();
}

criterion_group!(benches, analytic, simulation);
criterion_main!(benches);
