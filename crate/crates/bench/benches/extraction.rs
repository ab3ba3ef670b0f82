use bellrand_core::extractor::{interval_sample, trevisan_extract, BitString, ExtractorSpec, RngBitSource};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn extract(c: &mut Criterion) {
    let mut g = c.benchmark_group("trevisan");
    g.sample_size(10);
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for (n, m) in [(100_000u64, 1_000u64), (1_000_000, 1_000), (1_000_000, 10_000)] {
        let spec = ExtractorSpec::new(n, m, 1e-12).unwrap();
        let source = BitString::random(2 * n as usize, &mut rng);
        let seed = BitString::random(spec.d() as usize, &mut rng);
        g.throughput(Throughput::Elements(m));
        g.bench_with_input(BenchmarkId::new("n_m", format!("{n}_{m}")), &(), |b, _| {
            b.iter(|| trevisan_extract(&source, &seed, &spec).unwrap())
        });
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut src = RngBitSource::new(ChaCha20Rng::seed_from_u64(2));
    c.bench_function("interval_sample gamma=0.05", |b| b.iter(|| interval_sample(0.05, &mut src).unwrap()));
}

criterion_group!(benches, extract, sampling);
criterion_main!(benches);
