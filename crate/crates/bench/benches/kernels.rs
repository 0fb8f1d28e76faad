use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use poem_bench::random_library;
use poem_core::fingerprint::SchemeSet;
use poem_core::model::{dominance_summary, predict_fingerprints, predict_masked, DominanceConfig};
use poem_core::{parse_smiles, tanimoto_distance, DistanceProfile, PoemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bench_dominance(c: &mut Criterion) {
    let mut group = c.benchmark_group("dominance_summary");
    for &m in &[500usize, 2000] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data: Vec<f64> = (0..m * 6)
            .map(|_| (rng.random_range(0..64) as f64) / 64.0)
            .collect();
        let profile = DistanceProfile::from_scheme_major(m, 6, data).unwrap();
        let cfg = DominanceConfig::default();
        group.bench_with_input(BenchmarkId::from_parameter(m), &profile, |b, p| {
            b.iter(|| dominance_summary(p, &cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_predict(c: &mut Criterion) {
    let lib = random_library(5000, 6, 2048, 7);
    let target = lib.row_fingerprints(0);
    let cfg = PoemConfig::default();
    let mut group = c.benchmark_group("predict");
    group.sample_size(10);
    group.bench_function("m5000_n6", |b| {
        b.iter(|| predict_fingerprints(&target, &lib, &cfg).unwrap())
    });
    let small = random_library(1000, 6, 2048, 8);
    group.bench_function("masked_m1000", |b| {
        b.iter(|| predict_masked(&small, 3, &cfg).unwrap())
    });
    group.finish();
}

fn bench_fingerprints(c: &mut Criterion) {
    let mol = parse_smiles("CC(=O)Nc1ccc(O)cc1OC(=O)c1ccccc1Cl").unwrap();
    let schemes = SchemeSet::native_default();
    c.bench_function("native_fingerprints", |b| {
        b.iter(|| {
            schemes
                .iter()
                .map(|s| s.compute(&mol).unwrap())
                .collect::<Vec<_>>()
        })
    });
    let fps: Vec<_> = schemes.iter().map(|s| s.compute(&mol).unwrap()).collect();
    c.bench_function("tanimoto_2048", |b| {
        b.iter(|| tanimoto_distance(&fps[0], &fps[0]).unwrap())
    });
    c.bench_function("parse_smiles", |b| {
        b.iter(|| parse_smiles("CC(=O)Nc1ccc(O)cc1OC(=O)c1ccccc1Cl").unwrap())
    });
}

criterion_group!(benches, bench_dominance, bench_predict, bench_fingerprints);
criterion_main!(benches);
