use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hess_core::cycle::{synthesize_test_cycle, VehicleParams};
use hess_core::fis::{FisBatch, FisSpec, MfGenome, decode_genome};
use hess_core::sim::{simulate_population, HessDesign, SimParams};
use hess_core::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_genomes(n: usize, seed: u64) -> Vec<MfGenome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| MfGenome::new((0..28).map(|_| rng.gen()).collect()).unwrap())
        .collect()
}

fn fis_batch(c: &mut Criterion) {
    let template = FisSpec::hess_template();
    let mut group = c.benchmark_group("fis_evaluate");
    for pages in [16usize, 128, 1024] {
        let specs: Vec<FisSpec> = random_genomes(pages, 1)
            .iter()
            .map(|g| decode_genome(g, &template).unwrap())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..pages)
            .flat_map(|_| [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen_range(-1.0..1.0)])
            .collect();
        for exec in [Exec::Sequential, Exec::Parallel] {
            let batch = FisBatch::from_specs(&specs).unwrap().with_exec(exec);
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), pages), &x, |b, x| {
                b.iter(|| batch.evaluate(x).unwrap())
            });
        }
    }
    group.finish();
}

fn population(c: &mut Criterion) {
    let cycle = synthesize_test_cycle(300.0, 55.0, 7, 1.0, &VehicleParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let designs: Vec<HessDesign> = random_genomes(40, 4)
        .into_iter()
        .map(|g| HessDesign::new(rng.gen_range(1..=120), g).unwrap())
        .collect();
    let mut group = c.benchmark_group("simulate_population");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let params = SimParams {
            exec,
            ..SimParams::default()
        };
        group.bench_function(format!("{exec:?}/40"), |b| {
            b.iter(|| simulate_population(&designs, &cycle, &params).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, fis_batch, population);
criterion_main!(benches);
