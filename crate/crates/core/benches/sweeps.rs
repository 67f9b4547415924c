use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use leonard::classify::classify;
use leonard::exec;
use leonard::families::{generate, sample_params, Family};
use leonard::parray::{enumerate_arrays, Enumerator};
use leonard::scoreboard::{scoreboard_batch, scoreboard_batch_sequential};
use leonard::{Field, ParameterArray};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family_arrays() -> Vec<ParameterArray> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fields = [Field::rational(), Field::prime(11).unwrap()];
    let mut out = Vec::new();
    for fam in Family::ALL {
        for f in &fields {
            for d in [3, 5] {
                if let Some(fp) = sample_params(fam, f, d, &mut rng) {
                    out.push(generate(&fp, f).unwrap());
                }
            }
        }
    }
    out
}

fn enumeration(c: &mut Criterion) {
    let f = Field::prime(5).unwrap();
    let e = Enumerator::new(&f, 3).unwrap();
    let mut g = c.benchmark_group("enumerate GF(5) d=3");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| black_box(e.collect_sequential().unwrap())));
    g.bench_function("parallel", |b| b.iter(|| black_box(e.collect().unwrap())));
    g.finish();
}

fn scoreboards(c: &mut Criterion) {
    let arrays = family_arrays();
    let mut g = c.benchmark_group("scoreboard batch");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| black_box(scoreboard_batch_sequential(&arrays))));
    g.bench_function("parallel", |b| b.iter(|| black_box(scoreboard_batch(&arrays))));
    g.finish();
}

fn classification(c: &mut Criterion) {
    let arrays = enumerate_arrays(&Field::prime(5).unwrap(), 3).unwrap();
    let mut g = c.benchmark_group("classify GF(5) d=3");
    g.sample_size(10);
    g.bench_function("sequential", |b| {
        b.iter(|| black_box(exec::map_sequential(&arrays, |p| classify(p).is_ok())))
    });
    g.bench_function("parallel", |b| b.iter(|| black_box(exec::map(&arrays, |p| classify(p).is_ok()))));
    g.finish();
}

criterion_group!(benches, enumeration, scoreboards, classification);
criterion_main!(benches);
