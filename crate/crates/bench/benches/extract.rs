use std::f64::consts::TAU;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use envelope_core::{extract_features, stft::extract_stft_features, Signal};

const FS: f64 = 64_000.0;

fn am_tone(n: usize) -> Signal {
    let x = (0..n)
        .map(|i| {
            let t = i as f64 / FS;
            (1.0 + 0.5 * (TAU * 123.0 * t).cos()) * (TAU * 8000.0 * t).cos()
        })
        .collect();
    Signal::new(x, FS).unwrap()
}

fn extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("extract_features");
    for n in [1600, 3200, 6400, 12800, 25600] {
        let signal = am_tone(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &signal, |b, s| {
            b.iter(|| extract_features(black_box(s)).unwrap())
        });
    }
    group.finish();

    let signal = am_tone(6400);
    c.bench_function("extract_stft_features/6400", |b| {
        b.iter(|| extract_stft_features(black_box(&signal)).unwrap())
    });
}

criterion_group!(benches, extraction);
criterion_main!(benches);
