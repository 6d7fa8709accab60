use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use xpcube::inequalities::{chaos_xp, linear_xp};
use xpcube::torus::{difference_stats, Generator, Sampling};
use xpcube::walsh::{walsh_transform, CubeFunction};

fn gaussian_like(n: usize) -> CubeFunction {
    // deterministic, cheap, not mean-zero before centering
    CubeFunction::from_fn(n, |b| ((b as f64 * 0.618_034).fract() - 0.5) * (1.0 + (b % 7) as f64))
        .unwrap()
        .centered()
}

fn transform(c: &mut Criterion) {
    let mut g = c.benchmark_group("walsh_transform");
    for n in [10, 16, 20] {
        let h = gaussian_like(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| {
            b.iter(|| walsh_transform(black_box(h)))
        });
    }
    g.finish();
}

fn chaos(c: &mut Criterion) {
    let mut g = c.benchmark_group("chaos_xp");
    for (n, k) in [(8, 4), (12, 6)] {
        let h = gaussian_like(n);
        g.bench_with_input(BenchmarkId::new("half", n), &h, |b, h| {
            b.iter(|| chaos_xp(black_box(h), 4.0, k, false).unwrap())
        });
    }
    g.finish();
}

fn linear(c: &mut Criterion) {
    let a: Vec<f64> = (0..16).map(|i| 1.0 / (1.0 + i as f64)).collect();
    c.bench_function("linear_xp/16/8", |b| {
        b.iter(|| linear_xp(black_box(&a), 4.0, 8).unwrap())
    });
}

fn torus(c: &mut Criterion) {
    let mut g = c.benchmark_group("difference_stats");
    let f = Generator::RandomTrig { seed: 1, terms: 5 }.build(4, 4).unwrap();
    g.bench_function("exact/r4n4", |b| {
        b.iter(|| difference_stats(black_box(&f), 3.0, 2, Sampling::exact()).unwrap())
    });
    g.bench_function("mc/r4n4/65536", |b| {
        b.iter(|| difference_stats(black_box(&f), 3.0, 2, Sampling::monte_carlo(65_536, 7)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, transform, chaos, linear, torus);
criterion_main!(benches);
