use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qwlab::bilinear::{bilinear_symbol_product, product_transform_direct, SignPair};
use qwlab::par;
use qwlab::solver::{picard_iterate, to_first_order, CauchyData, Derivative, NonlinearitySpec, SolveConfig};
use qwlab::spaces::{Sign, WindowSpec};
use qwlab::verify::DataFamily;
use qwlab::{forward_transform, Field, SpacetimeGrid, SpatialGrid, C64};

fn thread_counts() -> Vec<usize> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut v = vec![1, all];
    v.dedup();
    v
}

fn bench_fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft3d");
    for n in [32usize, 64] {
        let g = SpatialGrid::new(n, 8.0).unwrap();
        let f = Field::from_config_fn(g, |x| C64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), 0.0));
        for t in thread_counts() {
            group.bench_with_input(BenchmarkId::new(format!("n{n}"), t), &t, |b, &t| {
                par::with_workers(t, || b.iter(|| forward_transform(black_box(&f)).unwrap()))
            });
        }
    }
    group.finish();
}

fn bilinear_inputs(n: usize) -> (qwlab::Spectrum, SpacetimeGrid, WindowSpec) {
    let g = SpatialGrid::new(n, 3.0 * std::f64::consts::PI).unwrap();
    let u0 = DataFamily::gaussian([0.0, 0.0, 1.0], 0.35).spectrum(&g, 1.0).unwrap();
    let st = SpacetimeGrid::new(g, 32, 2.0).unwrap();
    (u0, st, WindowSpec::canonical(1.0).unwrap())
}

fn bench_bilinear(c: &mut Criterion) {
    let sp = SignPair::new(Sign::Plus, Sign::Minus);
    let mut group = c.benchmark_group("bilinear");
    group.sample_size(10);
    let (u0, st, w) = bilinear_inputs(12);
    let all = |_: [f64; 3], _: [f64; 3]| true;
    for t in thread_counts() {
        group.bench_with_input(BenchmarkId::new("direct-convolution", t), &t, |b, &t| {
            par::with_workers(t, || {
                b.iter(|| bilinear_symbol_product(&u0, &u0, sp, &all, &st, &w).unwrap())
            })
        });
    }
    let (u0, st, w) = bilinear_inputs(16);
    for t in thread_counts() {
        group.bench_with_input(BenchmarkId::new("product-transform", t), &t, |b, &t| {
            par::with_workers(t, || {
                b.iter(|| product_transform_direct(&u0, &u0, sp, &st, &w).unwrap())
            })
        });
    }
    group.finish();
}

fn bench_picard(c: &mut Criterion) {
    let g = SpatialGrid::new(16, 8.0).unwrap();
    let u0 = DataFamily::gaussian([0.0, 0.0, 0.0], 0.5).with_amplitude(1e-2);
    let data = CauchyData::from_families(&g, &u0, None, 2.0, 2.5).unwrap();
    let (fp, fm) = to_first_order(&data).unwrap();
    let cfg = SolveConfig::new(g, 32, 0.25, 2.0, 2.5).unwrap().with_budget(1, 1e-300);
    let ns = NonlinearitySpec::new(2, Derivative::T).unwrap();
    let mut group = c.benchmark_group("picard");
    group.sample_size(10);
    for t in thread_counts() {
        group.bench_with_input(BenchmarkId::new("one-step", t), &t, |b, &t| {
            par::with_workers(t, || b.iter(|| picard_iterate(&fp, &fm, &ns, &cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fft, bench_bilinear, bench_picard);
criterion_main!(benches);
