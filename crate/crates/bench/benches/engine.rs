use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use mflab_bench::{catalog, dense_series, series_ring};
use mflab_core::experiments::Family;
use mflab_core::homalg::{minimal_resolution, ModulePresentation};
use mflab_core::{hmf, knoerrer, Context};

fn series(c: &mut Criterion) {
    let mut g = c.benchmark_group("series");
    for (nvars, trunc) in [(2, 12), (3, 10), (4, 8)] {
        let ring = series_ring(nvars, trunc);
        let a = dense_series(&ring, 0);
        let b = dense_series(&ring, 2);
        let id = format!("{nvars}v/t{trunc}");
        g.bench_with_input(BenchmarkId::new("mul", &id), &(), |bench, _| {
            bench.iter(|| black_box(&a).try_mul(black_box(&b)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("invert", &id), &(), |bench, _| {
            bench.iter(|| black_box(&a).invert().unwrap())
        });
    }
    g.finish();
}

fn stable_hom(c: &mut Criterion) {
    let mut g = c.benchmark_group("stable_hom");
    g.sample_size(20);
    for (family, n) in [(Family::AnCurve, 4), (Family::Dn, 6), (Family::E6, 0)] {
        let mfs = catalog(family, n, 12);
        let m = &mfs[mfs.len() - 1];
        let ctx = Context::new(12, 42);
        g.bench_function(format!("{family:?}[{n}]"), |bench| {
            bench.iter(|| hmf::stable_hom_dim(m, m, &ctx).unwrap())
        });
    }
    g.finish();
}

fn iso_search(c: &mut Criterion) {
    let mut g = c.benchmark_group("iso_search");
    g.sample_size(20);
    let mfs = catalog(Family::Dn, 6, 12);
    let ctx = Context::new(12, 42);
    let m = &mfs[mfs.len() - 1];
    g.bench_function("Dn[6] self", |bench| {
        bench.iter(|| hmf::iso_search(m, m, &ctx).unwrap())
    });
    let shifted = m.shift();
    g.bench_function("Dn[6] shift", |bench| {
        bench.iter(|| hmf::iso_search(m, &shifted, &ctx).unwrap())
    });
    g.finish();
}

fn knoerrer_functors(c: &mut Criterion) {
    let mut g = c.benchmark_group("knoerrer");
    g.sample_size(20);
    let mfs = catalog(Family::E7, 0, 12);
    let m = &mfs[0];
    g.bench_function("sharp E7", |bench| bench.iter(|| knoerrer::sharp_mf(m).unwrap()));
    let sharp = knoerrer::sharp_mf(m).unwrap();
    g.bench_function("flat E7", |bench| bench.iter(|| knoerrer::flat_mf(&sharp).unwrap()));
    let ctx = Context::new(12, 42);
    g.bench_function("section E7", |bench| {
        bench.iter(|| knoerrer::find_section(&sharp, &ctx).unwrap())
    });
    g.finish();
}

fn resolution(c: &mut Criterion) {
    let mut g = c.benchmark_group("resolution");
    g.sample_size(10);
    let mfs = catalog(Family::E6, 0, 12);
    let p = ModulePresentation::from_mf(&mfs[0], 12).unwrap();
    let ctx = Context::new(12, 42);
    g.bench_function("E6 four steps", |bench| {
        bench.iter(|| minimal_resolution(&p, 4, &ctx).unwrap())
    });
    g.finish();
}

criterion_group!(benches, series, stable_hom, iso_search, knoerrer_functors, resolution);
criterion_main!(benches);
