use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use plsense_core::FresnelBasis;

fn forward_inverse(c: &mut Criterion) {
    let mut group = c.benchmark_group("dfnt");
    for n in [64usize, 256, 1024, 4096] {
        let basis = FresnelBasis::new(n).unwrap();
        let x: Vec<f64> = (0..n).map(|k| ((k * 7919) % 97) as f64 / 97.0 - 0.5).collect();
        group.bench_with_input(BenchmarkId::new("forward", n), &x, |b, x| {
            b.iter(|| basis.forward_slice(black_box(x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("inverse", n), &x, |b, x| {
            b.iter(|| basis.inverse_slice(black_box(x)).unwrap())
        });
    }
    group.finish();
}

fn basis_construction(c: &mut Criterion) {
    c.bench_function("basis_new_256", |b| b.iter(|| FresnelBasis::new(black_box(256)).unwrap()));
    let basis = FresnelBasis::new(256).unwrap();
    c.bench_function("dense_matrix_256", |b| b.iter(|| basis.dense_matrix()));
}

criterion_group!(benches, forward_inverse, basis_construction);
criterion_main!(benches);
