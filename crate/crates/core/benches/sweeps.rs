//! Parallel vs sequential execution of the per-dimension sweeps.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oplab_core::classification::section_spectra;
use oplab_core::decomposition::DecomposeOptions;
use oplab_core::exec::{single_threaded, Mode};
use oplab_core::kernels::hermitian_eigvals;
use oplab_core::operator::{catalog, render};
use oplab_core::report::convergence_study;

const DIMS: [usize; 3] = [48, 96, 192];

fn spectra(c: &mut Criterion) {
    let op = catalog::hyponormal_example();
    let mut g = c.benchmark_group("section_spectra");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("auto", "48-96-192"), |b| b.iter(|| section_spectra(black_box(&op), &DIMS, Mode::Auto).unwrap()));
    g.bench_function(BenchmarkId::new("sequential", "48-96-192"), |b| {
        b.iter(|| single_threaded(|| section_spectra(black_box(&op), &DIMS, Mode::Sequential).unwrap()))
    });
    g.finish();
}

fn study(c: &mut Criterion) {
    let op = catalog::hyponormal_example();
    let auto = DecomposeOptions::default();
    let seq = DecomposeOptions { exec: Mode::Sequential, ..Default::default() };
    let mut g = c.benchmark_group("convergence_study");
    g.sample_size(10);
    g.bench_function("auto", |b| b.iter(|| convergence_study(black_box(&op), &[64, 96, 128], &auto).unwrap()));
    g.bench_function("sequential", |b| b.iter(|| single_threaded(|| convergence_study(black_box(&op), &[64, 96, 128], &seq).unwrap())));
    g.finish();
}

fn eig(c: &mut Criterion) {
    let mut g = c.benchmark_group("hermitian_eigvals");
    g.sample_size(10);
    for n in [64, 128, 256] {
        let t = render(&catalog::hyponormal_example(), n).unwrap();
        let h = (&t.adjoint() * &t).hermitian_part();
        g.bench_with_input(BenchmarkId::new("auto", n), &h, |b, h| b.iter(|| hermitian_eigvals(black_box(h)).unwrap()));
        g.bench_with_input(BenchmarkId::new("sequential", n), &h, |b, h| {
            b.iter(|| single_threaded(|| hermitian_eigvals(black_box(h)).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, spectra, study, eig);
criterion_main!(benches);
