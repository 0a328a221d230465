use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ctreg::linalg::{thin_svd, DEFAULT_RANK_TOL};
use ctreg::mlr::{CoupledBackend, MlrObjective};
use ctreg::regularizers::{CoupledFactor, RegularizerKind, RegularizerSpec};
use ctreg_bench::{filled, synthetic};

fn svd(c: &mut Criterion) {
    let mut g = c.benchmark_group("thin_svd");
    for n in [50, 200] {
        let a = filled(n, n + 4, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| thin_svd(a, DEFAULT_RANK_TOL).unwrap()));
    }
    g.finish();
}

fn coupled_regularizer(c: &mut Criterion) {
    let data = synthetic(25);
    let w = filled(4, 400, 2).scaled(0.01);
    let factor = CoupledFactor::new(&data.x).unwrap();
    let mut g = c.benchmark_group("coupled_mlr_objective");
    g.sample_size(20);
    for backend in [CoupledBackend::Factored, CoupledBackend::Dense] {
        let spec = RegularizerSpec::new(RegularizerKind::Coupled, 0.1).unwrap();
        let obj = MlrObjective::with_backend(&data.x, &data.y, spec, backend).unwrap();
        g.bench_function(format!("{backend:?}"), |b| b.iter(|| obj.value_and_grad(&w).unwrap()));
    }
    g.bench_function("factor_only", |b| b.iter(|| factor.mlr_value_and_grad(&w).unwrap()));
    g.finish();
}

criterion_group!(benches, svd, coupled_regularizer);
criterion_main!(benches);
