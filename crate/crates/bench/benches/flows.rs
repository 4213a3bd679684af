use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hermitize_core::flow::TimeGrid;
use hermitize_core::metric::evolve_metric;
use hermitize_core::models::{constant_operator, two_level_loss, two_mode_bosonic, TwoLevelLossParams, TwoModeBosonicParams};
use hermitize_core::operator::matrix_exponential;
use hermitize_core::oracles::{vielbein_closed_form, OracleParams};
use hermitize_core::vielbein::coevolve_vielbein;
use hermitize_core::{OperatorMatrix, C64};

fn metric_flow(c: &mut Criterion) {
    let grid = TimeGrid::new(0.0, 5.0, 5000).unwrap();
    let mut group = c.benchmark_group("metric_flow");
    let two_level = two_level_loss(TwoLevelLossParams::new(1.0, 1.0).unwrap()).unwrap();
    group.bench_function("two_level", |b| {
        b.iter(|| evolve_metric(&two_level, OperatorMatrix::identity(2), &grid).unwrap())
    });
    for n_max in [2, 4] {
        let model = two_mode_bosonic(TwoModeBosonicParams::new(0.3, 0.1, 0.5, n_max).unwrap()).unwrap();
        let dim = model.dim();
        group.bench_with_input(BenchmarkId::new("bosonic", dim), &model, |b, m| {
            b.iter(|| evolve_metric(m, OperatorMatrix::identity(dim), &grid).unwrap())
        });
    }
    group.finish();
}

fn expm(c: &mut Criterion) {
    let mut group = c.benchmark_group("expm");
    for dim in [2, 6, 15] {
        let a = OperatorMatrix::from_fn(dim, |i, j| C64::new((i as f64 - j as f64) * 0.3, ((i * j) % 5) as f64 * 0.2));
        group.bench_with_input(BenchmarkId::from_parameter(dim), &a, |b, a| b.iter(|| matrix_exponential(a).unwrap()));
    }
    group.finish();
}

fn coevolve(c: &mut Criterion) {
    let p = OracleParams::new(1.0, 1.0).unwrap();
    let model = two_level_loss(p.loss_params()).unwrap();
    let e0 = vielbein_closed_form(&p, 0.0).unwrap();
    let grid = TimeGrid::new(0.0, 5.0, 5000).unwrap();
    c.bench_function("coevolve/two_level", |b| {
        b.iter(|| coevolve_vielbein(&model, constant_operator(OperatorMatrix::zeros(2)), e0.clone(), &grid).unwrap())
    });
}

criterion_group!(benches, metric_flow, expm, coevolve);
criterion_main!(benches);
