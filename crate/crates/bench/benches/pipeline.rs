use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use fcmstop_bench::{curve, labelings, planar_points, scene_features, scene_set};
use fcmstop_core::{
    calibrate, classify_early_stop, fit_svr, lof_scores, rand_index_contingency, rand_index_pairwise, run_fcm,
    CalibrationSettings, FcmConfig, FcmSolver, SvrHyperparams,
};
use std::hint::black_box;

fn fcm(c: &mut Criterion) {
    let x = scene_features(64, 1);
    let config = FcmConfig::default();
    c.bench_function("fcm_step_64x64", |b| {
        b.iter_batched(
            || FcmSolver::new(&x, &config).unwrap(),
            |mut solver| black_box(solver.step().unwrap()),
            BatchSize::SmallInput,
        )
    });
    let mut group = c.benchmark_group("fcm_run_64x64");
    group.sample_size(10);
    group.bench_function("to_convergence", |b| b.iter(|| run_fcm(black_box(&x), &config).unwrap()));
    group.bench_function("early_stop", |b| b.iter(|| classify_early_stop(black_box(&x), &config, 1e-4).unwrap()));
    group.finish();
}

fn rand(c: &mut Criterion) {
    let (a, b) = labelings(3000);
    c.bench_function("rand_contingency_3000", |bench| bench.iter(|| rand_index_contingency(black_box(&a), &b).unwrap()));
    let (a, b) = labelings(600);
    c.bench_function("rand_pairwise_600", |bench| bench.iter(|| rand_index_pairwise(black_box(&a), &b).unwrap()));
}

fn lof(c: &mut Criterion) {
    let pts = planar_points(1000);
    c.bench_function("lof_1000_k40", |b| b.iter(|| lof_scores(black_box(&pts), 40).unwrap()));
}

fn svr(c: &mut Criterion) {
    let (xs, ys) = curve(300);
    let hp = SvrHyperparams::default();
    let mut group = c.benchmark_group("svr");
    group.sample_size(10);
    group.bench_function("fit_300", |b| b.iter(|| fit_svr(black_box(&xs), &ys, &hp).unwrap()));
    group.finish();
}

fn calibration(c: &mut Criterion) {
    let corpus = scene_set(10, 32, 3);
    let settings = CalibrationSettings::default();
    let mut group = c.benchmark_group("calibrate");
    group.sample_size(10);
    group.bench_function("10_scenes_32x32", |b| b.iter(|| calibrate(black_box(&corpus), &settings).unwrap()));
    group.finish();
}

criterion_group!(benches, fcm, rand, lof, svr, calibration);
criterion_main!(benches);
