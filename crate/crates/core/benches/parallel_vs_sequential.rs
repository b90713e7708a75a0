//! Same workloads on a one-thread rayon pool and on the default pool.
//! Build with `--no-default-features` to time the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mixnet::bagging::{bag_predict, tune_weights, WeightMode};
use mixnet::data::{concat_features, PredictorId, TaskData};
use mixnet::gbdt::{self, GbdtParams};
use mixnet::mixture::{fit_mixture, MixtureConfig};
use mixnet::synth::{gen_tasks, SynthSpec};

fn fixture() -> TaskData {
    let spec = SynthSpec {
        n_samples: 2000,
        seed: 1,
        ..SynthSpec::default()
    };
    gen_tasks(&spec, 1).unwrap().remove(0)
}

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("1-thread", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("default", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn benches(c: &mut Criterion) {
    let task = fixture();
    let members: Vec<PredictorId> = (1..=6).map(|i| PredictorId::new(format!("M{i}"))).collect();
    let features = concat_features(&task.matrices, &members).unwrap();
    let fit_params = GbdtParams {
        rounds: 10,
        ..GbdtParams::shallow_fast()
    };
    let weights = tune_weights(&task.matrices, None, &WeightMode::Equal).unwrap();
    let layout = MixtureConfig::default_layout();

    let mut group = c.benchmark_group("parallel_vs_sequential");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("gbdt_fit", name), |b| {
            b.iter(|| pool.install(|| gbdt::fit(&features, &task.labels, &fit_params).unwrap()))
        });
        group.bench_function(BenchmarkId::new("bag_predict", name), |b| {
            b.iter(|| pool.install(|| bag_predict(&task.matrices, &weights).unwrap()))
        });
        group.bench_function(BenchmarkId::new("fit_mixture", name), |b| {
            b.iter(|| pool.install(|| fit_mixture(&task.matrices, &task.labels, &layout).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(parallel, benches);
criterion_main!(parallel);
