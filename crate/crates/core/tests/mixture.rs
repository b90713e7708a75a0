mod common;

use std::path::PathBuf;

use common::fnv1a;
use mixnet::data::{argmax_labels, format_decimal, save_predictions, TaskData};
use mixnet::eval::{holdout_split, top1_accuracy, MetricsReport};
use mixnet::mixture::{fit_mixture, layer_one_outputs, predict_mixture, MixtureConfig};
use mixnet::synth::{gen_tasks, SynthSpec};

fn split(t: &TaskData, seed: u64) -> (TaskData, TaskData) {
    let (rest, held) = holdout_split(t.labels.sample_ids(), t.labels.labels(), 0.1, seed, true).unwrap();
    (t.select(&held).unwrap(), t.select(&rest).unwrap())
}

fn small_tasks(seed: u64, count: usize) -> Vec<TaskData> {
    gen_tasks(
        &SynthSpec {
            n_samples: 1000,
            seed,
            ..SynthSpec::default()
        },
        count,
    )
    .unwrap()
}

#[test]
fn removing_a_group_leaves_the_others_untouched() {
    let t = &small_tasks(3, 1)[0];
    let (fit, _) = split(t, 3);
    let full = fit_mixture(&fit.matrices, &fit.labels, &MixtureConfig::default_layout()).unwrap();
    let mut fewer = MixtureConfig::default_layout();
    fewer.groups.remove(1);
    let partial = fit_mixture(&fit.matrices, &fit.labels, &fewer).unwrap();
    assert_eq!(partial.boosted[0], full.boosted[0]);
    assert_eq!(partial.boosted[1], full.boosted[2]);
    assert_eq!(partial.first_layer_bag, full.first_layer_bag);
}

#[test]
fn outputs_are_valid_distributions() {
    for t in &small_tasks(8, 2) {
        let (fit, eval) = split(t, 1);
        let model = fit_mixture(&fit.matrices, &fit.labels, &MixtureConfig::default_layout()).unwrap();
        let out = predict_mixture(&model, &eval.matrices).unwrap();
        assert!(out.rows().all(|r| (r.iter().sum::<f64>() - 1.0).abs() < 1e-6));
        assert!(argmax_labels(&out).labels().iter().all(|&l| l < 5));
        assert_eq!(layer_one_outputs(&model, &eval.matrices).unwrap().len(), 4);
    }
}

#[test]
fn bag_only_mixture_is_its_first_layer() {
    let t = &small_tasks(11, 1)[0];
    let (fit, eval) = split(t, 2);
    let config = MixtureConfig::bag_only(&["M1", "M2"]);
    let model = fit_mixture(&fit.matrices, &fit.labels, &config).unwrap();
    let bag = &layer_one_outputs(&model, &eval.matrices).unwrap()[0];
    let out = predict_mixture(&model, &eval.matrices).unwrap();
    assert_eq!(out.probs(), bag.probs());
}

#[test]
fn mixture_is_deterministic_across_runs() {
    let t = &small_tasks(5, 1)[0];
    let (fit, eval) = split(t, 5);
    let run = || {
        let m = fit_mixture(&fit.matrices, &fit.labels, &MixtureConfig::default_layout()).unwrap();
        predict_mixture(&m, &eval.matrices).unwrap()
    };
    assert_eq!(run().probs(), run().probs());
}

/// Fit/evaluate the standard layout on a fixed synthetic fixture and compare
/// with the pinned values. Run with `MIXNET_BLESS=1` to regenerate.
#[test]
fn golden_mixture() {
    let golden_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/mixture.json");
    let dir = tempfile::tempdir().unwrap();
    let mut accs = Vec::new();
    let mut hashes = serde_json::Map::new();
    for t in small_tasks(42, 2) {
        let (fit, eval) = split(&t, 42);
        let model = fit_mixture(&fit.matrices, &fit.labels, &MixtureConfig::default_layout()).unwrap();
        let out = predict_mixture(&model, &eval.matrices).unwrap();
        let path = dir.path().join(format!("{}.csv", t.task.task_id));
        save_predictions(&path, &out).unwrap();
        let hash = fnv1a(&std::fs::read(&path).unwrap());
        hashes.insert(t.task.task_id.clone(), format!("{hash:016x}").into());
        accs.push((t.task.task_id.clone(), top1_accuracy(&argmax_labels(&out), &eval.labels).unwrap()));
    }
    let report = MetricsReport::from_accuracies(accs).unwrap();
    let got = serde_json::json!({
        "basic_precision": format_decimal(report.basic_precision),
        "prediction_fnv1a": hashes,
    });
    if std::env::var_os("MIXNET_BLESS").is_some() {
        std::fs::create_dir_all(golden_path.parent().unwrap()).unwrap();
        std::fs::write(&golden_path, serde_json::to_string_pretty(&got).unwrap() + "\n").unwrap();
    }
    let want: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&golden_path).unwrap()).unwrap();
    assert_eq!(got, want);
}
