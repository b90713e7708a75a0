//! Synthetic base predictors with controllable accuracy and error correlation.
//!
//! For every sample a task draws one shared error pattern: a uniform `u` and
//! a wrong-class offset. Each predictor, per sample, reuses that shared
//! pattern with probability `correlation` and otherwise draws its own. It
//! predicts the true class when `u < accuracy` and the offset wrong class
//! otherwise, so predictors that share the pattern also share their
//! mistakes.
//!
//! A probability row gives weight `peak` to the predicted class,
//! `true_class_affinity` to the true class when the prediction is wrong, and
//! 1 to every other class, then normalizes. The peak varies per sample:
//!
//! ```text
//! peak = b + (sharpness - b) * exp(confidence_spread * (z ± calibration))
//! ```
//!
//! with `b = max(1, true_class_affinity)`, `z` standard normal, and `+` for a
//! correct prediction, so right answers tend to be more confident. With a
//! spread of 0 and an affinity of 1 the row is `s/(s+C-1)` on the predicted
//! class and uniform elsewhere.
//!
//! Random streams: sub-stream 0 of the task seed draws labels, 1 draws the
//! shared pattern, and `100 + i` drives predictor `i` (see
//! [`rng::derive_seed`]). Task `t` of a multi-task suite uses sub-stream `t`
//! of the suite seed.

use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{save_labels, save_predictions, LabelVector, PredictionMatrix, PredictorId, TaskData, TaskSpec};
use crate::error::{Error, Result};
use crate::par;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub task_id: String,
    pub n_samples: usize,
    pub class_count: usize,
    /// Target Top-1 accuracies, best first.
    pub predictor_accuracies: Vec<f64>,
    pub correlation: f64,
    pub sharpness: f64,
    pub confidence_spread: f64,
    pub calibration: f64,
    pub true_class_affinity: f64,
    pub seed: u64,
}

/// `count` accuracies evenly spaced from `hi` down to `lo`.
pub fn accuracy_ladder(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![hi],
        _ => (0..count)
            .map(|i| hi - (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            task_id: "task1".into(),
            n_samples: 5000,
            class_count: 5,
            predictor_accuracies: accuracy_ladder(0.92, 0.86, 15),
            correlation: 0.5,
            sharpness: 6.0,
            confidence_spread: 0.75,
            calibration: 0.5,
            true_class_affinity: 1.5,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn task(&self) -> Result<TaskSpec> {
        TaskSpec::new(self.task_id.clone(), self.class_count)
    }

    pub fn validate(&self) -> Result<()> {
        self.task()?;
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.correlation) {
            return Err(Error::Config(format!("correlation {} outside [0, 1]", self.correlation)));
        }
        if !(self.sharpness > 0.0 && self.sharpness.is_finite()) {
            return Err(Error::Config(format!("sharpness {} must be positive", self.sharpness)));
        }
        if !(self.confidence_spread >= 0.0 && self.confidence_spread.is_finite())
            || !self.calibration.is_finite()
        {
            return Err(Error::Config("confidence_spread must be >= 0 and calibration finite".into()));
        }
        if self.sharpness <= self.true_class_affinity.max(1.0) {
            return Err(Error::Config(format!(
                "sharpness {} must exceed max(1, true_class_affinity)",
                self.sharpness
            )));
        }
        if !(self.true_class_affinity > 0.0 && self.true_class_affinity.is_finite()) {
            return Err(Error::Config(format!(
                "true_class_affinity {} must be positive",
                self.true_class_affinity
            )));
        }
        if self
            .predictor_accuracies
            .windows(2)
            .any(|w| w[0] < w[1])
        {
            return Err(Error::Config("predictor accuracies must be sorted best first".into()));
        }
        for &a in &self.predictor_accuracies {
            check_accuracy(a, self.class_count)?;
        }
        Ok(())
    }
}

fn check_accuracy(a: f64, class_count: usize) -> Result<()> {
    if !(a > 1.0 / class_count as f64 && a <= 1.0) {
        return Err(Error::Config(format!(
            "target accuracy {a} outside (1/{class_count}, 1]"
        )));
    }
    Ok(())
}

/// Per-sample error pattern shared by all predictors of a task.
#[derive(Debug, Clone)]
pub struct SharedPattern {
    pub draw: Vec<f64>,
    /// Wrong class = `(label + offset) mod C`, offset in `1..C`.
    pub wrong_offset: Vec<usize>,
}

impl SharedPattern {
    pub fn generate(n: usize, class_count: usize, seed: u64) -> Self {
        let mut r = rng::seeded(seed);
        let (draw, wrong_offset) = (0..n)
            .map(|_| (r.gen::<f64>(), r.gen_range(1..class_count)))
            .unzip();
        SharedPattern { draw, wrong_offset }
    }
}

/// How one synthetic predictor behaves.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorProfile {
    pub id: PredictorId,
    pub accuracy: f64,
    pub correlation: f64,
    pub sharpness: f64,
    pub confidence_spread: f64,
    pub calibration: f64,
    pub true_class_affinity: f64,
}

fn sample_ids(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len().max(5);
    (0..n).map(|i| format!("s{i:0width$}")).collect()
}

/// Uniform labels over the task's classes.
pub fn gen_labels(spec: &SynthSpec) -> Result<LabelVector> {
    let task = spec.task()?;
    let mut r = rng::seeded(rng::derive_seed(spec.seed, 0));
    let labels = (0..spec.n_samples)
        .map(|_| r.gen_range(0..task.class_count))
        .collect();
    LabelVector::new(task, sample_ids(spec.n_samples), labels)
}

pub fn gen_predictor(
    labels: &LabelVector,
    shared: &SharedPattern,
    profile: &PredictorProfile,
    seed: u64,
) -> Result<PredictionMatrix> {
    let task = labels.task();
    let c = task.class_count;
    check_accuracy(profile.accuracy, c)?;
    let floor = profile.true_class_affinity.max(1.0);
    if profile.sharpness.is_nan() || profile.sharpness <= floor {
        return Err(Error::Config(format!(
            "sharpness {} must exceed max(1, true_class_affinity)",
            profile.sharpness
        )));
    }
    if shared.draw.len() != labels.len() {
        return Err(Error::Shape("shared pattern does not match label count".into()));
    }
    let mut r = rng::seeded(seed);
    let mut probs = Vec::with_capacity(labels.len() * c);
    for (i, &y) in labels.labels().iter().enumerate() {
        // Always consume the same draws so streams line up across correlations.
        let coin: f64 = r.gen();
        let own_draw: f64 = r.gen();
        let own_offset = r.gen_range(1..c);
        let (draw, offset) = if coin < profile.correlation {
            (shared.draw[i], shared.wrong_offset[i])
        } else {
            (own_draw, own_offset)
        };
        let xi: f64 = r.sample(StandardNormal);
        let correct = draw < profile.accuracy;
        let predicted = if correct { y } else { (y + offset) % c };
        let shift = if correct { profile.calibration } else { -profile.calibration };
        let peak = floor + (profile.sharpness - floor) * (profile.confidence_spread * (xi + shift)).exp();

        let weight = |k: usize| {
            if k == predicted {
                peak
            } else if k == y {
                profile.true_class_affinity
            } else {
                1.0
            }
        };
        let total: f64 = (0..c).map(weight).sum();
        probs.extend((0..c).map(|k| weight(k) / total));
    }
    PredictionMatrix::new(
        profile.id.clone(),
        task.clone(),
        labels.sample_ids().to_vec(),
        probs,
    )
}

/// Labels plus one matrix per configured accuracy, named `M1`, `M2`, ...
pub fn gen_suite(spec: &SynthSpec) -> Result<(LabelVector, Vec<PredictionMatrix>)> {
    spec.validate()?;
    let labels = gen_labels(spec)?;
    let shared = SharedPattern::generate(
        spec.n_samples,
        spec.class_count,
        rng::derive_seed(spec.seed, 1),
    );
    let indexed: Vec<(usize, f64)> = spec.predictor_accuracies.iter().copied().enumerate().collect();
    let matrices = par::try_map_slice(&indexed, |&(i, accuracy)| {
        let profile = PredictorProfile {
            id: PredictorId::new(format!("M{}", i + 1)),
            accuracy,
            correlation: spec.correlation,
            sharpness: spec.sharpness,
            confidence_spread: spec.confidence_spread,
            calibration: spec.calibration,
            true_class_affinity: spec.true_class_affinity,
        };
        gen_predictor(&labels, &shared, &profile, rng::derive_seed(spec.seed, 100 + i as u64))
    })?;
    Ok((labels, matrices))
}

/// `task_count` independent tasks named `task1`, `task2`, ...
pub fn gen_tasks(spec: &SynthSpec, task_count: usize) -> Result<Vec<TaskData>> {
    let specs: Vec<SynthSpec> = (0..task_count)
        .map(|t| SynthSpec {
            task_id: format!("task{}", t + 1),
            seed: rng::derive_seed(spec.seed, t as u64),
            ..spec.clone()
        })
        .collect();
    par::try_map_slice(&specs, |s| {
        let (labels, matrices) = gen_suite(s)?;
        Ok(TaskData {
            task: labels.task().clone(),
            labels,
            matrices,
        })
    })
}

/// Writes `<dir>/<task>/<predictor>.csv` and `<dir>/<task>/labels.csv`.
pub fn write_tasks(dir: &Path, tasks: &[TaskData]) -> Result<()> {
    for t in tasks {
        let task_dir = dir.join(&t.task.task_id);
        save_labels(&task_dir.join("labels.csv"), &t.labels)?;
        par::try_map_slice(&t.matrices, |m| {
            save_predictions(&task_dir.join(format!("{}.csv", m.predictor())), m)
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::argmax_labels;
    use crate::eval::top1_accuracy;

    fn small(seed: u64) -> SynthSpec {
        SynthSpec {
            n_samples: 200,
            predictor_accuracies: vec![0.9, 0.8],
            seed,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn ladder() {
        let l = accuracy_ladder(0.92, 0.86, 15);
        assert_eq!(l.len(), 15);
        assert_eq!(l[0], 0.92);
        assert!((l[14] - 0.86).abs() < 1e-15);
    }

    #[test]
    fn labels_are_reproducible() {
        let spec = SynthSpec { n_samples: 4, class_count: 2, ..small(11) };
        assert_eq!(gen_labels(&spec).unwrap(), gen_labels(&spec).unwrap());
        assert!(gen_labels(&SynthSpec { class_count: 1, ..spec }).is_err());
    }

    #[test]
    fn perfect_predictor() {
        let spec = small(3);
        let labels = gen_labels(&spec).unwrap();
        let shared = SharedPattern::generate(200, 5, 1);
        let profile = PredictorProfile {
            id: "P".into(),
            accuracy: 1.0,
            correlation: 0.3,
            sharpness: 6.0,
            confidence_spread: 0.0,
            calibration: 0.0,
            true_class_affinity: 2.0,
        };
        let m = gen_predictor(&labels, &shared, &profile, 9).unwrap();
        assert_eq!(argmax_labels(&m).labels(), labels.labels());
        // Correct rows: 6 / (6 + 4).
        assert!((m.row(0)[labels.labels()[0]] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn full_correlation_copies_labels() {
        let spec = small(4);
        let labels = gen_labels(&spec).unwrap();
        let shared = SharedPattern::generate(200, 5, 2);
        let profile = |id: &str| PredictorProfile {
            id: id.into(),
            accuracy: 0.7,
            correlation: 1.0,
            sharpness: 6.0,
            confidence_spread: 0.75,
            calibration: 0.5,
            true_class_affinity: 1.0,
        };
        let a = gen_predictor(&labels, &shared, &profile("A"), 1).unwrap();
        let b = gen_predictor(&labels, &shared, &profile("B"), 2).unwrap();
        assert_eq!(argmax_labels(&a).labels(), argmax_labels(&b).labels());
        assert!(top1_accuracy(&argmax_labels(&a), &labels).unwrap() < 1.0);
    }

    #[test]
    fn rejects_chance_level_accuracy() {
        let spec = small(5);
        let labels = gen_labels(&spec).unwrap();
        let shared = SharedPattern::generate(200, 5, 2);
        let profile = PredictorProfile {
            id: "P".into(),
            accuracy: 0.2,
            correlation: 0.0,
            sharpness: 6.0,
            confidence_spread: 0.75,
            calibration: 0.5,
            true_class_affinity: 1.0,
        };
        assert!(matches!(gen_predictor(&labels, &shared, &profile, 1), Err(Error::Config(_))));
        assert!(gen_suite(&SynthSpec { predictor_accuracies: vec![0.8, 0.9], ..small(1) }).is_err());
    }

    #[test]
    fn suite_is_deterministic_and_seeded() {
        let (la, ma) = gen_suite(&small(7)).unwrap();
        let (lb, mb) = gen_suite(&small(7)).unwrap();
        assert_eq!(la, lb);
        assert_eq!(ma, mb);
        let (_, mc) = gen_suite(&small(8)).unwrap();
        assert_ne!(ma, mc);
        assert_eq!(ma[1].predictor().as_str(), "M2");
    }

    #[test]
    fn sample_ids_sort_numerically() {
        let ids = sample_ids(100_001);
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
    }
}
