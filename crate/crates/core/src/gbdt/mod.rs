//! Multiclass second-order gradient tree boosting.
//!
//! Each round computes softmax probabilities from the accumulated logits,
//! then fits one exact-greedy regression tree per class to the
//! cross-entropy gradients and hessians. The class-`k` logit of a sample is
//! `base_score + learning_rate * Σ_t tree[t][k](x)`.

mod loss;
mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use loss::{grad_hess, log_loss, softmax};
pub use tree::{build_tree, leaf_weight, midpoint, split_gain, TreeBuilder, TreeNode};

use crate::data::{
    ensure_aligned, write_text, FeatureMatrix, LabelVector, PredictionMatrix, PredictorId,
    TaskSpec,
};
use crate::error::{Error, Result};
use crate::par;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub gain_gamma: f64,
    pub min_hessian_sum: f64,
    /// Reserved; exact greedy growth draws no random numbers.
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            rounds: 50,
            max_depth: 3,
            learning_rate: 0.1,
            l2_lambda: 1.0,
            gain_gamma: 0.0,
            min_hessian_sum: 1e-3,
            seed: 0,
        }
    }
}

impl GbdtParams {
    /// Many shallow-shrunk rounds of deeper trees.
    pub fn deep_slow() -> Self {
        GbdtParams {
            rounds: 100,
            max_depth: 4,
            learning_rate: 0.05,
            ..GbdtParams::default()
        }
    }

    /// Fewer, more aggressive rounds of depth-2 trees.
    pub fn shallow_fast() -> Self {
        GbdtParams {
            rounds: 60,
            max_depth: 2,
            learning_rate: 0.2,
            ..GbdtParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!(
                "learning_rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        for (name, v) in [
            ("l2_lambda", self.l2_lambda),
            ("gain_gamma", self.gain_gamma),
            ("min_hessian_sum", self.min_hessian_sum),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} = {v} must be finite and ≥ 0")));
            }
        }
        Ok(())
    }
}

/// A fitted boosted tree ensemble over concatenated predictor outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedClassifier {
    pub format_version: u32,
    pub task: TaskSpec,
    pub group: Vec<PredictorId>,
    pub n_features: usize,
    pub params: GbdtParams,
    pub base_score: f64,
    /// `rounds × class_count` tree roots.
    pub trees: Vec<Vec<TreeNode>>,
}

impl BoostedClassifier {
    pub fn class_count(&self) -> usize {
        self.task.class_count
    }

    fn add_logits(&self, row: &[f64], logits: &mut [f64]) {
        for round in &self.trees {
            for (z, tree) in logits.iter_mut().zip(round) {
                *z += self.params.learning_rate * tree.predict(row);
            }
        }
    }

    pub fn predictor_id(&self) -> PredictorId {
        let names: Vec<&str> = self.group.iter().map(PredictorId::as_str).collect();
        PredictorId::new(format!("boost({})", names.join("+")))
    }

    fn check(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model format_version {}",
                self.format_version
            )));
        }
        self.task.validate()?;
        self.params.validate()?;
        if self.trees.len() != self.params.rounds {
            return Err(Error::Validation(format!(
                "{} rounds of trees, params say {}",
                self.trees.len(),
                self.params.rounds
            )));
        }
        for round in &self.trees {
            if round.len() != self.class_count() {
                return Err(Error::Validation(format!(
                    "round holds {} trees for {} classes",
                    round.len(),
                    self.class_count()
                )));
            }
            for tree in round {
                if tree.max_feature().is_some_and(|f| f >= self.n_features) {
                    return Err(Error::Validation("tree splits on a feature out of range".into()));
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON: object keys sorted, floats in shortest round-trip form.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let mut s = serde_json::to_string_pretty(&value)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: BoostedClassifier = serde_json::from_str(text)?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub fn fit(
    features: &FeatureMatrix,
    labels: &LabelVector,
    params: &GbdtParams,
) -> Result<BoostedClassifier> {
    fit_traced(features, labels, params).map(|(model, _)| model)
}

/// Fits a model and also returns the training log-loss after each round.
pub fn fit_traced(
    features: &FeatureMatrix,
    labels: &LabelVector,
    params: &GbdtParams,
) -> Result<(BoostedClassifier, Vec<f64>)> {
    params.validate()?;
    let task = labels.task().clone();
    task.validate()?;
    ensure_aligned(features.sample_ids(), labels.sample_ids(), "features vs labels")?;
    let c = task.class_count;
    let n = features.n_samples();
    let y = labels.labels();
    let base_score = 0.0;

    let builder = TreeBuilder::new(features, params)?;
    let mut logits = vec![base_score; n * c];
    let mut probs = vec![0.0; n * c];
    let mut trees = Vec::with_capacity(params.rounds);
    let mut trace = Vec::with_capacity(params.rounds);

    for _ in 0..params.rounds {
        probs.copy_from_slice(&logits);
        par::for_each_chunk_mut(&mut probs, c, |_, row| loss::softmax_in_place(row));

        let round = par::map_range(c, |k| {
            let (g, h): (Vec<f64>, Vec<f64>) = (0..n)
                .map(|i| {
                    let p = probs[i * c + k];
                    let target = if y[i] == k { 1.0 } else { 0.0 };
                    (p - target, p * (1.0 - p))
                })
                .unzip();
            builder.build(&g, &h)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        par::for_each_chunk_mut(&mut logits, c, |i, row| {
            let x = features.row(i);
            for (z, tree) in row.iter_mut().zip(&round) {
                *z += params.learning_rate * tree.predict(x);
            }
        });
        trees.push(round);

        probs.copy_from_slice(&logits);
        par::for_each_chunk_mut(&mut probs, c, |_, row| loss::softmax_in_place(row));
        trace.push(log_loss(&probs, y, c));
    }

    let group = distinct_origins(features);
    Ok((
        BoostedClassifier {
            format_version: MODEL_FORMAT_VERSION,
            task,
            group,
            n_features: features.n_features(),
            params: params.clone(),
            base_score,
            trees,
        },
        trace,
    ))
}

fn distinct_origins(features: &FeatureMatrix) -> Vec<PredictorId> {
    let mut group: Vec<PredictorId> = Vec::new();
    for (p, _) in features.column_origin() {
        if group.last() != Some(p) {
            group.push(p.clone());
        }
    }
    group
}

pub fn predict_proba(model: &BoostedClassifier, features: &FeatureMatrix) -> Result<PredictionMatrix> {
    if features.n_features() != model.n_features {
        return Err(Error::Shape(format!(
            "model expects {} features, got {}",
            model.n_features,
            features.n_features()
        )));
    }
    let c = model.class_count();
    let mut probs = vec![model.base_score; features.n_samples() * c];
    par::for_each_chunk_mut(&mut probs, c, |i, row| {
        model.add_logits(features.row(i), row);
        loss::softmax_in_place(row);
    });
    PredictionMatrix::new(
        model.predictor_id(),
        model.task.clone(),
        features.sample_ids().to_vec(),
        probs,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::argmax_labels;

    fn separable() -> (FeatureMatrix, LabelVector) {
        let ids: Vec<String> = (0..20).map(|i| format!("s{i:02}")).collect();
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let labels = (0..20).map(|i| usize::from(i >= 10)).collect();
        (
            FeatureMatrix::from_rows(ids.clone(), &rows).unwrap(),
            LabelVector::new(TaskSpec::new("toy", 2).unwrap(), ids, labels).unwrap(),
        )
    }

    #[test]
    fn zero_rounds_is_uniform() {
        let (x, y) = separable();
        let model = fit(&x, &y, &GbdtParams { rounds: 0, ..GbdtParams::default() }).unwrap();
        let p = predict_proba(&model, &x).unwrap();
        assert!(p.probs().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn separable_fixture_fits_perfectly() {
        let (x, y) = separable();
        let params = GbdtParams {
            rounds: 20,
            max_depth: 2,
            learning_rate: 0.3,
            ..GbdtParams::default()
        };
        let (model, trace) = fit_traced(&x, &y, &params).unwrap();
        let pred = argmax_labels(&predict_proba(&model, &x).unwrap());
        assert_eq!(pred.labels(), y.labels());
        assert!(trace[0] < 2f64.ln());
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn single_leaf_model() {
        let (x, _) = separable();
        let w = 0.8;
        let model = BoostedClassifier {
            format_version: 1,
            task: TaskSpec::new("toy", 2).unwrap(),
            group: vec![],
            n_features: 1,
            params: GbdtParams { rounds: 1, learning_rate: 1.0, ..GbdtParams::default() },
            base_score: 0.0,
            trees: vec![vec![TreeNode::Leaf { weight: w }, TreeNode::Leaf { weight: 0.0 }]],
        };
        let p = predict_proba(&model, &x).unwrap();
        let expected = softmax(&[w, 0.0]);
        assert!(p.rows().all(|r| r == expected.as_slice()));
    }

    #[test]
    fn shape_mismatch() {
        let (x, y) = separable();
        let model = fit(&x, &y, &GbdtParams { rounds: 1, ..GbdtParams::default() }).unwrap();
        let wide = FeatureMatrix::from_rows(vec!["a".into()], &[vec![0.0, 1.0]]).unwrap();
        assert!(matches!(predict_proba(&model, &wide), Err(Error::Shape(_))));
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let (x, y) = separable();
        let model = fit(&x, &y, &GbdtParams { rounds: 3, ..GbdtParams::default() }).unwrap();
        let text = model.to_json().unwrap();
        let back = BoostedClassifier::from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json().unwrap(), text);
        assert!(text.contains("\"kind\": \"internal\""));
        assert!(text.contains("\"format_version\": 1"));
    }

    #[test]
    fn rejects_inconsistent_model_files() {
        let (x, y) = separable();
        let mut model = fit(&x, &y, &GbdtParams { rounds: 2, ..GbdtParams::default() }).unwrap();
        model.trees.pop();
        assert!(BoostedClassifier::from_json(&serde_json::to_string(&model).unwrap()).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(GbdtParams { learning_rate: 0.0, ..GbdtParams::default() }.validate().is_err());
        assert!(GbdtParams { max_depth: 0, ..GbdtParams::default() }.validate().is_err());
        assert!(GbdtParams { l2_lambda: -1.0, ..GbdtParams::default() }.validate().is_err());
        assert!(GbdtParams::deep_slow().validate().is_ok());
    }
}
