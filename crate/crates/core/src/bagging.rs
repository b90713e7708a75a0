//! Weighted soft voting over prediction matrices.

use serde::{Deserialize, Serialize};

use crate::data::{argmax_labels, ensure_aligned, LabelVector, PredictionMatrix, PredictorId};
use crate::error::{Error, Result};
use crate::eval::top1_accuracy;
use crate::par;

/// Normalized nonnegative weights over an ordered predictor set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotingWeights {
    entries: Vec<(PredictorId, f64)>,
}

impl VotingWeights {
    /// Normalizes `raw` weights to sum to one.
    pub fn from_raw(entries: Vec<(PredictorId, f64)>) -> Result<Self> {
        let total = check_entries(&entries)?;
        Ok(VotingWeights {
            entries: entries.into_iter().map(|(id, w)| (id, w / total)).collect(),
        })
    }

    /// Validates already-normalized weights, e.g. ones read back from a file.
    pub fn checked(self) -> Result<Self> {
        let total = check_entries(&self.entries)?;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("voting weights sum to {total}")));
        }
        Ok(self)
    }

    pub fn entries(&self) -> &[(PredictorId, f64)] {
        &self.entries
    }

    pub fn weight(&self, id: &PredictorId) -> Option<f64> {
        self.entries.iter().find(|(p, _)| p == id).map(|(_, w)| *w)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Checks ids and weights, returning the weight total.
fn check_entries(entries: &[(PredictorId, f64)]) -> Result<f64> {
    if entries.is_empty() {
        return Err(Error::Config("no predictors to weight".into()));
    }
    for (i, (id, w)) in entries.iter().enumerate() {
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::Config(format!("weight {w} for {id} is not a nonnegative number")));
        }
        if entries[..i].iter().any(|(other, _)| other == id) {
            return Err(Error::Config(format!("duplicate predictor {id} in weights")));
        }
    }
    // Sum in id order so the total does not depend on entry order.
    let mut sorted: Vec<&(PredictorId, f64)> = entries.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let total: f64 = sorted.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("all voting weights are zero".into()));
    }
    Ok(total)
}

/// How voting weights are chosen.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Equal,
    /// Each predictor weighted by its Top-1 accuracy on the tuning labels.
    AccuracyProportional,
    Explicit(Vec<f64>),
}

pub fn tune_weights(
    matrices: &[PredictionMatrix],
    labels: Option<&LabelVector>,
    mode: &WeightMode,
) -> Result<VotingWeights> {
    let ids = || matrices.iter().map(|m| m.predictor().clone());
    match mode {
        WeightMode::Equal => {
            let n = matrices.len() as f64;
            VotingWeights::from_raw(ids().map(|id| (id, 1.0 / n)).collect())
        }
        WeightMode::Explicit(ws) => {
            if ws.len() != matrices.len() {
                return Err(Error::Config(format!(
                    "{} explicit weights for {} predictors",
                    ws.len(),
                    matrices.len()
                )));
            }
            VotingWeights::from_raw(ids().zip(ws.iter().copied()).collect())
        }
        WeightMode::AccuracyProportional => {
            let labels = labels.ok_or_else(|| {
                Error::Config("accuracy-proportional weights need labels".into())
            })?;
            let accs = matrices
                .iter()
                .map(|m| {
                    ensure_aligned(
                        m.sample_ids(),
                        labels.sample_ids(),
                        &format!("predictor {} vs labels", m.predictor()),
                    )?;
                    top1_accuracy(&argmax_labels(m), labels)
                })
                .collect::<Result<Vec<_>>>()?;
            if accs.iter().all(|&a| a == 0.0) {
                return Err(Error::Degenerate(
                    "every predictor has zero accuracy; cannot weight by accuracy".into(),
                ));
            }
            VotingWeights::from_raw(ids().zip(accs).collect())
        }
    }
}

/// Weighted average of the probability rows.
///
/// Terms are accumulated in ascending predictor-id order, so the result does
/// not depend on the order in which matrices are passed.
pub fn bag_predict(matrices: &[PredictionMatrix], weights: &VotingWeights) -> Result<PredictionMatrix> {
    if matrices.len() != weights.len() {
        return Err(Error::Config(format!(
            "{} matrices but {} weights",
            matrices.len(),
            weights.len()
        )));
    }
    let mut terms = matrices
        .iter()
        .map(|m| {
            weights
                .weight(m.predictor())
                .map(|w| (m, w))
                .ok_or_else(|| Error::Config(format!("no weight for predictor {}", m.predictor())))
        })
        .collect::<Result<Vec<_>>>()?;
    terms.sort_by(|a, b| a.0.predictor().cmp(b.0.predictor()));
    if terms.windows(2).any(|w| w[0].0.predictor() == w[1].0.predictor()) {
        return Err(Error::Config("duplicate predictor in bag".into()));
    }

    let first = terms[0].0;
    for (m, _) in &terms[1..] {
        if m.task() != first.task() {
            return Err(Error::Alignment(format!(
                "predictor {} is for task {}",
                m.predictor(),
                m.task().task_id
            )));
        }
        ensure_aligned(first.sample_ids(), m.sample_ids(), "bagged predictors")?;
    }

    let c = first.class_count();
    let mut probs = vec![0.0; first.probs().len()];
    par::for_each_chunk_mut(&mut probs, c, |i, row| {
        for (m, w) in &terms {
            for (acc, p) in row.iter_mut().zip(m.row(i)) {
                *acc += w * p;
            }
        }
    });

    let id = format!(
        "bag({})",
        weights
            .entries()
            .iter()
            .map(|(p, _)| p.as_str())
            .collect::<Vec<_>>()
            .join("+")
    );
    PredictionMatrix::new(
        PredictorId::new(id),
        first.task().clone(),
        first.sample_ids().to_vec(),
        probs,
    )
}
