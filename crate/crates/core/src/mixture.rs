//! Two-layer mixture ensemble.
//!
//! Layer one produces one bagged predictor over `bag_members` and one
//! boosted predictor per group (trained on the group's concatenated
//! probabilities). Layer two bags those `K + 1` outputs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bagging::{bag_predict, tune_weights, VotingWeights, WeightMode};
use crate::data::{
    argmax_labels, concat_features, find_matrix, write_text, LabelVector, PredictionMatrix,
    PredictorId, TaskData, TaskSpec,
};
use crate::error::{Error, Result};
use crate::eval::{basic_precision, top1_accuracy};
use crate::gbdt::{self, BoostedClassifier, GbdtParams};
use crate::par;

/// Synthetic id of the bagged first-layer predictor.
pub const BAG_ID: &str = "bag";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    pub members: Vec<PredictorId>,
    #[serde(default)]
    pub booster_params: GbdtParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureConfig {
    pub bag_members: Vec<PredictorId>,
    #[serde(default)]
    pub bag_weight_mode: WeightMode,
    #[serde(default)]
    pub groups: Vec<GroupSpec>,
    #[serde(default)]
    pub second_layer_mode: WeightMode,
}

fn ids(names: &[&str]) -> Vec<PredictorId> {
    names.iter().map(|&s| PredictorId::new(s)).collect()
}

fn ranked(from: usize, to: usize) -> Vec<PredictorId> {
    (from..=to).map(|i| PredictorId::new(format!("M{i}"))).collect()
}

impl MixtureConfig {
    /// Bag of M1–M7 plus boosted groups M1–M6, M1–M5 and M8–M12.
    pub fn default_layout() -> Self {
        MixtureConfig {
            bag_members: ranked(1, 7),
            bag_weight_mode: WeightMode::Equal,
            groups: vec![
                GroupSpec {
                    name: "boost_m1_m6".into(),
                    members: ranked(1, 6),
                    booster_params: GbdtParams::deep_slow(),
                },
                GroupSpec {
                    name: "boost_m1_m5".into(),
                    members: ranked(1, 5),
                    booster_params: GbdtParams::shallow_fast(),
                },
                GroupSpec {
                    name: "boost_m8_m12".into(),
                    members: ranked(8, 12),
                    booster_params: GbdtParams::deep_slow(),
                },
            ],
            second_layer_mode: WeightMode::Equal,
        }
    }

    /// Bagging only (no boosted groups).
    pub fn bag_only(members: &[&str]) -> Self {
        MixtureConfig {
            bag_members: ids(members),
            bag_weight_mode: WeightMode::Equal,
            groups: vec![],
            second_layer_mode: WeightMode::Equal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bag_members.is_empty() {
            return Err(Error::Config("bag_members must be nonempty".into()));
        }
        if has_duplicates(&self.bag_members) {
            return Err(Error::Config("duplicate predictor in bag_members".into()));
        }
        for (i, g) in self.groups.iter().enumerate() {
            if g.name.is_empty() || g.name == BAG_ID {
                return Err(Error::Config(format!("invalid group name {:?}", g.name)));
            }
            if self.groups[..i].iter().any(|o| o.name == g.name) {
                return Err(Error::Config(format!("duplicate group name {}", g.name)));
            }
            if g.members.is_empty() || has_duplicates(&g.members) {
                return Err(Error::Config(format!(
                    "group {} must list distinct members",
                    g.name
                )));
            }
            g.booster_params.validate()?;
        }
        Ok(())
    }

    /// Every predictor the config reads.
    pub fn referenced_predictors(&self) -> Vec<PredictorId> {
        let mut all = self.bag_members.clone();
        for g in &self.groups {
            for m in &g.members {
                if !all.contains(m) {
                    all.push(m.clone());
                }
            }
        }
        all
    }
}

fn has_duplicates(ids: &[PredictorId]) -> bool {
    ids.iter()
        .enumerate()
        .any(|(i, id)| ids[..i].contains(id))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostedGroup {
    pub name: String,
    pub model: BoostedClassifier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    pub task: TaskSpec,
    pub first_layer_bag: VotingWeights,
    pub boosted: Vec<BoostedGroup>,
    pub second_layer: VotingWeights,
}

fn select(matrices: &[PredictionMatrix], ids: &[PredictorId]) -> Result<Vec<PredictionMatrix>> {
    ids.iter()
        .map(|id| find_matrix(matrices, id).cloned())
        .collect()
}

fn boosted_output(group: &BoostedGroup, matrices: &[PredictionMatrix]) -> Result<PredictionMatrix> {
    let features = concat_features(matrices, &group.model.group)?;
    Ok(gbdt::predict_proba(&group.model, &features)?.with_predictor(PredictorId::new(&group.name)))
}

pub fn fit_mixture(
    train_matrices: &[PredictionMatrix],
    train_labels: &LabelVector,
    config: &MixtureConfig,
) -> Result<MixtureModel> {
    config.validate()?;
    for id in config.referenced_predictors() {
        find_matrix(train_matrices, &id)?;
    }
    let task = train_labels.task().clone();

    let bag_inputs = select(train_matrices, &config.bag_members)?;
    let first_layer_bag = tune_weights(&bag_inputs, Some(train_labels), &config.bag_weight_mode)?;

    let boosted = par::try_map_slice(&config.groups, |g| {
        let features = concat_features(train_matrices, &g.members)?;
        let model = gbdt::fit(&features, train_labels, &g.booster_params)?;
        Ok::<_, Error>(BoostedGroup {
            name: g.name.clone(),
            model,
        })
    })?;

    let layer_one = layer_one_with(&first_layer_bag, &boosted, train_matrices)?;
    let second_layer = tune_weights(&layer_one, Some(train_labels), &config.second_layer_mode)?;

    Ok(MixtureModel {
        task,
        first_layer_bag,
        boosted,
        second_layer,
    })
}

fn layer_one_with(
    bag_weights: &VotingWeights,
    boosted: &[BoostedGroup],
    matrices: &[PredictionMatrix],
) -> Result<Vec<PredictionMatrix>> {
    let bag_ids: Vec<PredictorId> = bag_weights.entries().iter().map(|(id, _)| id.clone()).collect();
    let bagged = bag_predict(&select(matrices, &bag_ids)?, bag_weights)?
        .with_predictor(PredictorId::new(BAG_ID));
    let mut out = vec![bagged];
    out.extend(par::try_map_slice(boosted, |g| boosted_output(g, matrices))?);
    Ok(out)
}

/// The `K + 1` first-layer outputs, bag first, then groups in config order.
pub fn layer_one_outputs(model: &MixtureModel, matrices: &[PredictionMatrix]) -> Result<Vec<PredictionMatrix>> {
    layer_one_with(&model.first_layer_bag, &model.boosted, matrices)
}

pub fn predict_mixture(model: &MixtureModel, matrices: &[PredictionMatrix]) -> Result<PredictionMatrix> {
    let layer_one = layer_one_outputs(model, matrices)?;
    Ok(bag_predict(&layer_one, &model.second_layer)?.with_predictor(PredictorId::new("mixture")))
}

/// Basic precision of equal-weight bags of the top `N` predictors, for
/// `N = 1..=n_max`. Each task's matrices must already be in ranking order.
pub fn sweep_bagging(tasks: &[TaskData], n_max: usize) -> Result<Vec<(usize, f64)>> {
    if tasks.is_empty() {
        return Err(Error::Config("no tasks to sweep".into()));
    }
    if n_max == 0 {
        return Err(Error::Config("n_max must be at least 1".into()));
    }
    if let Some(t) = tasks.iter().find(|t| t.matrices.len() < n_max) {
        return Err(Error::Config(format!(
            "task {} has {} predictors, sweep asks for {n_max}",
            t.task.task_id,
            t.matrices.len()
        )));
    }
    (1..=n_max)
        .map(|n| {
            let accs = par::try_map_slice(tasks, |t| {
                let top = &t.matrices[..n];
                let w = tune_weights(top, None, &WeightMode::Equal)?;
                top1_accuracy(&argmax_labels(&bag_predict(top, &w)?), &t.labels)
            })?;
            Ok((n, basic_precision(&accs)?))
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct MixtureFile {
    format_version: u32,
    task: TaskSpec,
    first_layer_bag: VotingWeights,
    groups: Vec<GroupRef>,
    second_layer: VotingWeights,
}

#[derive(Serialize, Deserialize)]
struct GroupRef {
    name: String,
    model_file: String,
}

impl MixtureModel {
    /// Writes `mixture.json` plus one `<group>.model.json` per boosted group.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        let groups = self
            .boosted
            .iter()
            .map(|g| {
                let model_file = format!("{}.model.json", g.name);
                g.model.save(&dir.join(&model_file))?;
                Ok(GroupRef {
                    name: g.name.clone(),
                    model_file,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let file = MixtureFile {
            format_version: 1,
            task: self.task.clone(),
            first_layer_bag: self.first_layer_bag.clone(),
            groups,
            second_layer: self.second_layer.clone(),
        };
        let mut text = serde_json::to_string_pretty(&serde_json::to_value(&file)?)?;
        text.push('\n');
        write_text(&dir.join("mixture.json"), &text)
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let path = dir.join("mixture.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let file: MixtureFile = serde_json::from_str(&text)?;
        let boosted = file
            .groups
            .into_iter()
            .map(|g| {
                Ok(BoostedGroup {
                    model: BoostedClassifier::load(&dir.join(&g.model_file))?,
                    name: g.name,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = MixtureModel {
            task: file.task,
            first_layer_bag: file.first_layer_bag.checked()?,
            boosted,
            second_layer: file.second_layer.checked()?,
        };
        if model.second_layer.len() != model.boosted.len() + 1 {
            return Err(Error::Validation(format!(
                "second layer has {} weights for {} first-layer predictors",
                model.second_layer.len(),
                model.boosted.len() + 1
            )));
        }
        Ok(model)
    }
}
