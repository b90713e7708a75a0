//! Config-driven batch commands. Each `cmd_*` writes its outputs under the
//! run's output directory and returns a short summary for the terminal.
//!
//! Every task's samples are split once: the held-out fraction is the
//! ensemble-training split (voting weights and boosters are fitted there),
//! and the remainder is the evaluation split that all reported accuracies
//! use.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{
    argmax_labels, concat_features, format_decimal, load_labels, load_predictions,
    read_prediction_class_count, save_predictions, write_text, PredictionMatrix, PredictorId, TaskData,
    TaskSpec,
};
use crate::error::{Error, Result};
use crate::eval::{basic_precision, disagreement, holdout_split, kfold_split, top1_accuracy, MetricsReport};
use crate::gbdt;
use crate::imageprep::{self, pnm, AugmentConfig};
use crate::mixture::{fit_mixture, predict_mixture, sweep_bagging, GroupSpec, MixtureConfig};
use crate::par;
use crate::rng;
use crate::synth::{self, SynthSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorEntry {
    pub id: PredictorId,
    /// File name inside each task directory; defaults to `<id>.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    #[serde(default = "default_holdout")]
    pub holdout_fraction: f64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_true")]
    pub stratified: bool,
    /// Required, either here or via `--seed`.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_holdout() -> f64 {
    0.1
}

fn default_k() -> usize {
    5
}

fn default_true() -> bool {
    true
}

/// A first-layer variant: the bag plus the named boosted groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub name: String,
    #[serde(default)]
    pub groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tasks: Vec<TaskSpec>,
    /// Holds `<task>/labels.csv` and `<task>/<predictor file>`.
    pub data_root: PathBuf,
    pub predictors: Vec<PredictorEntry>,
    pub mixture: MixtureConfig,
    #[serde(default)]
    pub strategies: Vec<Strategy>,
    pub splits: SplitConfig,
    pub output_dir: PathBuf,
}

/// Command-line values that replace config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a config file. Relative `data_root` and `output_dir` are taken
    /// relative to the file's directory; an `--out` override is used as is.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.data_root = base.join(&cfg.data_root);
        cfg.output_dir = match &overrides.out {
            Some(out) => out.clone(),
            None => base.join(&cfg.output_dir),
        };
        if let Some(seed) = overrides.seed {
            cfg.splits.seed = Some(seed);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks internal consistency and that every input file exists.
    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::Config("config lists no tasks".into()));
        }
        let mut seen = BTreeSet::new();
        for t in &self.tasks {
            t.validate()?;
            if !seen.insert(&t.task_id) {
                return Err(Error::Config(format!("duplicate task {}", t.task_id)));
            }
        }
        if self.predictors.is_empty() {
            return Err(Error::Config("config lists no predictors".into()));
        }
        let known: BTreeSet<&PredictorId> = self.predictors.iter().map(|p| &p.id).collect();
        if known.len() != self.predictors.len() {
            return Err(Error::Config("duplicate predictor id in config".into()));
        }
        self.mixture.validate()?;
        for id in self.mixture.referenced_predictors() {
            if !known.contains(&id) {
                return Err(Error::MissingPredictor(format!(
                    "mixture references {id}, which is not among the configured predictors"
                )));
            }
        }
        let mut names = BTreeSet::new();
        for s in &self.strategies {
            if !names.insert(&s.name) || s.name.is_empty() {
                return Err(Error::Config(format!("duplicate or empty strategy name {:?}", s.name)));
            }
            for g in &s.groups {
                self.group(g)?;
            }
        }
        self.seed()?;
        for t in &self.tasks {
            let mut files = vec![self.labels_path(t)];
            files.extend(self.predictors.iter().map(|p| self.predictor_path(t, p)));
            for f in files {
                if !f.is_file() {
                    return Err(Error::io(
                        &f,
                        std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> Result<u64> {
        self.splits
            .seed
            .ok_or_else(|| Error::Config("no seed: set splits.seed or pass --seed".into()))
    }

    pub fn group(&self, name: &str) -> Result<&GroupSpec> {
        self.mixture
            .groups
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| Error::Config(format!("no boosted group named {name}")))
    }

    pub fn labels_path(&self, task: &TaskSpec) -> PathBuf {
        self.data_root.join(&task.task_id).join("labels.csv")
    }

    pub fn predictor_path(&self, task: &TaskSpec, p: &PredictorEntry) -> PathBuf {
        let file = p.file.clone().unwrap_or_else(|| format!("{}.csv", p.id));
        self.data_root.join(&task.task_id).join(file)
    }

    /// Strategies to run, or a single `full` strategy using every group.
    pub fn effective_strategies(&self) -> Vec<Strategy> {
        if !self.strategies.is_empty() {
            return self.strategies.clone();
        }
        vec![Strategy {
            name: "full".into(),
            groups: self.mixture.groups.iter().map(|g| g.name.clone()).collect(),
        }]
    }

    /// The configured mixture restricted to the strategy's groups.
    pub fn strategy_mixture(&self, strategy: &Strategy) -> Result<MixtureConfig> {
        let groups = strategy
            .groups
            .iter()
            .map(|g| self.group(g).cloned())
            .collect::<Result<Vec<_>>>()?;
        Ok(MixtureConfig {
            groups,
            ..self.mixture.clone()
        })
    }
}

/// One task's data divided into the ensemble-training and evaluation splits.
#[derive(Debug, Clone)]
pub struct PreparedTask {
    pub fit: TaskData,
    pub eval: TaskData,
}

/// Loads one task with its matrices in config order.
pub fn load_task(cfg: &RunConfig, task: &TaskSpec) -> Result<TaskData> {
    let labels = load_labels(&cfg.labels_path(task), task)?;
    let matrices = par::try_map_slice(&cfg.predictors, |p| {
        load_predictions(&cfg.predictor_path(task, p), task, &p.id)
    })?;
    Ok(TaskData {
        task: task.clone(),
        labels,
        matrices,
    })
}

pub fn prepare_task(cfg: &RunConfig, data: TaskData) -> Result<PreparedTask> {
    let (rest, held) = holdout_split(
        data.labels.sample_ids(),
        data.labels.labels(),
        cfg.splits.holdout_fraction,
        cfg.seed()?,
        cfg.splits.stratified,
    )?;
    Ok(PreparedTask {
        fit: data.select(&held)?,
        eval: data.select(&rest)?,
    })
}

pub fn prepare_all(cfg: &RunConfig) -> Result<Vec<PreparedTask>> {
    par::try_map_slice(&cfg.tasks, |t| prepare_task(cfg, load_task(cfg, t)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&serde_json::to_value(value)?)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_metrics(dir: &Path, report: &MetricsReport) -> Result<()> {
    write_text(&dir.join("metrics.csv"), &report.to_csv())?;
    write_json(&dir.join("metrics.json"), report)
}

/// Fits `mixture` on each task's ensemble-training split and evaluates it.
///
/// Writes `predictions/<task>.csv`, `models/<task>/`, and the metrics files
/// into `dir`.
pub fn run_mixture(tasks: &[PreparedTask], mixture: &MixtureConfig, dir: &Path) -> Result<MetricsReport> {
    let accs = par::try_map_slice(tasks, |t| {
        let model = fit_mixture(&t.fit.matrices, &t.fit.labels, mixture)?;
        let out = predict_mixture(&model, &t.eval.matrices)?;
        let id = &t.eval.task.task_id;
        save_predictions(&dir.join("predictions").join(format!("{id}.csv")), &out)?;
        model.save_dir(&dir.join("models").join(id))?;
        Ok::<_, Error>((id.clone(), top1_accuracy(&argmax_labels(&out), &t.eval.labels)?))
    })?;
    let report = MetricsReport::from_accuracies(accs)?;
    write_metrics(dir, &report)?;
    Ok(report)
}

/// Which predictors `bag` votes over.
#[derive(Debug, Clone, PartialEq)]
pub enum BagSelection {
    /// The mixture's configured bag members.
    Configured,
    /// The first `N` configured predictors.
    Top(usize),
    Members(Vec<PredictorId>),
}

pub fn cmd_bag(cfg: &RunConfig, selection: &BagSelection, sweep: bool) -> Result<String> {
    let members = match selection {
        BagSelection::Configured => cfg.mixture.bag_members.clone(),
        BagSelection::Top(n) => {
            if *n == 0 || *n > cfg.predictors.len() {
                return Err(Error::Config(format!(
                    "top {n} requested from {} predictors",
                    cfg.predictors.len()
                )));
            }
            cfg.predictors[..*n].iter().map(|p| p.id.clone()).collect()
        }
        BagSelection::Members(ids) => ids.clone(),
    };
    let mixture = MixtureConfig {
        bag_members: members,
        groups: vec![],
        ..cfg.mixture.clone()
    };
    let tasks = prepare_all(cfg)?;
    let dir = cfg.output_dir.join("bag");
    let report = run_mixture(&tasks, &mixture, &dir)?;
    let mut summary = format!(
        "bagging basic precision {} over {} tasks -> {}",
        format_decimal(report.basic_precision),
        tasks.len(),
        dir.display()
    );
    if sweep {
        let eval: Vec<TaskData> = tasks.into_iter().map(|t| t.eval).collect();
        let rows = sweep_bagging(&eval, cfg.predictors.len())?;
        let mut csv = String::from("n,basic_precision\n");
        for (n, bp) in rows {
            let _ = writeln!(csv, "{n},{}", format_decimal(bp));
        }
        write_text(&dir.join("sweep.csv"), &csv)?;
        summary.push_str("; sweep.csv written");
    }
    Ok(summary)
}

pub fn cmd_boost(cfg: &RunConfig, group_name: &str) -> Result<String> {
    let group = cfg.group(group_name)?.clone();
    let tasks = prepare_all(cfg)?;
    let dir = cfg.output_dir.join("boost").join(&group.name);
    let seed = cfg.seed()?;

    let per_task = par::try_map_slice(&tasks, |t| {
        let id = &t.fit.task.task_id;
        let features = concat_features(&t.fit.matrices, &group.members)?;
        let labels = &t.fit.labels;
        let folds = kfold_split(labels.sample_ids(), labels.labels(), cfg.splits.k, seed, cfg.splits.stratified)?;
        let mut fold_acc = Vec::with_capacity(folds.k);
        for f in 0..folds.k {
            let (train, test) = folds.split(f);
            let pick = |rows: &[usize]| -> Vec<String> {
                rows.iter().map(|&i| labels.sample_ids()[i].clone()).collect()
            };
            let model = gbdt::fit(&features.take_rows(&train)?, &labels.select(&pick(&train))?, &group.booster_params)?;
            let pred = gbdt::predict_proba(&model, &features.take_rows(&test)?)?;
            fold_acc.push(top1_accuracy(&argmax_labels(&pred), &labels.select(&pick(&test))?)?);
        }

        let model = gbdt::fit(&features, labels, &group.booster_params)?;
        model.save(&dir.join("models").join(format!("{id}.model.json")))?;
        let eval_features = concat_features(&t.eval.matrices, &group.members)?;
        let out = gbdt::predict_proba(&model, &eval_features)?;
        save_predictions(&dir.join("predictions").join(format!("{id}.csv")), &out)?;
        let acc = top1_accuracy(&argmax_labels(&out), &t.eval.labels)?;
        Ok::<_, Error>((id.clone(), fold_acc, acc))
    })?;

    let mut cv = String::from("task_id,fold,accuracy\n");
    let mut cv_means = Vec::new();
    for (id, folds, _) in &per_task {
        for (f, a) in folds.iter().enumerate() {
            let _ = writeln!(cv, "{id},{f},{}", format_decimal(*a));
        }
        let mean = basic_precision(folds)?;
        cv_means.push(mean);
        let _ = writeln!(cv, "{id},mean,{}", format_decimal(mean));
    }
    write_text(&dir.join("cv.csv"), &cv)?;
    let report = MetricsReport::from_accuracies(per_task.into_iter().map(|(id, _, a)| (id, a)))?;
    write_metrics(&dir, &report)?;
    Ok(format!(
        "{}: cross-validated accuracy {}, held-out basic precision {} -> {}",
        group.name,
        format_decimal(basic_precision(&cv_means)?),
        format_decimal(report.basic_precision),
        dir.display()
    ))
}

pub fn cmd_mix(cfg: &RunConfig) -> Result<String> {
    let tasks = prepare_all(cfg)?;
    let root = cfg.output_dir.join("mix");
    let mut table = String::from("strategy,basic_precision\n");
    let mut summary = String::new();
    for s in cfg.effective_strategies() {
        let report = run_mixture(&tasks, &cfg.strategy_mixture(&s)?, &root.join(&s.name))?;
        let bp = format_decimal(report.basic_precision);
        let _ = writeln!(table, "{},{bp}", s.name);
        let _ = writeln!(summary, "{:<40} {bp}", s.name);
    }
    write_text(&root.join("table.csv"), &table)?;
    let _ = write!(summary, "-> {}", root.display());
    Ok(summary)
}

/// Without `pred_dir`, scores every base predictor on the evaluation split.
/// With it, scores `<pred_dir>/<task>.csv` against the labels of whatever
/// samples that file covers.
pub fn cmd_eval(cfg: &RunConfig, pred_dir: Option<&Path>) -> Result<String> {
    let dir = cfg.output_dir.join("eval");
    match pred_dir {
        Some(pred_dir) => {
            let accs = par::try_map_slice(&cfg.tasks, |t| {
                let labels = load_labels(&cfg.labels_path(t), t)?;
                let pred = load_predictions(&pred_dir.join(format!("{}.csv", t.task_id)), t, &"input".into())?;
                let truth = labels.select(pred.sample_ids())?;
                Ok::<_, Error>((t.task_id.clone(), top1_accuracy(&argmax_labels(&pred), &truth)?))
            })?;
            let report = MetricsReport::from_accuracies(accs)?;
            write_metrics(&dir, &report)?;
            Ok(format!(
                "basic precision {} -> {}",
                format_decimal(report.basic_precision),
                dir.display()
            ))
        }
        None => {
            let tasks = prepare_all(cfg)?;
            let per_task = par::try_map_slice(&tasks, |t| {
                t.eval
                    .matrices
                    .iter()
                    .map(|m| top1_accuracy(&argmax_labels(m), &t.eval.labels))
                    .collect::<Result<Vec<_>>>()
            })?;
            let mut csv = String::from("predictor");
            for t in &cfg.tasks {
                let _ = write!(csv, ",{}", t.task_id);
            }
            csv.push_str(",basic_precision\n");
            for (j, p) in cfg.predictors.iter().enumerate() {
                let accs: Vec<f64> = per_task.iter().map(|row| row[j]).collect();
                let _ = write!(csv, "{}", p.id);
                for a in &accs {
                    let _ = write!(csv, ",{}", format_decimal(*a));
                }
                let _ = writeln!(csv, ",{}", format_decimal(basic_precision(&accs)?));
            }
            write_text(&dir.join("predictors.csv"), &csv)?;
            Ok(format!("{} predictors scored -> {}", cfg.predictors.len(), dir.display()))
        }
    }
}

fn task_files(dir: &Path) -> Result<Vec<String>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut tasks = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                tasks.push(stem.to_string());
            }
        }
    }
    tasks.sort();
    if tasks.is_empty() {
        return Err(Error::Config(format!("no prediction files in {}", dir.display())));
    }
    Ok(tasks)
}

/// Label disagreement between a reference prediction directory and each
/// candidate, per task and averaged over tasks. Writes `<out>/diff/diff.csv`.
pub fn cmd_diff(reference: &Path, candidates: &[PathBuf], out: &Path) -> Result<String> {
    if candidates.is_empty() {
        return Err(Error::Config("diff needs at least one candidate directory".into()));
    }
    let tasks = task_files(reference)?;
    let load = |dir: &Path, task: &str| -> Result<PredictionMatrix> {
        let path = dir.join(format!("{task}.csv"));
        let spec = TaskSpec::new(task, read_prediction_class_count(&path)?)?;
        load_predictions(&path, &spec, &PredictorId::new(dir.display().to_string()))
    };
    let mut csv = String::from("reference,candidate,task_id,disagreement\n");
    let mut summary = String::new();
    let r = reference.display();
    for cand in candidates {
        let ratios = par::try_map_slice(&tasks, |task| {
            let a = argmax_labels(&load(reference, task)?);
            let b = argmax_labels(&load(cand, task)?);
            disagreement(&a, &b)
        })?;
        let c = cand.display();
        for (task, d) in tasks.iter().zip(&ratios) {
            let _ = writeln!(csv, "{r},{c},{task},{}", format_decimal(*d));
        }
        let mean = format_decimal(ratios.iter().sum::<f64>() / ratios.len() as f64);
        let _ = writeln!(csv, "{r},{c},__mean__,{mean}");
        let _ = writeln!(summary, "{c}: {mean}");
    }
    let path = out.join("diff").join("diff.csv");
    write_text(&path, &csv)?;
    let _ = write!(summary, "-> {}", path.display());
    Ok(summary)
}

/// Writes a synthetic fixture plus a ready-to-run `config.json`.
pub fn cmd_synth(spec: &SynthSpec, task_count: usize, out: &Path) -> Result<String> {
    if task_count == 0 {
        return Err(Error::Config("task count must be positive".into()));
    }
    let tasks = synth::gen_tasks(spec, task_count)?;
    synth::write_tasks(out, &tasks)?;
    let predictors: Vec<PredictorEntry> = tasks[0]
        .matrices
        .iter()
        .map(|m| PredictorEntry {
            id: m.predictor().clone(),
            file: None,
        })
        .collect();
    let ids: Vec<String> = predictors.iter().map(|p| p.id.to_string()).collect();
    let cfg = RunConfig {
        tasks: tasks.iter().map(|t| t.task.clone()).collect(),
        data_root: ".".into(),
        mixture: default_mixture(&ids),
        strategies: default_strategies(&ids),
        predictors,
        splits: SplitConfig {
            holdout_fraction: default_holdout(),
            k: default_k(),
            stratified: true,
            seed: Some(spec.seed),
        },
        output_dir: "results".into(),
    };
    write_json(&out.join("config.json"), &cfg)?;
    write_json(&out.join("synth.json"), spec)?;
    Ok(format!(
        "{task_count} tasks x {} predictors x {} samples -> {}",
        ids.len(),
        spec.n_samples,
        out.display()
    ))
}

/// The standard layout when there are at least 12 predictors, otherwise a
/// bag over everything.
fn default_mixture(ids: &[String]) -> MixtureConfig {
    if ids.len() >= 12 {
        MixtureConfig::default_layout()
    } else {
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        MixtureConfig::bag_only(&refs)
    }
}

/// Cumulative strategies: bagging alone, then one more group at a time.
fn default_strategies(ids: &[String]) -> Vec<Strategy> {
    let groups: Vec<String> = default_mixture(ids).groups.into_iter().map(|g| g.name).collect();
    let mut out = vec![Strategy {
        name: "bagging".into(),
        groups: vec![],
    }];
    for i in 1..=groups.len() {
        out.push(Strategy {
            name: format!("bagging+{}", groups[..i].join("+")),
            groups: groups[..i].to_vec(),
        });
    }
    out
}

/// Options for `prep`.
#[derive(Debug, Clone)]
pub struct PrepOptions {
    pub size: usize,
    pub augment_count: usize,
    pub augment: AugmentConfig,
}

/// Resizes every `.ppm`/`.pgm` in `input` to `size × size`, then writes
/// `augment_count` augmented copies of each. Copy `j` of the `i`-th image
/// (in file-name order) uses seed `derive(derive(seed, i), j)`.
pub fn cmd_prep(input: &Path, opts: &PrepOptions, out: &Path) -> Result<String> {
    opts.augment.validate()?;
    let entries = std::fs::read_dir(input).map_err(|e| Error::io(input, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(input, e))?.path();
        if path.extension().is_some_and(|e| e == "ppm" || e == "pgm") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!("no .ppm or .pgm images in {}", input.display())));
    }
    let indexed: Vec<(usize, &PathBuf)> = files.iter().enumerate().collect();
    par::try_map_slice(&indexed, |&(i, path)| {
        let img = pnm::read(path)?;
        let resized = imageprep::resize_pad(&img, opts.size, opts.augment.pad_rgb)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
        let ext = if resized.channels() == 3 { "ppm" } else { "pgm" };
        pnm::write(&out.join(format!("{stem}.{ext}")), &resized)?;
        let image_seed = rng::derive_seed(opts.augment.seed, i as u64);
        for j in 0..opts.augment_count {
            let aug = imageprep::augment(&resized, &opts.augment, rng::derive_seed(image_seed, j as u64))?;
            pnm::write(&out.join(format!("{stem}_aug{j}.{ext}")), &aug)?;
        }
        Ok::<_, Error>(())
    })?;
    Ok(format!(
        "{} images -> {} ({} augmented copies each)",
        files.len(),
        out.display(),
        opts.augment_count
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_strategies_are_cumulative() {
        let ids: Vec<String> = (1..=15).map(|i| format!("M{i}")).collect();
        let s = default_strategies(&ids);
        assert_eq!(s.len(), 4);
        assert!(s[0].groups.is_empty());
        assert_eq!(s[3].groups.len(), 3);
        assert_eq!(s[2].groups, s[3].groups[..2]);

        let few: Vec<String> = (1..=3).map(|i| format!("M{i}")).collect();
        assert_eq!(default_strategies(&few).len(), 1);
        assert_eq!(default_mixture(&few).bag_members.len(), 3);
    }

    #[test]
    fn strategy_mixture_filters_groups() {
        let ids: Vec<String> = (1..=15).map(|i| format!("M{i}")).collect();
        let cfg = RunConfig {
            tasks: vec![TaskSpec::new("t", 5).unwrap()],
            data_root: ".".into(),
            predictors: ids
                .iter()
                .map(|i| PredictorEntry {
                    id: i.as_str().into(),
                    file: None,
                })
                .collect(),
            mixture: default_mixture(&ids),
            strategies: default_strategies(&ids),
            splits: SplitConfig {
                holdout_fraction: 0.1,
                k: 5,
                stratified: true,
                seed: None,
            },
            output_dir: "out".into(),
        };
        let m = cfg.strategy_mixture(&cfg.strategies[1]).unwrap();
        assert_eq!(m.groups.len(), 1);
        assert_eq!(m.bag_members, cfg.mixture.bag_members);
        assert!(cfg.seed().is_err());
        assert!(cfg.group("nope").is_err());
    }
}
