//! Shared domain types: tasks, predictor ids, probability and label vectors,
//! and the CSV formats they are exchanged in.
//!
//! Rows are always keyed by an explicit sample id and kept in strictly
//! increasing (byte-wise lexicographic) id order. Joins across predictors
//! compare id lists, never row positions.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of a probability row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// One classification task and its class space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub class_count: usize,
}

impl TaskSpec {
    pub fn new(task_id: impl Into<String>, class_count: usize) -> Result<Self> {
        let task = TaskSpec {
            task_id: task_id.into(),
            class_count,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<()> {
        if self.task_id.is_empty() {
            return Err(Error::Config("task_id must be nonempty".into()));
        }
        if self.class_count < 2 {
            return Err(Error::Config(format!(
                "task {} has class_count {}; at least 2 classes are required",
                self.task_id, self.class_count
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredictorId(pub String);

impl PredictorId {
    pub fn new(id: impl Into<String>) -> Self {
        PredictorId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PredictorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PredictorId {
    fn from(s: &str) -> Self {
        PredictorId(s.to_string())
    }
}

/// Per-sample class probabilities emitted by one predictor on one task.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    predictor: PredictorId,
    task: TaskSpec,
    sample_ids: Vec<String>,
    probs: Vec<f64>,
}

impl PredictionMatrix {
    /// Builds a validated matrix from row-major `probs` (`n × C`).
    pub fn new(
        predictor: PredictorId,
        task: TaskSpec,
        sample_ids: Vec<String>,
        probs: Vec<f64>,
    ) -> Result<Self> {
        task.validate()?;
        let c = task.class_count;
        if sample_ids.is_empty() {
            return Err(Error::Validation(format!(
                "predictor {predictor} on task {} has no samples",
                task.task_id
            )));
        }
        if probs.len() != sample_ids.len() * c {
            return Err(Error::Shape(format!(
                "{} probabilities for {} samples × {} classes",
                probs.len(),
                sample_ids.len(),
                c
            )));
        }
        check_strictly_increasing(&sample_ids)?;
        for (id, row) in sample_ids.iter().zip(probs.chunks_exact(c)) {
            validate_row(id, row)?;
        }
        Ok(PredictionMatrix {
            predictor,
            task,
            sample_ids,
            probs,
        })
    }

    pub fn predictor(&self) -> &PredictorId {
        &self.predictor
    }

    pub fn task(&self) -> &TaskSpec {
        &self.task
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn class_count(&self) -> usize {
        self.task.class_count
    }

    /// Row-major `n × C` probabilities.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.class_count();
        &self.probs[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.probs.chunks_exact(self.class_count())
    }

    pub fn with_predictor(mut self, predictor: PredictorId) -> Self {
        self.predictor = predictor;
        self
    }

    /// Keeps only the listed samples (which must be a sorted subset of this
    /// matrix's ids).
    pub fn select(&self, ids: &[String]) -> Result<Self> {
        let idx = subset_indices(&self.sample_ids, ids)?;
        let c = self.class_count();
        let mut probs = Vec::with_capacity(idx.len() * c);
        for &i in &idx {
            probs.extend_from_slice(self.row(i));
        }
        PredictionMatrix::new(self.predictor.clone(), self.task.clone(), ids.to_vec(), probs)
    }
}

/// Ground-truth or predicted class indices for one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    task: TaskSpec,
    sample_ids: Vec<String>,
    labels: Vec<usize>,
}

impl LabelVector {
    pub fn new(task: TaskSpec, sample_ids: Vec<String>, labels: Vec<usize>) -> Result<Self> {
        task.validate()?;
        if sample_ids.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} sample ids but {} labels",
                sample_ids.len(),
                labels.len()
            )));
        }
        check_strictly_increasing(&sample_ids)?;
        if let Some((id, &l)) = sample_ids
            .iter()
            .zip(&labels)
            .find(|(_, &l)| l >= task.class_count)
        {
            return Err(Error::Validation(format!(
                "sample {id}: label {l} outside [0, {})",
                task.class_count
            )));
        }
        Ok(LabelVector {
            task,
            sample_ids,
            labels,
        })
    }

    pub fn task(&self) -> &TaskSpec {
        &self.task
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn select(&self, ids: &[String]) -> Result<Self> {
        let idx = subset_indices(&self.sample_ids, ids)?;
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        LabelVector::new(self.task.clone(), ids.to_vec(), labels)
    }
}

/// Dense feature rows plus the (predictor, class) each column came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    sample_ids: Vec<String>,
    n_features: usize,
    features: Vec<f64>,
    column_origin: Vec<(PredictorId, usize)>,
}

impl FeatureMatrix {
    pub fn new(
        sample_ids: Vec<String>,
        features: Vec<f64>,
        column_origin: Vec<(PredictorId, usize)>,
    ) -> Result<Self> {
        let d = column_origin.len();
        if features.len() != sample_ids.len() * d {
            return Err(Error::Shape(format!(
                "{} feature values for {} samples × {} columns",
                features.len(),
                sample_ids.len(),
                d
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite feature value".into()));
        }
        check_strictly_increasing(&sample_ids)?;
        Ok(FeatureMatrix {
            sample_ids,
            n_features: d,
            features,
            column_origin,
        })
    }

    /// Features not derived from predictors; columns are attributed to a
    /// synthetic `raw` predictor.
    pub fn from_rows(sample_ids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("ragged feature rows".into()));
        }
        let origin = (0..d).map(|j| (PredictorId::new("raw"), j)).collect();
        FeatureMatrix::new(sample_ids, rows.concat(), origin)
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, sample: usize, feature: usize) -> f64 {
        self.features[sample * self.n_features + feature]
    }

    pub fn column_origin(&self) -> &[(PredictorId, usize)] {
        &self.column_origin
    }

    /// Rows at the given positions, keeping their order.
    pub fn take_rows(&self, rows: &[usize]) -> Result<Self> {
        let ids = rows.iter().map(|&i| self.sample_ids[i].clone()).collect();
        let mut feats = Vec::with_capacity(rows.len() * self.n_features);
        for &i in rows {
            feats.extend_from_slice(self.row(i));
        }
        FeatureMatrix::new(ids, feats, self.column_origin.clone())
    }
}

/// One task's labels and its base predictors, in ranking order.
#[derive(Debug, Clone)]
pub struct TaskData {
    pub task: TaskSpec,
    pub labels: LabelVector,
    pub matrices: Vec<PredictionMatrix>,
}

impl TaskData {
    pub fn matrix(&self, id: &PredictorId) -> Result<&PredictionMatrix> {
        find_matrix(&self.matrices, id)
    }

    /// Restricts labels and every matrix to the given sorted sample subset.
    pub fn select(&self, ids: &[String]) -> Result<Self> {
        Ok(TaskData {
            task: self.task.clone(),
            labels: self.labels.select(ids)?,
            matrices: self
                .matrices
                .iter()
                .map(|m| m.select(ids))
                .collect::<Result<_>>()?,
        })
    }
}

pub fn find_matrix<'a>(
    matrices: &'a [PredictionMatrix],
    id: &PredictorId,
) -> Result<&'a PredictionMatrix> {
    matrices
        .iter()
        .find(|m| m.predictor() == id)
        .ok_or_else(|| Error::MissingPredictor(id.to_string()))
}

fn check_strictly_increasing(ids: &[String]) -> Result<()> {
    for w in ids.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Validation(format!(
                "sample ids not strictly increasing at {:?} -> {:?}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn validate_row(id: &str, row: &[f64]) -> Result<()> {
    if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::Validation(format!(
            "sample {id}: probability {p} is negative or non-finite"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::Validation(format!(
            "sample {id}: probabilities sum to {sum}"
        )));
    }
    Ok(())
}

/// Positions of `subset` inside `all`; both sorted and strictly increasing.
fn subset_indices(all: &[String], subset: &[String]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(subset.len());
    let mut j = 0;
    for id in subset {
        while j < all.len() && all[j] < *id {
            j += 1;
        }
        if j == all.len() || all[j] != *id {
            return Err(Error::Alignment(format!("sample {id} not present")));
        }
        out.push(j);
        j += 1;
    }
    Ok(out)
}

pub(crate) fn ensure_aligned(a: &[String], b: &[String], what: &str) -> Result<()> {
    if a != b {
        let detail = a
            .iter()
            .zip(b)
            .position(|(x, y)| x != y)
            .map(|i| format!("first difference at row {i}: {:?} vs {:?}", a[i], b[i]))
            .unwrap_or_else(|| format!("{} vs {} samples", a.len(), b.len()));
        return Err(Error::Alignment(format!("{what}: {detail}")));
    }
    Ok(())
}

/// Concatenates the probability rows of the `group` members, in group order.
pub fn concat_features(
    matrices: &[PredictionMatrix],
    group: &[PredictorId],
) -> Result<FeatureMatrix> {
    let members = group
        .iter()
        .map(|id| find_matrix(matrices, id))
        .collect::<Result<Vec<_>>>()?;
    let first = members
        .first()
        .ok_or_else(|| Error::Config("empty predictor group".into()))?;
    for m in &members[1..] {
        if m.task() != first.task() {
            return Err(Error::Alignment(format!(
                "predictor {} is for task {}, expected {}",
                m.predictor(),
                m.task().task_id,
                first.task().task_id
            )));
        }
        ensure_aligned(
            first.sample_ids(),
            m.sample_ids(),
            &format!("{} vs {}", first.predictor(), m.predictor()),
        )?;
    }

    let c = first.class_count();
    let n = first.n_samples();
    let mut features = Vec::with_capacity(n * c * members.len());
    for i in 0..n {
        for m in &members {
            features.extend_from_slice(m.row(i));
        }
    }
    let column_origin = members
        .iter()
        .flat_map(|m| (0..c).map(move |k| (m.predictor().clone(), k)))
        .collect();
    FeatureMatrix::new(first.sample_ids().to_vec(), features, column_origin)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &p) in row.iter().enumerate().skip(1) {
        if p > row[best] {
            best = k;
        }
    }
    best
}

/// Top-1 labels of a prediction matrix.
pub fn argmax_labels(m: &PredictionMatrix) -> LabelVector {
    LabelVector {
        task: m.task().clone(),
        sample_ids: m.sample_ids().to_vec(),
        labels: m.rows().map(argmax).collect(),
    }
}

/// Formats a value rounded to 9 significant digits, in the shortest plain
/// decimal form that parses back to the rounded value.
pub fn format_decimal(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn save_predictions(path: &Path, m: &PredictionMatrix) -> Result<()> {
    let mut out = String::new();
    out.push_str("sample_id");
    for k in 0..m.class_count() {
        out.push_str(&format!(",c{k}"));
    }
    out.push('\n');
    for (id, row) in m.sample_ids().iter().zip(m.rows()) {
        out.push_str(id);
        for &p in row {
            out.push(',');
            out.push_str(&format_decimal(p));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn save_labels(path: &Path, labels: &LabelVector) -> Result<()> {
    let mut out = String::from("sample_id,label\n");
    for (id, l) in labels.sample_ids().iter().zip(labels.labels()) {
        out.push_str(&format!("{id},{l}\n"));
    }
    write_text(path, &out)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file))
}

fn format_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_records(path: &Path) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rdr = csv_reader(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            format_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec));
    }
    Ok(out)
}

/// Number of classes declared by a predictions CSV header.
pub fn read_prediction_class_count(path: &Path) -> Result<usize> {
    let records = read_records(path)?;
    let (line, header) = records
        .first()
        .ok_or_else(|| format_err(path, 1, "empty file"))?;
    if header.len() < 3 || &header[0] != "sample_id" {
        return Err(format_err(path, *line, "expected header sample_id,c0,c1,..."));
    }
    Ok(header.len() - 1)
}

/// Reads a predictions CSV, validating every row and sorting by sample id.
pub fn load_predictions(
    path: &Path,
    task: &TaskSpec,
    predictor: &PredictorId,
) -> Result<PredictionMatrix> {
    let c = task.class_count;
    let records = read_records(path)?;
    let mut iter = records.into_iter();
    let (hline, header) = iter
        .next()
        .ok_or_else(|| format_err(path, 1, "empty file"))?;
    let expected: Vec<String> = std::iter::once("sample_id".to_string())
        .chain((0..c).map(|k| format!("c{k}")))
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(format_err(
            path,
            hline,
            format!("expected header {}", expected.join(",")),
        ));
    }

    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for (line, rec) in iter {
        if rec.len() != c + 1 {
            return Err(format_err(
                path,
                line,
                format!("expected {} columns, found {}", c + 1, rec.len()),
            ));
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(format_err(path, line, "empty sample_id"));
        }
        let probs = rec
            .iter()
            .skip(1)
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| format_err(path, line, format!("invalid probability {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        validate_row(&id, &probs)?;
        rows.push((id, probs));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let (ids, probs): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    PredictionMatrix::new(predictor.clone(), task.clone(), ids, probs.concat())
}

/// Reads a labels CSV (`sample_id,label`), sorting by sample id.
pub fn load_labels(path: &Path, task: &TaskSpec) -> Result<LabelVector> {
    let records = read_records(path)?;
    let mut iter = records.into_iter();
    let (hline, header) = iter
        .next()
        .ok_or_else(|| format_err(path, 1, "empty file"))?;
    if header.iter().ne(["sample_id", "label"]) {
        return Err(format_err(path, hline, "expected header sample_id,label"));
    }
    let mut rows = Vec::new();
    for (line, rec) in iter {
        if rec.len() != 2 {
            return Err(format_err(
                path,
                line,
                format!("expected 2 columns, found {}", rec.len()),
            ));
        }
        let label: usize = rec[1]
            .trim()
            .parse()
            .map_err(|_| format_err(path, line, format!("invalid label {:?}", &rec[1])))?;
        rows.push((rec[0].to_string(), label));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let (ids, labels) = rows.into_iter().unzip();
    LabelVector::new(task.clone(), ids, labels)
}
