//! Accuracy metrics and seeded data splits.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{ensure_aligned, format_decimal, LabelVector};
use crate::error::{Error, Result};
use crate::rng;

/// Fraction of samples on which `pred` matches `truth`.
pub fn top1_accuracy(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    Ok(1.0 - disagreement(pred, truth)?)
}

/// Fraction of samples on which two label vectors differ.
pub fn disagreement(a: &LabelVector, b: &LabelVector) -> Result<f64> {
    ensure_aligned(a.sample_ids(), b.sample_ids(), "label vectors")?;
    if a.is_empty() {
        return Err(Error::Degenerate("no samples to compare".into()));
    }
    let differ = a
        .labels()
        .iter()
        .zip(b.labels())
        .filter(|(x, y)| x != y)
        .count();
    Ok(differ as f64 / a.len() as f64)
}

/// Unweighted mean of per-task accuracies.
///
/// Computed as offsets from the first value, which makes the mean of equal
/// values exactly that value.
pub fn basic_precision(accuracies: &[f64]) -> Result<f64> {
    let Some(&first) = accuracies.first() else {
        return Err(Error::Config("basic precision needs at least one task".into()));
    };
    let n = accuracies.len() as f64;
    Ok(first + accuracies.iter().map(|a| a - first).sum::<f64>() / n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_task_accuracy: BTreeMap<String, f64>,
    pub basic_precision: f64,
}

impl MetricsReport {
    pub fn from_accuracies(per_task: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let per_task_accuracy: BTreeMap<String, f64> = per_task.into_iter().collect();
        let accs: Vec<f64> = per_task_accuracy.values().copied().collect();
        Ok(MetricsReport {
            basic_precision: basic_precision(&accs)?,
            per_task_accuracy,
        })
    }

    /// `task_id,accuracy` rows followed by a `__basic_precision__` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("task_id,accuracy\n");
        for (task, acc) in &self.per_task_accuracy {
            out.push_str(&format!("{task},{}\n", format_decimal(*acc)));
        }
        out.push_str(&format!(
            "__basic_precision__,{}\n",
            format_decimal(self.basic_precision)
        ));
        out
    }
}

/// Fold index per sample, aligned with the sample order given to [`kfold_split`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl FoldAssignment {
    /// Positions of the training and test samples for fold `f`.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.fold_of.len()).partition(|&i| self.fold_of[i] != f)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Sample positions grouped by stratum (class label, or one stratum when
/// unstratified), each group shuffled with one shared seeded stream.
fn shuffled_strata(labels: &[usize], stratified: bool, seed: u64) -> Vec<Vec<usize>> {
    let mut strata: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        strata.entry(if stratified { l } else { 0 }).or_default().push(i);
    }
    let mut rng = rng::seeded(seed);
    strata
        .into_values()
        .map(|mut members| {
            members.shuffle(&mut rng);
            members
        })
        .collect()
}

fn check_inputs(sample_ids: &[String], labels: &[usize]) -> Result<()> {
    if sample_ids.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} sample ids but {} labels",
            sample_ids.len(),
            labels.len()
        )));
    }
    if sample_ids.is_empty() {
        return Err(Error::Degenerate("cannot split an empty sample set".into()));
    }
    Ok(())
}

/// Splits samples into (train, held) id lists, each returned in sorted order.
///
/// The held count is `round(fraction · n)`, apportioned over strata by
/// largest remainder (ties to the lower stratum), so each stratum holds
/// `floor` or `ceil` of its exact share.
pub fn holdout_split(
    sample_ids: &[String],
    labels: &[usize],
    fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Vec<String>, Vec<String>)> {
    check_inputs(sample_ids, labels)?;
    let n = sample_ids.len();
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("holdout fraction {fraction} outside (0, 1)")));
    }
    let target = (fraction * n as f64).round() as usize;
    if target == 0 {
        return Err(Error::Config(format!(
            "holdout fraction {fraction} of {n} samples holds out nothing"
        )));
    }
    if target == n {
        return Err(Error::Config(format!(
            "holdout fraction {fraction} of {n} samples leaves nothing outside the holdout"
        )));
    }
    let strata = shuffled_strata(labels, stratified, seed);

    let exact: Vec<f64> = strata.iter().map(|s| fraction * s.len() as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..strata.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let floors: usize = quota.iter().sum();
    for &j in order.iter().take(target.saturating_sub(floors)) {
        quota[j] += 1;
    }
    let assigned: usize = quota.iter().sum();

    let mut held = Vec::with_capacity(assigned);
    let mut train = Vec::with_capacity(n - assigned);
    for (members, &q) in strata.iter().zip(&quota) {
        held.extend(members[..q].iter().map(|&i| sample_ids[i].clone()));
        train.extend(members[q..].iter().map(|&i| sample_ids[i].clone()));
    }
    held.sort();
    train.sort();
    Ok((train, held))
}

/// Assigns each sample to one of `k` folds.
///
/// Strata are shuffled and laid end to end, and position `p` in that
/// sequence goes to fold `p mod k`. Fold sizes then differ by at most one,
/// and so do each stratum's counts across folds.
pub fn kfold_split(
    sample_ids: &[String],
    labels: &[usize],
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<FoldAssignment> {
    check_inputs(sample_ids, labels)?;
    if k < 2 {
        return Err(Error::Config(format!("k = {k}; at least 2 folds are required")));
    }
    if k > sample_ids.len() {
        return Err(Error::Config(format!(
            "k = {k} folds exceeds {} samples",
            sample_ids.len()
        )));
    }
    let mut fold_of = vec![0; sample_ids.len()];
    for (p, i) in shuffled_strata(labels, stratified, seed)
        .into_iter()
        .flatten()
        .enumerate()
    {
        fold_of[i] = p % k;
    }
    Ok(FoldAssignment { k, fold_of, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TaskSpec;

    fn lv(labels: &[usize]) -> LabelVector {
        let ids = (0..labels.len()).map(|i| format!("s{i:03}")).collect();
        LabelVector::new(TaskSpec::new("t", 5).unwrap(), ids, labels.to_vec()).unwrap()
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i:03}")).collect()
    }

    #[test]
    fn accuracy_examples() {
        let a = lv(&[0, 1, 2, 3]);
        assert_eq!(top1_accuracy(&a, &a).unwrap(), 1.0);
        assert_eq!(top1_accuracy(&a, &lv(&[0, 1, 2, 0])).unwrap(), 0.75);
        assert_eq!(top1_accuracy(&a, &lv(&[1, 2, 3, 4])).unwrap(), 0.0);
    }

    #[test]
    fn disagreement_examples() {
        let a = lv(&[1, 2, 3, 4]);
        assert_eq!(disagreement(&a, &a).unwrap(), 0.0);
        assert_eq!(disagreement(&a, &lv(&[1, 2, 3, 0])).unwrap(), 0.25);
        assert_eq!(disagreement(&a, &lv(&[0, 0, 0, 0])).unwrap(), 1.0);
        assert!(matches!(disagreement(&a, &lv(&[1, 2])), Err(Error::Alignment(_))));
    }

    #[test]
    fn basic_precision_examples() {
        assert_eq!(basic_precision(&[1.0; 8]).unwrap(), 1.0);
        assert!((basic_precision(&[0.9, 0.8]).unwrap() - 0.85).abs() < 1e-15);
        assert_eq!(basic_precision(&[0.7]).unwrap(), 0.7);
        assert!(basic_precision(&[]).is_err());
    }

    #[test]
    fn metrics_csv() {
        let r = MetricsReport::from_accuracies([("b".to_string(), 0.8), ("a".to_string(), 0.9)])
            .unwrap();
        assert_eq!(r.to_csv(), "task_id,accuracy\na,0.9\nb,0.8\n__basic_precision__,0.85\n");
    }

    #[test]
    fn holdout_examples() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let (train, held) = holdout_split(&ids(100), &labels, 0.1, 3, true).unwrap();
        assert_eq!(held.len(), 10);
        assert_eq!(train.len(), 90);
        let pos = |id: &String| id[1..].parse::<usize>().unwrap();
        assert_eq!(held.iter().filter(|id| labels[pos(id)] == 0).count(), 5);
        assert_eq!(holdout_split(&ids(100), &labels, 0.1, 3, true).unwrap().1, held);

        let (train, held) = holdout_split(&ids(2), &[0, 0], 0.5, 1, true).unwrap();
        assert_eq!((train.len(), held.len()), (1, 1));

        assert!(matches!(holdout_split(&[], &[], 0.1, 1, true), Err(Error::Degenerate(_))));
        assert!(holdout_split(&ids(5), &[0; 5], 0.05, 1, true).is_err());
    }

    #[test]
    fn holdout_must_leave_training_samples() {
        assert!(matches!(holdout_split(&ids(8), &[0; 8], 0.95, 5, true), Err(Error::Config(_))));
        let (train, held) = holdout_split(&ids(8), &[0; 8], 0.9, 5, true).unwrap();
        assert_eq!((train.len(), held.len()), (1, 7));
    }

    #[test]
    fn kfold_examples() {
        let f = kfold_split(&ids(10), &[0; 10], 5, 1, false).unwrap();
        assert_eq!(f.fold_sizes(), vec![2; 5]);

        let f = kfold_split(&ids(11), &[0; 11], 5, 1, false).unwrap();
        let mut sizes = f.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 2, 2, 3]);

        let labels: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let f = kfold_split(&ids(10), &labels, 5, 9, true).unwrap();
        for fold in 0..5 {
            let (_, test) = f.split(fold);
            assert_eq!(test.len(), 2);
            assert_eq!(test.iter().filter(|&&i| labels[i] == 0).count(), 1);
        }

        assert!(matches!(kfold_split(&ids(3), &[0; 3], 5, 1, true), Err(Error::Config(_))));
    }
}
