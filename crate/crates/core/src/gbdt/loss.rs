use crate::error::{Error, Result};

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = logits.to_vec();
    softmax_in_place(&mut out);
    out
}

pub(crate) fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Gradient and diagonal Hessian of softmax cross-entropy with respect to
/// the logits, given the softmax output.
pub fn grad_hess(probs: &[f64], true_class: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if true_class >= probs.len() {
        return Err(Error::Index(format!(
            "class {true_class} out of range for {} classes",
            probs.len()
        )));
    }
    let g = probs
        .iter()
        .enumerate()
        .map(|(k, &p)| if k == true_class { p - 1.0 } else { p })
        .collect();
    let h = probs.iter().map(|&p| p * (1.0 - p)).collect();
    Ok((g, h))
}

/// Mean negative log-likelihood of the true classes under row-major `probs`.
pub fn log_loss(probs: &[f64], labels: &[usize], class_count: usize) -> f64 {
    let total: f64 = probs
        .chunks_exact(class_count)
        .zip(labels)
        .map(|(row, &y)| -row[y].max(f64::MIN_POSITIVE).ln())
        .sum();
    total / labels.len() as f64
}
