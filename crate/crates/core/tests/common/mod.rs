//! Reference implementations and fixtures shared by the integration tests.
//! Nothing here calls into the library's own tree or loss code.
#![allow(dead_code)]

use mixnet::data::{FeatureMatrix, LabelVector, PredictionMatrix, TaskSpec};
use mixnet::gbdt::TreeNode;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i:04}")).collect()
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy by finite differences.

fn oracle_softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// `L(z + t·e_k) − L(z)` for `L = logsumexp(z) − z_y`, computed without
/// subtracting two nearly equal losses.
fn loss_step(z: &[f64], y: usize, k: usize, t: f64) -> f64 {
    let p = oracle_softmax(z)[k];
    let lse = (p * t.exp_m1()).ln_1p();
    if k == y {
        lse - t
    } else {
        lse
    }
}

/// Central finite differences of the loss at `step`: first derivative and
/// diagonal second derivative for each logit.
pub fn fd_grad_hess(z: &[f64], y: usize, step: f64) -> (Vec<f64>, Vec<f64>) {
    let mut g = Vec::with_capacity(z.len());
    let mut h = Vec::with_capacity(z.len());
    for k in 0..z.len() {
        let up = loss_step(z, y, k, step);
        let down = loss_step(z, y, k, -step);
        g.push((up - down) / (2.0 * step));
        h.push((up + down) / (step * step));
    }
    (g, h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

// ---------------------------------------------------------------------------
// Brute-force tree enumeration.

#[derive(Debug, Clone, PartialEq)]
pub enum OracleNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<OracleNode>,
        right: Box<OracleNode>,
    },
    Leaf(f64),
}

pub struct OracleParams {
    pub lambda: f64,
    pub gamma: f64,
    pub min_hessian: f64,
    pub max_depth: usize,
}

fn oracle_gain(gl: f64, hl: f64, gr: f64, hr: f64, p: &OracleParams) -> f64 {
    let term = |g: f64, h: f64| if h + p.lambda == 0.0 { 0.0 } else { g * g / (h + p.lambda) };
    0.5 * (term(gl, hl) + term(gr, hr) - term(gl + gr, hl + hr)) - p.gamma
}

/// Tries every feature and every midpoint between consecutive distinct
/// values, summing each side directly.
pub fn brute_force_tree(rows: &[Vec<f64>], g: &[f64], h: &[f64], p: &OracleParams) -> OracleNode {
    let all: Vec<usize> = (0..rows.len()).collect();
    grow(rows, g, h, p, &all, 0)
}

#[allow(clippy::needless_range_loop)]
fn grow(rows: &[Vec<f64>], g: &[f64], h: &[f64], p: &OracleParams, idx: &[usize], depth: usize) -> OracleNode {
    let gsum: f64 = idx.iter().map(|&i| g[i]).sum();
    let hsum: f64 = idx.iter().map(|&i| h[i]).sum();
    let leaf = OracleNode::Leaf(if hsum + p.lambda > 0.0 { -gsum / (hsum + p.lambda) } else { 0.0 });
    if depth >= p.max_depth || idx.len() < 2 {
        return leaf;
    }
    let n_features = rows[0].len();
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..n_features {
        let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let thr = (w[0] + w[1]) / 2.0;
            let (mut gl, mut hl, mut gr, mut hr) = (0.0, 0.0, 0.0, 0.0);
            for &i in idx {
                if rows[i][f] < thr {
                    gl += g[i];
                    hl += h[i];
                } else {
                    gr += g[i];
                    hr += h[i];
                }
            }
            if hl < p.min_hessian || hr < p.min_hessian {
                continue;
            }
            let gain = oracle_gain(gl, hl, gr, hr, p);
            if best.is_none_or(|(b, _, _)| gain > b) {
                best = Some((gain, f, thr));
            }
        }
    }
    match best {
        Some((gain, f, thr)) if gain > 0.0 => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][f] < thr);
            OracleNode::Split {
                feature: f,
                threshold: thr,
                left: Box::new(grow(rows, g, h, p, &l, depth + 1)),
                right: Box::new(grow(rows, g, h, p, &r, depth + 1)),
            }
        }
        _ => leaf,
    }
}

/// Structural comparison: identical splits and thresholds, leaf weights
/// within `tol`.
pub fn compare_tree(got: &TreeNode, want: &OracleNode, tol: f64) -> Result<(), String> {
    match (got, want) {
        (TreeNode::Leaf { weight }, OracleNode::Leaf(w)) => {
            if (weight - w).abs() <= tol {
                Ok(())
            } else {
                Err(format!("leaf {weight} vs {w}"))
            }
        }
        (
            TreeNode::Internal {
                feature,
                threshold,
                children,
            },
            OracleNode::Split {
                feature: f,
                threshold: t,
                left,
                right,
            },
        ) => {
            if feature != f || threshold != t {
                return Err(format!("split ({feature}, {threshold}) vs ({f}, {t})"));
            }
            compare_tree(&children.0, left, tol)?;
            compare_tree(&children.1, right, tol)
        }
        (a, b) => Err(format!("shape differs: {a:?} vs {b:?}")),
    }
}

/// Random tree-building inputs on a grid of multiples of 1/16 (gradients,
/// hessians) and 1/64 (features), so every partial sum is exact.
pub struct TreeFixture {
    pub rows: Vec<Vec<f64>>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub lambda: f64,
    pub gamma: f64,
    pub min_hessian: f64,
    pub max_depth: usize,
}

impl TreeFixture {
    pub fn random(seed: u64, max_n: usize, max_features: usize) -> Self {
        let mut r = rng(seed);
        let n = r.gen_range(2..=max_n);
        let d = r.gen_range(1..=max_features);
        // Few distinct levels on some features to exercise repeated values.
        let levels: Vec<u32> = (0..d).map(|_| if r.gen_bool(0.3) { 4 } else { 256 }).collect();
        let rows = (0..n)
            .map(|_| levels.iter().map(|&l| r.gen_range(0..l) as f64 / 64.0).collect())
            .collect();
        let g = (0..n).map(|_| r.gen_range(-16i32..=16) as f64 / 16.0).collect();
        let h = (0..n).map(|_| r.gen_range(0i32..=16) as f64 / 16.0).collect();
        TreeFixture {
            rows,
            g,
            h,
            lambda: [0.0, 0.5, 1.0][r.gen_range(0..3)],
            gamma: [0.0, 0.0, 0.0625][r.gen_range(0..3)],
            min_hessian: [0.0, 0.25, 1.0][r.gen_range(0..3)],
            max_depth: r.gen_range(1..=2),
        }
    }

    pub fn features(&self) -> FeatureMatrix {
        FeatureMatrix::from_rows(ids(self.rows.len()), &self.rows).unwrap()
    }

    pub fn gbdt_params(&self) -> mixnet::gbdt::GbdtParams {
        mixnet::gbdt::GbdtParams {
            max_depth: self.max_depth,
            l2_lambda: self.lambda,
            gain_gamma: self.gamma,
            min_hessian_sum: self.min_hessian,
            ..Default::default()
        }
    }

    pub fn oracle_params(&self) -> OracleParams {
        OracleParams {
            lambda: self.lambda,
            gamma: self.gamma,
            min_hessian: self.min_hessian,
            max_depth: self.max_depth,
        }
    }
}

// ---------------------------------------------------------------------------
// Small data fixtures.

/// Two classes split at x = 9.5 on a single feature.
pub fn separable() -> (FeatureMatrix, LabelVector) {
    let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
    let labels = (0..20).map(|i| usize::from(i >= 10)).collect();
    (
        FeatureMatrix::from_rows(ids(20), &rows).unwrap(),
        LabelVector::new(TaskSpec::new("toy", 2).unwrap(), ids(20), labels).unwrap(),
    )
}

/// A random valid probability matrix.
pub fn random_matrix(id: &str, task: &TaskSpec, n: usize, r: &mut impl Rng) -> PredictionMatrix {
    let c = task.class_count;
    let mut probs = Vec::with_capacity(n * c);
    for _ in 0..n {
        let raw: Vec<f64> = (0..c).map(|_| r.gen_range(0.01..1.0)).collect();
        let s: f64 = raw.iter().sum();
        probs.extend(raw.iter().map(|v| v / s));
    }
    PredictionMatrix::new(id.into(), task.clone(), ids(n), probs).unwrap()
}

/// 64-bit FNV-1a, used to pin file contents in golden tests.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf29ce484222325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}
