//! Exact greedy regression trees over gradient/hessian pairs.

use serde::{Deserialize, Serialize};

use super::GbdtParams;
use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::par;

/// A regression tree node. Routing is strict: `x[feature] < threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        /// `(left, right)`
        children: Box<(TreeNode, TreeNode)>,
    },
    Leaf {
        weight: f64,
    },
}

impl TreeNode {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Internal {
                    feature,
                    threshold,
                    children,
                } => {
                    node = if row[*feature] < *threshold {
                        &children.0
                    } else {
                        &children.1
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { children, .. } => 1 + children.0.depth().max(children.1.depth()),
        }
    }

    pub fn leaves(&self) -> Vec<f64> {
        match self {
            TreeNode::Leaf { weight } => vec![*weight],
            TreeNode::Internal { children, .. } => {
                let mut l = children.0.leaves();
                l.extend(children.1.leaves());
                l
            }
        }
    }

    pub(crate) fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Internal {
                feature, children, ..
            } => Some(
                [Some(*feature), children.0.max_feature(), children.1.max_feature()]
                    .into_iter()
                    .flatten()
                    .max()
                    .unwrap_or(*feature),
            ),
        }
    }
}

/// `G² / (H + λ)`, taken as zero when the denominator vanishes.
fn score(g: f64, h: f64, lambda: f64) -> f64 {
    let denom = h + lambda;
    if denom > 0.0 {
        g * g / denom
    } else {
        0.0
    }
}

/// Regularized second-order gain of splitting a node into (L, R).
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, params: &GbdtParams) -> f64 {
    let lambda = params.l2_lambda;
    0.5 * (score(gl, hl, lambda) + score(gr, hr, lambda) - score(gl + gr, hl + hr, lambda))
        - params.gain_gamma
}

/// Optimal leaf weight `-G / (H + λ)`; zero when `H + λ` is zero.
pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    let denom = h + lambda;
    if denom > 0.0 {
        -g / denom
    } else {
        0.0
    }
}

/// Split threshold between two consecutive distinct values `lo < hi`.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Work below which per-feature split search stays on the current thread.
const PAR_SEARCH_MIN_WORK: usize = 1 << 15;

/// Reusable tree grower: sorts every feature column once so that the
/// per-node search is a linear scan.
pub struct TreeBuilder<'a> {
    features: &'a FeatureMatrix,
    params: &'a GbdtParams,
    sorted: Vec<Vec<usize>>,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(features: &'a FeatureMatrix, params: &'a GbdtParams) -> Result<Self> {
        if features.n_samples() == 0 {
            return Err(Error::Degenerate("cannot grow a tree on zero samples".into()));
        }
        let sorted = par::map_range(features.n_features(), |f| {
            let mut idx: Vec<usize> = (0..features.n_samples()).collect();
            idx.sort_by(|&a, &b| {
                features
                    .value(a, f)
                    .total_cmp(&features.value(b, f))
                    .then(a.cmp(&b))
            });
            idx
        });
        Ok(TreeBuilder {
            features,
            params,
            sorted,
        })
    }

    pub fn build(&self, g: &[f64], h: &[f64]) -> Result<TreeNode> {
        let n = self.features.n_samples();
        if g.len() != n || h.len() != n {
            return Err(Error::Shape(format!(
                "{} gradients and {} hessians for {n} samples",
                g.len(),
                h.len()
            )));
        }
        if h.iter().any(|&v| v.is_nan() || v < 0.0) {
            return Err(Error::Validation("hessians must be nonnegative".into()));
        }
        let samples: Vec<usize> = (0..n).collect();
        let mut in_left = vec![false; n];
        Ok(self.grow(samples, self.sorted.clone(), 0, g, h, &mut in_left))
    }

    fn grow(
        &self,
        samples: Vec<usize>,
        sorted: Vec<Vec<usize>>,
        depth: usize,
        g: &[f64],
        h: &[f64],
        in_left: &mut [bool],
    ) -> TreeNode {
        let lambda = self.params.l2_lambda;
        let (gsum, hsum) = samples
            .iter()
            .fold((0.0, 0.0), |(a, b), &i| (a + g[i], b + h[i]));
        let leaf = TreeNode::Leaf {
            weight: leaf_weight(gsum, hsum, lambda),
        };
        if depth >= self.params.max_depth || samples.len() < 2 {
            return leaf;
        }

        let search = |f: usize| self.best_for_feature(f, &sorted[f], gsum, hsum, g, h);
        let per_feature: Vec<Option<Candidate>> =
            if samples.len() * sorted.len() >= PAR_SEARCH_MIN_WORK {
                par::map_range(sorted.len(), search)
            } else {
                (0..sorted.len()).map(search).collect()
            };
        // Strict comparison in feature order keeps the lowest feature on ties.
        let mut best: Option<Candidate> = None;
        for c in per_feature.into_iter().flatten() {
            if best.is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
        let Some(best) = best.filter(|b| b.gain > 0.0) else {
            return leaf;
        };

        for &i in &samples {
            in_left[i] = self.features.value(i, best.feature) < best.threshold;
        }
        let (left, right): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&i| in_left[i]);
        let (sorted_left, sorted_right): (Vec<Vec<usize>>, Vec<Vec<usize>>) = sorted
            .into_iter()
            .map(|list| list.into_iter().partition(|&i| in_left[i]))
            .unzip();

        let left_node = self.grow(left, sorted_left, depth + 1, g, h, in_left);
        let right_node = self.grow(right, sorted_right, depth + 1, g, h, in_left);
        TreeNode::Internal {
            feature: best.feature,
            threshold: best.threshold,
            children: Box::new((left_node, right_node)),
        }
    }

    fn best_for_feature(
        &self,
        feature: usize,
        order: &[usize],
        gsum: f64,
        hsum: f64,
        g: &[f64],
        h: &[f64],
    ) -> Option<Candidate> {
        let min_h = self.params.min_hessian_sum;
        let mut best: Option<Candidate> = None;
        let (mut gl, mut hl) = (0.0, 0.0);
        for pair in order.windows(2) {
            let (i, next) = (pair[0], pair[1]);
            gl += g[i];
            hl += h[i];
            let lo = self.features.value(i, feature);
            let hi = self.features.value(next, feature);
            if lo >= hi {
                continue;
            }
            let (gr, hr) = (gsum - gl, hsum - hl);
            if hl < min_h || hr < min_h {
                continue;
            }
            let gain = split_gain(gl, hl, gr, hr, self.params);
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(Candidate {
                    gain,
                    feature,
                    threshold: midpoint(lo, hi),
                });
            }
        }
        best
    }
}

/// Grows one tree on per-sample gradients `g` and hessians `h`.
pub fn build_tree(
    features: &FeatureMatrix,
    g: &[f64],
    h: &[f64],
    params: &GbdtParams,
) -> Result<TreeNode> {
    TreeBuilder::new(features, params)?.build(g, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, gamma: f64, depth: usize) -> GbdtParams {
        GbdtParams {
            max_depth: depth,
            l2_lambda: lambda,
            gain_gamma: gamma,
            ..GbdtParams::default()
        }
    }

    fn column(xs: &[f64]) -> FeatureMatrix {
        let ids = (0..xs.len()).map(|i| format!("s{i:02}")).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        FeatureMatrix::from_rows(ids, &rows).unwrap()
    }

    #[test]
    fn gain_examples() {
        let p = params(1.0, 0.0, 3);
        assert_eq!(split_gain(0.0, 1.0, 0.0, 2.0, &params(1.0, 0.7, 3)), -0.7);
        assert!((split_gain(-2.0, 3.0, 2.0, 3.0, &p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_gradients_give_a_single_leaf() {
        let x = column(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let tree = build_tree(&x, &[0.5; 5], &[0.25; 5], &params(1.0, 0.0, 3)).unwrap();
        assert_eq!(tree, TreeNode::Leaf { weight: -2.5 / 2.25 });
    }

    #[test]
    fn four_point_stump() {
        let x = column(&[0.0, 1.0, 2.0, 3.0]);
        let tree = build_tree(&x, &[-1.0, -1.0, 1.0, 1.0], &[1.0; 4], &params(0.0, 0.0, 1)).unwrap();
        assert_eq!(
            tree,
            TreeNode::Internal {
                feature: 0,
                threshold: 1.5,
                children: Box::new((TreeNode::Leaf { weight: 1.0 }, TreeNode::Leaf { weight: -1.0 })),
            }
        );
    }

    #[test]
    fn repeated_values_are_never_separated() {
        let x = column(&[1.0, 1.0, 2.0, 2.0]);
        let tree = build_tree(&x, &[-1.0, 1.0, -1.0, 1.0], &[1.0; 4], &params(0.0, 0.0, 2)).unwrap();
        assert!(matches!(tree, TreeNode::Leaf { .. }));
    }

    #[test]
    fn min_hessian_blocks_thin_children() {
        let x = column(&[0.0, 1.0, 2.0, 3.0]);
        let p = GbdtParams {
            min_hessian_sum: 3.0,
            ..params(0.0, 0.0, 1)
        };
        let tree = build_tree(&x, &[-1.0, -1.0, 1.0, 1.0], &[1.0; 4], &p).unwrap();
        assert!(matches!(tree, TreeNode::Leaf { .. }));
    }

    #[test]
    fn midpoint_of_adjacent_floats_separates_them() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = midpoint(lo, hi);
        assert!(lo < t && t <= hi);
    }

    #[test]
    fn routing_is_strict() {
        let tree = TreeNode::Internal {
            feature: 0,
            threshold: 1.5,
            children: Box::new((TreeNode::Leaf { weight: 1.0 }, TreeNode::Leaf { weight: 2.0 })),
        };
        assert_eq!(tree.predict(&[1.4]), 1.0);
        assert_eq!(tree.predict(&[1.5]), 2.0);
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = column(&[0.0, 1.0]);
        assert!(build_tree(&x, &[0.0], &[1.0, 1.0], &params(1.0, 0.0, 1)).is_err());
        assert!(build_tree(&x, &[0.0, 0.0], &[1.0, -1.0], &params(1.0, 0.0, 1)).is_err());
        let empty = FeatureMatrix::from_rows(vec![], &[]).unwrap();
        assert!(matches!(
            build_tree(&empty, &[], &[], &params(1.0, 0.0, 1)),
            Err(Error::Degenerate(_))
        ));
    }
}
