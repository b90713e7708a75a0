//! Two-layer mixture ensembles over classifier probability outputs.
//!
//! The first layer combines base predictors two ways: weighted soft voting
//! ([`bagging`]) over a chosen set, and gradient-boosted trees ([`gbdt`])
//! trained on the concatenated probabilities of each predictor group. The
//! second layer soft-votes over those outputs ([`mixture`]). [`eval`] holds
//! the metrics and split protocol, [`synth`] generates stand-in predictors,
//! [`imageprep`] holds the image preprocessing operations, and [`pipeline`]
//! drives everything from a run config.
//!
//! With the default `parallel` feature, inner loops run on rayon. Results are
//! bitwise identical with and without it.

pub mod bagging;
pub mod data;
pub mod error;
pub mod eval;
pub mod gbdt;
pub mod imageprep;
pub mod mixture;
pub mod par;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
