//! Numerical library for classification under long-tailed label distributions.
//!
//! The crate centres on a family of pairwise-margin softmax losses and the
//! post-hoc score corrections that target the *balanced* error (the mean of
//! per-class error rates) instead of the plain misclassification rate:
//!
//! - [`dist`]: class priors, long-tail count profiles, synthetic Gaussian tasks;
//! - [`loss`]: the pairwise-margin loss family, its named instantiations, and
//!   analytic gradients with respect to logits;
//! - [`adjust`]: post-hoc logit adjustment, weight normalization, temperature
//!   scaling, and argmax prediction;
//! - [`train`]: mini-batch training of affine softmax classifiers (SGD with
//!   momentum, Adam) plus weight-norm diagnostics;
//! - [`oracle`]: closed-form Bayes-optimal machinery for Gaussian tasks and a
//!   brute-force population-risk minimizer for consistency testing;
//! - [`binary`]: the binary weighted variable-margin loss family, its exact
//!   consistency condition, link functions, and Bayes-risk curves;
//! - [`metrics`]: balanced error, misclassification error, per-class and
//!   per-group breakdowns.
//!
//! Conventions used throughout: classes are 0-indexed `0..L`; binary tasks
//! map label `+1` to class `0` and `-1` to class `1`; argmax ties break
//! toward the lowest index. All stochastic operations take explicit seeds
//! and are driven by the ChaCha8 generator (see [`rng`]).

// Index-based loops are kept where several arrays are walked in lockstep.
#![allow(clippy::needless_range_loop)]

pub mod adjust;
pub mod binary;
pub mod dist;
mod error;
pub mod loss;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod train;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
