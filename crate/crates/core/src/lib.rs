//! Multilayer-perceptron classifiers built from scratch to compare Xavier
//! and Kaiming weight initialization.
//!
//! - [`numerics`]: dense `f64` matrices, ReLU/softmax/cross-entropy, seeded RNG.
//! - [`initializers`]: Xavier (`Var = 1/d`) and Kaiming (`Var = 2/d`) in
//!   normal and uniform variants.
//! - [`network`]: 1/2/3-layer ReLU networks with manual backprop and
//!   finite-difference gradient checking.
//! - [`optimizer`]: SGD with momentum and per-configuration presets.
//! - [`data`]: 85-feature samples, CSV I/O, synthetic cohorts, holdout and
//!   leave-one-out splits.
//! - [`evaluation`]: confusion matrices, per-class and macro metrics.
//! - [`harness`]: end-to-end experiments, the six-cell suite, reports, and
//!   model files.

pub mod data;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod initializers;
pub mod network;
pub mod numerics;
pub mod optimizer;

pub use error::{Error, Result};
