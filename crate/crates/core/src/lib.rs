//! Feature-and-label recovery (FLR) for learning under hybrid noise.
//!
//! Given noisy features `X̃` (n×d) and one-hot noisy labels `Ỹ` (n×c), the
//! solver recovers a low-rank clean feature matrix `X`, sparse feature noise
//! `E_f`, row-sparse label noise `E_l`, and a low-rank projection `Z` with
//! `XZ ≈ Ỹ − E_l`. `Z` then serves as a linear classifier.
//!
//! Modules:
//! - [`prox`]: closed-form proximal operators used by the block updates
//! - [`solver`]: the ADMM itself
//! - [`noise`]: seeded feature/label corruption
//! - [`dataset`]: CSV IO, splitting, planted instances
//! - [`eval`]: classifier, accuracy, generalization bound, baseline
//! - [`experiment`]: multi-trial protocol, sweeps and trace export

pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod linalg;
pub mod noise;
pub mod prox;
pub mod solver;

pub use error::{FlrError, Result};
pub use linalg::Mat;
