//! Seven-block non-convex ADMM for feature-and-label recovery.
//!
//! The problem solved is
//!
//! ```text
//! min ‖X‖_* + λ1‖Z‖_* + λ2 R(E_f) + λ3‖E_l‖_{2,1}
//! s.t. X̃ = X + E_f,  Ỹ = B + E_l,  Z = J,  X = K,  B = KJ,  B ∈ [0,1]^{n×c}
//! ```
//!
//! with `R` either the entrywise ℓ1 norm or the squared Frobenius norm.
//! Every iteration updates X, Z, B, J, K, E_f, E_l in that order (each block
//! sees the freshest values of the blocks before it), then takes a dual
//! ascent step on the five multipliers and grows the penalty μ geometrically.

mod fit;
mod params;
mod state;

pub use fit::{fit, fit_with_ablation, ConvergenceTrace, FitResult, IterationRecord, Termination};
pub use params::{Ablation, FeatureReg, Hyperparams};
pub use state::{Residuals, SolverState};
