use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Regularizer applied to the feature-noise matrix E_f.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FeatureReg {
    /// `λ2‖E_f‖_1`, suited to sparse or Laplacian corruption.
    #[default]
    L1,
    /// `λ2‖E_f‖²_F`, suited to dense Gaussian corruption.
    Frobenius,
}

/// Which error term, if any, is pinned to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    Full,
    /// E_f ≡ 0, so the recovered X has to match X̃ directly.
    NoFeatureRecovery,
    /// E_l ≡ 0, so B has to match Ỹ directly.
    NoLabelRecovery,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub mu0: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub iter_max: usize,
    pub feature_reg: FeatureReg,
    /// Upper bound on μ. `None` lets it grow without limit.
    pub mu_cap: Option<f64>,
    /// Stop on residuals scaled by the magnitude of the data instead of raw
    /// Frobenius norms.
    pub relative_residuals: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda1: 0.1,
            lambda2: 0.1,
            lambda3: 0.1,
            mu0: 1e-3,
            rho: 1.2,
            epsilon: 1e-6,
            iter_max: 1000,
            feature_reg: FeatureReg::L1,
            mu_cap: Some(1e12),
            relative_residuals: false,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                invalid(format!("{name} must be finite and > 0, got {v}"))
            }
        };
        positive("lambda1", self.lambda1)?;
        positive("lambda2", self.lambda2)?;
        positive("lambda3", self.lambda3)?;
        positive("mu0", self.mu0)?;
        positive("epsilon", self.epsilon)?;
        if !(self.rho.is_finite() && self.rho > 1.0) {
            return invalid(format!("rho must be finite and > 1, got {}", self.rho));
        }
        if let Some(cap) = self.mu_cap {
            positive("mu_cap", cap)?;
        }
        Ok(())
    }

    /// Penalty after `t` completed iterations: `min(μ0·ρ^t, mu_cap)`.
    pub fn mu_at(&self, t: usize) -> f64 {
        let exponent = i32::try_from(t).unwrap_or(i32::MAX);
        let mu = self.mu0 * self.rho.powi(exponent);
        match self.mu_cap {
            Some(cap) => mu.min(cap),
            None => mu,
        }
    }
}
