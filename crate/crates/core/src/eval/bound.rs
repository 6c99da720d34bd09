use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{frobenius, l1_norm, l21_norm, nuclear_norm, Mat};
use crate::solver::FitResult;

/// Norm budgets and loss constants entering the Rademacher bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub n: usize,
    pub c: usize,
    pub d: usize,
    /// Defaults to `max(n, c)`.
    #[serde(default)]
    pub n_c: Option<usize>,
    #[serde(rename = "X_star_nuc")]
    pub x_star_nuc: f64,
    #[serde(rename = "Z_star_nuc")]
    pub z_star_nuc: f64,
    #[serde(rename = "El_21")]
    pub el_21: f64,
    #[serde(rename = "Ef_1")]
    pub ef_1: f64,
    #[serde(rename = "Xtilde_F")]
    pub xtilde_f: f64,
    #[serde(rename = "lipschitz_L")]
    pub lipschitz: f64,
    #[serde(rename = "loss_bound_B")]
    pub loss_bound: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Upper bound on the Rademacher complexity of the feasible class.
    pub complexity: f64,
    /// Upper bound on the worst-case gap between expected and empirical risk.
    pub gap: f64,
}

impl BoundInputs {
    /// Norm budgets taken from a fitted model; loss constants are supplied.
    pub fn from_fit(
        fit: &FitResult,
        xtilde: &Mat,
        lipschitz: f64,
        loss_bound: f64,
        delta: f64,
    ) -> Result<Self> {
        let (n, d, c) = fit.state.dims();
        Ok(BoundInputs {
            n,
            c,
            d,
            n_c: None,
            x_star_nuc: nuclear_norm(fit.x_star())?,
            z_star_nuc: nuclear_norm(fit.z_star())?,
            el_21: l21_norm(fit.el_star()),
            ef_1: l1_norm(fit.ef_star()),
            xtilde_f: frobenius(xtilde),
            lipschitz,
            loss_bound,
            delta,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return invalid("n and d must be >= 1");
        }
        if self.c < 2 {
            return invalid(format!("the bound needs c >= 2 classes, got {}", self.c));
        }
        for (name, v) in [
            ("X_star_nuc", self.x_star_nuc),
            ("Z_star_nuc", self.z_star_nuc),
            ("El_21", self.el_21),
            ("Ef_1", self.ef_1),
            ("Xtilde_F", self.xtilde_f),
            ("lipschitz_L", self.lipschitz),
            ("loss_bound_B", self.loss_bound),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return invalid(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return invalid(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if matches!(self.n_c, Some(0)) {
            return invalid("n_c must be >= 1");
        }
        Ok(())
    }
}

/// Evaluates
///
/// ```text
/// R ≤ E_l21·C1 + min{X*·Z*·C2, Z*(X̃_F + √d·E_f1)·C3, C4}
/// gap = 2·L·R + B·√(ln(1/δ) / 2nc)
/// ```
///
/// with `C1 = √(3 ln c / nc)`, `C2 = √(ln(2 n_c) / nc)`, `C3 = 1/√(nc)`,
/// `C4 = √(2/c)`.
pub fn rademacher_bound(b: &BoundInputs) -> Result<BoundReport> {
    b.validate()?;
    let nc = (b.n as f64) * (b.c as f64);
    let n_c = b.n_c.unwrap_or(b.n.max(b.c)) as f64;
    let c1 = (3.0 * (b.c as f64).ln() / nc).sqrt();
    let c2 = ((2.0 * n_c).ln() / nc).sqrt();
    let c3 = 1.0 / nc.sqrt();
    let c4 = (2.0 / b.c as f64).sqrt();
    let low_rank = b.x_star_nuc * b.z_star_nuc * c2;
    let data = b.z_star_nuc * (b.xtilde_f + (b.d as f64).sqrt() * b.ef_1) * c3;
    let complexity = b.el_21 * c1 + low_rank.min(data).min(c4);
    let gap =
        2.0 * b.lipschitz * complexity + b.loss_bound * ((1.0 / b.delta).ln() / (2.0 * nc)).sqrt();
    Ok(BoundReport {
        c1,
        c2,
        c3,
        c4,
        complexity,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> BoundInputs {
        BoundInputs {
            n: 1000,
            c: 10,
            d: 20,
            n_c: None,
            x_star_nuc: 0.0,
            z_star_nuc: 0.0,
            el_21: 0.0,
            ef_1: 0.0,
            xtilde_f: 0.0,
            lipschitz: 1.0,
            loss_bound: 2.0,
            delta: 0.05,
        }
    }

    #[test]
    fn c1_for_thousand_by_ten() {
        let r = rademacher_bound(&inputs()).unwrap();
        assert!((r.c1 - 0.026283).abs() < 5e-7);
    }

    #[test]
    fn zero_budgets_leave_only_confidence_term() {
        let b = inputs();
        let r = rademacher_bound(&b).unwrap();
        assert_eq!(r.complexity, 0.0);
        let expected = 2.0 * ((1.0f64 / 0.05).ln() / 20000.0).sqrt();
        assert!((r.gap - expected).abs() < 1e-15);
    }

    #[test]
    fn feature_error_budget_raises_complexity_on_data_branch() {
        let mut b = inputs();
        b.z_star_nuc = 0.1;
        b.x_star_nuc = 1e6;
        b.xtilde_f = 1.0;
        let lo = rademacher_bound(&b).unwrap();
        b.ef_1 = 1.0;
        let hi = rademacher_bound(&b).unwrap();
        assert!(hi.complexity > lo.complexity);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(rademacher_bound(&BoundInputs { c: 1, ..inputs() }).is_err());
        assert!(rademacher_bound(&BoundInputs {
            delta: 1.0,
            ..inputs()
        })
        .is_err());
        assert!(rademacher_bound(&BoundInputs {
            delta: 0.0,
            ..inputs()
        })
        .is_err());
        assert!(rademacher_bound(&BoundInputs {
            ef_1: -1.0,
            ..inputs()
        })
        .is_err());
    }

    #[test]
    fn json_field_names() {
        let json = r#"{"n": 10, "c": 3, "d": 2, "X_star_nuc": 1.0, "Z_star_nuc": 2.0,
            "El_21": 0.5, "Ef_1": 0.1, "Xtilde_F": 3.0, "lipschitz_L": 1.0,
            "loss_bound_B": 1.0, "delta": 0.1}"#;
        let b: BoundInputs = serde_json::from_str(json).unwrap();
        assert_eq!(b.z_star_nuc, 2.0);
        assert!(rademacher_bound(&b).is_ok());
    }
}
