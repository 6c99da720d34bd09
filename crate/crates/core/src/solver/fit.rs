use serde::{Deserialize, Serialize};

use super::params::{Ablation, Hyperparams};
use super::state::{Residuals, SolverState};
use crate::dataset::ensure_one_hot;
use crate::error::{FlrError, Result};
use crate::linalg::{ensure_finite, frobenius, is_finite, l21_norm, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    IterMax,
}

/// One row of the convergence trace. Row 0 describes the zero initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub residuals: Residuals,
    pub objective: f64,
    pub mu: f64,
    /// `μ_t‖ΔK‖_F, μ_t‖ΔJ‖_F, μ_t‖ΔE_f‖_F, μ_t‖ΔE_l‖_F` for the step that
    /// produced this row; these should tend to zero near a stationary point.
    pub scaled_steps: [f64; 4],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
}

impl ConvergenceTrace {
    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Final iterates, including the auxiliary blocks and multipliers.
    pub state: SolverState,
    pub trace: ConvergenceTrace,
    pub termination: Termination,
}

impl FitResult {
    pub fn x_star(&self) -> &Mat {
        &self.state.x
    }

    /// The learned projection classifier (d×c).
    pub fn z_star(&self) -> &Mat {
        &self.state.z
    }

    pub fn ef_star(&self) -> &Mat {
        &self.state.ef
    }

    pub fn el_star(&self) -> &Mat {
        &self.state.el
    }

    pub fn iterations(&self) -> usize {
        self.state.iter
    }
}

/// Runs the full ADMM on noisy features `xtilde` (n×d) and one-hot noisy
/// labels `ytilde` (n×c).
pub fn fit(xtilde: &Mat, ytilde: &Mat, hp: &Hyperparams) -> Result<FitResult> {
    fit_with_ablation(xtilde, ytilde, hp, Ablation::Full)
}

/// Same as [`fit`], but may pin E_f or E_l to zero for ablation studies. A
/// pinned block skips its update; its constraint and multiplier stay active.
pub fn fit_with_ablation(
    xtilde: &Mat,
    ytilde: &Mat,
    hp: &Hyperparams,
    ablation: Ablation,
) -> Result<FitResult> {
    hp.validate()?;
    ensure_finite(xtilde, "feature matrix")?;
    ensure_one_hot(ytilde)?;
    let (n, d) = xtilde.shape();
    if ytilde.nrows() != n {
        return Err(FlrError::Validation(format!(
            "feature matrix has {n} rows but label matrix has {}",
            ytilde.nrows()
        )));
    }
    let c = ytilde.ncols();

    let mut state = SolverState::zeros(n, d, c, hp)?;
    let scales = residual_scales(xtilde, ytilde, hp);
    let mut trace = ConvergenceTrace::default();
    trace.records.push(IterationRecord {
        iter: 0,
        residuals: state.residuals(xtilde, ytilde),
        objective: 0.0,
        mu: state.mu,
        scaled_steps: [0.0; 4],
    });

    let mut termination = Termination::IterMax;
    while state.iter < hp.iter_max {
        let mu = state.mu;
        let iteration = state.iter + 1;
        let prev_k = state.k.clone();
        let prev_j = state.j.clone();
        let prev_ef = state.ef.clone();
        let prev_el = state.el.clone();

        let (x, x_nuc) = state.update_x_with_norm(xtilde)?;
        state.x = check(x, iteration, "X")?;
        let (z, z_nuc) = state.update_z_with_norm(hp)?;
        state.z = check(z, iteration, "Z")?;
        state.b = check(state.update_b(ytilde)?, iteration, "B")?;
        state.j = check(state.update_j()?, iteration, "J")?;
        state.k = check(state.update_k()?, iteration, "K")?;
        if ablation != Ablation::NoFeatureRecovery {
            state.ef = check(state.update_ef(xtilde, hp)?, iteration, "E_f")?;
        }
        if ablation != Ablation::NoLabelRecovery {
            state.el = check(state.update_el(ytilde, hp)?, iteration, "E_l")?;
        }
        state.update_multipliers_and_mu(xtilde, ytilde, hp);
        for (block, m) in [
            ("M1", &state.m1),
            ("M2", &state.m2),
            ("M3", &state.m3),
            ("M4", &state.m4),
            ("M5", &state.m5),
        ] {
            if !is_finite(m) {
                return Err(FlrError::Divergence { iteration, block });
            }
        }

        let residuals = state.residuals(xtilde, ytilde);
        let objective = x_nuc
            + hp.lambda1 * z_nuc
            + hp.lambda2 * state.feature_penalty(hp)
            + hp.lambda3 * l21_norm(&state.el);
        trace.records.push(IterationRecord {
            iter: state.iter,
            residuals,
            objective,
            mu: state.mu,
            scaled_steps: [
                mu * frobenius(&(&state.k - prev_k)),
                mu * frobenius(&(&state.j - prev_j)),
                mu * frobenius(&(&state.ef - prev_ef)),
                mu * frobenius(&(&state.el - prev_el)),
            ],
        });

        let converged = residuals
            .0
            .iter()
            .zip(scales)
            .all(|(r, s)| r / s <= hp.epsilon);
        if converged {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(FitResult {
        state,
        trace,
        termination,
    })
}

fn check(m: Mat, iteration: usize, block: &'static str) -> Result<Mat> {
    if is_finite(&m) {
        Ok(m)
    } else {
        Err(FlrError::Divergence { iteration, block })
    }
}

/// Divisors applied to the five residuals before comparing against ε. All
/// ones unless relative residuals are requested.
fn residual_scales(xtilde: &Mat, ytilde: &Mat, hp: &Hyperparams) -> [f64; 5] {
    if !hp.relative_residuals {
        return [1.0; 5];
    }
    let sx = 1.0 + frobenius(xtilde);
    let sy = 1.0 + frobenius(ytilde);
    [sx, sy, 1.0, sy, sx]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iter_max_zero_returns_initial_state() {
        let xt = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let yt = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let hp = Hyperparams {
            iter_max: 0,
            ..Hyperparams::default()
        };
        let res = fit(&xt, &yt, &hp).unwrap();
        assert_eq!(res.termination, Termination::IterMax);
        assert_eq!(res.trace.len(), 1);
        assert_eq!(res.x_star(), &Mat::zeros(2, 2));
        assert_eq!(res.z_star(), &Mat::zeros(2, 2));
    }

    #[test]
    fn rejects_non_one_hot_labels() {
        let xt = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let yt = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            fit(&xt, &yt, &Hyperparams::default()),
            Err(FlrError::Validation(_))
        ));
        let soft = Mat::from_row_slice(2, 2, &[0.5, 0.5, 0.0, 1.0]);
        assert!(fit(&xt, &soft, &Hyperparams::default()).is_err());
    }

    #[test]
    fn rejects_mismatched_rows() {
        let xt = Mat::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let yt = Mat::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(fit(&xt, &yt, &Hyperparams::default()).is_err());
    }

    #[test]
    fn single_example_converges() {
        let xt = Mat::from_row_slice(1, 1, &[2.0]);
        let yt = Mat::from_row_slice(1, 1, &[1.0]);
        let res = fit(&xt, &yt, &Hyperparams::default()).unwrap();
        assert_eq!(res.termination, Termination::Converged);
        assert!(res.trace.last().unwrap().residuals.all_within(1e-6));
    }

    #[test]
    fn divergence_is_reported_with_iteration() {
        let xt = Mat::from_row_slice(1, 2, &[1e300, -1e300]);
        let yt = Mat::from_row_slice(1, 1, &[1.0]);
        let hp = Hyperparams {
            mu_cap: None,
            ..Hyperparams::default()
        };
        match fit(&xt, &yt, &hp) {
            Err(FlrError::Divergence { iteration, .. }) => assert!(iteration >= 1),
            Err(FlrError::NumericFailure { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
