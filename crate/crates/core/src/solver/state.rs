use serde::{Deserialize, Serialize};

use super::params::{FeatureReg, Hyperparams};
use crate::error::{invalid, Result};
use crate::linalg::{frobenius, l1_norm, l21_norm, nuclear_norm, spd_solve, Mat};
use crate::prox::{clamp01, row_shrink, soft_threshold, svt, Threshold};

/// All ADMM iterates. Shapes: X, K, E_f, M1, M5 are n×d; Z, J, M3 are d×c;
/// B, E_l, M2, M4 are n×c.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub x: Mat,
    pub z: Mat,
    pub b: Mat,
    pub j: Mat,
    pub k: Mat,
    pub ef: Mat,
    pub el: Mat,
    pub m1: Mat,
    pub m2: Mat,
    pub m3: Mat,
    pub m4: Mat,
    pub m5: Mat,
    pub mu: f64,
    pub iter: usize,
}

/// Frobenius norms of the five constraint violations, in the order
/// X̃−X−E_f, Ỹ−B−E_l, Z−J, B−KJ, X−K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals(pub [f64; 5]);

impl Residuals {
    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn all_within(&self, eps: f64) -> bool {
        self.0.iter().all(|&r| r <= eps)
    }
}

impl SolverState {
    /// All-zero iterates with μ = μ0.
    pub fn zeros(n: usize, d: usize, c: usize, hp: &Hyperparams) -> Result<Self> {
        if n == 0 || d == 0 || c == 0 {
            return invalid(format!("dimensions must be >= 1, got n={n} d={d} c={c}"));
        }
        for (a, b) in [(n, d), (n, c), (d, c)] {
            if a.checked_mul(b).and_then(|p| p.checked_mul(8)).is_none() {
                return invalid(format!("matrix of size {a}x{b} does not fit in memory"));
            }
        }
        Ok(SolverState {
            x: Mat::zeros(n, d),
            z: Mat::zeros(d, c),
            b: Mat::zeros(n, c),
            j: Mat::zeros(d, c),
            k: Mat::zeros(n, d),
            ef: Mat::zeros(n, d),
            el: Mat::zeros(n, c),
            m1: Mat::zeros(n, d),
            m2: Mat::zeros(n, c),
            m3: Mat::zeros(d, c),
            m4: Mat::zeros(n, c),
            m5: Mat::zeros(n, d),
            mu: hp.mu0,
            iter: 0,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.x.nrows(), self.x.ncols(), self.b.ncols())
    }

    pub fn x_target(&self, xtilde: &Mat) -> Mat {
        let mu = self.mu;
        ((xtilde - &self.ef + &self.k) * mu - &self.m5 + &self.m1) / (2.0 * mu)
    }

    /// `svt(X̂, 1/(2μ))` with `X̂ = (μ(X̃ − E_f + K) − M5 + M1) / 2μ`.
    pub fn update_x(&self, xtilde: &Mat) -> Result<Mat> {
        let tau = Threshold::new(1.0 / (2.0 * self.mu))?;
        svt(&self.x_target(xtilde), tau)
    }

    pub(crate) fn update_x_with_norm(&self, xtilde: &Mat) -> Result<(Mat, f64)> {
        let tau = Threshold::new(1.0 / (2.0 * self.mu))?;
        crate::prox::svt_with_norm(&self.x_target(xtilde), tau, "X update")
    }

    pub fn z_target(&self) -> Mat {
        &self.j - &self.m3 / self.mu
    }

    /// `svt(J − M3/μ, λ1/μ)`.
    pub fn update_z(&self, hp: &Hyperparams) -> Result<Mat> {
        svt(&self.z_target(), Threshold::new(hp.lambda1 / self.mu)?)
    }

    pub(crate) fn update_z_with_norm(&self, hp: &Hyperparams) -> Result<(Mat, f64)> {
        let eta = Threshold::new(hp.lambda1 / self.mu)?;
        crate::prox::svt_with_norm(&self.z_target(), eta, "Z update")
    }

    /// Unconstrained minimizer of the B subproblem,
    /// `(μ(Ỹ − E_l + KJ) + M2 − M4) / 2μ`.
    pub fn b_unconstrained(&self, ytilde: &Mat) -> Mat {
        let mu = self.mu;
        ((ytilde - &self.el + &self.k * &self.j) * mu + &self.m2 - &self.m4) / (2.0 * mu)
    }

    /// The B subproblem is isotropic, so clamping its unconstrained minimizer
    /// entrywise gives the exact box-constrained minimizer.
    pub fn update_b(&self, ytilde: &Mat) -> Result<Mat> {
        clamp01(&self.b_unconstrained(ytilde))
    }

    /// Solves `(I + KᵀK) J = Z + KᵀB + (M3 + KᵀM4)/μ`.
    pub fn update_j(&self) -> Result<Mat> {
        let kt = self.k.transpose();
        let d = self.k.ncols();
        let lhs = Mat::identity(d, d) + &kt * &self.k;
        let rhs = &self.z + &kt * &self.b + (&self.m3 + &kt * &self.m4) / self.mu;
        spd_solve(&lhs, &rhs, "J update")
    }

    /// Solves `K (JJᵀ + I) = (M4Jᵀ + M5)/μ + BJᵀ + X` through the transposed
    /// SPD system.
    pub fn update_k(&self) -> Result<Mat> {
        let jt = self.j.transpose();
        let d = self.j.nrows();
        let gram = &self.j * &jt + Mat::identity(d, d);
        let rhs = (&self.m4 * &jt + &self.m5) / self.mu + &self.b * &jt + &self.x;
        Ok(spd_solve(&gram, &rhs.transpose(), "K update")?.transpose())
    }

    pub fn ef_target(&self, xtilde: &Mat) -> Mat {
        xtilde - &self.x + &self.m1 / self.mu
    }

    pub fn update_ef(&self, xtilde: &Mat, hp: &Hyperparams) -> Result<Mat> {
        let target = self.ef_target(xtilde);
        match hp.feature_reg {
            FeatureReg::L1 => soft_threshold(&target, Threshold::new(hp.lambda2 / self.mu)?),
            // argmin λ2‖E‖² + (μ/2)‖E − Ê‖²
            FeatureReg::Frobenius => Ok(target * (self.mu / (self.mu + 2.0 * hp.lambda2))),
        }
    }

    pub fn el_target(&self, ytilde: &Mat) -> Mat {
        ytilde - &self.b + &self.m2 / self.mu
    }

    pub fn update_el(&self, ytilde: &Mat, hp: &Hyperparams) -> Result<Mat> {
        row_shrink(
            &self.el_target(ytilde),
            Threshold::new(hp.lambda3 / self.mu)?,
        )
    }

    pub fn residuals(&self, xtilde: &Mat, ytilde: &Mat) -> Residuals {
        Residuals([
            frobenius(&(xtilde - &self.x - &self.ef)),
            frobenius(&(ytilde - &self.b - &self.el)),
            frobenius(&(&self.z - &self.j)),
            frobenius(&(&self.b - &self.k * &self.j)),
            frobenius(&(&self.x - &self.k)),
        ])
    }

    /// Dual ascent on M1..M5 with the current μ, then advance μ and the
    /// iteration counter.
    pub fn update_multipliers_and_mu(&mut self, xtilde: &Mat, ytilde: &Mat, hp: &Hyperparams) {
        let mu = self.mu;
        self.m1 += (xtilde - &self.x - &self.ef) * mu;
        self.m2 += (ytilde - &self.b - &self.el) * mu;
        self.m3 += (&self.z - &self.j) * mu;
        self.m4 += (&self.b - &self.k * &self.j) * mu;
        self.m5 += (&self.x - &self.k) * mu;
        self.iter += 1;
        self.mu = hp.mu_at(self.iter);
    }

    pub fn feature_penalty(&self, hp: &Hyperparams) -> f64 {
        match hp.feature_reg {
            FeatureReg::L1 => l1_norm(&self.ef),
            FeatureReg::Frobenius => self.ef.norm_squared(),
        }
    }

    /// `‖X‖_* + λ1‖Z‖_* + λ2 R(E_f) + λ3‖E_l‖_{2,1}`.
    pub fn objective(&self, hp: &Hyperparams) -> Result<f64> {
        Ok(nuclear_norm(&self.x)?
            + hp.lambda1 * nuclear_norm(&self.z)?
            + hp.lambda2 * self.feature_penalty(hp)
            + hp.lambda3 * l21_norm(&self.el))
    }

    /// Augmented Lagrangian at the current iterates and multipliers.
    pub fn augmented_lagrangian(
        &self,
        xtilde: &Mat,
        ytilde: &Mat,
        hp: &Hyperparams,
    ) -> Result<f64> {
        let r1 = xtilde - &self.x - &self.ef;
        let r2 = ytilde - &self.b - &self.el;
        let r3 = &self.z - &self.j;
        let r4 = &self.b - &self.k * &self.j;
        let r5 = &self.x - &self.k;
        let linear = self.m1.dot(&r1)
            + self.m2.dot(&r2)
            + self.m3.dot(&r3)
            + self.m4.dot(&r4)
            + self.m5.dot(&r5);
        let quadratic = r1.norm_squared()
            + r2.norm_squared()
            + r3.norm_squared()
            + r4.norm_squared()
            + r5.norm_squared();
        Ok(self.objective(hp)? + linear + 0.5 * self.mu * quadratic)
    }
}
