//! Closed-form proximal and projection operators.
//!
//! Each ADMM block update reduces to one of these:
//!
//! * [`svt`]: `argmin_X t‖X‖_* + ½‖X − M‖²_F`
//! * [`soft_threshold`]: `argmin_E t‖E‖_1 + ½‖E − M‖²_F`
//! * [`row_shrink`]: `argmin_E t‖E‖_{2,1} + ½‖E − M‖²_F`
//! * [`clamp01`]: Euclidean projection onto `[0, 1]^{n×c}`
//!
//! All of them are pure: inputs are borrowed and a fresh matrix is returned.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{ensure_finite, recompose, thin_svd, Mat};

/// A nonnegative shrinkage threshold.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return invalid(format!("threshold must be finite and >= 0, got {value}"));
        }
        Ok(Threshold(value))
    }

    pub const ZERO: Threshold = Threshold(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Singular value thresholding.
pub fn svt(m: &Mat, tau: Threshold) -> Result<Mat> {
    svt_with_norm(m, tau, "svt operand").map(|(x, _)| x)
}

/// SVT that also returns the nuclear norm of the result (the sum of the
/// shrunk singular values), which the solver reuses for its objective trace.
pub(crate) fn svt_with_norm(m: &Mat, tau: Threshold, operand: &'static str) -> Result<(Mat, f64)> {
    ensure_finite(m, operand)?;
    let svd = thin_svd(m, operand)?;
    let shrunk: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| (s - tau.0).max(0.0))
        .collect();
    let nuclear = shrunk.iter().sum();
    Ok((recompose(&svd.u, &shrunk, &svd.v_t), nuclear))
}

/// Entrywise soft-thresholding, `sign(e)·max(|e| − ω, 0)`.
pub fn soft_threshold(m: &Mat, omega: Threshold) -> Result<Mat> {
    ensure_finite(m, "soft-threshold operand")?;
    let w = omega.0;
    Ok(m.map(|e| {
        if e > w {
            e - w
        } else if e < -w {
            e + w
        } else {
            0.0
        }
    }))
}

/// Row-wise group shrinkage for the ℓ2,1 norm. Rows whose norm does not
/// exceed `xi` (including all-zero rows) become zero.
pub fn row_shrink(m: &Mat, xi: Threshold) -> Result<Mat> {
    ensure_finite(m, "row-shrink operand")?;
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        let norm = row.norm();
        if norm > xi.0 {
            row.scale_mut((norm - xi.0) / norm);
        } else {
            row.fill(0.0);
        }
    }
    Ok(out)
}

/// Entrywise projection onto `[0, 1]`.
pub fn clamp01(m: &Mat) -> Result<Mat> {
    ensure_finite(m, "clamp operand")?;
    Ok(m.map(|v| v.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: f64) -> Threshold {
        Threshold::new(v).unwrap()
    }

    #[test]
    fn threshold_rejects_negative_and_nan() {
        assert!(Threshold::new(-1e-9).is_err());
        assert!(Threshold::new(f64::NAN).is_err());
        assert!(Threshold::new(f64::INFINITY).is_err());
        assert_eq!(Threshold::new(0.0).unwrap(), Threshold::ZERO);
    }

    #[test]
    fn svt_on_nonnegative_diagonal() {
        let m = Mat::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let out = svt(&m, t(2.0)).unwrap();
        let expected = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!((out - expected).norm() < 1e-12);
    }

    #[test]
    fn svt_zero_threshold_is_identity() {
        let m = Mat::from_row_slice(3, 2, &[1.0, -2.0, 0.5, 4.0, -3.0, 0.25]);
        let out = svt(&m, Threshold::ZERO).unwrap();
        assert!((out - &m).norm() < 1e-12);
    }

    #[test]
    fn svt_rank_one_scales_by_four_fifths() {
        let u = nalgebra::DVector::from_vec(vec![0.6, 0.0, 0.8]);
        let v = nalgebra::DVector::from_vec(vec![1.0, 2.0, 2.0]) / 3.0;
        let m = (&u * v.transpose()) * 5.0;
        let out = svt(&m, t(1.0)).unwrap();
        assert!((out - &m * 0.8).norm() < 1e-12);
    }

    #[test]
    fn svt_rejects_nan_operand() {
        let m = Mat::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert!(svt(&m, t(1.0)).is_err());
    }

    #[test]
    fn soft_threshold_cases() {
        let m = Mat::from_row_slice(2, 2, &[0.5, -2.0, 0.0, 3.0]);
        let out = soft_threshold(&m, t(1.0)).unwrap();
        assert_eq!(out, Mat::from_row_slice(2, 2, &[0.0, -1.0, 0.0, 2.0]));
        assert_eq!(soft_threshold(&m, Threshold::ZERO).unwrap(), m);
        assert_eq!(soft_threshold(&m, t(3.5)).unwrap(), Mat::zeros(2, 2));
    }

    #[test]
    fn row_shrink_cases() {
        let m = Mat::from_row_slice(3, 2, &[3.0, 4.0, 0.3, 0.4, 0.0, 0.0]);
        let out = row_shrink(&m, t(2.0)).unwrap();
        let expected = Mat::from_row_slice(3, 2, &[1.8, 2.4, 0.0, 0.0, 0.0, 0.0]);
        assert!((out - expected).norm() < 1e-12);

        let full = Mat::from_row_slice(2, 2, &[3.0, 4.0, -1.0, 0.5]);
        assert_eq!(row_shrink(&full, Threshold::ZERO).unwrap(), full);
    }

    #[test]
    fn row_shrink_boundary_goes_to_zero() {
        let m = Mat::from_row_slice(1, 2, &[3.0, 4.0]);
        assert_eq!(row_shrink(&m, t(5.0)).unwrap(), Mat::zeros(1, 2));
    }

    #[test]
    fn clamp01_cases() {
        let m = Mat::from_row_slice(1, 3, &[1.5, -0.3, 0.4]);
        let out = clamp01(&m).unwrap();
        assert_eq!(out, Mat::from_row_slice(1, 3, &[1.0, 0.0, 0.4]));
        assert_eq!(clamp01(&out).unwrap(), out);
    }
}
