use crate::error::{FlrError, Result};
use crate::linalg::{ensure_finite, Mat};

/// Minimum-norm least-squares projection `argmin_Z ‖XZ − Y‖_F`, fit directly
/// on (possibly noisy) data. Used as the naive reference classifier.
pub fn least_squares_projection(x: &Mat, y: &Mat) -> Result<Mat> {
    ensure_finite(x, "baseline features")?;
    ensure_finite(y, "baseline labels")?;
    if x.nrows() != y.nrows() {
        return Err(FlrError::Validation("feature/label row mismatch".into()));
    }
    let svd = x.clone().svd(true, true);
    let eps = f64::EPSILON * x.nrows().max(x.ncols()) as f64 * svd.singular_values.max();
    svd.solve(y, eps)
        .map_err(|reason| FlrError::NumericFailure {
            operand: "least-squares baseline",
            reason: reason.to_string(),
        })
}
