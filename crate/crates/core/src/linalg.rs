//! Small dense-matrix helpers shared by the solver, the proximal kernels and
//! the evaluation code. Everything operates on `nalgebra::DMatrix<f64>`.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{invalid, FlrError, Result};

pub type Mat = DMatrix<f64>;

pub fn frobenius(m: &Mat) -> f64 {
    m.norm()
}

/// Entrywise ℓ1 norm.
pub fn l1_norm(m: &Mat) -> f64 {
    m.iter().map(|v| v.abs()).sum()
}

/// Sum of the Euclidean norms of the rows.
pub fn l21_norm(m: &Mat) -> f64 {
    m.row_iter().map(|r| r.norm()).sum()
}

/// Sum of singular values.
pub fn nuclear_norm(m: &Mat) -> Result<f64> {
    Ok(thin_svd(m, "nuclear norm operand")?
        .singular_values
        .iter()
        .sum())
}

pub fn is_finite(m: &Mat) -> bool {
    m.iter().all(|v| v.is_finite())
}

pub(crate) fn ensure_finite(m: &Mat, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return invalid(format!(
            "{what} has an empty dimension ({}x{})",
            m.nrows(),
            m.ncols()
        ));
    }
    if !is_finite(m) {
        return invalid(format!("{what} contains non-finite entries"));
    }
    Ok(())
}

/// Thin SVD with singular values in nonincreasing order.
pub struct ThinSvd {
    pub u: Mat,
    pub singular_values: Vec<f64>,
    pub v_t: Mat,
}

const SVD_MAX_SWEEPS: usize = 10_000;

pub fn thin_svd(m: &Mat, operand: &'static str) -> Result<ThinSvd> {
    let fail = |reason: &str| FlrError::NumericFailure {
        operand,
        reason: reason.to_string(),
    };
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_SWEEPS)
        .ok_or_else(|| fail("SVD did not converge"))?;
    let u = svd.u.ok_or_else(|| fail("SVD returned no left vectors"))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| fail("SVD returned no right vectors"))?;
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return Ok(ThinSvd {
            u,
            singular_values: sv.iter().copied().collect(),
            v_t,
        });
    }
    Ok(ThinSvd {
        u: u.select_columns(order.iter()),
        singular_values: order.iter().map(|&i| sv[i]).collect(),
        v_t: v_t.select_rows(order.iter()),
    })
}

/// Rebuilds `U diag(s) Vᵀ`.
pub fn recompose(u: &Mat, s: &[f64], v_t: &Mat) -> Mat {
    let mut scaled = u.clone();
    for (j, &sj) in s.iter().enumerate() {
        scaled.column_mut(j).scale_mut(sj);
    }
    scaled * v_t
}

/// Solves `A X = rhs` for symmetric positive definite `A`.
pub fn spd_solve(a: &Mat, rhs: &Mat, operand: &'static str) -> Result<Mat> {
    let chol: Cholesky<f64, Dyn> = Cholesky::new(a.clone()).ok_or(FlrError::NumericFailure {
        operand,
        reason: "matrix is not positive definite".to_string(),
    })?;
    Ok(chol.solve(rhs))
}
