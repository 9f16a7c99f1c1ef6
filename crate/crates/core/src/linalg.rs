//! Dense real-symmetric matrix helpers on top of `faer`.
//!
//! Every supported model is time-reversal symmetric in the computational
//! basis, so all operators are real symmetric and stored as `Mat<f64>`.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Dense real matrix used for every operator in the crate.
pub type Matrix = Mat<f64>;

/// Largest entrywise asymmetry `max |m_ij - m_ji|`.
pub fn asymmetry(m: MatRef<'_, f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Fails with a validation error unless `m` is square and symmetric to `tol`.
pub fn ensure_symmetric(m: MatRef<'_, f64>, tol: f64, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Validation(format!(
            "{what} is {}x{}, expected a square matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let a = asymmetry(m);
    if a > tol {
        return Err(Error::Validation(format!(
            "{what} is not Hermitian: max |m_ij - m_ji| = {a:e} > {tol:e}"
        )));
    }
    Ok(())
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigensolver failed: {e:?}")))
}

/// Operator norm (largest singular value). Empty matrices have norm zero.
pub fn operator_norm(m: MatRef<'_, f64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    // faer is fastest on tall inputs
    let sv = if m.nrows() >= m.ncols() {
        m.singular_values()
    } else {
        m.transpose().singular_values()
    };
    sv.map(|s| s.first().copied().unwrap_or(0.0))
        .map_err(|e| Error::Numeric(format!("SVD failed: {e:?}")))
}

/// Operator norm of a symmetric matrix, via its extreme eigenvalues.
pub fn symmetric_norm(m: MatRef<'_, f64>) -> Result<f64> {
    let ev = symmetric_eigenvalues(m)?;
    Ok(ev
        .first()
        .zip(ev.last())
        .map(|(lo, hi)| lo.abs().max(hi.abs()))
        .unwrap_or(0.0))
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Matrix {
    a * b - b * a
}

/// Kronecker product `a ⊗ b` (first factor most significant).
pub fn kron(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Matrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    (a - b).norm_l2()
}

/// `U diag(values) Uᵀ`.
pub fn from_eigenbasis(u: MatRef<'_, f64>, values: &[f64]) -> Matrix {
    let scaled = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * values[j]);
    &scaled * u.transpose()
}
