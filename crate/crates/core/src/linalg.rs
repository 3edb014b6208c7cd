//! Dense linear-algebra helpers on top of nalgebra.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

/// Returns `(A + Aᵀ) / 2`.
pub fn symmetrize<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    let half = T::lit(0.5);
    (a + a.transpose()) * half
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues<T: Scalar>(a: &DMatrix<T>) -> Vec<T> {
    let mut values: Vec<T> = SymmetricEigen::new(symmetrize(a))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    values
}

/// Spectral condition number of a symmetric matrix; `None` when it is not
/// positive definite.
pub fn spd_condition<T: Scalar>(a: &DMatrix<T>) -> Option<T> {
    let values = symmetric_eigenvalues(a);
    let min = *values.first()?;
    let max = *values.last()?;
    if min <= T::zero() {
        None
    } else {
        Some(max / min)
    }
}

/// Solves `A X = B` for symmetric positive-definite `A`.
///
/// Fails with [`Error::IllConditioned`] when the estimated condition number
/// exceeds [`Scalar::condition_limit`] instead of regularizing silently.
pub fn spd_solve<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "system matrix {}x{} with right-hand side {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("linear system"));
    }
    let sym = symmetrize(a);
    match spd_condition(&sym) {
        None => return Err(Error::Singular),
        Some(cond) if cond > T::condition_limit() => {
            return Err(Error::IllConditioned {
                condition: cond.to_f64_lossy(),
            })
        }
        Some(_) => {}
    }
    let chol = Cholesky::new(sym).ok_or(Error::Singular)?;
    Ok(chol.solve(b))
}

pub fn spd_solve_vec<T: Scalar>(a: &DMatrix<T>, b: &DVector<T>) -> Result<DVector<T>> {
    let rhs = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let x = spd_solve(a, &rhs)?;
    Ok(DVector::from_column_slice(x.as_slice()))
}

/// Numerical rank from the singular values, relative tolerance `max(m,n)·eps·σ_max`.
pub fn rank<T: Scalar>(a: &DMatrix<T>) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv
        .iter()
        .copied()
        .fold(T::zero(), |m, v| if v > m { v } else { m });
    let tol = max * T::from_count(a.nrows().max(a.ncols())) * T::eps();
    sv.iter().filter(|&&v| v > tol).count()
}

pub fn max_abs<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values
        .into_iter()
        .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
}
