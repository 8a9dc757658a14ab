//! Thin bridges to dense eigen, SVD and LU routines.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::majorana::RMat;
use crate::momentum::CMat;

fn to_faer(a: &RMat) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn to_faer_c(a: &CMat) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Eigenvalues of a general real matrix.
pub fn eigenvalues(a: &RMat) -> Result<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    to_faer(a).eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues_complex(a: &CMat) -> Result<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    to_faer_c(a).eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Singular values in decreasing order.
pub fn singular_values(a: &RMat) -> Result<Vec<f64>> {
    let mut s = to_faer(a).singular_values().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

pub fn singular_values_complex(a: &CMat) -> Result<Vec<f64>> {
    let mut s = to_faer_c(a).singular_values().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Solves `A x = b` with partial-pivoting LU.
pub fn solve(a: &RMat, b: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
    let lu = to_faer(a).partial_piv_lu();
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    nalgebra::DVector::from_fn(b.len(), |i, _| x[(i, 0)])
}

/// Dense product through faer's blocked kernel.
pub fn matmul(a: &RMat, b: &RMat) -> RMat {
    let c = to_faer(a) * to_faer(b);
    RMat::from_fn(c.nrows(), c.ncols(), |i, j| c[(i, j)])
}

/// Orthonormal basis of the numerical null space of `a` (right singular vectors with `σ ≤ tol σ_max`).
pub fn null_space_complex(a: &CMat, tol: f64) -> Result<Vec<nalgebra::DVector<Complex64>>> {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Eigensolver("SVD did not return V".into()))?;
    let smax = svd.singular_values.max();
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol * smax.max(1e-300))
        .map(|(i, _)| vt.row(i).adjoint())
        .collect())
}
