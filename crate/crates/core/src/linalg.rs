//! Dense decompositions. Matrices stay in nalgebra; SVD and Hermitian
//! eigenvalues are computed by faer.

use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

fn to_faer(a: &DMatrix<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Thin SVD `A = U diag(s) V†`, singular values descending.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DMatrix<Complex64>,
    pub s: Vec<f64>,
    pub v: DMatrix<Complex64>,
}

pub fn thin_svd(a: &DMatrix<Complex64>) -> Result<ThinSvd> {
    let svd = to_faer(a).thin_svd().map_err(|_| Error::NoConvergence)?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let r = s.nrows();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&x, &y| s[y].re.total_cmp(&s[x].re));
    Ok(ThinSvd {
        u: DMatrix::from_fn(u.nrows(), r, |i, j| u[(i, order[j])]),
        s: order.iter().map(|&i| s[i].re).collect(),
        v: DMatrix::from_fn(v.nrows(), r, |i, j| v[(i, order[j])]),
    })
}

/// Singular values, descending.
pub fn singular_values(a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let mut s = to_faer(a).singular_values().map_err(|_| Error::NoConvergence)?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle
/// is read.
pub fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let mut e = to_faer(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    e.sort_by(f64::total_cmp);
    Ok(e)
}
