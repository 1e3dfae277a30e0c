//! Dense ground truth: pseudo-inverse solves, exact sampling laws and
//! the matrix-distance inequalities used to check the sketch.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::linalg;

pub type DenseMatrix = DMatrix<Complex64>;
pub type DenseVector = DVector<Complex64>;

/// Largest dimension the dense oracle accepts.
pub const DENSE_LIMIT: usize = 5000;

fn check_dims(a: &DenseMatrix) -> Result<()> {
    let dim = a.nrows().max(a.ncols());
    if dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

/// Moore-Penrose pseudo-inverse. Singular values at or below
/// `σ₁·max(m, n)·ε_machine` are treated as zero.
pub fn pinv(a: &DenseMatrix) -> Result<DenseMatrix> {
    check_dims(a)?;
    let (m, n) = a.shape();
    let svd = linalg::thin_svd(a)?;
    let s1 = svd.s.first().copied().unwrap_or(0.0);
    let cutoff = s1 * m.max(n) as f64 * f64::EPSILON;
    let mut out = DenseMatrix::zeros(n, m);
    for (r, &sigma) in svd.s.iter().enumerate() {
        if sigma > cutoff && sigma > 0.0 {
            out += (svd.v.column(r) * svd.u.column(r).adjoint()).unscale(sigma);
        }
    }
    Ok(out)
}

/// `A⁻¹b` with `A⁻¹` the pseudo-inverse.
pub fn pinv_solve(a: &DenseMatrix, b: &DenseVector) -> Result<DenseVector> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    Ok(pinv(a)? * b)
}

/// `(A†A)⁻¹A†b`, the normal-equations form of the same solution.
pub fn normal_equations_solve(a: &DenseMatrix, b: &DenseVector) -> Result<DenseVector> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let gram = a.adjoint() * a;
    Ok(pinv(&gram)? * (a.adjoint() * b))
}

pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_dims(a)?;
    linalg::singular_values(a)
}

/// Number of singular values above the pseudo-inverse cutoff.
pub fn numerical_rank(a: &DenseMatrix) -> Result<usize> {
    let s = singular_values(a)?;
    let s1 = s.first().copied().unwrap_or(0.0);
    let cutoff = s1 * a.nrows().max(a.ncols()) as f64 * f64::EPSILON;
    Ok(s.iter().filter(|&&x| x > cutoff && x > 0.0).count())
}

/// `D_x(i) = |x(i)|² / ‖x‖²`.
pub fn exact_distribution(x: &[Complex64]) -> Result<Vec<f64>> {
    let total: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroNormSample);
    }
    Ok(x.iter().map(|v| v.norm_sqr() / total).collect())
}

/// Total variation distance, half the ℓ₁ distance.
pub fn exact_tv(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different supports");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// TV between an empirical histogram and a probability vector.
pub fn empirical_tv(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    exact_tv(&freq, probs)
}

/// Pearson statistic and degrees of freedom. Cells with zero expected
/// count must be empty and are skipped.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p > 0.0 {
            let e = p * n as f64;
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        } else if c > 0 {
            return (f64::INFINITY, cells.max(1));
        }
    }
    (stat, cells.saturating_sub(1))
}

/// Upper `alpha` quantile of chi-square with `df` degrees of freedom.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    if df == 0 {
        return 0.0;
    }
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha)
}

/// How far `x` is from Hermitian PSD, relative to its largest eigenvalue
/// magnitude. Zero for a PSD matrix.
pub fn psd_defect(x: &DenseMatrix) -> Result<f64> {
    check_dims(x)?;
    if !x.is_square() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: x.ncols(),
        });
    }
    let scale = x.norm().max(f64::MIN_POSITIVE);
    let herm = (x - x.adjoint()).norm() / scale;
    let sym = (x + x.adjoint()).unscale(2.0);
    let eig = linalg::hermitian_eigenvalues(&sym)?;
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.iter().map(|e| e.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    Ok(herm.max((-min / max).max(0.0)))
}

pub const PSD_TOL: f64 = 1e-10;

fn require_psd(x: &DenseMatrix) -> Result<()> {
    let defect = psd_defect(x)?;
    if defect > PSD_TOL {
        return Err(Error::NotPsd { defect });
    }
    Ok(())
}

fn min_nonzero_singular(x: &DenseMatrix) -> Result<f64> {
    let s = singular_values(x)?;
    let cutoff = s[0] * x.nrows() as f64 * f64::EPSILON;
    Ok(s.iter()
        .copied()
        .filter(|&v| v > cutoff && v > 0.0)
        .fold(f64::INFINITY, f64::min))
}

/// Both sides of `‖X − Y‖_F ≤ (2k)^{1/4} ‖X² − Y²‖_F^{1/2}`.
pub fn sqrt_lemma_sides(x: &DenseMatrix, y: &DenseMatrix) -> Result<(f64, f64)> {
    require_psd(x)?;
    require_psd(y)?;
    let k = numerical_rank(x)?.max(numerical_rank(y)?) as f64;
    let lhs = (x - y).norm();
    let rhs = (2.0 * k).powf(0.25) * (x * x - y * y).norm().sqrt();
    Ok((lhs, rhs))
}

pub fn check_sqrt_lemma(x: &DenseMatrix, y: &DenseMatrix) -> Result<bool> {
    let (lhs, rhs) = sqrt_lemma_sides(x, y)?;
    let scale = x.norm().max(y.norm());
    Ok(lhs <= rhs * (1.0 + 1e-9) + 1e-12 * scale)
}

/// Both sides of `‖X⁻¹ − Y⁻¹‖_F ≤ 3‖X − Y‖_F / σ_min²`.
pub fn inv_lemma_sides(x: &DenseMatrix, y: &DenseMatrix) -> Result<(f64, f64)> {
    require_psd(x)?;
    require_psd(y)?;
    let lhs = (pinv(x)? - pinv(y)?).norm();
    let smin = min_nonzero_singular(x)?.min(min_nonzero_singular(y)?);
    let rhs = 3.0 * (x - y).norm() / (smin * smin);
    Ok((lhs, rhs))
}

pub fn check_inv_lemma(x: &DenseMatrix, y: &DenseMatrix) -> Result<bool> {
    let (lhs, rhs) = inv_lemma_sides(x, y)?;
    Ok(lhs <= rhs * (1.0 + 1e-9))
}

pub fn dense_from_real(rows: usize, cols: usize, data: &[f64]) -> DenseMatrix {
    DenseMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)))
}

pub fn vector_from_real(data: &[f64]) -> DenseVector {
    DenseVector::from_iterator(data.len(), data.iter().map(|&x| Complex64::new(x, 0.0)))
}
