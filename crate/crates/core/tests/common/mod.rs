//! Brute-force reference computations, written without the library's own
//! oracle so the two can check each other.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sketchsolve::oracle::{DenseMatrix, DenseVector};
use sketchsolve::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng>(r: &mut R) -> Complex64 {
    c(r.sample(StandardNormal), r.sample(StandardNormal))
}

pub fn random_vec<R: Rng>(r: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| gaussian(r)).collect()
}

pub fn random_matrix<R: Rng>(r: &mut R, m: usize, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |_, _| gaussian(r))
}

pub fn norm_sq(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.re * z.re + z.im * z.im).sum()
}

/// `Σ x*(i) y(i)` by a plain loop.
pub fn brute_inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for i in 0..x.len() {
        s += x[i].conj() * y[i];
    }
    s
}

/// `Σ_{i,j} x*(i) A(i,j) y(j)` by a triple loop over explicit entries.
pub fn brute_bilinear(x: &[Complex64], a: &DenseMatrix, y: &[Complex64]) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += x[i].conj() * a[(i, j)] * y[j];
        }
    }
    s
}

/// `|x(i)|²/‖x‖²` by direct normalization.
pub fn brute_dist(x: &[Complex64]) -> Vec<f64> {
    let total = norm_sq(x);
    x.iter().map(|z| (z.re * z.re + z.im * z.im) / total).collect()
}

pub fn brute_tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn empirical(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// `Mv` by explicit sums.
pub fn brute_mv(m: &DenseMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub fn to_vec(v: &DenseVector) -> Vec<Complex64> {
    v.iter().copied().collect()
}

/// Random Hermitian PSD matrix `G G†` with `G` of size `n × rank`.
pub fn random_psd<R: Rng>(r: &mut R, n: usize, rank: usize) -> DenseMatrix {
    let g = random_matrix(r, n, rank);
    &g * g.adjoint()
}
