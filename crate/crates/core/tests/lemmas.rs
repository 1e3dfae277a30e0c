mod common;

use common::*;
use rand::Rng;
use sketchsolve::oracle::{self, DenseMatrix};
use sketchsolve::Error;

/// A pair of PSD matrices of random size and rank, sometimes sharing a
/// range and sometimes close to each other.
fn pair<R: Rng>(r: &mut R) -> (DenseMatrix, DenseMatrix) {
    let n = r.random_range(1..=30);
    let kx = r.random_range(1..=6.min(n));
    let ky = r.random_range(1..=6.min(n));
    let x = random_psd(r, n, kx);
    let y = match r.random_range(0..3) {
        0 => random_psd(r, n, ky),
        1 => {
            let g = random_matrix(r, n, kx);
            &x + &g * g.adjoint() * c(1e-3, 0.0)
        }
        _ => x.scale(r.random_range(0.5..2.0)),
    };
    (x, y)
}

#[test]
fn square_root_inequality_on_random_pairs() {
    let mut r = rng(1);
    for t in 0..1000 {
        let (x, y) = pair(&mut r);
        assert!(oracle::check_sqrt_lemma(&x, &y).unwrap(), "pair {t}: {:?}", oracle::sqrt_lemma_sides(&x, &y));
    }
}

#[test]
fn inverse_inequality_on_random_pairs() {
    let mut r = rng(2);
    for t in 0..1000 {
        let (x, y) = pair(&mut r);
        assert!(oracle::check_inv_lemma(&x, &y).unwrap(), "pair {t}: {:?}", oracle::inv_lemma_sides(&x, &y));
    }
}

#[test]
fn frozen_lemma_values() {
    let x = DenseMatrix::identity(2, 2);
    let y = x.scale(2.0);
    let (lhs, rhs) = oracle::sqrt_lemma_sides(&x, &y).unwrap();
    assert!((lhs - 2f64.sqrt()).abs() < 1e-12);
    assert!((rhs - 2f64.sqrt() * 18f64.powf(0.25)).abs() < 1e-12);
    let (lhs, rhs) = oracle::inv_lemma_sides(&x, &y).unwrap();
    assert!((lhs - 2f64.sqrt() / 2.0).abs() < 1e-12);
    assert!((rhs - 3.0 * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn indefinite_inputs_are_refused() {
    let x = oracle::dense_from_real(2, 2, &[1.0, 0.0, 0.0, -0.5]);
    let y = DenseMatrix::identity(2, 2);
    assert!(matches!(oracle::check_sqrt_lemma(&x, &y), Err(Error::NotPsd { .. })));
    assert!(matches!(oracle::check_inv_lemma(&y, &x), Err(Error::NotPsd { .. })));
}

#[test]
fn pseudo_inverse_of_low_rank_psd_matrices() {
    let mut r = rng(3);
    for t in 0..500 {
        let n = r.random_range(2..=30);
        let rank = r.random_range(1..=3.min(n));
        let x = random_psd(&mut r, n, rank);
        let p = oracle::pinv(&x).unwrap();
        let scale = x.norm();
        assert!((&x * &p * &x - &x).norm() <= 1e-8 * scale, "instance {t}");
        assert!((&p * &x * &p - &p).norm() <= 1e-8 * p.norm(), "instance {t}");
    }
}
