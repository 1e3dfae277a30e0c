//! Inner-product and bilinear-form estimators, and rejection sampling from
//! a thin matrix-vector product.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;

use crate::error::{Error, Result};
use crate::ledger::QueryLedger;
use crate::oracle;
use crate::rng::{StreamRng, StreamSplitter};
use crate::sampled_matrix::SampledMatrix;
use crate::sampled_vector::SampledVector;

/// Query access to a vector.
pub trait QueryAccess {
    fn len(&self) -> usize;
    fn query(&self, i: usize) -> Result<Complex64>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Query plus length-squared sampling access, with the norm known.
pub trait VectorAccess: QueryAccess {
    fn norm_sq(&self) -> Result<f64>;
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize>;
}

/// Entry access to a matrix with known Frobenius norm.
pub trait EntryAccess {
    fn dims(&self) -> (usize, usize);
    fn entry(&self, i: usize, j: usize) -> Result<Complex64>;
    fn frobenius_sq(&self) -> f64;
}

impl QueryAccess for SampledVector {
    fn len(&self) -> usize {
        SampledVector::len(self)
    }

    fn query(&self, i: usize) -> Result<Complex64> {
        self.read(i)
    }
}

impl VectorAccess for SampledVector {
    fn norm_sq(&self) -> Result<f64> {
        Ok(SampledVector::norm_sq(self))
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        SampledVector::sample(self, rng)
    }
}

impl QueryAccess for [Complex64] {
    fn len(&self) -> usize {
        <[Complex64]>::len(self)
    }

    fn query(&self, i: usize) -> Result<Complex64> {
        self.get(i).copied().ok_or_else(|| Error::index(i, self.len()))
    }
}

impl QueryAccess for DVector<Complex64> {
    fn len(&self) -> usize {
        self.nrows()
    }

    fn query(&self, i: usize) -> Result<Complex64> {
        self.as_slice().query(i)
    }
}

/// A vector whose every access is charged to a ledger.
#[derive(Debug, Clone, Copy)]
pub struct Metered<'a, V: ?Sized> {
    pub inner: &'a V,
    pub ledger: &'a QueryLedger,
}

impl<'a, V: ?Sized> Metered<'a, V> {
    pub fn new(inner: &'a V, ledger: &'a QueryLedger) -> Self {
        Metered { inner, ledger }
    }
}

impl<V: QueryAccess + ?Sized> QueryAccess for Metered<'_, V> {
    fn len(&self) -> usize {
        self.inner.len()
    }

    fn query(&self, i: usize) -> Result<Complex64> {
        self.ledger.record_entry();
        self.inner.query(i)
    }
}

impl<V: VectorAccess + ?Sized> VectorAccess for Metered<'_, V> {
    fn norm_sq(&self) -> Result<f64> {
        self.ledger.record_norm();
        self.inner.norm_sq()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        self.ledger.record_sample();
        self.inner.sample(rng)
    }
}

impl EntryAccess for SampledMatrix {
    fn dims(&self) -> (usize, usize) {
        SampledMatrix::dims(self)
    }

    fn entry(&self, i: usize, j: usize) -> Result<Complex64> {
        SampledMatrix::entry(self, i, j)
    }

    fn frobenius_sq(&self) -> f64 {
        SampledMatrix::frobenius_sq(self)
    }
}

/// `A†` seen through entry queries of `A`.
#[derive(Debug, Clone, Copy)]
pub struct Adjoint<'a>(pub &'a SampledMatrix);

impl EntryAccess for Adjoint<'_> {
    fn dims(&self) -> (usize, usize) {
        let (m, n) = self.0.dims();
        (n, m)
    }

    fn entry(&self, i: usize, j: usize) -> Result<Complex64> {
        Ok(self.0.entry(j, i)?.conj())
    }

    fn frobenius_sq(&self) -> f64 {
        self.0.frobenius_sq()
    }
}

/// Median-of-means budget.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EstimatorParams {
    pub epsilon: f64,
    pub delta: f64,
    pub groups: usize,
    pub group_size: u64,
}

fn check_targets(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfig(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

impl EstimatorParams {
    /// `ceil(8 ln(1/δ))` groups.
    pub fn groups_for(delta: f64) -> usize {
        ((8.0 * (1.0 / delta).ln()).ceil() as usize).max(1)
    }

    /// Budget for [`estimate_inner`]: additive error `ε‖x‖‖y‖`, `q = ceil(4/ε²)`.
    pub fn inner(epsilon: f64, delta: f64) -> Result<Self> {
        check_targets(epsilon, delta)?;
        Ok(EstimatorParams {
            epsilon,
            delta,
            groups: Self::groups_for(delta),
            group_size: size_from(4.0 / (epsilon * epsilon)),
        })
    }

    /// Budget for [`estimate_bilinear`]: additive error `ε`,
    /// `q = ceil(4‖x‖²‖y‖²‖A‖_F² / ε²)`.
    pub fn bilinear(epsilon: f64, delta: f64, x_norm_sq: f64, y_norm_sq: f64, a_fro_sq: f64) -> Result<Self> {
        check_targets(epsilon, delta)?;
        let var = x_norm_sq * y_norm_sq * a_fro_sq;
        Ok(EstimatorParams {
            epsilon,
            delta,
            groups: Self::groups_for(delta),
            group_size: size_from(4.0 * var / (epsilon * epsilon)),
        })
    }

    /// Explicit budget, bypassing the variance bound.
    pub fn fixed(groups: usize, group_size: u64) -> Self {
        EstimatorParams {
            epsilon: f64::NAN,
            delta: f64::NAN,
            groups: groups.max(1),
            group_size: group_size.max(1),
        }
    }

    /// Clamp the group size to `max`; the flag says whether it bit.
    pub fn capped(mut self, max: Option<u64>) -> (Self, bool) {
        match max {
            Some(max) if self.group_size > max => {
                self.group_size = max.max(1);
                (self, true)
            }
            _ => (self, false),
        }
    }

    pub fn total_draws(&self) -> u64 {
        self.groups as u64 * self.group_size
    }
}

fn size_from(q: f64) -> u64 {
    if q.is_finite() && q < u64::MAX as f64 {
        (q.ceil() as u64).max(1)
    } else {
        u64::MAX
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: Complex64,
    pub draws: u64,
    pub guard_hits: u64,
}

const GUARD_LIMIT: u32 = 64;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Componentwise median of `groups` means of `group_size` draws each. Group
/// `g` draws from stream `estimator-g{g}`.
fn median_of_means<F>(params: &EstimatorParams, streams: &StreamSplitter, mut draw: F) -> Result<Estimate>
where
    F: FnMut(&mut StreamRng, &mut u64) -> Result<Complex64>,
{
    let mut re = Vec::with_capacity(params.groups);
    let mut im = Vec::with_capacity(params.groups);
    let mut guard_hits = 0;
    for g in 0..params.groups {
        let mut rng = streams.stream(&format!("estimator-g{g}"));
        let mut sum = Complex64::new(0.0, 0.0);
        for _ in 0..params.group_size {
            let z = draw(&mut rng, &mut guard_hits)?;
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonfiniteSample);
            }
            sum += z;
        }
        let mean = sum / params.group_size as f64;
        re.push(mean.re);
        im.push(mean.im);
    }
    Ok(Estimate {
        value: Complex64::new(median(&mut re), median(&mut im)),
        draws: params.total_draws(),
        guard_hits,
    })
}

/// Draw from `x` until the sampled entry is nonzero.
fn guarded_draw<X, R>(x: &X, rng: &mut R, hits: &mut u64) -> Result<(usize, Complex64)>
where
    X: VectorAccess + ?Sized,
    R: Rng + ?Sized,
{
    for _ in 0..GUARD_LIMIT {
        let i = x.sample(rng)?;
        let xi = x.query(i)?;
        if xi.norm_sqr() > 0.0 {
            return Ok((i, xi));
        }
        *hits += 1;
    }
    Err(Error::ZeroNormSample)
}

/// Estimate `⟨x, y⟩ = Σ x*(i) y(i)` to additive `ε‖x‖‖y‖` from samples of
/// `x` and queries of `y`.
pub fn estimate_inner<X, Y>(x: &X, y: &Y, params: &EstimatorParams, streams: &StreamSplitter) -> Result<Estimate>
where
    X: VectorAccess + ?Sized,
    Y: QueryAccess + ?Sized,
{
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let nx = x.norm_sq()?;
    if !(nx > 0.0) {
        return Err(Error::ZeroNormSample);
    }
    median_of_means(params, streams, |rng, hits| {
        let (i, xi) = guarded_draw(x, rng, hits)?;
        Ok(y.query(i)? * nx / xi)
    })
}

/// Estimate `x†Ay = Σ x*(i) A(i,j) y(j)` to additive `ε` from samples of
/// `x` and `y` and entry queries of `A`.
pub fn estimate_bilinear<X, M, Y>(
    x: &X,
    a: &M,
    y: &Y,
    params: &EstimatorParams,
    streams: &StreamSplitter,
) -> Result<Estimate>
where
    X: VectorAccess + ?Sized,
    M: EntryAccess + ?Sized,
    Y: VectorAccess + ?Sized,
{
    let (m, n) = a.dims();
    if x.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: x.len() });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let scale = x.norm_sq()? * y.norm_sq()?;
    if !(scale > 0.0) {
        return Err(Error::ZeroNormSample);
    }
    median_of_means(params, streams, |rng, hits| {
        let (i, xi) = guarded_draw(x, rng, hits)?;
        let (j, yj) = guarded_draw(y, rng, hits)?;
        Ok(a.entry(i, j)? * scale / (xi * yj.conj()))
    })
}

/// A thin `n × k` matrix whose columns can be sampled.
pub trait ThinColumns {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn column_norm_sq(&self, j: usize) -> Result<f64>;
    fn sample_in_column<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> Result<usize>;
    fn entry(&self, i: usize, j: usize) -> Result<Complex64>;

    /// `((Mv)(i), Σ_j |v(j) M(i,j)|²)`.
    fn row_terms(&self, i: usize, v: &[Complex64]) -> Result<(Complex64, f64)> {
        let mut mv = Complex64::new(0.0, 0.0);
        let mut sq = 0.0;
        for (j, &vj) in v.iter().enumerate() {
            if vj.norm_sqr() == 0.0 {
                continue;
            }
            let t = vj * self.entry(i, j)?;
            mv += t;
            sq += t.norm_sqr();
        }
        Ok((mv, sq))
    }
}

impl<T: ThinColumns + ?Sized> ThinColumns for &T {
    fn rows(&self) -> usize {
        (**self).rows()
    }

    fn cols(&self) -> usize {
        (**self).cols()
    }

    fn column_norm_sq(&self, j: usize) -> Result<f64> {
        (**self).column_norm_sq(j)
    }

    fn sample_in_column<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> Result<usize> {
        (**self).sample_in_column(j, rng)
    }

    fn entry(&self, i: usize, j: usize) -> Result<Complex64> {
        (**self).entry(i, j)
    }

    fn row_terms(&self, i: usize, v: &[Complex64]) -> Result<(Complex64, f64)> {
        (**self).row_terms(i, v)
    }
}

/// Dense thin matrix with a sum tree per column.
#[derive(Debug, Clone)]
pub struct DenseColumns {
    matrix: DMatrix<Complex64>,
    columns: Vec<SampledVector>,
}

impl DenseColumns {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let columns = matrix
            .column_iter()
            .map(|c| SampledVector::build(c.as_slice()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DenseColumns { matrix, columns })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

impl ThinColumns for DenseColumns {
    fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    fn column_norm_sq(&self, j: usize) -> Result<f64> {
        self.columns
            .get(j)
            .map(|c| c.norm_sq())
            .ok_or_else(|| Error::index(j, self.cols()))
    }

    fn sample_in_column<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> Result<usize> {
        self.columns
            .get(j)
            .ok_or_else(|| Error::index(j, self.cols()))?
            .sample(rng)
    }

    fn entry(&self, i: usize, j: usize) -> Result<Complex64> {
        self.matrix
            .get((i, j))
            .copied()
            .ok_or_else(|| Error::index(i.max(j), self.rows()))
    }
}

/// Rejection sampler for `D_{Mv}`: propose column `j` with probability
/// proportional to `|v(j)|²‖M(·,j)‖²`, then `i ~ D_{M(·,j)}`, and accept
/// with probability `|(Mv)(i)|² / (k Σ_j |v(j) M(i,j)|²)`.
#[derive(Debug)]
pub struct RejectionSampler<M> {
    m: M,
    v: Vec<Complex64>,
    alias: WeightedAliasIndex<f64>,
    weight_total: f64,
    cap: u64,
    trials: u64,
    accepts: u64,
}

impl<M: ThinColumns> RejectionSampler<M> {
    /// The default cap is `100·k·max(1, C)` with `C` estimated as if `M`
    /// were an isometry, i.e. `‖Mv‖² ≈ ‖v‖²`.
    pub fn new(m: M, v: &[Complex64]) -> Result<Self> {
        let k = m.cols();
        if v.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: v.len() });
        }
        let weights = v
            .iter()
            .enumerate()
            .map(|(j, vj)| Ok(vj.norm_sqr() * m.column_norm_sq(j)?))
            .collect::<Result<Vec<f64>>>()?;
        let weight_total: f64 = weights.iter().sum();
        if !(weight_total > 0.0 && weight_total.is_finite()) {
            return Err(Error::ZeroNormSample);
        }
        let alias = WeightedAliasIndex::new(weights).map_err(|_| Error::ZeroNormSample)?;
        let v_sq: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        let mut s = RejectionSampler {
            m,
            v: v.to_vec(),
            alias,
            weight_total,
            cap: 0,
            trials: 0,
            accepts: 0,
        };
        s.cap = s.cap_for(s.weight_total / v_sq);
        Ok(s)
    }

    fn cap_for(&self, c_estimate: f64) -> u64 {
        let k = self.m.cols() as f64;
        size_from(100.0 * k * c_estimate.max(1.0))
    }

    /// Re-derive the cap from a guess of `‖Mv‖²`.
    pub fn with_norm_hint(mut self, mv_norm_sq: f64) -> Self {
        self.cap = self.cap_for(self.weight_total / mv_norm_sq);
        self
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap.max(1);
        self
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// `Σ_j |v(j)|² ‖M(·,j)‖²`.
    pub fn weight_total(&self) -> f64 {
        self.weight_total
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn accepts(&self) -> u64 {
        self.accepts
    }

    /// One proposal and acceptance test.
    pub fn trial<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Option<usize>> {
        self.trials += 1;
        let j = self.alias.sample(rng);
        let i = self.m.sample_in_column(j, rng)?;
        let (mv, sq) = self.m.row_terms(i, &self.v)?;
        let accept = if sq > 0.0 {
            mv.norm_sqr() / (self.v.len() as f64 * sq)
        } else {
            0.0
        };
        debug_assert!(accept <= 1.0 + 1e-9, "acceptance {accept}");
        if rng.random::<f64>() < accept {
            self.accepts += 1;
            Ok(Some(i))
        } else {
            Ok(None)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        for _ in 0..self.cap {
            if let Some(i) = self.trial(rng)? {
                return Ok(i);
            }
        }
        Err(Error::IterationCapExceeded { cap: self.cap })
    }
}

/// One draw from `D_{Mv}`; `cap` defaults to `100·k·max(1, C)`.
pub fn sample_thin_product<M, R>(m: &M, v: &[Complex64], rng: &mut R, cap: Option<u64>) -> Result<usize>
where
    M: ThinColumns,
    R: Rng + ?Sized,
{
    let mut s = RejectionSampler::new(m, v)?;
    if let Some(cap) = cap {
        s = s.with_cap(cap);
    }
    s.sample(rng)
}

/// Trial cap for a matrix within Frobenius distance `alpha` of an isometry:
/// `C(M, v) ≤ ((1 + α)/(1 − α))²`.
pub fn isometry_cap(k: usize, alpha: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("isometry distortion must lie in [0, 1), got {alpha}")));
    }
    let c = ((1.0 + alpha) / (1.0 - alpha)).powi(2);
    Ok(size_from(100.0 * k as f64 * c.max(1.0)))
}

/// [`sample_thin_product`] for a near-isometry `M`.
pub fn sample_thin_product_isometry<M, R>(m: &M, v: &[Complex64], rng: &mut R, alpha: f64) -> Result<usize>
where
    M: ThinColumns,
    R: Rng + ?Sized,
{
    let cap = isometry_cap(m.cols(), alpha)?;
    sample_thin_product(m, v, rng, Some(cap))
}

/// Exact `‖D_x, D_y‖_TV`.
pub fn tv_distance_bound_check(x: &[Complex64], y: &[Complex64]) -> Result<f64> {
    Ok(oracle::exact_tv(
        &oracle::exact_distribution(x)?,
        &oracle::exact_distribution(y)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop, prop_assert, prop_assume, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_distr::StandardNormal;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e(n: usize, i: usize) -> SampledVector {
        let mut v = vec![c(0.0, 0.0); n];
        v[i] = c(1.0, 0.0);
        SampledVector::build(&v).unwrap()
    }

    fn gaussian(rng: &mut StreamRng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect()
    }

    fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
        x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
    }

    fn norm(x: &[Complex64]) -> f64 {
        x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn identity(n: usize) -> SampledMatrix {
        let entries: Vec<_> = (0..n).map(|i| (i, i, c(1.0, 0.0))).collect();
        SampledMatrix::build(&entries, (n, n), false).unwrap()
    }

    #[test]
    fn params_follow_the_budget_formulas() {
        let p = EstimatorParams::inner(0.1, 0.01).unwrap();
        assert_eq!(p.groups, (8.0 * 100f64.ln()).ceil() as usize);
        assert_eq!(p.group_size, 400);
        let b = EstimatorParams::bilinear(0.5, 0.05, 2.0, 3.0, 4.0).unwrap();
        assert_eq!(b.group_size, 384);
        let (capped, hit) = b.capped(Some(100));
        assert!(hit);
        assert_eq!(capped.group_size, 100);
        assert!(EstimatorParams::inner(0.0, 0.1).is_err());
        assert!(EstimatorParams::inner(0.1, 1.0).is_err());
    }

    #[test]
    fn inner_examples() {
        let s = StreamSplitter::new(1);
        let p = EstimatorParams::inner(0.05, 0.01).unwrap();
        let est = estimate_inner(&e(4, 0), &e(4, 0), &p, &s).unwrap();
        assert_eq!(est.value, c(1.0, 0.0));

        let x = SampledVector::from_real(&[1.0, 0.0]).unwrap();
        let y = [c(0.0, 0.0), c(1.0, 0.0)];
        let est = estimate_inner(&x, &y[..], &p, &s).unwrap();
        assert!(est.value.norm() <= 0.05);

        let z = SampledVector::zeros(2).unwrap();
        assert!(matches!(estimate_inner(&z, &y[..], &p, &s), Err(Error::ZeroNormSample)));
    }

    #[test]
    fn bilinear_examples() {
        let s = StreamSplitter::new(2);
        let id = identity(4);
        let p = EstimatorParams::bilinear(0.05, 0.01, 1.0, 1.0, 4.0).unwrap();
        let est = estimate_bilinear(&e(4, 0), &id, &e(4, 0), &p, &s).unwrap();
        assert_eq!(est.value, c(1.0, 0.0));
        let est = estimate_bilinear(&e(4, 0), &id, &e(4, 1), &p, &s).unwrap();
        assert!(est.value.norm() <= 0.05);
    }

    #[test]
    fn inner_concentrates_on_random_vectors() {
        let mut rng = StreamSplitter::new(3).stream("instance");
        let p = EstimatorParams::inner(0.05, 0.01).unwrap();
        let trials = 100;
        let mut fails = 0;
        for t in 0..trials {
            let x = gaussian(&mut rng, 10);
            let y = gaussian(&mut rng, 10);
            let sx = SampledVector::build(&x).unwrap();
            let est = estimate_inner(&sx, &y[..], &p, &StreamSplitter::new(t)).unwrap();
            if (est.value - dot(&x, &y)).norm() > 0.05 * norm(&x) * norm(&y) {
                fails += 1;
            }
        }
        assert!(fails <= 2, "{fails} failures");
    }

    #[test]
    fn bilinear_concentrates_on_random_matrices() {
        let mut rng = StreamSplitter::new(4).stream("instance");
        let trials = 50;
        let mut fails = 0;
        for t in 0..trials {
            let a = gaussian(&mut rng, 36);
            let x = gaussian(&mut rng, 6);
            let y = gaussian(&mut rng, 6);
            let am = SampledMatrix::from_row_major(&a, (6, 6), false).unwrap();
            let fro: f64 = a.iter().map(|v| v.norm_sqr()).sum();
            let eps = 0.02 * norm(&x) * norm(&y) * fro.sqrt();
            let p = EstimatorParams::bilinear(eps, 0.01, norm(&x).powi(2), norm(&y).powi(2), fro).unwrap();
            let exact: Complex64 = (0..6)
                .flat_map(|i| (0..6).map(move |j| (i, j)))
                .map(|(i, j)| x[i].conj() * a[i * 6 + j] * y[j])
                .sum();
            let est = estimate_bilinear(
                &SampledVector::build(&x).unwrap(),
                &am,
                &SampledVector::build(&y).unwrap(),
                &p,
                &StreamSplitter::new(t),
            )
            .unwrap();
            if (est.value - exact).norm() > eps {
                fails += 1;
            }
        }
        assert!(fails <= 1, "{fails} failures");
    }

    #[test]
    fn bilinear_single_draws_are_unbiased() {
        // Z has second moment ‖x‖²‖y‖²‖A‖_F², so 5 standard errors is
        // 5·sqrt((that − |x†Ay|²)/N) per component at most.
        let mut rng = StreamSplitter::new(5).stream("instance");
        for t in 0..20 {
            let a = gaussian(&mut rng, 16);
            let x = gaussian(&mut rng, 4);
            let y = gaussian(&mut rng, 4);
            let am = SampledMatrix::from_row_major(&a, (4, 4), false).unwrap();
            let fro: f64 = a.iter().map(|v| v.norm_sqr()).sum();
            let exact: Complex64 = (0..4)
                .flat_map(|i| (0..4).map(move |j| (i, j)))
                .map(|(i, j)| x[i].conj() * a[i * 4 + j] * y[j])
                .sum();
            let n = 200_000u64;
            let p = EstimatorParams::fixed(1, n);
            let est = estimate_bilinear(
                &SampledVector::build(&x).unwrap(),
                &am,
                &SampledVector::build(&y).unwrap(),
                &p,
                &StreamSplitter::new(100 + t),
            )
            .unwrap();
            let second = norm(&x).powi(2) * norm(&y).powi(2) * fro;
            let se = ((second - exact.norm_sqr()) / n as f64).sqrt();
            assert!((est.value - exact).norm() <= 5.0 * se, "instance {t}");
        }
    }

    #[test]
    fn adjoint_conjugates_entries() {
        let a = SampledMatrix::build(&[(0, 1, c(1.0, 2.0))], (2, 3), false).unwrap();
        let t = Adjoint(&a);
        assert_eq!(t.dims(), (3, 2));
        assert_eq!(t.entry(1, 0).unwrap(), c(1.0, -2.0));
    }

    #[test]
    fn metered_vector_charges_the_ledger() {
        let ledger = QueryLedger::new();
        let v = SampledVector::from_real(&[1.0, 2.0]).unwrap();
        let m = Metered::new(&v, &ledger);
        let mut rng = StreamRng::seed_from_u64(0);
        m.query(0).unwrap();
        m.norm_sq().unwrap();
        m.sample(&mut rng).unwrap();
        let s = ledger.snapshot();
        assert_eq!((s.entry_queries, s.norm_queries, s.samples), (1, 1, 1));
    }

    fn draw_histogram(m: &DenseColumns, v: &[Complex64], n: usize, seed: u64) -> Vec<u64> {
        let mut rng = StreamSplitter::new(seed).stream("rejection");
        let mut s = RejectionSampler::new(m, v).unwrap();
        let mut counts = vec![0u64; m.rows()];
        for _ in 0..n {
            counts[s.sample(&mut rng).unwrap()] += 1;
        }
        counts
    }

    #[test]
    fn rejection_examples() {
        let col = DMatrix::from_column_slice(3, 1, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, 0.0)]);
        let m = DenseColumns::new(col).unwrap();
        let mut rng = StreamSplitter::new(6).stream("rejection");
        let mut s = RejectionSampler::new(&m, &[c(1.0, 0.0)]).unwrap();
        for _ in 0..1000 {
            s.sample(&mut rng).unwrap();
        }
        assert_eq!(s.trials(), s.accepts());

        let mut id2 = DMatrix::zeros(4, 2);
        id2[(0, 0)] = c(1.0, 0.0);
        id2[(1, 1)] = c(1.0, 0.0);
        let m = DenseColumns::new(id2).unwrap();
        let counts = draw_histogram(&m, &[c(3.0, 0.0), c(4.0, 0.0)], 100_000, 7);
        assert_eq!(counts[2] + counts[3], 0);
        let probs = [9.0 / 25.0, 16.0 / 25.0, 0.0, 0.0];
        let (stat, df) = oracle::chi_square(&counts, &probs);
        assert!(stat < oracle::chi_square_critical(df, 1e-3));
    }

    #[test]
    fn rejection_matches_dense_product() {
        let mut rng = StreamSplitter::new(8).stream("instance");
        let mat = DMatrix::from_vec(16, 3, gaussian(&mut rng, 48));
        let v = gaussian(&mut rng, 3);
        let mv = &mat * DVector::from_vec(v.clone());
        let probs = oracle::exact_distribution(mv.as_slice()).unwrap();
        let m = DenseColumns::new(mat).unwrap();
        let counts = draw_histogram(&m, &v, 100_000, 9);
        assert!(oracle::empirical_tv(&counts, &probs) <= 0.02);
        let (stat, df) = oracle::chi_square(&counts, &probs);
        assert!(stat < oracle::chi_square_critical(df, 1e-3), "chi2 {stat} df {df}");
    }

    #[test]
    fn isometry_variant_with_unit_vector_is_the_column_law() {
        let mut rng = StreamSplitter::new(10).stream("instance");
        let g = DMatrix::from_vec(8, 2, gaussian(&mut rng, 16));
        let q = g.qr().q();
        let m = DenseColumns::new(q.clone()).unwrap();
        let mut counts = vec![0u64; 8];
        let mut r = StreamSplitter::new(11).stream("rejection");
        for _ in 0..50_000 {
            counts[sample_thin_product_isometry(&m, &[c(0.0, 0.0), c(1.0, 0.0)], &mut r, 0.0).unwrap()] += 1;
        }
        let probs = oracle::exact_distribution(q.column(1).as_slice()).unwrap();
        let (stat, df) = oracle::chi_square(&counts, &probs);
        assert!(stat < oracle::chi_square_critical(df, 1e-3));
        assert!(isometry_cap(2, 1.0).is_err());
    }

    #[test]
    fn cancelling_product_hits_the_cap() {
        let mat = DMatrix::from_column_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let m = DenseColumns::new(mat).unwrap();
        let mut rng = StreamSplitter::new(12).stream("rejection");
        let r = sample_thin_product(&m, &[c(1.0, 0.0), c(-1.0, 0.0)], &mut rng, Some(50));
        assert!(matches!(r, Err(Error::IterationCapExceeded { cap: 50 })));
    }

    #[test]
    fn tv_examples() {
        let x = [c(1.0, 0.0), c(0.0, 0.0)];
        let y = [c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(tv_distance_bound_check(&x, &x).unwrap(), 0.0);
        assert_eq!(tv_distance_bound_check(&x, &y).unwrap(), 1.0);
        let z = [c(0.0, 0.0); 2];
        assert!(matches!(tv_distance_bound_check(&z, &x), Err(Error::ZeroNormSample)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn tv_is_bounded_by_relative_distance(
            x in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..30),
            d in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 30),
            scale in 0.0f64..0.5,
        ) {
            let x: Vec<Complex64> = x.into_iter().map(|(a, b)| c(a, b)).collect();
            prop_assume!(norm(&x) > 1e-6);
            let dir: Vec<Complex64> = d.into_iter().take(x.len()).map(|(a, b)| c(a, b)).collect();
            prop_assume!(norm(&dir) > 1e-9);
            let s = scale * norm(&x) / norm(&dir);
            let y: Vec<Complex64> = x.iter().zip(&dir).map(|(a, b)| a + b * s).collect();
            prop_assume!(norm(&y) > 0.0);
            let diff: Vec<Complex64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let tv = tv_distance_bound_check(&x, &y).unwrap();
            prop_assert!(tv <= 2.0 * norm(&diff) / norm(&x) + 1e-12);
        }

        #[test]
        fn acceptance_probability_is_a_probability(
            entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12),
            v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
        ) {
            let mat = DMatrix::from_iterator(4, 3, entries.into_iter().map(|(a, b)| c(a, b)));
            let v: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
            let m = DenseColumns::new(mat).unwrap();
            for i in 0..4 {
                let (mv, sq) = m.row_terms(i, &v).unwrap();
                if sq > 0.0 {
                    let a = mv.norm_sqr() / (3.0 * sq);
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
                }
            }
        }
    }
}
