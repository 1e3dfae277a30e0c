//! Row and column length-squared subsampling of `A`, the top-k SVD of the
//! resulting `p × p` sketch `W`, and implicit access to `V = S†ÛD⁻¹`.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{QueryAccess, ThinColumns, VectorAccess};
use crate::linalg;
use crate::oracle::{self, DenseMatrix, DENSE_LIMIT};
use crate::rng::StreamSplitter;
use crate::sampled_matrix::SampledMatrix;

pub const FORMAT_VERSION: u32 = 1;

/// Output of the subsampling step. Defines `S`, `W`, `V(·,i) = S†ûᵢ/σ̂ᵢ`
/// and `D = diag(σ̂)` without materializing them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccinctDescription {
    pub version: u32,
    pub k: usize,
    pub p: usize,
    pub dims: (usize, usize),
    pub frobenius_sq: f64,
    pub row_indices: Vec<usize>,
    /// `1/√(p·P_{i_t})`.
    pub row_scales: Vec<f64>,
    pub col_indices: Vec<usize>,
    /// `1/√(p·P'_{j_s})`.
    pub col_scales: Vec<f64>,
    pub sigma_hat: Vec<f64>,
    /// `k` orthonormal vectors of length `p`.
    pub u_hat: Vec<Vec<Complex64>>,
    pub seed: u64,
    pub digest: String,
}

impl SuccinctDescription {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s)?;
        if d.version != FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported description version {}",
                d.version
            )));
        }
        Ok(d)
    }

    /// `σ̂₁/σ̂_k`, the sketch's estimate of the condition number.
    pub fn kappa_hat(&self) -> f64 {
        self.sigma_hat[0] / self.sigma_hat[self.k - 1]
    }

    /// Largest deviation of `Û†Û` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.k {
            for b in 0..self.k {
                let g: Complex64 = self.u_hat[a]
                    .iter()
                    .zip(&self.u_hat[b])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// `S`'s row choices and the dense `W`.
#[derive(Debug, Clone)]
struct Sketch {
    frobenius_sq: f64,
    row_indices: Vec<usize>,
    row_scales: Vec<f64>,
    col_indices: Vec<usize>,
    col_scales: Vec<f64>,
    w: DMatrix<Complex64>,
}

fn check_sizes(a: &SampledMatrix, k: usize, p: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("rank k must be at least 1".into()));
    }
    if p < k {
        return Err(Error::InvalidConfig(format!("sketch size p = {p} is below k = {k}")));
    }
    let (m, n) = a.dims();
    if k > m.min(n) {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds min(m, n) = {}", m.min(n))));
    }
    Ok(())
}

fn build_sketch(a: &SampledMatrix, p: usize, streams: &StreamSplitter) -> Result<Sketch> {
    let fro_sq = a.frobenius_sq();
    if !(fro_sq > 0.0) {
        return Err(Error::ZeroNormSample);
    }
    let fro = fro_sq.sqrt();
    let sqrt_p = (p as f64).sqrt();

    let mut rows_rng = streams.stream("rows");
    let row_indices = (0..p)
        .map(|_| a.sample_row(&mut rows_rng))
        .collect::<Result<Vec<_>>>()?;
    let mut norms: HashMap<usize, f64> = HashMap::new();
    let mut row_norms = Vec::with_capacity(p);
    for &i in &row_indices {
        let norm = match norms.get(&i) {
            Some(&r) => r,
            None => {
                let r = a.row_norm(i)?;
                norms.insert(i, r);
                r
            }
        };
        row_norms.push(norm);
    }
    let row_scales: Vec<f64> = row_norms.iter().map(|r| fro / (sqrt_p * r)).collect();

    let mut cols_rng = streams.stream("cols");
    let col_indices = (0..p)
        .map(|_| {
            let t = cols_rng.random_range(0..p);
            a.sample_in_row(row_indices[t], &mut cols_rng)
        })
        .collect::<Result<Vec<_>>>()?;

    // One pass of p entry queries per distinct column gives both P'_j and
    // the column of W.
    let mut fetched: HashMap<usize, (Vec<Complex64>, f64)> = HashMap::new();
    let mut w = DMatrix::zeros(p, p);
    let mut col_scales = Vec::with_capacity(p);
    for (s, &j) in col_indices.iter().enumerate() {
        if !fetched.contains_key(&j) {
            let col = row_indices
                .iter()
                .map(|&i| a.entry(i, j))
                .collect::<Result<Vec<_>>>()?;
            let p_prime = col
                .iter()
                .zip(&row_norms)
                .map(|(v, r)| v.norm_sqr() / (r * r))
                .sum::<f64>()
                / p as f64;
            fetched.insert(j, (col, p_prime));
        }
        let (col, p_prime) = &fetched[&j];
        let scale = 1.0 / (p as f64 * p_prime).sqrt();
        col_scales.push(scale);
        for t in 0..p {
            w[(t, s)] = col[t] * (row_scales[t] * scale);
        }
    }
    Ok(Sketch {
        frobenius_sq: fro_sq,
        row_indices,
        row_scales,
        col_indices,
        col_scales,
        w,
    })
}

/// Singular values (descending) and matching left vectors.
fn full_left_svd(w: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let svd = linalg::thin_svd(w)?;
    Ok((svd.s, svd.u))
}

const OVERSAMPLE: usize = 10;
const POWER_ITERATIONS: usize = 2;
const RANGE_TOL: f64 = 1e-10;

/// Top-k singular pairs of `W`. A randomized range finder is tried first;
/// if its basis leaves a residual above `RANGE_TOL·‖W‖_F` the full SVD is used.
fn top_k_left(w: &DMatrix<Complex64>, k: usize, streams: &StreamSplitter) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let p = w.nrows();
    let l = (k + OVERSAMPLE).min(p);
    if l >= p / 2 {
        let (s, u) = full_left_svd(w)?;
        return Ok((s[..k].to_vec(), u.columns(0, k).into_owned()));
    }
    let mut rng = streams.stream("range-finder");
    let omega = DMatrix::from_fn(w.ncols(), l, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut q = (w * omega).qr().q();
    for _ in 0..POWER_ITERATIONS {
        let z = (w.adjoint() * &q).qr().q();
        q = (w * z).qr().q();
    }
    let b = q.adjoint() * w;
    let residual = (w - &q * &b).norm();
    if residual > RANGE_TOL * w.norm() {
        let (s, u) = full_left_svd(w)?;
        return Ok((s[..k].to_vec(), u.columns(0, k).into_owned()));
    }
    let (s, ub) = full_left_svd(&b)?;
    let u = q * ub.columns(0, k);
    Ok((s[..k].to_vec(), u))
}

/// Rotate `u` so its largest-magnitude entry is real and positive.
fn fix_phase(u: &mut [Complex64]) {
    let pivot = u
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap_or(Complex64::new(0.0, 0.0));
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        for x in u.iter_mut() {
            *x *= phase;
        }
    }
}

/// Run the subsampling step with rank `k` and sketch size `p`.
pub fn subsample(a: &SampledMatrix, k: usize, p: usize, streams: &StreamSplitter) -> Result<SuccinctDescription> {
    check_sizes(a, k, p)?;
    let sk = build_sketch(a, p, streams)?;
    let (sigma, u) = top_k_left(&sk.w, k, streams)?;
    let threshold = p.max(k) as f64 * f64::EPSILON * sigma[0];
    if !(sigma[k - 1] > threshold) {
        return Err(Error::RankDeficientSketch {
            k,
            sigma_k: sigma[k - 1],
            threshold,
        });
    }
    let u_hat = (0..k)
        .map(|i| {
            let mut col: Vec<Complex64> = u.column(i).iter().copied().collect();
            fix_phase(&mut col);
            col
        })
        .collect();
    Ok(SuccinctDescription {
        version: FORMAT_VERSION,
        k,
        p,
        dims: a.dims(),
        frobenius_sq: sk.frobenius_sq,
        row_indices: sk.row_indices,
        row_scales: sk.row_scales,
        col_indices: sk.col_indices,
        col_scales: sk.col_scales,
        sigma_hat: sigma,
        u_hat,
        seed: streams.seed(),
        digest: a.digest().to_string(),
    })
}

/// Full singular spectrum of the sketch `W`, for choosing `k`.
pub fn rank_probe(a: &SampledMatrix, p: usize, streams: &StreamSplitter) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::InvalidConfig("sketch size p must be positive".into()));
    }
    let sk = build_sketch(a, p, streams)?;
    Ok(full_left_svd(&sk.w)?.0)
}

/// Everything the sketch knows about row `j` of `V`.
#[derive(Debug)]
pub struct VRow {
    /// `S(·, j)`.
    pub s: Vec<Complex64>,
    /// `V(j, ·)`.
    pub v: Vec<Complex64>,
    /// `Σ_t |ûᵢ(t) S(t,j)|² / σ̂ᵢ²` for each `i`.
    pub spread: Vec<f64>,
}

/// Implicit access to `V` through entry queries of `A`.
///
/// Fetching row `j` of `V` costs `p` entry queries. With memoization the
/// fetched rows are kept, and repeat fetches charge the same `p` queries to
/// the ledger without touching `A`, so counts do not depend on the cache.
#[derive(Debug)]
pub struct SketchView<'a> {
    d: &'a SuccinctDescription,
    a: &'a SampledMatrix,
    cache: Option<RefCell<Vec<Option<Rc<VRow>>>>>,
}

impl<'a> SketchView<'a> {
    pub fn new(d: &'a SuccinctDescription, a: &'a SampledMatrix, memoize: bool) -> Result<Self> {
        if d.dims != a.dims() {
            return Err(Error::DimensionMismatch {
                expected: d.dims.1,
                got: a.cols(),
            });
        }
        let cache = memoize.then(|| RefCell::new(vec![None; a.cols()]));
        Ok(SketchView { d, a, cache })
    }

    pub fn description(&self) -> &SuccinctDescription {
        self.d
    }

    pub fn matrix(&self) -> &SampledMatrix {
        self.a
    }

    pub fn n(&self) -> usize {
        self.d.dims.1
    }

    pub fn k(&self) -> usize {
        self.d.k
    }

    fn compute_row(&self, j: usize) -> Result<VRow> {
        let d = self.d;
        let s = d
            .row_indices
            .iter()
            .zip(&d.row_scales)
            .map(|(&i, &sc)| Ok(self.a.entry(i, j)? * sc))
            .collect::<Result<Vec<_>>>()?;
        let mut v = Vec::with_capacity(d.k);
        let mut spread = Vec::with_capacity(d.k);
        for (u, &sigma) in d.u_hat.iter().zip(&d.sigma_hat) {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut sq = 0.0;
            for (st, ut) in s.iter().zip(u) {
                let term = st.conj() * ut;
                acc += term;
                sq += term.norm_sqr();
            }
            v.push(acc / sigma);
            spread.push(sq / (sigma * sigma));
        }
        Ok(VRow { s, v, spread })
    }

    pub fn row(&self, j: usize) -> Result<Rc<VRow>> {
        if j >= self.n() {
            return Err(Error::index(j, self.n()));
        }
        let Some(cache) = &self.cache else {
            return Ok(Rc::new(self.compute_row(j)?));
        };
        if let Some(r) = &cache.borrow()[j] {
            self.a.ledger().record_entries(self.d.p as u64);
            return Ok(Rc::clone(r));
        }
        let r = Rc::new(self.compute_row(j)?);
        cache.borrow_mut()[j] = Some(Rc::clone(&r));
        Ok(r)
    }

    /// `V(j, i) = (S†ûᵢ)(j)/σ̂ᵢ`.
    pub fn v_entry(&self, j: usize, i: usize) -> Result<Complex64> {
        if i >= self.k() {
            return Err(Error::index(i, self.k()));
        }
        Ok(self.row(j)?.v[i])
    }

    /// Sampling access to `V(·, i)` with a known (or previously estimated)
    /// squared norm.
    pub fn column_with_norm(self: &Rc<Self>, i: usize, norm_sq: f64) -> Result<VColumn<'a>> {
        if i >= self.k() {
            return Err(Error::index(i, self.k()));
        }
        let weights: Vec<f64> = self.d.u_hat[i].iter().map(|x| x.norm_sqr()).collect();
        let alias = WeightedAliasIndex::new(weights).map_err(|_| Error::ZeroNormSample)?;
        let sigma = self.d.sigma_hat[i];
        // Expected trials per draw are ‖A‖_F² / (σ̂ᵢ² ‖V(·,i)‖²).
        let trials_per_draw = self.d.frobenius_sq / (sigma * sigma);
        Ok(VColumn {
            view: Rc::clone(self),
            i,
            alias,
            norm_sq,
            cap: cap_from(trials_per_draw / norm_sq, self.d.p),
            trials: Cell::new(0),
            accepts: Cell::new(0),
        })
    }

    /// Sampling access to `V(·, i)`. Its norm is estimated from the
    /// acceptance rate of `accepts` warm-up draws taken from `rng`,
    /// starting from the near-isometry guess `‖V(·,i)‖ ≈ 1`.
    pub fn column<R: Rng + ?Sized>(self: &Rc<Self>, i: usize, accepts: u64, rng: &mut R) -> Result<VColumn<'a>> {
        let mut col = self.column_with_norm(i, 1.0)?;
        let sigma = self.d.sigma_hat[i];
        let trials_per_draw = self.d.frobenius_sq / (sigma * sigma);
        let accepts = accepts.max(1);
        let budget = accepts.saturating_mul(col.cap);
        let mut got = 0;
        let mut tried = 0;
        while got < accepts {
            if tried >= budget {
                return Err(Error::IterationCapExceeded { cap: budget });
            }
            tried += 1;
            if col.trial(rng)?.is_some() {
                got += 1;
            }
        }
        col.norm_sq = self.d.frobenius_sq * got as f64 / (tried as f64 * sigma * sigma);
        col.cap = cap_from(trials_per_draw / col.norm_sq, self.d.p);
        Ok(col)
    }

    /// All `k` columns, sharing this view's cache.
    pub fn v_matrix<R: Rng + ?Sized>(self: &Rc<Self>, accepts: u64, rng: &mut R) -> Result<VMatrix<'a>> {
        let columns = (0..self.k())
            .map(|i| self.column(i, accepts, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(VMatrix { view: Rc::clone(self), columns })
    }

    /// All `k` columns with known squared norms.
    pub fn v_matrix_with_norms(self: &Rc<Self>, norms_sq: &[f64]) -> Result<VMatrix<'a>> {
        let columns = norms_sq
            .iter()
            .enumerate()
            .map(|(i, &n)| self.column_with_norm(i, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(VMatrix { view: Rc::clone(self), columns })
    }

    /// `S†` as a thin `n × p` matrix.
    pub fn s_adjoint(self: &Rc<Self>) -> SAdjoint<'a> {
        SAdjoint { view: Rc::clone(self) }
    }
}

/// Default rejection cap `100·k·max(1, C)` where `k·C` is the expected
/// number of trials.
fn cap_from(expected_trials: f64, k: usize) -> u64 {
    let t = (100.0 * expected_trials.max(k as f64)).ceil();
    if t.is_finite() && t < 1e18 {
        t as u64
    } else {
        u64::MAX
    }
}

/// One column of `V` with query and sampling access.
#[derive(Debug)]
pub struct VColumn<'a> {
    view: Rc<SketchView<'a>>,
    i: usize,
    alias: WeightedAliasIndex<f64>,
    norm_sq: f64,
    cap: u64,
    trials: Cell<u64>,
    accepts: Cell<u64>,
}

impl VColumn<'_> {
    /// Propose `t ∝ |ûᵢ(t)|²`, then `j ~ D_{A(i_t,·)}`; accept with
    /// probability `|V(j,i)|² / (p Σ_t |ûᵢ(t) S(t,j)|²/σ̂ᵢ²)`.
    fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Option<usize>> {
        let d = self.view.d;
        self.trials.set(self.trials.get() + 1);
        let t = self.alias.sample(rng);
        let j = self.view.a.sample_in_row(d.row_indices[t], rng)?;
        let row = self.view.row(j)?;
        let spread = row.spread[self.i];
        let accept = if spread > 0.0 {
            row.v[self.i].norm_sqr() / (d.p as f64 * spread)
        } else {
            0.0
        };
        if rng.random::<f64>() < accept {
            self.accepts.set(self.accepts.get() + 1);
            Ok(Some(j))
        } else {
            Ok(None)
        }
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Trials and acceptances so far, warm-up included.
    pub fn counts(&self) -> (u64, u64) {
        (self.trials.get(), self.accepts.get())
    }
}

impl QueryAccess for VColumn<'_> {
    fn len(&self) -> usize {
        self.view.n()
    }

    fn query(&self, j: usize) -> Result<Complex64> {
        self.view.v_entry(j, self.i)
    }
}

impl VectorAccess for VColumn<'_> {
    fn norm_sq(&self) -> Result<f64> {
        Ok(self.norm_sq)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        for _ in 0..self.cap {
            if let Some(j) = self.trial(rng)? {
                return Ok(j);
            }
        }
        Err(Error::IterationCapExceeded { cap: self.cap })
    }
}

/// `V` as a thin `n × k` matrix with sampled columns.
#[derive(Debug)]
pub struct VMatrix<'a> {
    view: Rc<SketchView<'a>>,
    columns: Vec<VColumn<'a>>,
}

impl<'a> VMatrix<'a> {
    pub fn column(&self, i: usize) -> &VColumn<'a> {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[VColumn<'a>] {
        &self.columns
    }
}

impl ThinColumns for VMatrix<'_> {
    fn rows(&self) -> usize {
        self.view.n()
    }

    fn cols(&self) -> usize {
        self.view.k()
    }

    fn column_norm_sq(&self, j: usize) -> Result<f64> {
        self.columns
            .get(j)
            .ok_or_else(|| Error::index(j, self.cols()))?
            .norm_sq()
    }

    fn sample_in_column<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> Result<usize> {
        self.columns
            .get(j)
            .ok_or_else(|| Error::index(j, self.cols()))?
            .sample(rng)
    }

    fn entry(&self, i: usize, j: usize) -> Result<Complex64> {
        self.view.v_entry(i, j)
    }

    fn row_terms(&self, i: usize, v: &[Complex64]) -> Result<(Complex64, f64)> {
        let row = self.view.row(i)?;
        Ok(row_terms(&row.v, v, |x| x))
    }
}

fn row_terms(row: &[Complex64], v: &[Complex64], f: impl Fn(Complex64) -> Complex64) -> (Complex64, f64) {
    let mut mv = Complex64::new(0.0, 0.0);
    let mut sq = 0.0;
    for (&m, &x) in row.iter().zip(v) {
        let t = f(m) * x;
        mv += t;
        sq += t.norm_sqr();
    }
    (mv, sq)
}

/// `S†`: column `t` is the conjugated row `t` of `S`, whose squared norm
/// is `‖A‖_F²/p` for every `t`.
#[derive(Debug, Clone)]
pub struct SAdjoint<'a> {
    view: Rc<SketchView<'a>>,
}

impl ThinColumns for SAdjoint<'_> {
    fn rows(&self) -> usize {
        self.view.n()
    }

    fn cols(&self) -> usize {
        self.view.d.p
    }

    fn column_norm_sq(&self, t: usize) -> Result<f64> {
        if t >= self.cols() {
            return Err(Error::index(t, self.cols()));
        }
        Ok(self.view.d.frobenius_sq / self.view.d.p as f64)
    }

    fn sample_in_column<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Result<usize> {
        let i = *self
            .view
            .d
            .row_indices
            .get(t)
            .ok_or_else(|| Error::index(t, self.cols()))?;
        self.view.a.sample_in_row(i, rng)
    }

    fn entry(&self, j: usize, t: usize) -> Result<Complex64> {
        let d = self.view.d;
        let i = *d.row_indices.get(t).ok_or_else(|| Error::index(t, self.cols()))?;
        Ok((self.view.a.entry(i, j)? * d.row_scales[t]).conj())
    }

    fn row_terms(&self, j: usize, u: &[Complex64]) -> Result<(Complex64, f64)> {
        let row = self.view.row(j)?;
        Ok(row_terms(&row.s, u, |x| x.conj()))
    }
}

/// Dense `S` (`p × n`) and `W` (`p × p`) rebuilt from a description.
pub fn dense_sketch(d: &SuccinctDescription, a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    if a.shape() != d.dims {
        return Err(Error::DimensionMismatch {
            expected: d.dims.0,
            got: a.nrows(),
        });
    }
    let n = a.ncols();
    let s = DenseMatrix::from_fn(d.p, n, |t, j| a[(d.row_indices[t], j)] * d.row_scales[t]);
    let w = DenseMatrix::from_fn(d.p, d.p, |t, c| s[(t, d.col_indices[c])] * d.col_scales[c]);
    Ok((s, w))
}

/// Dense `V = S†ÛD⁻¹` (`n × k`).
pub fn dense_v(d: &SuccinctDescription, s: &DenseMatrix) -> DenseMatrix {
    let u = DenseMatrix::from_fn(d.p, d.k, |t, i| d.u_hat[i][t] / d.sigma_hat[i]);
    s.adjoint() * u
}

/// Dense quantities derived from `A` once and reused across sketches.
#[derive(Debug, Clone)]
pub struct DenseReference {
    pub a: DenseMatrix,
    pub gram: DenseMatrix,
    pub gram_pinv: DenseMatrix,
    pub spectral_norm: f64,
    pub frobenius: f64,
}

impl DenseReference {
    pub fn new(a: DenseMatrix) -> Result<Self> {
        let dim = a.nrows().max(a.ncols());
        if dim > DENSE_LIMIT {
            return Err(Error::DimensionTooLarge { dim, limit: DENSE_LIMIT });
        }
        let gram = a.adjoint() * &a;
        let gram_pinv = oracle::pinv(&gram)?;
        let spectral_norm = oracle::singular_values(&a)?.first().copied().unwrap_or(0.0);
        let frobenius = a.norm();
        Ok(DenseReference {
            a,
            gram,
            gram_pinv,
            spectral_norm,
            frobenius,
        })
    }
}

/// Dense diagnostics of one sketch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SketchReport {
    /// `‖A†A − S†S‖_F`.
    pub gram_error: f64,
    /// `‖SS† − WW†‖_F`.
    pub cross_error: f64,
    /// `‖A†A − VD²V†‖_F`.
    pub approx_error: f64,
    /// `‖(A†A)⁻¹ − VD⁻²V†‖_F`.
    pub inverse_error: f64,
    /// `‖V†V − I‖_F`.
    pub isometry_defect: f64,
    pub sigma_1_w: f64,
    pub sigma_k_w: f64,
    pub s_over_a: f64,
    pub w_over_s: f64,
    pub a_spectral: f64,
    pub a_frobenius: f64,
}

pub fn verify_sketch(d: &SuccinctDescription, a: &DenseMatrix) -> Result<SketchReport> {
    verify_sketch_with(d, &DenseReference::new(a.clone())?)
}

pub fn verify_sketch_with(d: &SuccinctDescription, r: &DenseReference) -> Result<SketchReport> {
    let (s, w) = dense_sketch(d, &r.a)?;
    let v = dense_v(d, &s);
    let d2 = DenseMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d.k,
        d.sigma_hat.iter().map(|x| Complex64::new(x * x, 0.0)),
    ));
    let dm2 = DenseMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d.k,
        d.sigma_hat.iter().map(|x| Complex64::new(1.0 / (x * x), 0.0)),
    ));
    let ws = oracle::singular_values(&w)?;
    let s_norm = s.norm();
    Ok(SketchReport {
        gram_error: (&r.gram - s.adjoint() * &s).norm(),
        cross_error: (&s * s.adjoint() - &w * w.adjoint()).norm(),
        approx_error: (&r.gram - &v * &d2 * v.adjoint()).norm(),
        inverse_error: (&r.gram_pinv - &v * &dm2 * v.adjoint()).norm(),
        isometry_defect: (v.adjoint() * &v - DenseMatrix::identity(d.k, d.k)).norm(),
        sigma_1_w: ws[0],
        sigma_k_w: ws.get(d.k - 1).copied().unwrap_or(0.0),
        s_over_a: s_norm / r.frobenius,
        w_over_s: w.norm() / s_norm,
        a_spectral: r.spectral_norm,
        a_frobenius: r.frobenius,
    })
}
