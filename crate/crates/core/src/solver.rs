//! Entry queries and samples of `A⁻¹b` through `(A†A)⁻¹A†b ≈ VD⁻²V†A†b`.

use std::rc::Rc;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    estimate_bilinear, estimate_inner, isometry_cap, Adjoint, EstimatorParams, Metered, QueryAccess,
    RejectionSampler, VectorAccess,
};
use crate::ledger::LedgerSnapshot;
use crate::oracle;
use crate::rng::StreamSplitter;
use crate::sampled_matrix::SampledMatrix;
use crate::sampled_vector::SampledVector;
use crate::subsample::{subsample, SAdjoint, SketchView, SuccinctDescription, VMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingRoute {
    /// Rejection sampling from `Vw'` over the columns of `V`, each of
    /// which is itself sampled by rejection from `S†`.
    #[default]
    Nested,
    /// Rejection sampling from `S†u` with `u = ÛD⁻¹w'`, the same vector.
    Collapsed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub k: usize,
    pub p: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Largest group size any median-of-means estimate may use.
    pub max_group_size: Option<u64>,
    /// Accepted warm-up draws per column of `V` for its norm estimate.
    pub norm_warmup: u64,
    /// Assumed distance of `V` from an isometry; sets the sampling cap.
    pub alpha: f64,
    pub rejection_cap: Option<u64>,
    pub tau_b: f64,
    pub route: SamplingRoute,
    pub memoize: bool,
    /// Bound on `‖b‖` for the PSD variant, where `b` cannot be normed.
    pub b_norm_hint: f64,
    /// Largest `n` for which the PSD variant checks `A` densely.
    pub psd_check_limit: usize,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(k: usize, p: usize, epsilon: f64, delta: f64, seed: u64) -> Self {
        SolverConfig {
            k,
            p,
            epsilon,
            delta,
            max_group_size: Some(20_000),
            norm_warmup: 2_000,
            alpha: 0.5,
            rejection_cap: None,
            tau_b: 0.1,
            route: SamplingRoute::Nested,
            memoize: true,
            b_norm_hint: 1.0,
            psd_check_limit: 1000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k == 0 || self.p < self.k {
            return bad(format!("need p >= k >= 1, got k = {}, p = {}", self.k, self.p));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(0.0..=1.0).contains(&self.tau_b) {
            return bad(format!("tau_b must lie in [0, 1], got {}", self.tau_b));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1), got {}", self.alpha));
        }
        if !(self.b_norm_hint > 0.0) {
            return bad(format!("b norm hint must be positive, got {}", self.b_norm_hint));
        }
        if self.norm_warmup == 0 {
            return bad("norm warm-up needs at least one draw".into());
        }
        Ok(())
    }

    pub fn streams(&self) -> StreamSplitter {
        StreamSplitter::new(self.seed)
    }
}

/// The sample count prescribed by the original analysis; astronomically
/// large for any nontrivial input.
pub fn theory_p(k: usize, kappa: f64, epsilon: f64, frobenius_sq: f64) -> f64 {
    1e7 * (k as f64).powi(11) * kappa.powi(20) / (epsilon.powi(4) * frobenius_sq.powi(2))
}

/// `max(20k, k·ceil(ln(mn)))`.
pub fn heuristic_p(k: usize, m: usize, n: usize) -> usize {
    let l = ((m as f64) * (n as f64)).ln().ceil().max(1.0) as usize;
    (20 * k).max(k * l)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub sketch_s: f64,
    pub norms_s: f64,
    pub estimate_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentBudget {
    pub epsilon: f64,
    pub delta: f64,
    pub groups: usize,
    pub required_group_size: u64,
    pub group_size: u64,
    pub guard_hits: u64,
}

/// Everything computed once per right-hand side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveState {
    pub description: SuccinctDescription,
    /// `w(i) ≈ V(·,i)†A†b` (or `V(·,i)†b` for the PSD variant).
    pub w: Vec<Complex64>,
    /// `D^{-power} w`.
    pub w_prime: Vec<Complex64>,
    /// 2 for the general solver, 1 for the PSD variant.
    pub power: i32,
    /// Estimated `‖V(·,i)‖²`.
    pub v_norm_sq: Vec<f64>,
    /// `‖b‖²`, or the squared hint for the PSD variant.
    pub b_norm_sq: f64,
    pub budgets: Vec<ComponentBudget>,
    pub budget_capped: bool,
    pub ledger: LedgerSnapshot,
    pub timings: Timings,
    pub seed: u64,
    pub alpha: f64,
    pub route: SamplingRoute,
    pub rejection_cap: Option<u64>,
    pub tau_b: f64,
}

impl SolveState {
    pub fn k(&self) -> usize {
        self.description.k
    }

    pub fn n(&self) -> usize {
        self.description.dims.1
    }

    pub fn w_prime_norm(&self) -> f64 {
        self.w_prime.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `ε/σ̂₁²`.
    pub fn zero_threshold(&self, epsilon: f64) -> f64 {
        let s1 = self.description.sigma_hat[0];
        epsilon / (s1 * s1)
    }

    /// `b†A·VD⁻²V†·A†b = Σᵢ |w(i)|²/σ̂ᵢ²`, a proxy for the squared norm of
    /// the projection of `b` onto the column space of `A`.
    pub fn overlap(&self) -> f64 {
        self.w
            .iter()
            .zip(&self.description.sigma_hat)
            .map(|(w, s)| w.norm_sqr() / (s * s))
            .sum()
    }
}

fn split_delta(delta: f64, k: usize) -> f64 {
    delta / (k as f64 + 1.0)
}

fn norms_of_v(view: &Rc<SketchView<'_>>, cfg: &SolverConfig, streams: &StreamSplitter) -> Result<Vec<f64>> {
    let mut rng = streams.stream("v-norms");
    (0..view.k())
        .map(|i| Ok(view.column(i, cfg.norm_warmup, &mut rng)?.norm_sq()?))
        .collect()
}

fn finish_state(
    d: SuccinctDescription,
    w: Vec<Complex64>,
    power: i32,
    v_norm_sq: Vec<f64>,
    b_norm_sq: f64,
    budgets: Vec<ComponentBudget>,
    ledger: LedgerSnapshot,
    timings: Timings,
    cfg: &SolverConfig,
) -> Result<SolveState> {
    let w_prime: Vec<Complex64> = w
        .iter()
        .zip(&d.sigma_hat)
        .map(|(w, s)| w / s.powi(power))
        .collect();
    if w_prime.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
        return Err(Error::NonfiniteSample);
    }
    let budget_capped = budgets.iter().any(|b| b.group_size < b.required_group_size);
    Ok(SolveState {
        description: d,
        w,
        w_prime,
        power,
        v_norm_sq,
        b_norm_sq,
        budgets,
        budget_capped,
        ledger,
        timings,
        seed: cfg.seed,
        alpha: cfg.alpha,
        route: cfg.route,
        rejection_cap: cfg.rejection_cap,
        tau_b: cfg.tau_b,
    })
}

/// Sketch `A`, then estimate `w(i) = V(·,i)†A†b` for every `i` by the
/// bilinear estimator over `A†`, and set `w' = D⁻²w`.
pub fn prepare(a: &SampledMatrix, b: &SampledVector, cfg: &SolverConfig) -> Result<SolveState> {
    cfg.validate()?;
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.len(),
        });
    }
    let streams = cfg.streams();
    let start = a.ledger_snapshot();

    let t0 = Instant::now();
    let d = subsample(a, cfg.k, cfg.p, &streams)?;
    let mut timings = Timings {
        sketch_s: t0.elapsed().as_secs_f64(),
        ..Timings::default()
    };

    let view = Rc::new(SketchView::new(&d, a, cfg.memoize)?);
    let t1 = Instant::now();
    let v_norm_sq = norms_of_v(&view, cfg, &streams)?;
    let vm = view.v_matrix_with_norms(&v_norm_sq)?;
    timings.norms_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let mb = Metered::new(b, a.ledger());
    let b_norm_sq = VectorAccess::norm_sq(&mb)?;
    let fro2 = a.frobenius_sq();
    let sk = d.sigma_hat[d.k - 1];
    let eps_c = cfg.epsilon * sk * sk / (d.k as f64).sqrt();
    let delta_c = split_delta(cfg.delta, d.k);
    let at = Adjoint(a);
    let mut w = Vec::with_capacity(d.k);
    let mut budgets = Vec::with_capacity(d.k);
    for i in 0..d.k {
        let wrap = |e: Error| Error::EstimatorFailure {
            component: i,
            source: Box::new(e),
        };
        let full = EstimatorParams::bilinear(eps_c, delta_c, v_norm_sq[i], b_norm_sq, fro2).map_err(wrap)?;
        let (params, _) = full.capped(cfg.max_group_size);
        let est = estimate_bilinear(vm.column(i), &at, &mb, &params, &streams.child(&format!("component-{i}")))
            .map_err(wrap)?;
        w.push(est.value);
        budgets.push(ComponentBudget {
            epsilon: eps_c,
            delta: delta_c,
            groups: params.groups,
            required_group_size: full.group_size,
            group_size: params.group_size,
            guard_hits: est.guard_hits,
        });
    }
    timings.estimate_s = t2.elapsed().as_secs_f64();
    drop(vm);
    drop(view);
    let ledger = a.ledger_snapshot().since(&start);
    finish_state(d, w, 2, v_norm_sq, b_norm_sq, budgets, ledger, timings, cfg)
}

/// The PSD variant: `b` is only queried. Estimates `w(i) = V(·,i)†b` by
/// the inner-product estimator and sets `w' = D⁻¹w`.
pub fn prepare_psd<B>(a: &SampledMatrix, b: &B, cfg: &SolverConfig) -> Result<SolveState>
where
    B: QueryAccess + ?Sized,
{
    cfg.validate()?;
    let (m, n) = a.dims();
    if m != n {
        return Err(Error::DimensionMismatch { expected: m, got: n });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if n <= cfg.psd_check_limit {
        let defect = oracle::psd_defect(&a.to_dense())?;
        if defect > oracle::PSD_TOL {
            return Err(Error::NotPsd { defect });
        }
    }
    let streams = cfg.streams();
    let start = a.ledger_snapshot();

    let t0 = Instant::now();
    let d = subsample(a, cfg.k, cfg.p, &streams)?;
    let mut timings = Timings {
        sketch_s: t0.elapsed().as_secs_f64(),
        ..Timings::default()
    };

    let view = Rc::new(SketchView::new(&d, a, cfg.memoize)?);
    let t1 = Instant::now();
    let v_norm_sq = norms_of_v(&view, cfg, &streams)?;
    let vm = view.v_matrix_with_norms(&v_norm_sq)?;
    timings.norms_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let mb = Metered::new(b, a.ledger());
    let sk = d.sigma_hat[d.k - 1];
    let eps_rel = cfg.epsilon * sk / ((d.k as f64).sqrt() * cfg.b_norm_hint);
    let delta_c = split_delta(cfg.delta, d.k);
    let mut w = Vec::with_capacity(d.k);
    let mut budgets = Vec::with_capacity(d.k);
    for i in 0..d.k {
        let wrap = |e: Error| Error::EstimatorFailure {
            component: i,
            source: Box::new(e),
        };
        let full = EstimatorParams::inner(eps_rel, delta_c).map_err(wrap)?;
        let (params, _) = full.capped(cfg.max_group_size);
        let est = estimate_inner(vm.column(i), &mb, &params, &streams.child(&format!("component-{i}")))
            .map_err(wrap)?;
        w.push(est.value);
        budgets.push(ComponentBudget {
            epsilon: eps_rel * v_norm_sq[i].sqrt() * cfg.b_norm_hint,
            delta: delta_c,
            groups: params.groups,
            required_group_size: full.group_size,
            group_size: params.group_size,
            guard_hits: est.guard_hits,
        });
    }
    timings.estimate_s = t2.elapsed().as_secs_f64();
    drop(vm);
    drop(view);
    let ledger = a.ledger_snapshot().since(&start);
    let hint_sq = cfg.b_norm_hint * cfg.b_norm_hint;
    finish_state(d, w, 1, v_norm_sq, hint_sq, budgets, ledger, timings, cfg)
}

fn check_matrix(state: &SolveState, a: &SampledMatrix) -> Result<()> {
    if a.dims() != state.description.dims {
        return Err(Error::DimensionMismatch {
            expected: state.description.dims.1,
            got: a.cols(),
        });
    }
    Ok(())
}

/// `(A⁻¹b)(j) ≈ V(j,·)w'`, at the cost of `p` entry queries.
pub fn query_entry(state: &SolveState, a: &SampledMatrix, j: usize) -> Result<Complex64> {
    check_matrix(state, a)?;
    let view = SketchView::new(&state.description, a, false)?;
    let row = view.row(j)?;
    Ok(row.v.iter().zip(&state.w_prime).map(|(v, w)| v * w).sum())
}

/// Rejection sampler for `D_{Vw'}` over one state.
#[derive(Debug)]
pub enum SolutionSampler<'a> {
    Nested(RejectionSampler<VMatrix<'a>>),
    Collapsed(RejectionSampler<SAdjoint<'a>>),
}

impl<'a> SolutionSampler<'a> {
    /// Fails with `ZeroSolution` when the overlap of `b` with the column
    /// space of `A` is below `τ_b‖b‖²`, or when `‖w'‖ ≤ ε/σ̂₁²`.
    pub fn new(state: &'a SolveState, a: &'a SampledMatrix, epsilon: f64) -> Result<Self> {
        check_matrix(state, a)?;
        if state.power == 2 {
            let overlap = state.overlap();
            let threshold = state.tau_b * state.b_norm_sq;
            if overlap < threshold {
                return Err(Error::ZeroSolution {
                    quantity: "overlap",
                    value: overlap,
                    threshold,
                });
            }
        }
        let norm = state.w_prime_norm();
        let threshold = state.zero_threshold(epsilon);
        if norm <= threshold {
            return Err(Error::ZeroSolution {
                quantity: "|w'|",
                value: norm,
                threshold,
            });
        }
        let d = &state.description;
        let view = Rc::new(SketchView::new(d, a, true)?);
        let sampler = match state.route {
            SamplingRoute::Nested => {
                let vm = view.v_matrix_with_norms(&state.v_norm_sq)?;
                let cap = match state.rejection_cap {
                    Some(c) => c,
                    None => isometry_cap(d.k, state.alpha)?,
                };
                SolutionSampler::Nested(RejectionSampler::new(vm, &state.w_prime)?.with_cap(cap))
            }
            SamplingRoute::Collapsed => {
                let u: Vec<Complex64> = (0..d.p)
                    .map(|t| {
                        (0..d.k)
                            .map(|i| d.u_hat[i][t] * state.w_prime[i] / d.sigma_hat[i])
                            .sum()
                    })
                    .collect();
                let hint: f64 = state
                    .w_prime
                    .iter()
                    .zip(&state.v_norm_sq)
                    .map(|(w, n)| w.norm_sqr() * n)
                    .sum();
                let mut s = RejectionSampler::new(view.s_adjoint(), &u)?.with_norm_hint(hint);
                if let Some(c) = state.rejection_cap {
                    s = s.with_cap(c);
                }
                SolutionSampler::Collapsed(s)
            }
        };
        Ok(sampler)
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        match self {
            SolutionSampler::Nested(s) => s.sample(rng),
            SolutionSampler::Collapsed(s) => s.sample(rng),
        }
    }

    /// Proposals and acceptances of the outer sampler.
    pub fn counts(&self) -> (u64, u64) {
        match self {
            SolutionSampler::Nested(s) => (s.trials(), s.accepts()),
            SolutionSampler::Collapsed(s) => (s.trials(), s.accepts()),
        }
    }

    pub fn cap(&self) -> u64 {
        match self {
            SolutionSampler::Nested(s) => s.cap(),
            SolutionSampler::Collapsed(s) => s.cap(),
        }
    }
}

/// One draw from (approximately) `D_{A⁻¹b}`.
pub fn sample_solution<R: Rng + ?Sized>(
    state: &SolveState,
    a: &SampledMatrix,
    epsilon: f64,
    rng: &mut R,
) -> Result<usize> {
    SolutionSampler::new(state, a, epsilon)?.sample(rng)
}

/// `count` draws from stream "rejection", tallied per index.
pub fn sample_counts(state: &SolveState, a: &SampledMatrix, epsilon: f64, count: u64) -> Result<Vec<u64>> {
    let mut sampler = SolutionSampler::new(state, a, epsilon)?;
    let mut rng = StreamSplitter::new(state.seed).stream("rejection");
    let mut counts = vec![0u64; state.n()];
    for _ in 0..count {
        counts[sampler.sample(&mut rng)?] += 1;
    }
    Ok(counts)
}

/// Estimated `b†·A·Â^{∼−2}·A†·b`.
pub fn overlap_estimate(state: &SolveState) -> f64 {
    state.overlap()
}

pub enum PsdMode {
    Query(usize),
    Sample,
}

pub enum PsdOutput {
    Entry(Complex64),
    Index(usize),
}

/// [`prepare_psd`] followed by one query or one sample.
pub fn solve_psd<B>(a: &SampledMatrix, b: &B, cfg: &SolverConfig, mode: PsdMode) -> Result<(SolveState, PsdOutput)>
where
    B: QueryAccess + ?Sized,
{
    let state = prepare_psd(a, b, cfg)?;
    let out = match mode {
        PsdMode::Query(j) => PsdOutput::Entry(query_entry(&state, a, j)?),
        PsdMode::Sample => {
            let mut rng = cfg.streams().stream("rejection");
            PsdOutput::Index(sample_solution(&state, a, cfg.epsilon, &mut rng)?)
        }
    };
    Ok((state, out))
}
