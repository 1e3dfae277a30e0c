//! Synthetic low-rank instances `A = U·diag(σ)·V†` with a prescribed
//! condition number, and right-hand sides with a chosen overlap.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{DenseMatrix, DenseVector};
use crate::rng::StreamSplitter;
use crate::sampled_matrix::SampledMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Linear,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BMode {
    InRange,
    /// `b = √c·b_A + √(1−c)·b̄_A` with unit `b_A ∈ col(A)` and unit `b̄_A ⊥ col(A)`.
    Mixed(f64),
    Orthogonal,
}

impl fmt::Display for BMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BMode::InRange => write!(f, "in-range"),
            BMode::Mixed(c) => write!(f, "mixed({c})"),
            BMode::Orthogonal => write!(f, "orthogonal"),
        }
    }
}

impl FromStr for BMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in-range" => Ok(BMode::InRange),
            "orthogonal" => Ok(BMode::Orthogonal),
            _ => s
                .strip_prefix("mixed(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|c| c.parse().ok())
                .map(BMode::Mixed)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown b-mode {s:?}"))),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Profile::Linear),
            "geometric" => Ok(Profile::Geometric),
            _ => Err(Error::InvalidConfig(format!("unknown profile {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub kappa: f64,
    pub profile: Profile,
    pub b_mode: BMode,
    /// Spectral norm of `A`.
    pub norm: f64,
    /// Hermitian PSD `A = U·diag(σ)·U†` (requires `m = n`).
    pub psd: bool,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(m: usize, n: usize, k: usize, kappa: f64, seed: u64) -> Self {
        InstanceSpec {
            m,
            n,
            k,
            kappa,
            profile: Profile::Linear,
            b_mode: BMode::InRange,
            norm: 1.0,
            psd: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k == 0 || self.k > self.m.min(self.n) {
            return bad(format!("k = {} must lie in 1..=min(m, n) = {}", self.k, self.m.min(self.n)));
        }
        if !(self.kappa >= 1.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be at least 1, got {}", self.kappa));
        }
        if self.k == 1 && self.kappa != 1.0 {
            return bad("a rank-1 matrix has kappa = 1".into());
        }
        if !(self.norm > 0.0 && self.norm.is_finite()) {
            return bad(format!("norm must be positive, got {}", self.norm));
        }
        if self.psd && self.m != self.n {
            return bad("a PSD instance must be square".into());
        }
        match self.b_mode {
            BMode::Mixed(c) if !(0.0..=1.0).contains(&c) => {
                return bad(format!("overlap c must lie in [0, 1], got {c}"));
            }
            BMode::Orthogonal | BMode::Mixed(_) if self.k == self.m => {
                if self.b_mode != BMode::Mixed(1.0) {
                    return bad("col(A) is all of C^m, so no orthogonal component exists".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// `σ₁ ≥ … ≥ σ_k` with `σ₁ = norm` and `σ₁/σ_k = kappa`.
    pub fn singular_values(&self) -> Vec<f64> {
        let k = self.k;
        (0..k)
            .map(|i| {
                if k == 1 {
                    return self.norm;
                }
                let x = i as f64 / (k - 1) as f64;
                let rel = match self.profile {
                    Profile::Linear => 1.0 - (1.0 - 1.0 / self.kappa) * x,
                    Profile::Geometric => self.kappa.powf(-x),
                };
                self.norm * rel
            })
            .collect()
    }
}

/// A generated instance in factored form.
#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub sigma: Vec<f64>,
    /// `m × k`, orthonormal columns.
    pub u: DenseMatrix,
    /// `n × k`, orthonormal columns.
    pub v: DenseMatrix,
    pub b: DenseVector,
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed `rows × cols` matrix with orthonormal columns: QR of a
/// complex Gaussian matrix with the phases of `R`'s diagonal moved into `Q`.
pub fn haar<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let g = DMatrix::from_fn(rows, cols, |_, _| gaussian(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for x in q.column_mut(j).iter_mut() {
                *x *= phase;
            }
        }
    }
    q
}

fn normalized(v: DenseVector) -> DenseVector {
    let n = v.norm();
    v.unscale(n)
}

pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let streams = StreamSplitter::new(spec.seed);
    let mut rng = streams.stream("instance");
    let u = haar(spec.m, spec.k, &mut rng);
    let v = if spec.psd { u.clone() } else { haar(spec.n, spec.k, &mut rng) };
    let sigma = spec.singular_values();

    let mut b_rng = streams.stream("instance-b");
    let c = DVector::from_fn(spec.k, |_, _| gaussian(&mut b_rng));
    let b_in = normalized(&u * c);
    let outside = |rng: &mut crate::rng::StreamRng| -> DenseVector {
        let g = DVector::from_fn(spec.m, |_, _| gaussian(rng));
        let proj = &u * (u.adjoint() * &g);
        normalized(g - proj)
    };
    let b = match spec.b_mode {
        BMode::InRange => b_in,
        BMode::Orthogonal => outside(&mut b_rng),
        BMode::Mixed(c) if c == 1.0 => b_in,
        BMode::Mixed(c) => {
            let b_out = outside(&mut b_rng);
            b_in * Complex64::from(c.sqrt()) + b_out * Complex64::from((1.0 - c).sqrt())
        }
    };
    Ok(Instance { spec: *spec, sigma, u, v, b })
}

impl Instance {
    pub fn dense(&self) -> DenseMatrix {
        let us = DenseMatrix::from_fn(self.spec.m, self.spec.k, |i, j| self.u[(i, j)] * self.sigma[j]);
        us * self.v.adjoint()
    }

    /// Row-major entries of `A`, built row by row from the factors.
    pub fn row_major(&self) -> Vec<Complex64> {
        let (m, n, k) = (self.spec.m, self.spec.n, self.spec.k);
        let vh = self.v.adjoint();
        let mut out = Vec::with_capacity(m * n);
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..m {
            row.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
            for r in 0..k {
                let c = self.u[(i, r)] * self.sigma[r];
                for (x, h) in row.iter_mut().zip(vh.row(r).iter()) {
                    *x += c * h;
                }
            }
            out.extend_from_slice(&row);
        }
        out
    }

    pub fn sampled(&self, with_transpose: bool) -> Result<SampledMatrix> {
        SampledMatrix::from_row_major(&self.row_major(), (self.spec.m, self.spec.n), with_transpose)
    }

    /// `A⁻¹b = V·diag(σ)⁻¹·U†b`, exact from the factors.
    pub fn solution(&self) -> DenseVector {
        let c = self.u.adjoint() * &self.b;
        let scaled = DVector::from_fn(self.spec.k, |i, _| c[i] / self.sigma[i]);
        &self.v * scaled
    }

    pub fn kappa(&self) -> f64 {
        self.sigma[0] / self.sigma[self.spec.k - 1]
    }
}
