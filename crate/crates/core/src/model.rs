//! Parameter points and the Fock-basis Hamiltonian of the boson environment.
//!
//! The environment Hamiltonian is
//! `H = (α + λ) n_t − (1 − α) Q·Q / N` with `Q = t†s + s†t + ω n_t`,
//! written in the basis `|N, l⟩` with `l` t-bosons. In that basis it is a
//! symmetric matrix of bandwidth two. The constant shift `Δ = α − 1` is
//! never added.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A validated point `(α, ω, λ, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    alpha: f64,
    omega: f64,
    lambda: f64,
    n_bosons: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha: f64,
    omega: f64,
    #[serde(default)]
    lambda: f64,
    #[serde(rename = "N")]
    n: usize,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(r.alpha, r.omega, r.lambda, r.n)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            alpha: p.alpha,
            omega: p.omega,
            lambda: p.lambda,
            n: p.n_bosons,
        }
    }
}

impl ModelParams {
    pub fn new(alpha: f64, omega: f64, lambda: f64, n_bosons: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must be finite and >= 0, got {omega}"
            )));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        if n_bosons == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        Ok(ModelParams {
            alpha,
            omega,
            lambda,
            n_bosons,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }
    /// Hilbert-space dimension `N + 1`.
    pub fn dimension(&self) -> usize {
        self.n_bosons + 1
    }

    /// Same point with a different coupling.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        ModelParams::new(self.alpha, self.omega, lambda, self.n_bosons)
    }

    /// Same point with a different size.
    pub fn with_n(&self, n_bosons: usize) -> Result<Self> {
        ModelParams::new(self.alpha, self.omega, self.lambda, n_bosons)
    }

    /// The uncoupled environment (`λ = 0`).
    pub fn uncoupled(&self) -> Self {
        ModelParams {
            lambda: 0.0,
            ..*self
        }
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(alpha={}, omega={}, lambda={}, N={})",
            self.alpha, self.omega, self.lambda, self.n_bosons
        )
    }
}

/// Coefficients of the generic two-species Hamiltonian
/// `a n_t + b (t†s + s†t) + c n_t n_s + d (t†t†ss + s†s†tt) + e (...) + f n_t²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    /// Constant shift, kept for reference and never added to the matrix.
    pub delta: f64,
}

pub fn coefficients(params: &ModelParams) -> StCoefficients {
    let n = params.n_bosons as f64;
    let (alpha, omega, lambda) = (params.alpha, params.omega, params.lambda);
    let g = (alpha - 1.0) / n;
    StCoefficients {
        a: alpha + lambda - 2.0 * g,
        b: omega * g,
        c: 2.0 * g,
        d: g,
        e: 2.0 * omega * g,
        f: omega * omega * g,
        delta: alpha - 1.0,
    }
}

/// Symmetric bandwidth-2 matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandedHamiltonian {
    pub diag: Vec<f64>,
    pub off1: Vec<f64>,
    pub off2: Vec<f64>,
}

pub fn build_matrix(params: &ModelParams) -> BandedHamiltonian {
    let co = coefficients(params);
    let n = params.n_bosons;
    let nf = n as f64;
    let mut diag = Vec::with_capacity(n + 1);
    let mut off1 = Vec::with_capacity(n);
    let mut off2 = Vec::with_capacity(n.saturating_sub(1));
    // the coupling enters as a separate term so that H is exactly affine in λ
    let a0 = params.alpha - 2.0 * co.d;
    for l in 0..=n {
        let lf = l as f64;
        let base = a0 * lf + co.f * lf * lf + co.c * lf * (1.0 + nf - lf);
        diag.push(base + params.lambda * lf);
        if l < n {
            // square roots taken factor by factor so nothing overflows
            let s = (nf - lf).sqrt() * (lf + 1.0).sqrt();
            off1.push(co.b * s + co.e * s * lf);
        }
        if l + 1 < n {
            let up = (lf + 2.0).sqrt() * (lf + 1.0).sqrt();
            let down = (nf - lf).sqrt() * (nf - lf - 1.0).sqrt();
            off2.push(co.d * up * down);
        }
    }
    BandedHamiltonian { diag, off1, off2 }
}

impl BandedHamiltonian {
    pub fn dimension(&self) -> usize {
        self.diag.len()
    }

    /// Check lengths and finiteness.
    pub fn validate(&self) -> Result<()> {
        let d = self.diag.len();
        if d == 0 || self.off1.len() + 1 != d || self.off2.len() + 2 != d.max(2) {
            return Err(Error::InvalidInput(format!(
                "banded matrix has inconsistent diagonal lengths {}, {}, {}",
                d,
                self.off1.len(),
                self.off2.len()
            )));
        }
        let finite = self
            .diag
            .iter()
            .chain(&self.off1)
            .chain(&self.off2)
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Numerical("non-finite matrix entry".into()));
        }
        Ok(())
    }

    /// Entry `(i, j)` of the full matrix.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.diag[lo],
            1 => self.off1[lo],
            2 => self.off2[lo],
            _ => 0.0,
        }
    }

    /// True when the odd diagonal vanishes, so that even and odd `l` decouple.
    pub fn is_parity_split(&self) -> bool {
        self.off1.iter().all(|&x| x == 0.0)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dimension();
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in i.saturating_sub(2)..(i + 3).min(d) {
                m[i * d + j] = self.get(i, j);
            }
        }
        m
    }

    /// `y = H x` for a real or complex vector.
    pub fn apply<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let d = self.dimension();
        assert_eq!(x.len(), d);
        assert_eq!(y.len(), d);
        for i in 0..d {
            let mut acc = x[i] * self.diag[i];
            if i >= 1 {
                acc = acc + x[i - 1] * self.off1[i - 1];
            }
            if i >= 2 {
                acc = acc + x[i - 2] * self.off2[i - 2];
            }
            if i + 1 < d {
                acc = acc + x[i + 1] * self.off1[i];
            }
            if i + 2 < d {
                acc = acc + x[i + 2] * self.off2[i];
            }
            y[i] = acc;
        }
    }

    /// Upper bound on the spectral radius (Gershgorin).
    pub fn norm_bound(&self) -> f64 {
        (0..self.dimension())
            .map(|i| {
                (i.saturating_sub(2)..(i + 3).min(self.dimension()))
                    .map(|j| self.get(i, j).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let d = self.dimension();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..d {
            let r: f64 = (i.saturating_sub(2)..(i + 3).min(d))
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }
}
