//! Spectra of the environment, the decoherence factor `r(t)` and the
//! reduced density matrix of the qubit.
//!
//! The qubit state `a|0> + b|1>` couples to the environment only through
//! its `|1>` component, so the environment evolves under `H0` (coupling
//! zero) or `H1` (coupling `λ`). Starting from the ground state `|g>` of
//! `H0`, the off-diagonal element of the qubit density matrix is multiplied
//! by `r(t) = Σ_k w_k exp(-i E_k t)`, where `E_k` are eigenvalues of `H1`
//! and `w_k = |<k|g>|²`.

mod revival;
mod signal;

pub use revival::{find_revival, r_max, r_max_with, Revival, RevivalOptions};
pub use signal::{DecoherenceSignal, Method, SIGNAL_FORMAT_VERSION};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg;
use crate::model::{build_matrix, BandedHamiltonian, ModelParams};
use crate::propagate::{self, KrylovOptions};

/// Spectral weights below this are dropped from `r(t)`.
pub const WEIGHT_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub ground_vector: Vec<f64>,
    /// Row-major `d x d`, column `k` is the `k`-th eigenvector.
    pub eigenvectors: Option<Vec<f64>>,
    pub overlap_weights: Option<Vec<f64>>,
}

impl SpectrumResult {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Eigenvector `k` (requires `need_vectors`).
    pub fn eigenvector(&self, k: usize) -> Option<Vec<f64>> {
        let d = self.eigenvalues.len();
        self.eigenvectors
            .as_ref()
            .map(|z| (0..d).map(|i| z[i * d + k]).collect())
    }
}

/// Full spectrum, ground state, and optionally all eigenvectors.
pub fn eigensystem(h: &BandedHamiltonian, need_vectors: bool) -> Result<SpectrumResult> {
    let (e0, ground) = linalg::lowest_eigenpair(h)?;
    let (mut eigenvalues, eigenvectors) = if need_vectors {
        let (vals, vecs) = linalg::eigen_decomposition(h)?;
        (vals, Some(vecs))
    } else {
        (linalg::eigenvalues(h)?, None)
    };
    // the bisected ground energy is at least as accurate as QL's
    if eigenvalues[0] > e0 {
        eigenvalues[0] = e0;
    }
    Ok(SpectrumResult {
        eigenvalues,
        ground_vector: ground,
        eigenvectors,
        overlap_weights: None,
    })
}

/// Spectrum of `H1` restricted to the levels populated by the ground state
/// of `H0`. This is everything needed to evaluate `r(t)` at any time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchSpectrum {
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
    /// Total weight removed by the cutoff before renormalization.
    pub dropped_weight: f64,
}

impl QuenchSpectrum {
    /// Build from raw levels and weights (any order), dropping weights below
    /// [`WEIGHT_CUTOFF`] and renormalizing the rest.
    pub fn from_levels(energies: &[f64], weights: &[f64]) -> Result<Self> {
        if energies.len() != weights.len() || energies.is_empty() {
            return Err(Error::InvalidInput(
                "energies and weights must be nonempty and of equal length".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Numerical(format!("spectral weights sum to {total}")));
        }
        let mut order: Vec<usize> = (0..energies.len()).collect();
        order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
        let mut e = Vec::new();
        let mut w = Vec::new();
        let mut dropped = 0.0;
        for (ek, wk) in order.into_iter().map(|i| (energies[i], weights[i])) {
            if wk / total < WEIGHT_CUTOFF {
                dropped += wk.max(0.0);
            } else {
                e.push(ek);
                w.push(wk);
            }
        }
        let kept: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= kept);
        if dropped > 0.0 {
            log::debug!(
                "dropped {} levels carrying weight {dropped:e}",
                energies.len() - e.len()
            );
        }
        Ok(QuenchSpectrum {
            energies: e,
            weights: w,
            dropped_weight: dropped / total,
        })
    }

    /// Exact quench spectrum for `params` (whose `λ` defines `H1`).
    pub fn exact(params: &ModelParams) -> Result<Self> {
        let h0 = build_matrix(&params.uncoupled());
        let h1 = build_matrix(params);
        let (_, g) = linalg::lowest_eigenpair(&h0).map_err(|e| e.at(params))?;
        let (energies, weights) = linalg::spectral_weights(&h1, &g).map_err(|e| e.at(params))?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(
                Error::Numerical(format!("spectral weights sum to {total} instead of 1"))
                    .at(params),
            );
        }
        Self::from_levels(&energies, &weights)
    }

    pub fn mean_energy(&self) -> f64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| e * w)
            .sum()
    }

    /// Standard deviation of the energy distribution.
    pub fn energy_spread(&self) -> f64 {
        let mean = self.mean_energy();
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * (e - mean) * (e - mean))
            .sum::<f64>()
            .sqrt()
    }

    /// Weighted mean spacing of consecutive populated levels, or `None` when
    /// a single level is populated.
    pub fn mean_spacing(&self) -> Option<f64> {
        if self.energies.len() < 2 {
            return None;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..self.energies.len() - 1 {
            let pw = 0.5 * (self.weights[k] + self.weights[k + 1]);
            num += pw * (self.energies[k + 1] - self.energies[k]);
            den += pw;
        }
        let s = num / den;
        (s > 0.0).then_some(s)
    }

    /// `r(t)`.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        let mean = self.mean_energy();
        let (mut re, mut im) = (0.0, 0.0);
        for (e, w) in self.energies.iter().zip(&self.weights) {
            let (s, c) = ((e - mean) * t).sin_cos();
            re += w * c;
            im -= w * s;
        }
        Complex64::new(re, im) * Complex64::from_polar(1.0, -mean * t)
    }

    pub fn amplitudes(&self, times: &[f64], exec: Execution) -> Vec<Complex64> {
        exec.map(times, |&t| self.amplitude(t))
    }
}

/// Evaluation path for the exact `r(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Propagation {
    /// Spectral sum over eigenvalues of `H1` with tracked overlap weights.
    #[default]
    Spectral,
    /// Short-iterative Lanczos time stepping of the ground state.
    Krylov,
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("non-finite time".into()));
    }
    if times[0] < 0.0 {
        return Err(Error::InvalidInput(format!(
            "time grid must start at t >= 0, got {}",
            times[0]
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Exact decoherence factor on a time grid, using the spectral sum.
pub fn decoherence_factor(params: &ModelParams, times: &[f64]) -> Result<DecoherenceSignal> {
    decoherence_factor_with(params, times, Propagation::Spectral, Execution::available())
}

pub fn decoherence_factor_with(
    params: &ModelParams,
    times: &[f64],
    path: Propagation,
    exec: Execution,
) -> Result<DecoherenceSignal> {
    check_times(times)?;
    let values = match path {
        Propagation::Spectral => QuenchSpectrum::exact(params)?.amplitudes(times, exec),
        Propagation::Krylov => {
            let h0 = build_matrix(&params.uncoupled());
            let h1 = build_matrix(params);
            let (_, g) = linalg::lowest_eigenpair(&h0).map_err(|e| e.at(params))?;
            propagate::overlap_trace(&h1, &g, times, &KrylovOptions::default())
                .map_err(|e| e.at(params))?
        }
    };
    DecoherenceSignal::new(times.to_vec(), values, *params, Method::Exact)
}

/// Pure qubit state `a|0> + b|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    amp0: Complex64,
    amp1: Complex64,
}

impl QubitState {
    pub fn new(amp0: Complex64, amp1: Complex64) -> Result<Self> {
        let norm = amp0.norm_sqr() + amp1.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "qubit amplitudes have norm² {norm}, expected 1"
            )));
        }
        Ok(QubitState { amp0, amp1 })
    }

    pub fn amp0(&self) -> Complex64 {
        self.amp0
    }
    pub fn amp1(&self) -> Complex64 {
        self.amp1
    }
}

/// Qubit density matrix after the environment has imprinted `r`.
pub fn reduced_density_matrix(qubit: &QubitState, r: Complex64) -> Result<[[Complex64; 2]; 2]> {
    if !(r.norm() <= 1.0 + 1e-8) {
        return Err(Error::InvalidInput(format!(
            "decoherence factor has modulus {} > 1",
            r.norm()
        )));
    }
    let (a, b) = (qubit.amp0, qubit.amp1);
    let off = a * b.conj() * r;
    Ok([
        [Complex64::new(a.norm_sqr(), 0.0), off],
        [off.conj(), Complex64::new(b.norm_sqr(), 0.0)],
    ])
}

/// `Tr ρ²` of a 2×2 density matrix.
pub fn purity(rho: &[[Complex64; 2]; 2]) -> f64 {
    (0..2)
        .flat_map(|i| (0..2).map(move |j| (rho[i][j] * rho[j][i]).re))
        .sum()
}
