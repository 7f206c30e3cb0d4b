//! Tamm-Dancoff approximations to the decoherence factor.
//!
//! Each Hamiltonian is described around its own deformed condensate
//! `Γ_g† = (s† + β t†)/√(1+β²)` with the orthogonal excitation
//! `Γ_e† = (−β s† + t†)/√(1+β²)`. The ground state of `H0` is then a
//! binomial superposition of `k`-phonon states of `H1`, whose energies are
//! `k Δ` (one-phonon approximation) or `k Δ + k(k−1) Ω` (with the two-phonon
//! anharmonicity).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Execution;
use crate::meanfield;
use crate::model::{coefficients, ModelParams, StCoefficients};
use crate::spectra::{DecoherenceSignal, Method, QuenchSpectrum};

/// Binomial weights below this are truncated in the two-phonon sum.
pub const TDA_WEIGHT_CUTOFF: f64 = 1e-18;

/// Diagonal matrix elements of a Hamiltonian in its own condensate basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdaElements {
    /// `<g|H|g>`
    pub ground: f64,
    /// `<e|H|e>`, one excited boson
    pub one_phonon: f64,
    /// `<e²|H|e²>`, two excited bosons
    pub two_phonon: f64,
}

impl TdaElements {
    /// One-phonon gap.
    pub fn delta(&self) -> f64 {
        self.one_phonon - self.ground
    }

    /// Anharmonicity of the two-phonon state.
    pub fn omega(&self) -> f64 {
        0.5 * self.two_phonon - self.one_phonon + 0.5 * self.ground
    }
}

/// Matrix elements for the generic coefficients `co` with `n` bosons,
/// around the condensate of deformation `beta`.
pub fn tda_elements(co: &StCoefficients, n: usize, beta: f64) -> TdaElements {
    let StCoefficients {
        a, b, c, d, e, f, ..
    } = *co;
    let nf = n as f64;
    let b2 = beta * beta;
    let p = 1.0 + b2;
    let p2 = p * p;
    let diag1 = a + c + f;
    let two = ((c + 2.0 * d) * b2 + 2.0 * e * b2 * beta + f * b2 * b2) / p2;
    let mix = (f * b2 - 2.0 * d * b2 + e * (beta - b2 * beta)) / p2;
    let flip = c * (1.0 - b2).powi(2) / p2;
    let single = diag1 * b2 / p + 2.0 * b * beta / p;
    let excited = (diag1 - 2.0 * b * beta) / p;

    let ground = nf * single + nf * (nf - 1.0) * two;
    let m = nf - 1.0;
    let one_phonon = excited + m * flip + 4.0 * m * mix + m * single + m * (m - 1.0) * two;
    let m = nf - 2.0;
    let pair = 2.0 * ((c + 2.0 * d) * b2 - 2.0 * e * beta + f) / p2;
    let two_phonon =
        pair + 2.0 * excited + 2.0 * m * flip + 8.0 * m * mix + m * single + m * (m - 1.0) * two;
    TdaElements {
        ground,
        one_phonon,
        two_phonon,
    }
}

/// Overlaps of the `H0` condensate boson with the `H1` condensate and
/// excitation bosons.
pub fn overlap_coeffs(beta0: f64, beta1: f64) -> (f64, f64) {
    let norm = ((1.0 + beta0 * beta0) * (1.0 + beta1 * beta1)).sqrt();
    ((1.0 + beta0 * beta1) / norm, (beta0 - beta1) / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdaSetup {
    pub params: ModelParams,
    pub beta0: f64,
    pub beta1: f64,
    pub f_gg: f64,
    pub f_ge: f64,
    /// `<g|H1|g>` around the `H1` condensate.
    pub e_10: f64,
    pub delta_e1: f64,
    pub omega_e1: f64,
}

impl TdaSetup {
    /// Deformations from the mean-field minima of `H0` and `H1`.
    pub fn new(params: &ModelParams) -> Self {
        let beta0 = meanfield::minimize_surface(params.alpha(), params.omega())
            .global
            .beta_e;
        let beta1 =
            meanfield::minimize_surface_coupled(params.alpha(), params.omega(), params.lambda())
                .global
                .beta_e;
        Self::with_betas(params, beta0, beta1)
    }

    pub fn with_betas(params: &ModelParams, beta0: f64, beta1: f64) -> Self {
        let (f_gg, f_ge) = overlap_coeffs(beta0, beta1);
        let el = tda_elements(&coefficients(params), params.n_bosons(), beta1);
        TdaSetup {
            params: *params,
            beta0,
            beta1,
            f_gg,
            f_ge,
            e_10: el.ground,
            delta_e1: el.delta(),
            omega_e1: el.omega(),
        }
    }

    /// Energy of the `k`-phonon state relative to `e_10`.
    fn level(&self, k: usize, extended: bool) -> f64 {
        let kf = k as f64;
        let mut e = kf * self.delta_e1;
        if extended {
            e += kf * (kf - 1.0) * self.omega_e1;
        }
        e
    }

    /// Binomial weights `C(N,k) f_gg^{2(N−k)} f_ge^{2k}` computed in log
    /// space, with the indices kept.
    pub fn phonon_weights(&self) -> Vec<(usize, f64)> {
        let n = self.params.n_bosons();
        let lg = 2.0 * self.f_gg.abs().ln();
        let le = 2.0 * self.f_ge.abs().ln();
        let mut out = Vec::new();
        let mut log_binom = 0.0f64;
        for k in 0..=n {
            if k > 0 {
                log_binom += ((n - k + 1) as f64 / k as f64).ln();
            }
            let kf = k as f64;
            let a = if k == n { 0.0 } else { (n - k) as f64 * lg };
            let b = if k == 0 { 0.0 } else { kf * le };
            let w = (log_binom + a + b).exp();
            if w >= TDA_WEIGHT_CUTOFF {
                out.push((k, w));
            }
        }
        out
    }

    /// The phonon ladder as a quench spectrum.
    pub fn spectrum(&self, extended: bool) -> Result<QuenchSpectrum> {
        let ws = self.phonon_weights();
        let energies: Vec<f64> = ws.iter().map(|&(k, _)| self.level(k, extended)).collect();
        let weights: Vec<f64> = ws.iter().map(|&(_, w)| w).collect();
        QuenchSpectrum::from_levels(&energies, &weights)
    }
}

/// One-phonon closed form
/// `r(t) = e^{−iΔtN/2} (f_gg² e^{iΔt/2} + f_ge² e^{−iΔt/2})^N`.
pub fn r_tda(setup: &TdaSetup, times: &[f64]) -> Result<DecoherenceSignal> {
    let n = setup.params.n_bosons() as f64;
    let (wg, we) = (setup.f_gg * setup.f_gg, setup.f_ge * setup.f_ge);
    let delta = setup.delta_e1;
    let values = times
        .iter()
        .map(|&t| {
            let half = 0.5 * delta * t;
            let z = Complex64::from_polar(wg, half) + Complex64::from_polar(we, -half);
            let (r, theta) = z.to_polar();
            Complex64::from_polar(r.powf(n), n * (theta - half))
        })
        .collect();
    DecoherenceSignal::new(times.to_vec(), values, setup.params, Method::Tda)
}

/// Two-phonon sum `Σ_k C(N,k) f_gg^{2(N−k)} f_ge^{2k} e^{−i(kΔ + k(k−1)Ω)t}`.
pub fn r_tda_extended(
    setup: &TdaSetup,
    times: &[f64],
    exec: Execution,
) -> Result<DecoherenceSignal> {
    let ws = setup.phonon_weights();
    let truncated = 1.0 - ws.iter().map(|&(_, w)| w).sum::<f64>();
    if truncated.abs() > 1e-12 {
        log::debug!("two-phonon sum truncated weight {truncated:e}");
    }
    let terms: Vec<(f64, f64)> = ws.iter().map(|&(k, w)| (setup.level(k, true), w)).collect();
    let values = exec.map(times, |&t| {
        terms
            .iter()
            .map(|&(e, w)| Complex64::from_polar(w, -e * t))
            .sum()
    });
    DecoherenceSignal::new(times.to_vec(), values, setup.params, Method::Tda2)
}
