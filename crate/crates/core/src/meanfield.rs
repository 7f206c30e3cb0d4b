//! Coherent-state mean field.
//!
//! For the condensate `(s† + β t†)^N |0>` the energy per boson is
//! `E/N = β²/(1+β²)² [5α − 4 + 4βω(α−1) + β²(α + ω²(α−1))]`.
//! With a complex parameter `z = tan(φ/2) e^{iξ}` it becomes
//! `α sin²(φ/2) − (1−α)(sin φ cos ξ + ω sin²(φ/2))²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Symmetric,
    Broken,
    /// Deformed global minimum with a metastable minimum at `β = 0`.
    Coexistence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldPoint {
    pub beta_e: f64,
    pub energy_per_boson: f64,
    pub phase: Phase,
}

/// Global minimum and, when present, a distinct metastable well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldMinimum {
    pub global: MeanFieldPoint,
    pub secondary: Option<MeanFieldPoint>,
}

/// Point on the Bloch sphere of the condensate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    phi: f64,
    xi: f64,
}

impl PhaseSpacePoint {
    pub fn new(phi: f64, xi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "phi = {phi} outside [0, π]"
            )));
        }
        if !(0.0..std::f64::consts::TAU).contains(&xi) {
            return Err(Error::InvalidParameter(format!(
                "xi = {xi} outside [0, 2π)"
            )));
        }
        Ok(PhaseSpacePoint { phi, xi })
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
}

/// Critical couplings of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalCouplings {
    pub lambda_star: Option<f64>,
    pub lambda_c2: Option<f64>,
    pub lambda_c1: Option<f64>,
    pub e_c1_per_boson: Option<f64>,
}

pub fn critical_couplings(alpha: f64, omega: f64) -> CriticalCouplings {
    CriticalCouplings {
        lambda_star: lambda_star(alpha, omega),
        lambda_c2: critical_coupling_continuous(alpha, omega),
        lambda_c1: critical_coupling_first_order(alpha, omega),
        e_c1_per_boson: first_order_critical_energy(alpha, omega).map(|p| p.energy_per_boson),
    }
}

/// Energy per boson of the real condensate.
pub fn energy_surface(alpha: f64, omega: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let p = 1.0 + b2;
    b2 / (p * p) * poly(alpha, omega, beta)
}

/// Energy per boson including the coupling term `λ β²/(1+β²)`.
pub fn energy_surface_coupled(alpha: f64, omega: f64, lambda: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    energy_surface(alpha, omega, beta) + lambda * b2 / (1.0 + b2)
}

fn poly(alpha: f64, omega: f64, beta: f64) -> f64 {
    let (a, b, c) = poly_coeffs(alpha, omega);
    a + b * beta + c * beta * beta
}

fn poly_coeffs(alpha: f64, omega: f64) -> (f64, f64, f64) {
    (
        5.0 * alpha - 4.0,
        4.0 * omega * (alpha - 1.0),
        alpha + omega * omega * (alpha - 1.0),
    )
}

/// `d/dβ` of [`energy_surface_coupled`].
fn surface_slope(alpha: f64, omega: f64, lambda: f64, beta: f64) -> f64 {
    let (_, b, c) = poly_coeffs(alpha, omega);
    let b2 = beta * beta;
    let p = 1.0 + b2;
    let u = b2 / (p * p);
    let du = 2.0 * beta * (1.0 - b2) / (p * p * p);
    du * poly(alpha, omega, beta) + u * (b + 2.0 * c * beta) + lambda * 2.0 * beta / (p * p)
}

const SCAN_HALF_WIDTH: f64 = 10.0;
const SCAN_POINTS: usize = 2001;
const WELL_GAP: f64 = 1e-10;

/// A local minimum of the (coupled) surface.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Well {
    beta: f64,
    energy: f64,
    /// Grid index of the well, for barrier checks.
    index: usize,
}

fn grid_beta(i: usize) -> f64 {
    let h = 2.0 * SCAN_HALF_WIDTH / (SCAN_POINTS - 1) as f64;
    (i as f64 - ((SCAN_POINTS - 1) / 2) as f64) * h
}

/// All local minima of the coupled surface on `[-10, 10]`, refined.
fn wells(alpha: f64, omega: f64, lambda: f64) -> (Vec<Well>, Vec<f64>) {
    let f = |b: f64| energy_surface_coupled(alpha, omega, lambda, b);
    let vals: Vec<f64> = (0..SCAN_POINTS).map(|i| f(grid_beta(i))).collect();
    let mut out = Vec::new();
    for i in 1..SCAN_POINTS - 1 {
        if !(vals[i] < vals[i - 1] && vals[i] <= vals[i + 1]) {
            continue;
        }
        let b = grid_beta(i);
        let beta = if b == 0.0 {
            0.0
        } else {
            refine_minimum(alpha, omega, lambda, grid_beta(i - 1), grid_beta(i + 1))
        };
        out.push(Well {
            beta,
            energy: f(beta),
            index: i,
        });
    }
    if out.is_empty() {
        // minimum at the edge of the scan window
        let i = (0..SCAN_POINTS)
            .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
            .unwrap_or(0);
        out.push(Well {
            beta: grid_beta(i),
            energy: vals[i],
            index: i,
        });
    }
    (out, vals)
}

/// Minimizer on `[a, b]`: golden section, then bisection on the analytic slope.
fn refine_minimum(alpha: f64, omega: f64, lambda: f64, mut a: f64, mut b: f64) -> f64 {
    let f = |x: f64| energy_surface_coupled(alpha, omega, lambda, x);
    let g = 0.5 * (3.0 - 5f64.sqrt());
    let mut x1 = a + g * (b - a);
    let mut x2 = b - g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..40 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - g * (b - a);
            f2 = f(x2);
        }
    }
    let slope = |x: f64| surface_slope(alpha, omega, lambda, x);
    let (mut lo, mut hi) = (a, b);
    // widen until the slope brackets a sign change
    let mut width = (b - a).max(1e-12);
    for _ in 0..60 {
        if slope(lo) <= 0.0 && slope(hi) >= 0.0 {
            break;
        }
        if slope(lo) > 0.0 {
            lo -= width;
        }
        if slope(hi) < 0.0 {
            hi += width;
        }
        width *= 2.0;
    }
    if !(slope(lo) <= 0.0 && slope(hi) >= 0.0) {
        return 0.5 * (a + b);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two wells are distinct when the highest grid point between them rises
/// above the shallower well by more than the gap.
fn separated(vals: &[f64], a: &Well, b: &Well) -> bool {
    let (i, j) = if a.index < b.index {
        (a.index, b.index)
    } else {
        (b.index, a.index)
    };
    let barrier = vals[i..=j]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    barrier - a.energy.max(b.energy) > WELL_GAP
}

fn pick_global(wells: &[Well]) -> Well {
    let lowest = wells.iter().map(|w| w.energy).fold(f64::INFINITY, f64::min);
    // near-ties (mirror wells at ω = 0) go to β >= 0, then to the larger β
    let tol = 1e-14 * (1.0 + lowest.abs());
    *wells
        .iter()
        .filter(|w| w.energy <= lowest + tol)
        .max_by(|x, y| {
            (x.beta >= 0.0)
                .cmp(&(y.beta >= 0.0))
                .then(x.beta.total_cmp(&y.beta))
        })
        .expect("the surface has a minimum on the scan grid")
}

/// Global minimum of the coupled surface, with a metastable well if one is
/// separated from it by a barrier.
pub fn minimize_surface_coupled(alpha: f64, omega: f64, lambda: f64) -> MeanFieldMinimum {
    let (ws, vals) = wells(alpha, omega, lambda);
    let global = pick_global(&ws);
    let mut secondary: Option<Well> = None;
    for w in &ws {
        if w.index == global.index || !separated(&vals, w, &global) {
            continue;
        }
        // the symmetric reflection of the global well is not a distinct phase
        if omega == 0.0 && (w.beta + global.beta).abs() < 1e-9 {
            continue;
        }
        if secondary.is_none_or(|s| w.energy < s.energy) {
            secondary = Some(*w);
        }
    }
    let phase_of = |w: &Well, other: Option<&Well>| {
        if w.beta == 0.0 {
            Phase::Symmetric
        } else if other.is_some_and(|o| o.beta == 0.0) {
            Phase::Coexistence
        } else {
            Phase::Broken
        }
    };
    let g = MeanFieldPoint {
        beta_e: global.beta,
        energy_per_boson: global.energy,
        phase: phase_of(&global, secondary.as_ref()),
    };
    let s = secondary.map(|w| MeanFieldPoint {
        beta_e: w.beta,
        energy_per_boson: w.energy,
        phase: phase_of(&w, Some(&global)),
    });
    MeanFieldMinimum {
        global: g,
        secondary: s,
    }
}

/// Global minimum of the uncoupled surface.
pub fn minimize_surface(alpha: f64, omega: f64) -> MeanFieldMinimum {
    minimize_surface_coupled(alpha, omega, 0.0)
}

/// Critical line `α_c = (4+ω²)/(5+ω²)`.
pub fn critical_alpha(omega: f64) -> f64 {
    (4.0 + omega * omega) / (5.0 + omega * omega)
}

/// Where the symmetric minimum appears; independent of `ω`.
pub fn antispinodal_alpha(_omega: f64) -> f64 {
    0.8
}

/// Where the deformed minimum disappears, for `ω > 0`.
pub fn spinodal_alpha(omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "spinodal requires omega > 0, got {omega}"
        )));
    }
    let residual = |alpha: f64| -> f64 {
        let w2 = omega * omega;
        let a = (4.0 - 3.0 * alpha + 2.0 * (alpha - 1.0) * w2).powi(2);
        let b = 36.0 * w2 * (alpha - 1.0).powi(2);
        let x = b / a;
        // (A/B)(1 - (1+x)^{3/2}) written without cancellation
        3.0 * alpha / (3.0 * alpha - 4.0) + (1.5 * x.ln_1p()).exp_m1() / x
    };
    let mut lo = critical_alpha(omega);
    let mut hi = 1.0 - 1e-15;
    let (flo, fhi) = (residual(lo), residual(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!(
            "spinodal equation not bracketed for omega = {omega} ({flo}, {fhi})"
        )));
    }
    let rising = flo < 0.0;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let fm = residual(mid);
        if !fm.is_finite() {
            return Err(Error::Numerical(format!(
                "spinodal residual non-finite at alpha = {mid}"
            )));
        }
        if (fm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Where the deformed well of the energy surface itself disappears, for
/// `ω > 0`. Along the curve of deformed stationary points `α(β)`, obtained
/// by solving `dE/dβ = 0` for `α`, the well merges with the barrier at
/// the maximum of `α(β)`. This differs slightly from [`spinodal_alpha`].
pub fn spinodal_alpha_surface(omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "spinodal requires omega > 0, got {omega}"
        )));
    }
    let w = omega;
    let alpha_of = |b: f64| -> Option<f64> {
        let (b2, b3) = (b * b, b * b * b);
        let den = -2.0 * b3 * w + 2.0 * b2 * w * w - 3.0 * b2 + 6.0 * b * w + 5.0;
        let num = -(2.0 * b3 * w - 2.0 * b2 * w * w + 4.0 * b2 - 6.0 * b * w - 4.0);
        (den > 0.0).then(|| num / den)
    };
    // follow the branch that leaves α = 4/5 at β = 0
    let h = 1e-3;
    let mut best = (0.0, 0.8);
    let mut k = 1;
    while let Some(a) = alpha_of(k as f64 * h) {
        if a > best.1 {
            best = (k as f64 * h, a);
        } else if a < best.1 - 0.1 {
            break;
        }
        k += 1;
        if k > 100_000 {
            break;
        }
    }
    if best.0 == 0.0 {
        return Err(Error::Numerical(format!(
            "no deformed branch for omega = {omega}"
        )));
    }
    let f = |b: f64| alpha_of(b).unwrap_or(f64::NEG_INFINITY);
    let (mut a, mut b) = ((best.0 - h).max(0.0), best.0 + h);
    let g = 0.5 * (3.0 - 5f64.sqrt());
    for _ in 0..100 {
        let x1 = a + g * (b - a);
        let x2 = b - g * (b - a);
        if f(x1) > f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    Ok(f(0.5 * (a + b)))
}

/// Coupling at which the ground state of the coupled environment changes
/// phase: `λ* = (1−α)(4+ω²) − α`, absent when negative.
pub fn lambda_star(alpha: f64, omega: f64) -> Option<f64> {
    let v = (1.0 - alpha) * (4.0 + omega * omega) - alpha;
    if v < -1e-12 {
        None
    } else {
        Some(v.max(0.0))
    }
}

/// Energy `λ N β²/(1+β²)` given to the environment by switching on `λ`.
pub fn energy_transfer(n_bosons: usize, beta: f64, lambda: f64) -> f64 {
    let b2 = beta * beta;
    lambda * n_bosons as f64 * b2 / (1.0 + b2)
}

/// Coupling that lifts the uncoupled ground state to energy `target` per
/// boson. The defining relation is linear in `λ`, so it is solved directly.
fn coupling_to_reach(alpha: f64, omega: f64, target: f64) -> Option<f64> {
    let g = minimize_surface(alpha, omega).global;
    if g.beta_e == 0.0 {
        return None;
    }
    let b2 = g.beta_e * g.beta_e;
    let lambda = (target - g.energy_per_boson) * (1.0 + b2) / b2;
    (lambda > 0.0).then_some(lambda)
}

/// `λ_c^{(2)}`: the quench lands the environment at the continuous
/// excited-state critical energy `E = 0`.
pub fn critical_coupling_continuous(alpha: f64, omega: f64) -> Option<f64> {
    coupling_to_reach(alpha, omega, 0.0)
}

/// Left side of the critical-coupling relation, per boson.
pub fn quench_energy(alpha: f64, omega: f64, lambda: f64) -> f64 {
    let g = minimize_surface(alpha, omega).global;
    g.energy_per_boson + energy_transfer(1, g.beta_e, lambda)
}

/// Secondary well of the `ξ = π` section (local minimum over `β < 0`).
pub fn first_order_critical_energy(alpha: f64, omega: f64) -> Option<MeanFieldPoint> {
    if !(omega > 0.0) {
        return None;
    }
    let (ws, vals) = wells(alpha, omega, 0.0);
    let global = pick_global(&ws);
    ws.iter()
        .filter(|w| w.beta < 0.0 && w.index != global.index && separated(&vals, w, &global))
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .map(|w| MeanFieldPoint {
            beta_e: w.beta,
            energy_per_boson: w.energy,
            phase: Phase::Broken,
        })
}

/// `λ_c^{(1)}`: the quench lands the environment at the first-order
/// excited-state critical energy.
pub fn critical_coupling_first_order(alpha: f64, omega: f64) -> Option<f64> {
    let ec1 = first_order_critical_energy(alpha, omega)?;
    coupling_to_reach(alpha, omega, ec1.energy_per_boson)
}

/// Energy per boson of the complex coherent state.
pub fn complex_surface(alpha: f64, omega: f64, point: &PhaseSpacePoint) -> f64 {
    complex_surface_coupled(alpha, omega, 0.0, point.phi, point.xi)
}

/// As [`complex_surface`] with the coupling term, on raw angles.
pub fn complex_surface_coupled(alpha: f64, omega: f64, lambda: f64, phi: f64, xi: f64) -> f64 {
    let s2 = (0.5 * phi).sin().powi(2);
    let q = phi.sin() * xi.cos() + omega * s2;
    (alpha + lambda) * s2 - (1.0 - alpha) * q * q
}
