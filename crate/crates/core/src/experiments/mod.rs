//! Batch workflows: level flows, `r_max(λ)` sweeps, dip
//! location, finite-size scaling and the first-order probe.

pub mod cache;
pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::meanfield;
use crate::model::{build_matrix, ModelParams};
use crate::spectra::{
    self, find_revival, DecoherenceSignal, Method, QuenchSpectrum, Revival, RevivalOptions,
};
use crate::tda::TdaSetup;
use cache::{cached, ResultCache};

/// Default size ladder for scaling fits.
pub const DEFAULT_SIZES: [usize; 7] = [100, 200, 400, 800, 1600, 3200, 6400];

/// Spectrum for a given method.
pub fn quench_spectrum(params: &ModelParams, method: Method) -> Result<QuenchSpectrum> {
    match method {
        Method::Exact => QuenchSpectrum::exact(params),
        Method::Tda => TdaSetup::new(params).spectrum(false),
        Method::Tda2 => TdaSetup::new(params).spectrum(true),
    }
}

/// `r(t)` on a grid for a given method.
pub fn signal(
    params: &ModelParams,
    method: Method,
    times: &[f64],
    exec: Execution,
) -> Result<DecoherenceSignal> {
    match method {
        Method::Exact => {
            spectra::decoherence_factor_with(params, times, spectra::Propagation::Spectral, exec)
        }
        Method::Tda => crate::tda::r_tda(&TdaSetup::new(params), times),
        Method::Tda2 => crate::tda::r_tda_extended(&TdaSetup::new(params), times, exec),
    }
}

/// How far in time to look for the first revival.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HorizonPolicy {
    /// Window set by the level spacing and extended until a revival is found.
    Adaptive(RevivalOptions),
    /// Fixed uniform grid on `[0, t_max]`.
    Fixed { t_max: f64, samples: usize },
}

impl Default for HorizonPolicy {
    fn default() -> Self {
        HorizonPolicy::Adaptive(RevivalOptions::default())
    }
}

/// First revival at one parameter point; `None` when there is none within
/// the horizon (for instance at `λ = 0`).
pub fn revival_point(
    params: &ModelParams,
    method: Method,
    horizon: &HorizonPolicy,
    cache: Option<&ResultCache>,
) -> Result<Option<Revival>> {
    #[derive(Serialize)]
    struct Key<'a> {
        params: &'a ModelParams,
        method: Method,
        horizon: &'a HorizonPolicy,
    }
    let key = Key {
        params,
        method,
        horizon,
    };
    cached(cache, "revival", &key, || {
        let found = match horizon {
            HorizonPolicy::Adaptive(opts) => {
                let spec = quench_spectrum(params, method)?;
                find_revival(&spec, opts, Execution::Sequential)
            }
            HorizonPolicy::Fixed { t_max, samples } => {
                if !(*t_max > 0.0) || *samples < 3 {
                    return Err(Error::InvalidInput(
                        "fixed horizon needs t_max > 0 and 3+ samples".into(),
                    ));
                }
                let dt = t_max / (*samples - 1) as f64;
                let times: Vec<f64> = (0..*samples).map(|i| i as f64 * dt).collect();
                let sig = signal(params, method, &times, Execution::Sequential)?;
                spectra::r_max_with(&sig, &RevivalOptions::default())
            }
        };
        match found {
            Ok(r) => Ok(Some(r)),
            Err(Error::HorizonTooShort(_)) => Ok(None),
            Err(e) => Err(e),
        }
    })
}

/// A `r_max(λ)` sweep over several sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub alpha: f64,
    pub omega: f64,
    pub lambda_grid: Vec<f64>,
    pub sizes: Vec<usize>,
    pub method: Method,
    pub horizon: HorizonPolicy,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() || self.sizes.is_empty() {
            return Err(Error::InvalidInput("sweep grids must be nonempty".into()));
        }
        if self.lambda_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "lambda grid must be strictly ascending".into(),
            ));
        }
        if self.sizes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "sizes must be strictly ascending".into(),
            ));
        }
        if self.sizes[0] < 10 {
            return Err(Error::InvalidInput("sizes must be at least 10".into()));
        }
        ModelParams::new(self.alpha, self.omega, self.lambda_grid[0], self.sizes[0])?;
        Ok(())
    }
}

/// `r_max(λ)` for one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmaxCurve {
    pub n_bosons: usize,
    pub lambdas: Vec<f64>,
    pub revivals: Vec<Option<Revival>>,
}

impl RmaxCurve {
    pub fn rmax(&self) -> Vec<Option<f64>> {
        self.revivals.iter().map(|r| r.map(|r| r.value)).collect()
    }

    /// Grid point with the smallest `r_max`.
    pub fn dip(&self) -> Option<DipPoint> {
        self.lambdas
            .iter()
            .zip(&self.revivals)
            .filter_map(|(&l, r)| {
                r.map(|r| DipPoint {
                    lambda: l,
                    rmax: r.value,
                })
            })
            .min_by(|a, b| a.rmax.total_cmp(&b.rmax))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipPoint {
    pub lambda: f64,
    pub rmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub curves: Vec<RmaxCurve>,
}

/// Evaluate every `(N, λ)` point of the sweep. Results are ordered by grid
/// index regardless of execution order.
pub fn rmax_sweep(
    spec: &SweepSpec,
    exec: Execution,
    cache: Option<&ResultCache>,
) -> Result<SweepResult> {
    spec.validate()?;
    let tasks: Vec<(usize, f64)> = spec
        .sizes
        .iter()
        .flat_map(|&n| spec.lambda_grid.iter().map(move |&l| (n, l)))
        .collect();
    let results = exec.map(&tasks, |&(n, l)| {
        let p = ModelParams::new(spec.alpha, spec.omega, l, n)?;
        revival_point(&p, spec.method, &spec.horizon, cache)
    });
    let mut it = results.into_iter();
    let mut curves = Vec::with_capacity(spec.sizes.len());
    for &n in &spec.sizes {
        let revivals = it
            .by_ref()
            .take(spec.lambda_grid.len())
            .collect::<Result<Vec<_>>>()?;
        curves.push(RmaxCurve {
            n_bosons: n,
            lambdas: spec.lambda_grid.clone(),
            revivals,
        });
    }
    Ok(SweepResult {
        spec: spec.clone(),
        curves,
    })
}

/// Grid `lo, lo + step, ...` up to `hi` inclusive (within rounding).
pub fn lambda_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad grid {lo}:{hi}:{step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

/// Minimum of `r_max(λ)` for one size: a coarse grid of step 0.05 on
/// `[lo, hi]`, then a grid of step 0.005 within one coarse step of the
/// coarse minimum.
#[allow(clippy::too_many_arguments)]
pub fn locate_dip(
    alpha: f64,
    omega: f64,
    n_bosons: usize,
    lo: f64,
    hi: f64,
    method: Method,
    exec: Execution,
    cache: Option<&ResultCache>,
) -> Result<DipPoint> {
    let horizon = HorizonPolicy::default();
    let run = |grid: Vec<f64>| -> Result<Option<DipPoint>> {
        let spec = SweepSpec {
            alpha,
            omega,
            lambda_grid: grid,
            sizes: vec![n_bosons],
            method,
            horizon: horizon.clone(),
        };
        Ok(rmax_sweep(&spec, exec, cache)?.curves[0].dip())
    };
    let coarse = run(lambda_grid(lo.max(0.0), hi, 0.05)?)?
        .ok_or_else(|| Error::Numerical("no revival anywhere on the coarse grid".into()))?;
    let fine_lo = (coarse.lambda - 0.05).max(0.0);
    let fine = run(lambda_grid(fine_lo, coarse.lambda + 0.05, 0.005)?)?.unwrap_or(coarse);
    Ok(if fine.rmax <= coarse.rmax {
        fine
    } else {
        coarse
    })
}

/// Power law `r = A N^{-γ}` fitted in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub amplitude: f64,
    pub gamma: f64,
    pub stderr_gamma: f64,
    /// Root-mean-square residual of `ln r`.
    pub residual: f64,
    pub n_points: usize,
}

/// Unweighted least squares of `ln r` against `ln N`.
pub fn scaling_fit(sizes: &[usize], rmax: &[f64]) -> Result<ScalingFit> {
    if sizes.len() != rmax.len() {
        return Err(Error::InvalidInput(
            "sizes and values differ in length".into(),
        ));
    }
    if sizes.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "a scaling fit needs at least 4 sizes, got {}",
            sizes.len()
        )));
    }
    if let Some(v) = rmax.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "r_max values must be positive, got {v}"
        )));
    }
    let nmin = *sizes.iter().min().unwrap_or(&0) as f64;
    let nmax = *sizes.iter().max().unwrap_or(&0) as f64;
    if !(nmin > 0.0 && nmax >= 10.0 * nmin) {
        return Err(Error::InvalidInput(
            "sizes must span at least one decade".into(),
        ));
    }
    let x: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = rmax.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ssr: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let stderr = (ssr / (m - 2.0) / sxx).sqrt();
    Ok(ScalingFit {
        amplitude: intercept.exp(),
        gamma: -slope,
        stderr_gamma: stderr,
        residual: (ssr / m).sqrt(),
        n_points: x.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub alpha: f64,
    pub omega: f64,
    pub lambda_c: f64,
    pub sizes: Vec<usize>,
    pub rmax: Vec<f64>,
    pub fit: ScalingFit,
}

/// `r_max` at the mean-field critical coupling for each size, and its fit.
pub fn finite_size_scaling(
    alpha: f64,
    omega: f64,
    sizes: &[usize],
    method: Method,
    horizon: &HorizonPolicy,
    exec: Execution,
    cache: Option<&ResultCache>,
) -> Result<ScalingStudy> {
    let lambda_c = meanfield::critical_coupling_continuous(alpha, omega).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "no continuous critical coupling at alpha = {alpha}, omega = {omega}"
        ))
    })?;
    let values = exec.map(sizes, |&n| -> Result<f64> {
        let p = ModelParams::new(alpha, omega, lambda_c, n)?;
        revival_point(&p, method, horizon, cache)?
            .map(|r| r.value)
            .ok_or_else(|| Error::Numerical(format!("no revival at {p}")))
    });
    let rmax = values.into_iter().collect::<Result<Vec<_>>>()?;
    let fit = scaling_fit(sizes, &rmax)?;
    Ok(ScalingStudy {
        alpha,
        omega,
        lambda_c,
        sizes: sizes.to_vec(),
        rmax,
        fit,
    })
}

/// Largest downward deviation of `values` from the chord through its two
/// neighbours, over interior points.
pub fn local_dip(lambdas: &[f64], values: &[f64]) -> f64 {
    (1..values.len().saturating_sub(1))
        .map(|i| {
            let f = (lambdas[i] - lambdas[i - 1]) / (lambdas[i + 1] - lambdas[i - 1]);
            let chord = values[i - 1] + f * (values[i + 1] - values[i - 1]);
            (chord - values[i]).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Depth of a dip: mean of the two end values minus the minimum.
pub fn dip_depth(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let ends = 0.5 * (values[0] + values[values.len() - 1]);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (ends - min).max(0.0)
}

/// Largest `|Δ r_max / Δ λ|` between neighbouring grid points.
pub fn max_slope(lambdas: &[f64], values: &[f64]) -> f64 {
    lambdas
        .windows(2)
        .zip(values.windows(2))
        .map(|(l, v)| ((v[1] - v[0]) / (l[1] - l[0])).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderProbe {
    pub lambdas: Vec<f64>,
    pub traces: Vec<DecoherenceSignal>,
    pub rmax: Vec<Option<f64>>,
    /// Largest slope of `r_max(λ)`.
    pub smoothness: f64,
    /// Largest local dip of `r_max(λ)`.
    pub local_dip: f64,
}

/// `|r(t)|` traces and `r_max` at couplings around the first-order critical
/// coupling.
pub fn first_order_probe(
    alpha: f64,
    omega: f64,
    lambdas: &[f64],
    n_bosons: usize,
    times: &[f64],
    exec: Execution,
    cache: Option<&ResultCache>,
) -> Result<FirstOrderProbe> {
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "lambda list must be strictly ascending".into(),
        ));
    }
    let horizon = HorizonPolicy::default();
    let out = exec.map(lambdas, |&l| -> Result<(DecoherenceSignal, Option<f64>)> {
        let p = ModelParams::new(alpha, omega, l, n_bosons)?;
        let spec = QuenchSpectrum::exact(&p)?;
        let sig = DecoherenceSignal::new(
            times.to_vec(),
            spec.amplitudes(times, Execution::Sequential),
            p,
            Method::Exact,
        )?;
        let r = revival_point(&p, Method::Exact, &horizon, cache)?.map(|r| r.value);
        Ok((sig, r))
    });
    let mut traces = Vec::new();
    let mut rmax = Vec::new();
    for item in out {
        let (s, r) = item?;
        traces.push(s);
        rmax.push(r);
    }
    let (ls, vs): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&rmax)
        .filter_map(|(&l, r)| r.map(|v| (l, v)))
        .unzip();
    Ok(FirstOrderProbe {
        lambdas: lambdas.to_vec(),
        traces,
        rmax,
        smoothness: max_slope(&ls, &vs),
        local_dip: local_dip(&ls, &vs),
    })
}

/// Spectra along an `α` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTable {
    pub omega: f64,
    pub n_bosons: usize,
    pub alphas: Vec<f64>,
    /// `levels[i]` is the ascending spectrum at `alphas[i]`.
    pub levels: Vec<Vec<f64>>,
}

pub fn levels_scan(
    omega: f64,
    n_bosons: usize,
    alphas: &[f64],
    exec: Execution,
) -> Result<LevelTable> {
    let levels = exec
        .map(alphas, |&a| -> Result<Vec<f64>> {
            let p = ModelParams::new(a, omega, 0.0, n_bosons)?;
            Ok(spectra::eigensystem(&build_matrix(&p), false)
                .map_err(|e| e.at(p))?
                .eigenvalues)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelTable {
        omega,
        n_bosons,
        alphas: alphas.to_vec(),
        levels,
    })
}

/// One row of the phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLines {
    pub omega: f64,
    pub alpha_c: f64,
    /// Root of the implicit spinodal equation.
    pub alpha_spinodal: Option<f64>,
    /// Where the deformed well of the energy surface disappears.
    pub alpha_spinodal_surface: Option<f64>,
    pub alpha_antispinodal: f64,
}

pub fn phase_diagram(omegas: &[f64]) -> Vec<PhaseLines> {
    omegas
        .iter()
        .map(|&w| PhaseLines {
            omega: w,
            alpha_c: meanfield::critical_alpha(w),
            alpha_spinodal: meanfield::spinodal_alpha(w).ok(),
            alpha_spinodal_surface: meanfield::spinodal_alpha_surface(w).ok(),
            alpha_antispinodal: meanfield::antispinodal_alpha(w),
        })
        .collect()
}
