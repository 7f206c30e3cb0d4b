//! The first revival of `|r(t)|` after its initial collapse.
//!
//! After the collapse `|r|` can sit at rounding level, where it has many
//! spurious local maxima, and near critical couplings the revival itself is
//! jagged on the fast time scale `2π/σ_E` (`σ_E` is the energy spread of the
//! quench). The revival is therefore taken as the first local maximum after
//! the first interior local minimum that
//!
//! * exceeds an absolute noise floor, and
//! * is the largest value within one fast period on either side (capped at
//!   half of its own time, so that short, clean oscillations still count).

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{DecoherenceSignal, QuenchSpectrum};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevivalOptions {
    /// Dominance radius in units of the fast period `2π/σ_E`.
    pub fast_periods: f64,
    /// Maxima at or below this modulus are treated as noise.
    pub noise_floor: f64,
    /// Initial time window in units of the revival period `2π/δ`, where `δ`
    /// is the weighted mean spacing of the populated levels.
    pub window_periods: f64,
    /// Minimum number of samples in the window.
    pub min_samples: usize,
    /// Samples per fast period.
    pub samples_per_fast_period: usize,
    /// How many times the window may be doubled before giving up.
    pub max_extensions: usize,
}

impl Default for RevivalOptions {
    fn default() -> Self {
        RevivalOptions {
            fast_periods: 1.0,
            noise_floor: 1e-6,
            window_periods: 3.0,
            min_samples: 4096,
            samples_per_fast_period: 40,
            max_extensions: 4,
        }
    }
}

/// Location and height of the first revival.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Revival {
    pub time: f64,
    pub value: f64,
    /// Time of the first interior minimum.
    pub collapse_time: f64,
    /// `2π/σ_E`, or the estimate used for a sampled signal.
    pub fast_period: f64,
}

enum Scan {
    Found { min: usize, peak: usize },
    NeedLonger,
}

fn scan(times: &[f64], abs: &[f64], fast: f64, opts: &RevivalOptions) -> Scan {
    let n = abs.len();
    if n < 3 {
        return Scan::NeedLonger;
    }
    let t_end = times[n - 1];
    let Some(min) = (1..n - 1).find(|&i| abs[i] <= abs[i - 1] && abs[i] < abs[i + 1]) else {
        return Scan::NeedLonger;
    };
    for i in min + 1..n - 1 {
        if !(abs[i] > opts.noise_floor && abs[i] > abs[i - 1] && abs[i] >= abs[i + 1]) {
            continue;
        }
        let radius = (opts.fast_periods * fast).min(0.5 * times[i]);
        if times[i] + radius > t_end {
            return Scan::NeedLonger;
        }
        let lo = times.partition_point(|&t| t < times[i] - radius);
        let hi = times.partition_point(|&t| t <= times[i] + radius);
        let dominant = abs[lo..hi].iter().all(|&v| v <= abs[i]);
        if dominant {
            return Scan::Found { min, peak: i };
        }
    }
    Scan::NeedLonger
}

/// `r_max` of a sampled signal: the height of the first revival on the grid.
///
/// The fast period is estimated from the initial decay, where
/// `|r| ≈ exp(-σ²t²/2)`, as `2π t_c` with `|r(t_c)| = e^{-1/2}`.
pub fn r_max(signal: &DecoherenceSignal) -> Result<f64> {
    r_max_with(signal, &RevivalOptions::default()).map(|r| r.value)
}

pub fn r_max_with(signal: &DecoherenceSignal, opts: &RevivalOptions) -> Result<Revival> {
    let abs = signal.moduli();
    let times = &signal.times;
    let (lo, hi) = abs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if hi - lo < 1e-10 {
        return Err(Error::HorizonTooShort(
            "|r(t)| is constant on the grid; no collapse to measure".into(),
        ));
    }
    let threshold = (-0.5f64).exp();
    let fast = match (1..abs.len()).find(|&i| abs[i] <= threshold * abs[0]) {
        Some(i) => {
            let (a, b) = (abs[i - 1], abs[i]);
            let f = if a > b {
                (a - threshold * abs[0]) / (a - b)
            } else {
                0.0
            };
            TAU * (times[i - 1] + f * (times[i] - times[i - 1]) - times[0])
        }
        None => f64::INFINITY,
    };
    match scan(times, &abs, fast, opts) {
        Scan::Found { min, peak } => Ok(Revival {
            time: times[peak],
            value: abs[peak],
            collapse_time: times[min],
            fast_period: fast,
        }),
        Scan::NeedLonger => Err(Error::HorizonTooShort(format!(
            "no revival maximum before t = {}",
            times[times.len() - 1]
        ))),
    }
}

/// First revival of the exact spectral sum, with an adaptive time window
/// and golden-section refinement of the peak.
pub fn find_revival(
    spec: &QuenchSpectrum,
    opts: &RevivalOptions,
    exec: Execution,
) -> Result<Revival> {
    let sigma = spec.energy_spread();
    let spacing = spec.mean_spacing();
    let (Some(spacing), true) = (spacing, sigma > 0.0) else {
        return Err(Error::HorizonTooShort(
            "a single populated level; |r(t)| never collapses".into(),
        ));
    };
    let fast = TAU / sigma;
    let period = TAU / spacing;
    let mut window = opts.window_periods * period;
    for _ in 0..=opts.max_extensions {
        let dt = (window / opts.min_samples as f64).min(fast / opts.samples_per_fast_period as f64);
        let n = (window / dt).ceil() as usize + 1;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let abs: Vec<f64> = exec.map(&times, |&t| spec.amplitude(t).norm());
        if let Scan::Found { min, peak } = scan(&times, &abs, fast, opts) {
            let (time, value) = refine_peak(
                spec,
                times[peak - 1],
                times[peak + 1],
                abs[peak],
                times[peak],
            );
            return Ok(Revival {
                time,
                value,
                collapse_time: times[min],
                fast_period: fast,
            });
        }
        window *= 2.0;
    }
    Err(Error::HorizonTooShort(format!(
        "no revival maximum before t = {}",
        window / 2.0
    )))
}

/// Golden-section maximization of `|r|` on `[a, b]`.
fn refine_peak(spec: &QuenchSpectrum, mut a: f64, mut b: f64, v0: f64, t0: f64) -> (f64, f64) {
    let g = 0.5 * (3.0 - 5f64.sqrt());
    let f = |t: f64| spec.amplitude(t).norm();
    let mut x1 = a + g * (b - a);
    let mut x2 = b - g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if b - a <= 1e-13 * b.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + g * (b - a);
            f1 = f(x1);
        }
    }
    let (t, v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    // never report less than the sampled peak
    if v >= v0 {
        (t, v)
    } else {
        (t0, v0)
    }
}
