//! Densities of states.
//!
//! The exact density comes from the `N+1` eigenvalues. The semiclassical
//! density bins the complex energy surface over the sphere `(φ, ξ)` with
//! the measure `|J| = (N/2) sin φ` of the canonical pair
//! `(q, p) = (ξ, (N/2) cos φ)`. Both are normalized to `N+1` levels.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::meanfield::complex_surface_coupled;
use crate::model::{build_matrix, ModelParams};
use crate::spectra;

pub const DEFAULT_BINS: usize = 200;
pub const DEFAULT_GRID: usize = 2048;
const ROWS_PER_CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOfStates {
    pub bin_edges: Vec<f64>,
    pub density: Vec<f64>,
    pub total_count: f64,
}

impl DensityOfStates {
    pub fn n_bins(&self) -> usize {
        self.density.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `Σ ρ Δε`.
    pub fn integral(&self) -> f64 {
        self.density
            .iter()
            .zip(self.widths())
            .map(|(r, w)| r * w)
            .sum()
    }

    /// Bin containing `e`, if any.
    pub fn bin_of(&self, e: f64) -> Option<usize> {
        bin_index(&self.bin_edges, e)
    }
}

/// `n` equal bins on `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!(
            "cannot make {n} bins on [{lo}, {hi}]"
        )));
    }
    let w = (hi - lo) / n as f64;
    let mut e: Vec<f64> = (0..=n).map(|i| lo + i as f64 * w).collect();
    e[n] = hi;
    Ok(e)
}

fn bin_index(edges: &[f64], x: f64) -> Option<usize> {
    let n = edges.len() - 1;
    if x < edges[0] || x > edges[n] {
        return None;
    }
    let k = edges.partition_point(|&e| e <= x);
    Some(k.saturating_sub(1).min(n - 1))
}

/// How to turn a discrete spectrum into a density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DosEstimator {
    /// Plain level counts per bin.
    #[default]
    Histogram,
    /// Differences of the piecewise-linear counting function through the
    /// level midpoints. Free of the quantization noise of a histogram when
    /// bins hold only a few levels.
    Staircase,
}

/// Density of an ascending list of levels on the given bins.
pub fn density_from_levels(
    levels: &[f64],
    edges: &[f64],
    estimator: DosEstimator,
) -> Result<DensityOfStates> {
    if levels.is_empty() || edges.len() < 2 {
        return Err(Error::InvalidInput(
            "need levels and at least one bin".into(),
        ));
    }
    if edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "bin edges must be strictly ascending".into(),
        ));
    }
    let total = levels.len() as f64;
    let counts: Vec<f64> = match estimator {
        DosEstimator::Histogram => {
            let mut c = vec![0.0; edges.len() - 1];
            for &e in levels {
                if let Some(k) = bin_index(edges, e) {
                    c[k] += 1.0;
                }
            }
            c
        }
        DosEstimator::Staircase => {
            let stair = Staircase::new(levels);
            edges
                .windows(2)
                .map(|w| stair.count(w[1]) - stair.count(w[0]))
                .collect()
        }
    };
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(c, w)| c / (w[1] - w[0]))
        .collect();
    Ok(DensityOfStates {
        bin_edges: edges.to_vec(),
        density,
        total_count: total,
    })
}

/// Piecewise-linear counting function.
struct Staircase {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Staircase {
    fn new(levels: &[f64]) -> Self {
        let n = levels.len();
        let scale = levels.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1.0);
        let tol = 1e-9 * scale;
        // clusters of (near-)degenerate levels: (mean energy, first index, size)
        let mut clusters: Vec<(f64, usize, usize)> = Vec::new();
        let mut start = 0;
        for k in 1..=n {
            if k == n || levels[k] - levels[k - 1] > tol {
                let m = k - start;
                let mean = levels[start..k].iter().sum::<f64>() / m as f64;
                clusters.push((mean, start, m));
                start = k;
            }
        }
        let mut x = Vec::with_capacity(clusters.len() + 2);
        let mut y = Vec::with_capacity(clusters.len() + 2);
        if clusters.len() == 1 {
            let (e, _, m) = clusters[0];
            x.extend([e - 0.5, e + 0.5]);
            y.extend([0.0, m as f64]);
            return Staircase { x, y };
        }
        let first_gap = clusters[1].0 - clusters[0].0;
        let last = clusters.len() - 1;
        let last_gap = clusters[last].0 - clusters[last - 1].0;
        x.push(clusters[0].0 - 0.5 * first_gap);
        y.push(0.0);
        for &(e, s, m) in &clusters {
            x.push(e);
            y.push(s as f64 + 0.5 * m as f64);
        }
        x.push(clusters[last].0 + 0.5 * last_gap);
        y.push(n as f64);
        Staircase { x, y }
    }

    fn count(&self, e: f64) -> f64 {
        let n = self.x.len();
        if e <= self.x[0] {
            return 0.0;
        }
        if e >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = self.x.partition_point(|&v| v <= e);
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let (y0, y1) = (self.y[k - 1], self.y[k]);
        y0 + (y1 - y0) * (e - x0) / (x1 - x0)
    }
}

/// Histogram of the exact spectrum on `n_bins` bins spanning it.
pub fn dos_exact(params: &ModelParams, n_bins: usize) -> Result<DensityOfStates> {
    let levels = exact_levels(params)?;
    let edges = uniform_edges(levels[0], levels[levels.len() - 1], n_bins)?;
    density_from_levels(&levels, &edges, DosEstimator::Histogram)
}

/// All eigenvalues of the environment at `params`.
pub fn exact_levels(params: &ModelParams) -> Result<Vec<f64>> {
    let h = build_matrix(params);
    Ok(spectra::eigensystem(&h, false)
        .map_err(|e| e.at(params))?
        .eigenvalues)
}

/// Semiclassical density together with grid diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalDos {
    pub dos: DensityOfStates,
    /// Bins inside the classical energy range that received fewer than
    /// ten phase-space samples.
    pub sparse_bins: Vec<usize>,
    /// Classical energy range `N [min H, max H]` seen on the grid.
    pub energy_range: (f64, f64),
}

/// Classical energy range on the sampling grid.
pub fn classical_range(params: &ModelParams, grid: usize) -> (f64, f64) {
    let (lo, hi) = sample_rows(params, grid, Execution::Sequential, None).1;
    (lo, hi)
}

/// Semiclassical density on `n_bins` bins spanning the classical range.
pub fn dos_semiclassical(params: &ModelParams, n_bins: usize) -> Result<SemiclassicalDos> {
    let (lo, hi) = classical_range(params, DEFAULT_GRID);
    let edges = uniform_edges(lo, hi, n_bins)?;
    dos_semiclassical_on(params, &edges, DEFAULT_GRID, Execution::available())
}

/// Semiclassical density on explicit bins from `grid x grid` samples of
/// `(φ, ξ)`: midpoints in `ξ`, and in `φ` a point of each cell shifted
/// from column to column.
pub fn dos_semiclassical_on(
    params: &ModelParams,
    edges: &[f64],
    grid: usize,
    exec: Execution,
) -> Result<SemiclassicalDos> {
    if grid < 2 {
        return Err(Error::InvalidInput(
            "phase-space grid needs at least 2 points".into(),
        ));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "bin edges must be strictly ascending".into(),
        ));
    }
    let ((weights, samples, total), range) = sample_rows(params, grid, exec, Some(edges));
    let total_count = (params.n_bosons() + 1) as f64;
    let density = weights
        .iter()
        .zip(edges.windows(2))
        .map(|(w, e)| w / total * total_count / (e[1] - e[0]))
        .collect();
    let sparse_bins: Vec<usize> = (0..edges.len() - 1)
        .filter(|&k| edges[k + 1] > range.0 && edges[k] < range.1 && samples[k] < 10)
        .collect();
    if !sparse_bins.is_empty() {
        log::warn!(
            "{} bins received fewer than 10 phase-space samples; refine the grid",
            sparse_bins.len()
        );
    }
    Ok(SemiclassicalDos {
        dos: DensityOfStates {
            bin_edges: edges.to_vec(),
            density,
            total_count,
        },
        sparse_bins,
        energy_range: range,
    })
}

type Binned = (Vec<f64>, Vec<u64>, f64);

/// Bins `N H(φ, ξ)` with weight `sin φ`. Returns per-bin weights, per-bin
/// sample counts, total weight, and the energy range seen.
fn sample_rows(
    params: &ModelParams,
    grid: usize,
    exec: Execution,
    edges: Option<&[f64]>,
) -> (Binned, (f64, f64)) {
    let n = params.n_bosons() as f64;
    let (alpha, omega, lambda) = (params.alpha(), params.omega(), params.lambda());
    let nb = edges.map_or(0, |e| e.len() - 1);
    let dphi = PI / grid as f64;
    let dxi = TAU / grid as f64;
    // column j samples φ at a golden-ratio offset inside each row cell, so
    // surfaces that depend on φ alone still see grid² distinct φ values
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let cols: Vec<(f64, f64)> = (0..grid)
        .map(|j| ((j as f64 + 0.5) * dxi, ((j as f64 + 0.5) * golden).fract()))
        .collect();
    let chunks = grid.div_ceil(ROWS_PER_CHUNK);
    let partial = exec.map_range(chunks, |c| {
        let mut w = vec![0.0; nb];
        let mut cnt = vec![0u64; nb];
        let mut tot = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in c * ROWS_PER_CHUNK..((c + 1) * ROWS_PER_CHUNK).min(grid) {
            for &(xi, shift) in &cols {
                let phi = (i as f64 + shift) * dphi;
                let jac = phi.sin();
                let e = n * complex_surface_coupled(alpha, omega, lambda, phi, xi);
                lo = lo.min(e);
                hi = hi.max(e);
                tot += jac;
                if let Some(k) = edges.and_then(|ed| bin_index(ed, e)) {
                    w[k] += jac;
                    cnt[k] += 1;
                }
            }
        }
        (w, cnt, tot, lo, hi)
    });
    let mut w = vec![0.0; nb];
    let mut cnt = vec![0u64; nb];
    let mut tot = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (pw, pc, pt, plo, phi) in partial {
        w.iter_mut().zip(&pw).for_each(|(a, b)| *a += b);
        cnt.iter_mut().zip(&pc).for_each(|(a, b)| *a += b);
        tot += pt;
        lo = lo.min(plo);
        hi = hi.max(phi);
    }
    ((w, cnt, tot), (lo, hi))
}

/// A detected singularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub energy: f64,
    pub bin: usize,
    /// Height of the feature in units of the noise scale.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Singularities {
    pub cusp: Option<Singularity>,
    pub jump: Option<Singularity>,
}

/// Significance threshold in units of the noise scale.
pub const SINGULARITY_THRESHOLD: f64 = 5.0;

/// Locate a cusp (largest second difference) and, below it, an upward jump.
///
/// The noise scale is the median absolute first difference, floored at
/// half a percent of the mean density so that perfectly flat densities do
/// not report rounding noise. A jump candidate at the step between bins
/// `i` and `i+1` is scored by its rise minus the mean magnitude of the
/// differences two bins away on either side, which removes the steep but
/// smooth flanks of a cusp.
pub fn detect_singularities(dos: &DensityOfStates) -> Singularities {
    let rho = &dos.density;
    let n = rho.len();
    if n < 8 {
        return Singularities::default();
    }
    let d1: Vec<f64> = rho.windows(2).map(|w| w[1] - w[0]).collect();
    let mut abs_d1: Vec<f64> = d1.iter().map(|x| x.abs()).collect();
    abs_d1.sort_by(f64::total_cmp);
    let median = abs_d1[abs_d1.len() / 2];
    let mean = rho.iter().sum::<f64>() / n as f64;
    let noise = median.max(5e-3 * mean.abs());
    if !(noise > 0.0) {
        return Singularities::default();
    }
    let threshold = SINGULARITY_THRESHOLD * noise;
    let centers = dos.centers();

    let cusp = (2..n - 2)
        .map(|i| (i, (rho[i + 1] - 2.0 * rho[i] + rho[i - 1]).abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .filter(|&(_, v)| v > threshold)
        .map(|(i, v)| Singularity {
            energy: centers[i],
            bin: i,
            score: v / noise,
        });

    let upper = cusp.map_or(n - 3, |c| c.bin.saturating_sub(3).min(n - 3));
    let jump = (2..upper)
        .map(|i| (i, d1[i] - 0.5 * (d1[i - 2].abs() + d1[i + 2].abs())))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .filter(|&(_, v)| v > threshold)
        .map(|(i, v)| Singularity {
            energy: dos.bin_edges[i + 1],
            bin: i,
            score: v / noise,
        });
    Singularities { cusp, jump }
}

/// Bin-wise comparison of two densities on identical bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosComparison {
    /// `|ρ_a − ρ_b| / ρ_b` per bin, `None` where excluded.
    pub relative_difference: Vec<Option<f64>>,
    pub max_relative_difference: f64,
    pub compared_bins: usize,
}

/// Compare `a` against the reference `b`, skipping `guard` bins on each
/// side of every singular energy and of both edges of the common support.
pub fn compare_densities(
    a: &DensityOfStates,
    b: &DensityOfStates,
    singular_energies: &[f64],
    guard: usize,
) -> Result<DosComparison> {
    if a.bin_edges != b.bin_edges {
        return Err(Error::InvalidInput("densities use different bins".into()));
    }
    let n = a.n_bins();
    let mut excluded = vec![false; n];
    let mut mark = |k: usize| {
        excluded[k.saturating_sub(guard)..=(k + guard).min(n - 1)].fill(true);
    };
    for &e in singular_energies {
        if let Some(k) = a.bin_of(e) {
            mark(k);
        }
    }
    let support: Vec<usize> = (0..n)
        .filter(|&k| a.density[k] > 0.0 && b.density[k] > 0.0)
        .collect();
    if let (Some(&first), Some(&last)) = (support.first(), support.last()) {
        mark(first);
        mark(last);
    }
    let mut rel = vec![None; n];
    let mut worst = 0.0f64;
    let mut compared = 0;
    for k in 0..n {
        if excluded[k] || !(b.density[k] > 0.0) || !(a.density[k] > 0.0) {
            continue;
        }
        let r = (a.density[k] - b.density[k]).abs() / b.density[k];
        rel[k] = Some(r);
        worst = worst.max(r);
        compared += 1;
    }
    Ok(DosComparison {
        relative_difference: rel,
        max_relative_difference: worst,
        compared_bins: compared,
    })
}
