//! Plot-ready CSV emitters and the run manifest.

use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{LevelTable, PhaseLines, ScalingStudy, SweepResult};
use crate::dos::DensityOfStates;
use crate::error::{Error, Result};
use crate::spectra::DecoherenceSignal;

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:e}"))
}

/// Wide table: one row per `α`, columns `alpha,E0,E1,...`.
pub fn levels_csv(t: &LevelTable) -> String {
    let d = t.levels.first().map_or(0, Vec::len);
    let mut out = String::from("alpha");
    for k in 0..d {
        let _ = write!(out, ",E{k}");
    }
    out.push('\n');
    for (a, row) in t.alphas.iter().zip(&t.levels) {
        let _ = write!(out, "{a}");
        for e in row {
            let _ = write!(out, ",{e:e}");
        }
        out.push('\n');
    }
    out
}

/// Columns `E,rho_exact,rho_semiclassical,...` for densities on shared bins.
pub fn dos_csv(columns: &[(&str, &DensityOfStates)]) -> Result<String> {
    let Some((_, first)) = columns.first() else {
        return Err(Error::InvalidInput("no densities to write".into()));
    };
    if columns.iter().any(|(_, d)| d.bin_edges != first.bin_edges) {
        return Err(Error::InvalidInput("densities use different bins".into()));
    }
    let mut out = String::from("E,E_lo,E_hi");
    for (name, _) in columns {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    let centers = first.centers();
    for (k, c) in centers.iter().enumerate() {
        let _ = write!(
            out,
            "{c:e},{:e},{:e}",
            first.bin_edges[k],
            first.bin_edges[k + 1]
        );
        for (_, d) in columns {
            let _ = write!(out, ",{:e}", d.density[k]);
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn surface_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("phi,xi,E_per_boson\n");
    for (p, x, e) in rows {
        let _ = writeln!(out, "{p:e},{x:e},{e:e}");
    }
    out
}

pub fn phase_diagram_csv(rows: &[PhaseLines]) -> String {
    let mut out =
        String::from("omega,alpha_c,alpha_spinodal,alpha_spinodal_surface,alpha_antispinodal\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:e},{:e},{},{},{:e}",
            r.omega,
            r.alpha_c,
            num(r.alpha_spinodal),
            num(r.alpha_spinodal_surface),
            r.alpha_antispinodal
        );
    }
    out
}

/// Long table `N,lambda,rmax,t_revival`.
pub fn sweep_csv(s: &SweepResult) -> String {
    let mut out = String::from("N,lambda,rmax,t_revival\n");
    for c in &s.curves {
        for (l, r) in c.lambdas.iter().zip(&c.revivals) {
            let _ = writeln!(
                out,
                "{},{l},{},{}",
                c.n_bosons,
                num(r.map(|r| r.value)),
                num(r.map(|r| r.time))
            );
        }
    }
    out
}

pub fn scaling_csv(s: &ScalingStudy) -> String {
    let mut out = format!(
        "# alpha={} omega={} lambda_c={} A={:e} gamma={:e} stderr_gamma={:e} residual={:e}\nN,rmax,fit\n",
        s.alpha, s.omega, s.lambda_c, s.fit.amplitude, s.fit.gamma, s.fit.stderr_gamma, s.fit.residual
    );
    for (&n, &r) in s.sizes.iter().zip(&s.rmax) {
        let fit = s.fit.amplitude * (n as f64).powf(-s.fit.gamma);
        let _ = writeln!(out, "{n},{r:e},{fit:e}");
    }
    out
}

/// Side-by-side moduli of several signals on a shared time grid.
pub fn traces_csv(signals: &[&DecoherenceSignal]) -> Result<String> {
    let Some(first) = signals.first() else {
        return Err(Error::InvalidInput("no signals to write".into()));
    };
    if signals.iter().any(|s| s.times != first.times) {
        return Err(Error::InvalidInput(
            "signals use different time grids".into(),
        ));
    }
    let mut out = String::from("t");
    for s in signals {
        let _ = write!(out, ",abs_{}_lambda{}", s.method, s.source.lambda());
    }
    out.push('\n');
    for (i, t) in first.times.iter().enumerate() {
        let _ = write!(out, "{t:e}");
        for s in signals {
            let _ = write!(out, ",{:e}", s.values[i].norm());
        }
        out.push('\n');
    }
    Ok(out)
}

/// Record of one run: what was asked, what was written, how long it took.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    pub parameters: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub runtime_seconds: f64,
    pub parallel: bool,
}

impl Manifest {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path, &serde_json::to_string_pretty(self)?)
    }
}
