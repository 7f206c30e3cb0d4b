//! Flag and config-file resolution.

use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::Common;
use esqpt::experiments::{lambda_grid, HorizonPolicy};
use esqpt::spectra::Method;
use esqpt::ModelParams;

#[derive(Debug)]
pub struct UsageError(pub String);

/// Keys accepted in a `--config` file. The model record is the flat
/// `{alpha, omega, lambda, N}`; run settings may sit beside it.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<f64>,
    omega: Option<f64>,
    lambda: Option<f64>,
    #[serde(rename = "N")]
    n: Option<usize>,
    method: Option<String>,
    out: Option<PathBuf>,
    bins: Option<usize>,
    tmax: Option<f64>,
    grid: Option<usize>,
    lambdas: Option<String>,
    sizes: Option<Vec<usize>>,
    cache: Option<PathBuf>,
}

/// Effective settings after the config file has overridden the flags.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub alpha: Option<f64>,
    pub omega: Option<f64>,
    pub lambda: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub method: Option<String>,
    pub out: PathBuf,
    pub bins: Option<usize>,
    pub tmax: Option<f64>,
    pub grid: Option<usize>,
    pub lambdas: Option<String>,
    pub sizes: Option<Vec<usize>>,
    pub cache: Option<PathBuf>,
    pub config: Option<PathBuf>,
}

impl Settings {
    pub fn resolve(flags: &Common) -> Result<Self, UsageError> {
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| UsageError(format!("bad config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let sizes = match file.sizes {
            Some(s) => Some(s),
            None => flags.sizes.as_deref().map(parse_sizes).transpose()?,
        };
        Ok(Settings {
            alpha: file.alpha.or(flags.alpha),
            omega: file.omega.or(flags.omega),
            lambda: file.lambda.or(flags.lambda),
            n: file.n.or(flags.n),
            method: file.method.or_else(|| flags.method.clone()),
            out: file
                .out
                .or_else(|| flags.out.clone())
                .unwrap_or_else(|| "out".into()),
            bins: file.bins.or(flags.bins),
            tmax: file.tmax.or(flags.tmax),
            grid: file.grid.or(flags.grid),
            lambdas: file.lambdas.or_else(|| flags.lambdas.clone()),
            sizes,
            cache: file.cache.or_else(|| flags.cache.clone()),
            config: flags.config.clone(),
        })
    }

    pub fn alpha_or_default(&self) -> f64 {
        self.alpha.unwrap_or(0.5)
    }

    /// The model point, with defaults `α = 1/2`, `ω = 0`, `λ = 0.3`,
    /// `N = 1000`.
    pub fn params(&self) -> esqpt::Result<ModelParams> {
        ModelParams::new(
            self.alpha_or_default(),
            self.omega.unwrap_or(0.0),
            self.lambda.unwrap_or(0.3),
            self.n.unwrap_or(1000),
        )
    }

    pub fn method(&self) -> esqpt::Result<Method> {
        self.method.as_deref().map_or(Ok(Method::Exact), str::parse)
    }

    /// Adaptive revival search unless `tmax` fixes the window.
    pub fn horizon(&self) -> HorizonPolicy {
        match self.tmax {
            Some(t_max) => HorizonPolicy::Fixed {
                t_max,
                samples: self.grid.unwrap_or(20_001),
            },
            None => HorizonPolicy::default(),
        }
    }

    pub fn lambda_grid(&self) -> esqpt::Result<Option<Vec<f64>>> {
        let Some(spec) = &self.lambdas else {
            return Ok(None);
        };
        let bad =
            || esqpt::Error::InvalidInput(format!("--lambdas expects lo:hi:step, got '{spec}'"));
        let parts: Vec<f64> = spec
            .split(':')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<esqpt::Result<_>>()?;
        match parts[..] {
            [lo, hi, step] => lambda_grid(lo, hi, step).map(Some),
            _ => Err(bad()),
        }
    }
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, UsageError> {
    s.split(',')
        .map(|x| {
            x.trim().parse().map_err(|_| {
                UsageError(format!(
                    "--sizes expects comma-separated integers, got '{s}'"
                ))
            })
        })
        .collect()
}
