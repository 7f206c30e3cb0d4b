use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const SIGNAL_FORMAT_VERSION: u32 = 1;
const CSV_MAGIC: &str = "# esqpt-signal";

/// How a signal was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    /// One-phonon Tamm-Dancoff approximation.
    Tda,
    /// Two-phonon (anharmonic) Tamm-Dancoff approximation.
    Tda2,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Tda => "tda",
            Method::Tda2 => "tda2",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "tda" => Ok(Method::Tda),
            "tda2" => Ok(Method::Tda2),
            other => Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected exact, tda or tda2)"
            ))),
        }
    }
}

/// Sampled `r(t)` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceSignal {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub source: ModelParams,
    pub method: Method,
}

#[derive(Serialize, Deserialize)]
struct SignalRecord {
    format: String,
    version: u32,
    method: Method,
    source: ModelParams,
    t: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl DecoherenceSignal {
    pub fn new(
        times: Vec<f64>,
        values: Vec<Complex64>,
        source: ModelParams,
        method: Method,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        super::check_times(&times)?;
        if let Some(v) = values.iter().find(|v| !(v.norm() <= 1.0 + 1e-8)) {
            return Err(Error::Numerical(format!(
                "|r| = {} exceeds 1 at {source}",
                v.norm()
            )));
        }
        Ok(DecoherenceSignal {
            times,
            values,
            source,
            method,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// CSV with a versioned comment header and columns `t,re,im,abs`.
    pub fn to_csv(&self) -> String {
        let p = &self.source;
        let mut out = format!(
            "{CSV_MAGIC} v{SIGNAL_FORMAT_VERSION} method={} alpha={} omega={} lambda={} N={}\n",
            self.method,
            p.alpha(),
            p.omega(),
            p.lambda(),
            p.n_bosons()
        );
        out.push_str("t,re,im,abs\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t:e},{:e},{:e},{:e}\n", v.re, v.im, v.norm()));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty signal file".into()))?;
        let rest = header
            .strip_prefix(CSV_MAGIC)
            .ok_or_else(|| Error::InvalidInput("missing signal header line".into()))?;
        let mut fields = rest.split_whitespace();
        let version = fields.next().unwrap_or_default();
        if version != format!("v{SIGNAL_FORMAT_VERSION}") {
            return Err(Error::InvalidInput(format!(
                "unsupported signal version '{version}'"
            )));
        }
        let mut kv = std::collections::HashMap::new();
        for f in fields {
            if let Some((k, v)) = f.split_once('=') {
                kv.insert(k, v);
            }
        }
        let get = |k: &str| {
            kv.get(k)
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("signal header lacks '{k}'")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad value for '{k}'")))
        };
        let method: Method = get("method")?.parse()?;
        let n: usize = get("N")?
            .parse()
            .map_err(|_| Error::InvalidInput("bad value for 'N'".into()))?;
        let source = ModelParams::new(num("alpha")?, num("omega")?, num("lambda")?, n)?;
        if lines.next().map(str::trim) != Some("t,re,im,abs") {
            return Err(Error::InvalidInput("missing column header".into()));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidInput(format!("bad number on data row {i}")))?;
            if cols.len() != 4 {
                return Err(Error::InvalidInput(format!(
                    "data row {i} has {} columns",
                    cols.len()
                )));
            }
            times.push(cols[0]);
            values.push(Complex64::new(cols[1], cols[2]));
        }
        DecoherenceSignal::new(times, values, source, method)
    }

    pub fn to_json(&self) -> Result<String> {
        let rec = SignalRecord {
            format: "esqpt-signal".into(),
            version: SIGNAL_FORMAT_VERSION,
            method: self.method,
            source: self.source,
            t: self.times.clone(),
            re: self.values.iter().map(|v| v.re).collect(),
            im: self.values.iter().map(|v| v.im).collect(),
        };
        Ok(serde_json::to_string_pretty(&rec)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: SignalRecord = serde_json::from_str(text)?;
        if rec.format != "esqpt-signal" || rec.version != SIGNAL_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported signal format {} v{}",
                rec.format, rec.version
            )));
        }
        if rec.re.len() != rec.im.len() {
            return Err(Error::InvalidInput(
                "re and im columns differ in length".into(),
            ));
        }
        let values = rec
            .re
            .iter()
            .zip(&rec.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        DecoherenceSignal::new(rec.t, values, rec.source, rec.method)
    }
}
