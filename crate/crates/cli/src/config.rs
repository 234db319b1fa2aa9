//! Run configuration shared by `bound` and `pep`.
//!
//! The file form is one `key = value` per line, keys matching the long flag
//! names (`exact-column`, `samples`, ...). Blank lines and `#` comments are
//! ignored. Flags given on the command line override file values.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use wishart_core::exact::{parse_rational, to_literal};
use wishart_core::pep::DEFAULT_SLOPE_WINDOW;
use wishart_core::{CurveSource, Rational};

use crate::CliError;

pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

/// Inclusive dB grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid { start: 0.0, stop: 60.0, step: 5.0 }
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("grid must be start:stop:step in dB, got {s:?}"));
        let parts: Vec<f64> =
            s.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else { return Err(bad()) };
        if !(start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite() && stop >= start) {
            return Err(bad());
        }
        Ok(Grid { start, stop, step })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

pub fn parse_alpha(s: &str) -> Result<Vec<Rational>, CliError> {
    s.split(',').map(|a| parse_rational(a).map_err(|e| CliError::Usage(format!("bad weight: {e}")))).collect()
}

pub fn parse_source(s: &str) -> Result<CurveSource, CliError> {
    match s.trim() {
        "exact" => Ok(CurveSource::Exact),
        "bound" => Ok(CurveSource::Bound),
        "mc" => Ok(CurveSource::MonteCarlo),
        other => Err(CliError::Usage(format!("source must be exact, bound or mc, got {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub alpha: Option<Vec<Rational>>,
    pub grid: Grid,
    pub source: CurveSource,
    pub samples: u64,
    pub seed: u64,
    pub window: usize,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub exact_column: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: None,
            m: None,
            alpha: None,
            grid: Grid::default(),
            source: CurveSource::Exact,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            window: DEFAULT_SLOPE_WINDOW,
            out: None,
            svg: None,
            exact_column: false,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Usage(format!("bad value for {key}: {value:?}")))
}

impl RunConfig {
    /// Parses the file form on top of the defaults.
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "n" => self.n = Some(parse_num(key, value)?),
            "m" => self.m = Some(parse_num(key, value)?),
            "alpha" => self.alpha = Some(parse_alpha(value)?),
            "grid" => self.grid = value.parse()?,
            "source" => self.source = parse_source(value)?,
            "samples" => self.samples = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "window" => self.window = parse_num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "svg" => self.svg = Some(PathBuf::from(value)),
            "exact-column" => self.exact_column = parse_num(key, value)?,
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        if let Some(n) = self.n {
            line("n", n.to_string());
        }
        if let Some(m) = self.m {
            line("m", m.to_string());
        }
        if let Some(a) = &self.alpha {
            line("alpha", a.iter().map(to_literal).collect::<Vec<_>>().join(","));
        }
        line("grid", self.grid.to_string());
        line("source", self.source.name().to_string());
        line("samples", self.samples.to_string());
        line("seed", self.seed.to_string());
        line("window", self.window.to_string());
        if let Some(p) = &self.out {
            line("out", p.display().to_string());
        }
        if let Some(p) = &self.svg {
            line("svg", p.display().to_string());
        }
        line("exact-column", self.exact_column.to_string());
        out
    }

    pub fn require_dims(&self) -> Result<wishart_core::Dimensions, CliError> {
        match (self.n, self.m) {
            (Some(n), Some(m)) => wishart_core::Dimensions::new(n, m).map_err(|e| CliError::Usage(e.to_string())),
            _ => Err(CliError::Usage("--n and --m are required".into())),
        }
    }

    pub fn require_alpha(&self) -> Result<&[Rational], CliError> {
        self.alpha.as_deref().ok_or_else(|| CliError::Usage("--alpha is required".into()))
    }
}
