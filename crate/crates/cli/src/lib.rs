//! Command-line front end: `bound`, `pep`, `verify` and `plot`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Signed;
use serde_json::json;

use wishart_core::pep::{self, bound_expectation, diversity_exponent};
use wishart_core::verify::{self, SuiteReport};
use wishart_core::wishart::{marginal_bound, predicted_smallest_degree, split_indices};
use wishart_core::{CurveSource, PepError};

pub mod config;
pub mod output;
pub mod plot;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid flags, configuration or input files.
    #[error("{0}")]
    Usage(String),
    /// A checked property did not hold.
    #[error("{0}")]
    Property(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Property(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<PepError> for CliError {
    fn from(e: PepError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "wishart", version, about = "Exact and Monte-Carlo analysis of ordered Wishart eigenvalues")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symbolic marginal-pdf bound r, its smallest degree and degree ledger.
    Bound {
        #[command(flatten)]
        run: RunArgs,
        /// Write the full text form of r to this file.
        #[arg(long)]
        dump_poly: Option<PathBuf>,
    },
    /// Error-probability curve over an SNR grid, as CSV.
    Pep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a property suite; prints a JSON report.
    Verify(VerifyArgs),
    /// Plot one or more CSV files written by `pep`.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Exact,
    Bound,
    Mc,
}

impl From<SourceArg> for CurveSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Exact => CurveSource::Exact,
            SourceArg::Bound => CurveSource::Bound,
            SourceArg::Mc => CurveSource::MonteCarlo,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated weights, decimals or `num/den`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// `start:stop:step` in dB, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, value_enum)]
    pub source: Option<SourceArg>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of highest-SNR points used for the slope fit.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Add an `exact` column with `num/den` values.
    #[arg(long)]
    pub exact_column: bool,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::parse(
                &std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
            )?,
            None => RunConfig::default(),
        };
        if self.n.is_some() {
            cfg.n = self.n;
        }
        if self.m.is_some() {
            cfg.m = self.m;
        }
        if let Some(a) = &self.alpha {
            cfg.alpha = Some(config::parse_alpha(a)?);
        }
        if let Some(g) = &self.grid {
            cfg.grid = g.parse()?;
        }
        if let Some(s) = self.source {
            cfg.source = s.into();
        }
        if let Some(n) = self.samples {
            cfg.samples = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.window {
            cfg.window = w;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.svg.is_some() {
            cfg.svg = self.svg.clone();
        }
        cfg.exact_column |= self.exact_column;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Theorem1,
    Theorem2,
    Normalization,
    Dominance,
    McCross,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Largest N and M swept by theorem1 and normalization.
    #[arg(long, default_value_t = 4)]
    pub max: usize,
    /// Random cases for theorem2.
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    /// Random points per marginal for dominance.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    /// Channel samples for mc-cross.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Bound { run, dump_poly } => cmd_bound(&run.resolve()?, dump_poly.as_deref(), stdout),
        Command::Pep { run } => cmd_pep(&run.resolve()?, stdout),
        Command::Verify(args) => cmd_verify(args, stdout),
        Command::Plot { inputs, out } => cmd_plot(inputs, out),
    }
}

/// Largest `r` printed inline; bigger ones need `--dump-poly`.
const INLINE_TERMS: usize = 32;

pub fn cmd_bound(cfg: &RunConfig, dump: Option<&std::path::Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let dims = cfg.require_dims()?;
    let alpha = cfg.require_alpha()?;
    if alpha.len() != dims.y() {
        return Err(CliError::Usage(format!("expected {} weights (min(N, M)), got {}", dims.y(), alpha.len())));
    }
    let split = split_indices(alpha).map_err(|e| CliError::Usage(e.to_string()))?;
    let mb = marginal_bound(&dims, &split).map_err(|e| CliError::Usage(e.to_string()))?;
    let predicted = predicted_smallest_degree(&dims, &split);
    let l = &mb.ledger;
    let laurent = bound_expectation(&mb);
    let diversity = diversity_exponent(&dims, alpha)?;

    writeln!(
        out,
        "N = {}, M = {}, alpha = [{}]",
        dims.n(),
        dims.m(),
        alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
    )?;
    writeln!(
        out,
        "p = {:?}, s = {:?}, K = {}, p1 = {}, case = {:?}",
        split.p,
        split.s,
        split.k(),
        split.p1(),
        split.case
    )?;
    if let Some(eps) = split.epsilon {
        writeln!(out, "epsilon = {eps}")?;
    }
    writeln!(out, "alpha_min = {}", split.alpha_min)?;
    writeln!(
        out,
        "ledger: d_g = {}, d_h_org = {}, d_h_vanishing = {}, d_h_added = {}, d_r = {}",
        l.d_g_smallest, l.d_h_org, l.d_h_vanishing, l.d_h_added, l.d_r_smallest
    )?;
    writeln!(out, "smallest degree of r = {}", mb.smallest_degree)?;
    writeln!(out, "predicted (N-p1+1)(M-p1+1)-K = {predicted}")?;
    let mut series = String::new();
    for (e, c) in laurent.laurent.iter().rev() {
        match (series.is_empty(), c.is_negative()) {
            (true, _) => series.push_str(&format!("{c} w^{e}")),
            (false, true) => series.push_str(&format!(" - {} w^{e}", -c)),
            (false, false) => series.push_str(&format!(" + {c} w^{e}")),
        }
    }
    writeln!(out, "bound expectation (unnormalized, w = 1 + gamma*alpha_min) = {series}")?;
    writeln!(out, "leading omega exponent = {}, diversity = {diversity}", laurent.leading_exponent)?;
    if mb.r.len() <= INLINE_TERMS {
        writeln!(out, "r =")?;
        write!(out, "{}", mb.r)?;
        if !mb.r.to_string().ends_with('\n') {
            writeln!(out)?;
        }
    } else {
        writeln!(out, "r has {} terms (use --dump-poly to write them)", mb.r.len())?;
    }
    if let Some(path) = dump {
        output::write_atomic(path, mb.r.to_text().as_bytes())?;
    }

    let agree = mb.smallest_degree as i64 == predicted
        && l.d_r_smallest == predicted
        && l.composed() == predicted
        && laurent.leading_exponent == diversity;
    if agree {
        writeln!(out, "status = agree")?;
        Ok(())
    } else {
        writeln!(out, "status = MISMATCH")?;
        Err(CliError::Property(format!(
            "smallest degree {} / ledger {} / prediction {predicted} disagree",
            mb.smallest_degree, l.d_r_smallest
        )))
    }
}

pub fn cmd_pep(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let dims = cfg.require_dims()?;
    let alpha = cfg.require_alpha()?;
    let grid = cfg.grid.points();
    let curve = match cfg.source {
        CurveSource::MonteCarlo => {
            eprintln!("sampling {} channels over {} grid points", cfg.samples, grid.len());
            pep::mc_curve(&dims, alpha, &grid, cfg.samples, cfg.seed, cfg.window, cfg.exact_column)?
        }
        source => pep::pep_curve(&dims, alpha, &grid, source, cfg.window)?,
    };
    let text = output::render_csv(&curve, cfg.exact_column)?;
    match &cfg.out {
        Some(path) => output::write_atomic(path, text.as_bytes())?,
        None => out.write_all(text.as_bytes())?,
    }
    if let Some(path) = &cfg.svg {
        let svg = plot::render_svg(&[plot::Series::from_curve(&curve)])?;
        output::write_atomic(path, svg.as_bytes())?;
    }
    Ok(())
}

fn report_json(rep: &SuiteReport) -> serde_json::Value {
    json!({
        "suite": rep.suite,
        "passed": rep.passed(),
        "checks": rep.checks,
        "failures": rep.failures.iter().map(|f| json!({"case": f.case, "detail": f.detail})).collect::<Vec<_>>(),
    })
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let name = args.suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    eprintln!("running {name}");
    let rep = match args.suite {
        Suite::Theorem1 => verify::theorem1(args.max),
        Suite::Theorem2 => verify::theorem2(args.cases, args.seed),
        Suite::Normalization => verify::normalization(args.max),
        Suite::Dominance => verify::dominance(&[(2, 2), (3, 2), (3, 3)], args.points, args.seed, 1e-12),
        Suite::McCross => verify::mc_cross_default(args.samples, args.seed),
    };
    writeln!(out, "{}", report_json(&rep))?;
    eprintln!("{name}: {} checks, {} failures", rep.checks, rep.failures.len());
    if rep.passed() {
        Ok(())
    } else {
        Err(CliError::Property(format!("{name} failed {} of {} checks", rep.failures.len(), rep.checks)))
    }
}

pub fn cmd_plot(inputs: &[PathBuf], out: &std::path::Path) -> Result<(), CliError> {
    let mut series = Vec::new();
    for path in inputs {
        series.extend(plot::read_series(path)?);
    }
    let svg = plot::render_svg(&series)?;
    output::write_atomic(out, svg.as_bytes())
}
