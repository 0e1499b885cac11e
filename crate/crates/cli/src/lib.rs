//! Command-line front end for the tiltpump toolkit.
//!
//! [`parse_args`] turns an argument vector into a [`RunSpec`] and [`run`]
//! evaluates it into a [`Table`], which [`render`] writes as CSV or JSON.

pub mod output;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};
use thiserror::Error;
use tiltpump::ode::{equivalence_grid, integration_error, EQUIVALENCE_TOL};
use tiltpump::pdc::GainRegime;
use tiltpump::{
    localize_and_report, log_negativity, output_covariance, propagator_functions,
    squeezing_parameter, tripartite_witness, Bipartition, OdeSettings, PdcConfig,
};

pub use output::{format_number, Cell, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// `--help` or `--version`: not an error, but no run either.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Compute(#[from] tiltpump::Error),
    #[error("cannot write {target}: {source}")]
    Io {
        target: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) | CliError::Compute(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Covariance,
    Witness,
    Negativity,
    Localize,
    Sweep,
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Covariance => "covariance",
            Command::Witness => "witness",
            Command::Negativity => "negativity",
            Command::Localize => "localize",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
        }
    }
}

/// Evenly spaced squeezing values `r_min ..= r_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
}

impl SweepGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.r_min];
        }
        let span = self.r_max - self.r_min;
        (0..self.steps)
            .map(|i| self.r_min + i as f64 * span / (self.steps - 1) as f64)
            .collect()
    }
}

/// A fully validated run.
///
/// `config` is absent for `sweep` (parameterized by `r`) and `verify` (fixed
/// grid); `n_pairs` is always set.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub config: Option<PdcConfig>,
    pub n_pairs: usize,
    pub bipartition: Option<Bipartition>,
    pub sweep_grid: Option<SweepGrid>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "tiltpump",
    version,
    about = "Entanglement of multi-pump down-conversion"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Output covariance matrix of the crystal.
    Covariance(CrystalArgs),
    /// Three-mode witness (single pump pair only).
    Witness(CrystalArgs),
    /// Logarithmic negativity across a bipartition.
    Negativity {
        #[command(flatten)]
        crystal: CrystalArgs,
        /// Two sides separated by `|`, modes by `,`, e.g. "0|1,2".
        #[arg(long)]
        bipartition: String,
    },
    /// Localize onto two modes and report the negativity there.
    Localize(CrystalArgs),
    /// Witness and negativity as functions of the squeezing parameter.
    Sweep {
        #[arg(long, value_parser = non_negative)]
        r_min: f64,
        #[arg(long, value_parser = non_negative)]
        r_max: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        n_pairs: u64,
    },
    /// Compare integrated and closed-form propagators over the standard grid.
    Verify,
}

#[derive(Debug, Args)]
struct CrystalArgs {
    #[arg(long, value_parser = non_negative)]
    alpha: f64,
    #[arg(long, value_parser = positive)]
    lambda: f64,
    #[arg(long, value_parser = non_negative)]
    length: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
    delta: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    n_pairs: u64,
}

impl CrystalArgs {
    fn config(&self) -> Result<PdcConfig, CliError> {
        Ok(PdcConfig::new(
            self.alpha,
            self.lambda,
            self.length,
            self.delta,
            self.n_pairs as usize,
        )?)
    }
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v < 0.0 {
        return Err(format!("`{s}` is negative"));
    }
    Ok(v)
}

fn positive(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v <= 0.0 {
        return Err(format!("`{s}` is not positive"));
    }
    Ok(v)
}

/// Parses arguments without the program name.
pub fn parse_args<I, S>(argv: I) -> Result<RunSpec, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args = std::iter::once("tiltpump".to_string()).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| {
        use clap::error::ErrorKind::*;
        match e.kind() {
            DisplayHelp | DisplayVersion => CliError::Info(e.render().to_string()),
            _ => CliError::Usage(e.render().to_string()),
        }
    })?;

    let mut spec = RunSpec {
        command: Command::Verify,
        config: None,
        n_pairs: 1,
        bipartition: None,
        sweep_grid: None,
        output_format: cli.format,
        output_path: cli.out,
    };
    match cli.command {
        CliCommand::Covariance(c) => {
            spec.command = Command::Covariance;
            spec.config = Some(c.config()?);
        }
        CliCommand::Witness(c) => {
            spec.command = Command::Witness;
            if c.n_pairs != 1 {
                return Err(CliError::Usage(format!(
                    "error: invalid value '{}' for '--n-pairs': witness is defined for a single pump pair",
                    c.n_pairs
                )));
            }
            spec.config = Some(c.config()?);
        }
        CliCommand::Negativity {
            crystal,
            bipartition,
        } => {
            spec.command = Command::Negativity;
            let config = crystal.config()?;
            let n_modes = config.layout().n_modes();
            spec.bipartition = Some(Bipartition::parse(&bipartition, n_modes).map_err(|e| {
                CliError::Usage(format!(
                    "error: invalid value '{bipartition}' for '--bipartition': {e}"
                ))
            })?);
            spec.config = Some(config);
        }
        CliCommand::Localize(c) => {
            spec.command = Command::Localize;
            spec.config = Some(c.config()?);
        }
        CliCommand::Sweep {
            r_min,
            r_max,
            steps,
            n_pairs,
        } => {
            spec.command = Command::Sweep;
            if r_max < r_min {
                return Err(CliError::Usage(format!(
                    "error: invalid value '{r_max}' for '--r-max': below --r-min {r_min}"
                )));
            }
            if steps == 1 && r_max != r_min {
                return Err(CliError::Usage(
                    "error: invalid value '1' for '--steps': a single step needs --r-min equal to --r-max"
                        .into(),
                ));
            }
            spec.n_pairs = n_pairs as usize;
            spec.sweep_grid = Some(SweepGrid {
                r_min,
                r_max,
                steps: steps as usize,
            });
        }
        CliCommand::Verify => {}
    }
    if let Some(cfg) = &spec.config {
        spec.n_pairs = cfg.n_pairs();
    }
    Ok(spec)
}

fn regime_name(regime: GainRegime) -> &'static str {
    match regime {
        GainRegime::Hyperbolic => "hyperbolic",
        GainRegime::Degenerate => "degenerate",
        GainRegime::Oscillatory => "oscillatory",
    }
}

/// Result of [`run`]: the table plus whether every check in it passed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    pub passed: bool,
}

fn config_of(spec: &RunSpec) -> &PdcConfig {
    spec.config
        .as_ref()
        .expect("parse_args sets a config for this command")
}

pub fn run(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let mut passed = true;
    let table = match spec.command {
        Command::Covariance => {
            let cfg = config_of(spec);
            let sigma = output_covariance(cfg);
            let labels = cfg.layout().quadrature_labels();
            let mut t = Table::new(std::iter::once("quadrature".to_string()).chain(labels.clone()));
            for (i, label) in labels.into_iter().enumerate() {
                let mut row = vec![Cell::Text(label)];
                row.extend((0..sigma.dim()).map(|j| Cell::Num(sigma.get(i, j))));
                t.push(row);
            }
            t
        }
        Command::Witness => {
            let cfg = config_of(spec);
            let w = tripartite_witness(&output_covariance(cfg))?;
            let mut t = Table::new(["r", "c_value", "threshold", "genuine"]);
            t.push(vec![
                Cell::Num(squeezing_parameter(cfg).value()),
                Cell::Num(w.c_value),
                Cell::Num(w.threshold),
                Cell::Bool(w.genuine_tripartite),
            ]);
            t
        }
        Command::Negativity => {
            let cfg = config_of(spec);
            let partition = spec
                .bipartition
                .as_ref()
                .expect("parse_args sets a bipartition for negativity");
            let report = log_negativity(&output_covariance(cfg), partition)?;
            let mut t = Table::new(["bipartition", "log_negativity", "min_nu_tilde", "n_pairs"]);
            t.push(vec![
                Cell::Text(partition.to_string()),
                Cell::Num(report.log_negativity),
                Cell::Num(report.smallest_nu_tilde()),
                Cell::Int(cfg.n_pairs()),
            ]);
            t
        }
        Command::Localize => {
            let cfg = config_of(spec);
            let report = localize_and_report(cfg)?;
            let mut t = Table::new([
                "n_pairs",
                "r",
                "effective_squeezing",
                "log_negativity",
                "block_deviation",
            ]);
            t.push(vec![
                Cell::Int(cfg.n_pairs()),
                Cell::Num(squeezing_parameter(cfg).value()),
                Cell::Num(report.effective_squeezing),
                Cell::Num(report.negativity.log_negativity),
                report.block_deviation.map_or(Cell::Missing, Cell::Num),
            ]);
            t
        }
        Command::Sweep => {
            let grid = spec.sweep_grid.expect("parse_args sets a grid for sweep");
            let mut t = Table::new([
                "r",
                "c_value",
                "genuine",
                "log_negativity",
                "log_negativity_localized",
                "n_pairs",
            ]);
            for r in grid.points() {
                let single = PdcConfig::phase_matched(r, 1)?;
                let sigma = output_covariance(&single);
                let w = tripartite_witness(&sigma)?;
                let partition = Bipartition::new([0], 3)?;
                let e_n = log_negativity(&sigma, &partition)?.log_negativity;
                let localized = localize_and_report(&PdcConfig::phase_matched(r, spec.n_pairs)?)?;
                t.push(vec![
                    Cell::Num(r),
                    Cell::Num(w.c_value),
                    Cell::Bool(w.genuine_tripartite),
                    Cell::Num(e_n),
                    Cell::Num(localized.negativity.log_negativity),
                    Cell::Int(spec.n_pairs),
                ]);
            }
            t
        }
        Command::Verify => {
            let mut t = Table::new([
                "n_pairs",
                "delta",
                "alpha_lambda_length",
                "regime",
                "max_error",
                "pass",
            ]);
            for cfg in equivalence_grid() {
                let regime = propagator_functions(&cfg, cfg.length()).regime;
                let err =
                    integration_error(&cfg, OdeSettings::DEFAULT_STEPS).unwrap_or(f64::INFINITY);
                let ok = err <= EQUIVALENCE_TOL;
                passed &= ok;
                t.push(vec![
                    Cell::Int(cfg.n_pairs()),
                    Cell::Num(cfg.delta()),
                    Cell::Num(cfg.alpha() * cfg.lambda() * cfg.length()),
                    Cell::Text(regime_name(regime).into()),
                    Cell::Num(err),
                    Cell::Bool(ok),
                ]);
            }
            t
        }
    };
    Ok(RunOutput { table, passed })
}

fn spec_echo(spec: &RunSpec) -> Map<String, Value> {
    let num = |v: f64| Cell::Num(v).to_json();
    let mut m = Map::new();
    m.insert("command".into(), Value::String(spec.command.name().into()));
    if let Some(cfg) = &spec.config {
        m.insert("alpha".into(), num(cfg.alpha()));
        m.insert("lambda".into(), num(cfg.lambda()));
        m.insert("length".into(), num(cfg.length()));
        m.insert("delta".into(), num(cfg.delta()));
    }
    m.insert("n_pairs".into(), Value::from(spec.n_pairs));
    if let Some(b) = &spec.bipartition {
        m.insert("bipartition".into(), Value::String(b.to_string()));
    }
    if let Some(g) = &spec.sweep_grid {
        m.insert("r_min".into(), num(g.r_min));
        m.insert("r_max".into(), num(g.r_max));
        m.insert("steps".into(), Value::from(g.steps));
    }
    m
}

pub fn render(spec: &RunSpec, table: &Table) -> String {
    match spec.output_format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(spec_echo(spec)),
    }
}

/// Writes `text` to `--out` or standard output.
pub fn emit(spec: &RunSpec, text: &str) -> Result<(), CliError> {
    match &spec.output_path {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            target: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    target: "standard output".into(),
                    source,
                })
        }
    }
}

/// Full pipeline for `argv` (without the program name); returns the exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let result = parse_args(argv).and_then(|spec| {
        let out = run(&spec)?;
        emit(&spec, &render(&spec, &out.table))?;
        Ok(out.passed)
    });
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("verification failed: some propagators disagree beyond {EQUIVALENCE_TOL:e}");
            EXIT_VERIFY_FAILED
        }
        Err(CliError::Info(text)) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.trim_end());
            e.exit_code()
        }
    }
}
