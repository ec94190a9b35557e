//! Command-line front end: Bessel-Wronskian tables, certificate reports,
//! ε-scaling studies, branch continuation, and figure data.
//!
//! Exit codes are 0 for success, 1 for a computational failure, and 2 for a
//! usage error. Every subcommand is deterministic.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use overdet::branch::{MAX_EPS, MAX_SHAPE_MODES};
use overdet::config::{CONTROL_OFFSET, DEFAULT_MODES, DIRICHLET_TOL, MAX_MODES};
use overdet::fields::MAX_FIRST_ORDER_EPS;
use overdet::wronskian::{MAX_MODE, MIN_MODE};

pub mod commands;
pub mod output;

pub const MAX_GRID: usize = 512;

#[derive(Debug, Parser)]
#[command(name = "overdet", version, about = "Overdetermined Helmholtz domains bifurcating from the disk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Starting number of Fourier–Bessel modes K.
    #[arg(long = "modes", global = true, default_value_t = DEFAULT_MODES)]
    pub modes: usize,
    /// Convergence tolerance: Dirichlet residual for scaling, defect for branch and refined figures.
    #[arg(long, global = true, default_value_t = DIRICHLET_TOL)]
    pub tol: f64,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (directory for `figure`); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Table of bifurcation values mu_m with their certificates.
    MuTable {
        #[arg(long = "m-min", visible_alias = "m", default_value_t = 4)]
        m_min: u32,
        #[arg(long = "m-max", default_value_t = 8)]
        m_max: u32,
    },
    /// Root certificates, kernel and transversality checks; exit 1 if any fails.
    Verify {
        #[arg(long = "m-max", default_value_t = 8)]
        m_max: u32,
    },
    /// Overdetermination defect versus eps at mu_m and at a control value.
    Scaling {
        #[arg(long, default_value_t = 4)]
        m: u32,
        #[arg(long = "eps-list", value_delimiter = ',', default_value = "1e-3,2e-3,4e-3,8e-3,1.6e-2")]
        eps_list: Vec<f64>,
        #[arg(long = "control-offset", default_value_t = CONTROL_OFFSET, allow_negative_numbers = true)]
        control_offset: f64,
    },
    /// Gauss–Newton continuation of the branch from the disk.
    Branch {
        #[arg(long, default_value_t = 4)]
        m: u32,
        #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long = "shape-modes", default_value_t = MAX_SHAPE_MODES)]
        shape_modes: usize,
    },
    /// Boundary polylines and interior samples of u for contour plots.
    Figure {
        #[arg(long = "m-list", value_delimiter = ',', default_value = "4,5,6")]
        m_list: Vec<u32>,
        /// Defaults to 0.1 with --first-order and to the branch limit 0.05 otherwise.
        #[arg(long, allow_negative_numbers = true)]
        eps: Option<f64>,
        #[arg(long = "grid-n", default_value_t = 101)]
        grid_n: usize,
        /// Use the first-order family instead of a refined branch point.
        #[arg(long = "first-order")]
        first_order: bool,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long = "shape-modes", default_value_t = MAX_SHAPE_MODES)]
        shape_modes: usize,
    },
}

/// A parsed and validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub common: Common,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Compute(msg) => write!(f, "error: {msg}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<overdet::Error> for CliError {
    fn from(e: overdet::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_m(m: u32) -> Result<(), CliError> {
    if !(MIN_MODE..=MAX_MODE).contains(&m) {
        return Err(usage(format!("m must lie in {MIN_MODE}..={MAX_MODE}, got {m}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn new(cli: Cli) -> Result<Self, CliError> {
        let cfg = Self { command: cli.command, common: cli.common };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.common;
        if c.modes == 0 || c.modes > MAX_MODES {
            return Err(usage(format!("--modes must lie in 1..={MAX_MODES}, got {}", c.modes)));
        }
        if !(c.tol.is_finite() && c.tol > 0.0) {
            return Err(usage(format!("--tol must be positive, got {}", c.tol)));
        }
        match &self.command {
            Command::MuTable { m_min, m_max } => {
                check_m(*m_min)?;
                check_m(*m_max)?;
                if m_min > m_max {
                    return Err(usage(format!("--m-min {m_min} exceeds --m-max {m_max}")));
                }
            }
            Command::Verify { m_max } => check_m(*m_max)?,
            Command::Scaling { m, eps_list, control_offset } => {
                check_m(*m)?;
                if eps_list.is_empty() {
                    return Err(usage("--eps-list is empty"));
                }
                if eps_list.iter().any(|e| !(*e > 0.0 && *e <= MAX_EPS)) {
                    return Err(usage(format!("--eps-list values must lie in (0, {MAX_EPS}]")));
                }
                if !control_offset.is_finite() {
                    return Err(usage("--control-offset must be finite"));
                }
            }
            Command::Branch { m, eps, steps, shape_modes } => {
                check_m(*m)?;
                check_branch(*eps, *steps, *shape_modes)?;
            }
            Command::Figure { m_list, eps, grid_n, first_order, steps, shape_modes } => {
                if self.common.format == Some(Format::Json) {
                    return Err(usage("figure data is written as CSV only"));
                }
                let eps = eps.unwrap_or_else(|| figure_eps(*first_order));
                if m_list.is_empty() {
                    return Err(usage("--m-list is empty"));
                }
                for m in m_list {
                    check_m(*m)?;
                }
                if !(2..=MAX_GRID).contains(grid_n) {
                    return Err(usage(format!("--grid-n must lie in 2..={MAX_GRID}, got {grid_n}")));
                }
                if *first_order {
                    if !(eps.is_finite() && eps.abs() <= MAX_FIRST_ORDER_EPS) {
                        return Err(usage(format!("first-order figures need |eps| <= {MAX_FIRST_ORDER_EPS}")));
                    }
                } else {
                    check_branch(eps, *steps, *shape_modes)?;
                }
            }
        }
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.common.format.unwrap_or(match self.command {
            Command::Verify { .. } | Command::Branch { .. } => Format::Json,
            _ => Format::Csv,
        })
    }
}

/// Default `--eps` for `figure`.
pub fn figure_eps(first_order: bool) -> f64 {
    if first_order {
        0.1
    } else {
        MAX_EPS
    }
}

fn check_branch(eps: f64, steps: usize, shape_modes: usize) -> Result<(), CliError> {
    if !(eps.is_finite() && eps.abs() <= MAX_EPS) {
        return Err(usage(format!("branch points need |eps| <= {MAX_EPS}, got {eps}")));
    }
    if steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    if shape_modes > MAX_SHAPE_MODES {
        return Err(usage(format!("--shape-modes must be at most {MAX_SHAPE_MODES}")));
    }
    Ok(())
}

/// Parses, validates, runs, and writes output. Returns the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = RunConfig::new(cli).and_then(|cfg| {
        let outcome = commands::execute(&cfg)?;
        output::write(&cfg, &outcome)?;
        match outcome.failure {
            Some(msg) => Err(CliError::Compute(msg)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
