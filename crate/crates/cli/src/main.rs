//! `dlrisk`: bounds on risk measures of `X + Y` with and without `X <= Y`.

mod commands;
mod marginal;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dlrisk_core::dist::DEFAULT_TRUNCATION;
use dlrisk_core::{CouplingKind, Measure};

#[derive(Debug)]
pub enum CliError {
    /// Bad input or a failed order check.
    Precondition(String),
    Io(String),
    Selftest(usize),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Precondition(_) => 2,
            CliError::Io(_) => 3,
            CliError::Selftest(_) => 4,
        }
    }
}

impl From<dlrisk_core::Error> for CliError {
    fn from(e: dlrisk_core::Error) -> Self {
        use dlrisk_core::Error::*;
        match e {
            Io(_) | Csv(_) | Json(_) => CliError::Io(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Precondition(m) => write!(f, "precondition failed: {m}"),
            CliError::Io(m) => write!(f, "i/o failure: {m}"),
            CliError::Selftest(n) => write!(f, "{n} self-test check(s) failed"),
        }
    }
}

#[derive(Parser)]
#[command(name = "dlrisk", version, about = "Risk bounds for the sum of two ordered risks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds of a risk measure over a grid of levels p.
    Bounds {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        levels: LevelArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Probability bounds P(X + Y <= t) over a grid of thresholds.
    Probbounds {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long = "t-from", default_value_t = 4.0)]
        t_from: f64,
        #[arg(long = "t-to", default_value_t = 20.0)]
        t_to: f64,
        #[arg(long = "t-step", default_value_t = 0.5)]
        t_step: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Draws a coupled sample of (X, Y).
    Sample {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value = "dl")]
        kind: CouplingKind,
        #[arg(long, default_value_t = 10_000)]
        size: usize,
        /// Spread DL draws within their grid cells.
        #[arg(long)]
        jitter: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Bootstrap two observation files, repair the order if asked, and
    /// compute bounds for the bootstrapped totals.
    Casestudy {
        /// CSV of observations for the smaller risk (header `value[,weight]`).
        #[arg(long = "obs-f")]
        obs_f: PathBuf,
        /// CSV of observations for the larger risk.
        #[arg(long = "obs-g")]
        obs_g: PathBuf,
        /// Observations summed per replicate for the first file.
        #[arg(long = "group-f", default_value_t = 100)]
        group_f: usize,
        #[arg(long = "group-g", default_value_t = 100)]
        group_g: usize,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        /// Largest tolerated order violation; defaults to 2/sqrt(replicates).
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        levels: LevelArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Runs the analytic oracle checks and prints a pass/fail table.
    Selftest {
        /// Multiplies every tolerance; values below 1 tighten the checks.
        #[arg(long = "tol-scale", default_value_t = 1.0)]
        tol_scale: f64,
    },
}

#[derive(Args)]
struct PairArgs {
    /// Smaller marginal: pareto:scale,shape | uniform:lo,hi | normal:mean,sd | csv:path
    #[arg(long = "margF")]
    marg_f: String,
    /// Larger marginal, same forms as --margF.
    #[arg(long = "margG")]
    marg_g: String,
}

#[derive(Args)]
struct LevelArgs {
    #[arg(long = "p-from", default_value_t = 0.9)]
    p_from: f64,
    #[arg(long = "p-to", default_value_t = 0.995)]
    p_to: f64,
    #[arg(long = "p-step", default_value_t = 0.005)]
    p_step: f64,
    #[arg(long, default_value = "var")]
    measure: Measure,
    /// Upper level of RVaR.
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long = "grid-n", default_value_t = 10_000)]
    grid_n: usize,
    #[arg(long = "truncate-m", default_value_t = DEFAULT_TRUNCATION)]
    truncate_m: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Repair an order violation by isotonic projection instead of failing.
    #[arg(long)]
    project: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds { pair, levels, run } => {
            let f = marginal::parse(&pair.marg_f)?;
            let g = marginal::parse(&pair.marg_g)?;
            commands::bounds(f, g, &levels.into(), &run.into())
        }
        Command::Probbounds { pair, t_from, t_to, t_step, run } => {
            let f = marginal::parse(&pair.marg_f)?;
            let g = marginal::parse(&pair.marg_g)?;
            let ts = commands::level_grid(t_from, t_to, t_step, None)?;
            commands::probbounds(f, g, &ts, &run.into())
        }
        Command::Sample { pair, kind, size, jitter, run } => {
            let f = marginal::parse(&pair.marg_f)?;
            let g = marginal::parse(&pair.marg_g)?;
            commands::sample(f, g, kind, size, jitter, &run.into())
        }
        Command::Casestudy { obs_f, obs_g, group_f, group_g, replicates, threshold, levels, run } => {
            let boot = commands::Bootstrap { obs_f, obs_g, group_f, group_g, replicates, threshold };
            commands::casestudy(&boot, &levels.into(), &run.into())
        }
        Command::Selftest { tol_scale } => selftest::run(tol_scale),
    }
}

impl From<LevelArgs> for commands::LevelSpec {
    fn from(a: LevelArgs) -> Self {
        commands::LevelSpec { from: a.p_from, to: a.p_to, step: a.p_step, measure: a.measure, q: a.q }
    }
}

impl From<RunArgs> for commands::RunConfig {
    fn from(a: RunArgs) -> Self {
        commands::RunConfig {
            grid_n: a.grid_n,
            truncation_m: a.truncate_m,
            seed: a.seed,
            out: a.out,
            project: a.project,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dlrisk: {e}");
            ExitCode::from(e.code())
        }
    }
}
