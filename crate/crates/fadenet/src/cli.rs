//! Command-line front end: flag parsing, dispatch and the exit-code contract
//! (0 success, 1 runtime error, 2 config error, 3 verification failure).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fadenet_core::oracle::{self, MAX_ORACLE_LINKS};
use fadenet_core::{fading, tblas, NetworkParams, SeedSpec};

use crate::config::{
    parse_name, Command, ConfigError, FadingConfig, RawConfig, RunConfig, Sizes, SlackConfig,
    OUTPUT_DIR_ENV,
};
use crate::experiments::{self, resolve_threshold, ExperimentError, SweepConfig};
use crate::report::{self, num, Table, Unit};
use crate::verify::{self, SuiteConfig};

#[derive(Debug, Parser)]
#[command(
    name = "fadenet",
    version,
    about = "Threshold link activation in fading wireless networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Run TBLAS trials and write one CSV row per trial
    Simulate(RunArgs),
    /// Maximize the achievable throughput over the threshold
    OptimizeThreshold(RunArgs),
    /// Solve 2n e^-D = 2D + D^2 for the zero-order threshold
    SolveThreshold(RunArgs),
    /// Leading-order threshold, throughput, active count and rate-per-link
    Asymptotics(RunArgs),
    /// Exhaustive maximum throughput on random networks (n <= 20)
    Oracle(RunArgs),
    /// Scaling sweep over network sizes
    Sweep(RunArgs),
    /// Monte Carlo checks of the tail laws and concentration bounds
    VerifyBounds(RunArgs),
    /// Run the subcommand named in the config file
    Run(RunArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// JSON config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Network size or comma-separated sizes [default: 100,1000,10000,100000 for sweep, 10000 for verify-bounds]
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    /// Transmit SNR rho [default: 1]
    #[arg(long)]
    pub snr: Option<f64>,
    /// `rayleigh` or `exponential:MEAN` [default: rayleigh]
    #[arg(long)]
    pub fading: Option<String>,
    /// fixed | optimize | zero-order | asymptotic [default: optimize, or fixed when --delta is given]
    #[arg(long)]
    pub threshold: Option<String>,
    /// Fixed activation threshold
    #[arg(long)]
    pub delta: Option<f64>,
    /// Active-count slack: zero | sqrt-log-log | log-log | log | <number> [default: sqrt-log-log]
    #[arg(long)]
    pub xi: Option<String>,
    /// Interference slack, same forms as --xi [default: log]
    #[arg(long)]
    pub psi: Option<String>,
    /// Max-gain slack, same forms as --xi [default: log-log]
    #[arg(long)]
    pub phi: Option<String>,
    /// Trials per size [default: 100; 1000 for verify-bounds; 1 for oracle]
    #[arg(long)]
    pub trials: Option<u32>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// dense | virtual [default: virtual]
    #[arg(long)]
    pub mode: Option<String>,
    /// Samples per tail-law check in verify-bounds [default: 100000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Report rates in bits instead of nats
    #[arg(long)]
    pub bits: bool,
    /// Worker threads; results do not depend on it [default: all cores]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file [default: stdout, or $FADENET_OUTPUT_DIR/<subcommand>.csv]
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl From<fadenet_core::Error> for CliError {
    fn from(e: fadenet_core::Error) -> Self {
        CliError::Experiment(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 3,
        }
    }
}

fn command_of(c: &CliCommand) -> (Option<Command>, &RunArgs) {
    match c {
        CliCommand::Simulate(a) => (Some(Command::Simulate), a),
        CliCommand::OptimizeThreshold(a) => (Some(Command::OptimizeThreshold), a),
        CliCommand::SolveThreshold(a) => (Some(Command::SolveThreshold), a),
        CliCommand::Asymptotics(a) => (Some(Command::Asymptotics), a),
        CliCommand::Oracle(a) => (Some(Command::Oracle), a),
        CliCommand::Sweep(a) => (Some(Command::Sweep), a),
        CliCommand::VerifyBounds(a) => (Some(Command::VerifyBounds), a),
        CliCommand::Run(a) => (None, a),
    }
}

fn flags_to_raw(args: &RunArgs) -> Result<RawConfig, ConfigError> {
    let slack = |s: &Option<String>| s.as_deref().map(SlackConfig::parse_flag).transpose();
    Ok(RawConfig {
        subcommand: None,
        n: (!args.n.is_empty()).then(|| Sizes::Many(args.n.clone())),
        snr: args.snr,
        fading: args
            .fading
            .as_deref()
            .map(FadingConfig::parse_flag)
            .transpose()?,
        threshold: args.threshold.as_deref().map(parse_name).transpose()?,
        delta: args.delta,
        xi: slack(&args.xi)?,
        psi: slack(&args.psi)?,
        phi: slack(&args.phi)?,
        trials: args.trials,
        seed: args.seed,
        mode: args.mode.as_deref().map(parse_name).transpose()?,
        samples: args.samples,
        bits: args.bits.then_some(true),
        threads: args.threads,
        output: args.output.clone(),
    })
}

/// Merges the config file and flags into a validated config.
pub fn resolve_config(cli: &Cli, output_dir: Option<PathBuf>) -> Result<RunConfig, ConfigError> {
    let (command, args) = command_of(&cli.command);
    let file = match &args.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    let mut raw = file.overlay(flags_to_raw(args)?);
    match (command, raw.subcommand) {
        (Some(c), Some(f)) if c != f => {
            return Err(ConfigError::Invalid(format!(
                "subcommand: config file says `{}` but `{}` was invoked",
                f.as_str(),
                c.as_str()
            )))
        }
        (Some(c), _) => raw.subcommand = Some(c),
        (None, None) => {
            return Err(ConfigError::Invalid(
                "subcommand: `run` needs a config file naming one".into(),
            ))
        }
        (None, Some(_)) => {}
    }
    RunConfig::resolve(raw, output_dir)
}

/// Parses, dispatches and writes output. Errors carry their exit code.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let output_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let config = resolve_config(cli, output_dir)?;
    let pool = experiments::thread_pool(config.threads)?;
    let (bytes, outcome) = pool.install(|| dispatch(&config))?;
    match &config.output {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, &bytes)?;
        }
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(outcome)
}

/// Runs the configured subcommand and returns the CSV bytes.
pub fn dispatch(config: &RunConfig) -> Result<(Vec<u8>, Outcome), CliError> {
    let echo = config.echo();
    let unit = Unit::from_bits_flag(config.bits);
    let policy = config.policy();
    let mut outcome = Outcome::Success;
    let table = match config.subcommand {
        Command::Simulate => {
            let cols = report::trial_columns(unit);
            let mut t = Table::new(&echo, &cols.iter().map(String::as_str).collect::<Vec<_>>())?;
            for (group, &n) in config.n.iter().enumerate() {
                let params = NetworkParams::new(n as usize, config.snr)?;
                let fixed = config.delta.unwrap_or(0.0);
                let delta = resolve_threshold(n, config.threshold, fixed, &policy)?.delta;
                let records = experiments::run_trials(
                    &params,
                    &policy.clone().with_delta(delta),
                    config.mode.into(),
                    config.seed,
                    group as u32,
                    config.trials,
                )?;
                for r in &records {
                    t.row(report::trial_row(r, unit))?;
                }
            }
            t
        }
        Command::OptimizeThreshold => {
            let s = if unit == Unit::Bits { "bits" } else { "nats" };
            let ta = format!("Ta_{s}");
            let rbar = format!("predicted_rate_per_link_{s}");
            let mut t = Table::new(
                &echo,
                &["n", "method", "delta", &ta, "predicted_active", &rbar],
            )?;
            for &n in &config.n {
                let sol =
                    resolve_threshold(n, config.threshold, config.delta.unwrap_or(0.0), &policy)?;
                t.row([
                    n.to_string(),
                    sol.method.as_str().to_string(),
                    num(sol.delta),
                    num(unit.convert(sol.throughput)),
                    num(sol.predicted_active),
                    num(unit.convert(sol.predicted_rate_per_link)),
                ])?;
            }
            t
        }
        Command::SolveThreshold => {
            let mut t = Table::new(&echo, &["n", "delta", "residual"])?;
            for &n in &config.n {
                let delta = tblas::solve_zero_order(n as f64)?;
                t.row([
                    n.to_string(),
                    num(delta),
                    num(tblas::zero_order_residual(n as f64, delta)),
                ])?;
            }
            t
        }
        Command::Asymptotics => {
            let s = if unit == Unit::Bits { "bits" } else { "nats" };
            let tp = format!("throughput_{s}");
            let rbar = format!("rate_per_link_{s}");
            let mut t = Table::new(
                &echo,
                &[
                    "n",
                    "delta",
                    &tp,
                    "active_links",
                    &rbar,
                    "first_order_delta",
                    "first_order_error_bar",
                ],
            )?;
            for &n in &config.n {
                let nf = n as f64;
                let a = tblas::rayleigh_asymptotics(nf)?;
                let f = tblas::first_order_correction(nf, config.xi.rule().eval(nf))?;
                t.row([
                    n.to_string(),
                    num(a.delta),
                    num(unit.convert(a.throughput)),
                    num(a.active_links),
                    num(unit.convert(a.rate_per_link)),
                    num(f.delta),
                    num(f.error_bar),
                ])?;
            }
            t
        }
        Command::Oracle => oracle_table(config, &echo, unit)?,
        Command::Sweep => {
            let report = experiments::scaling_sweep(&SweepConfig {
                sizes: config.n.clone(),
                reps: config.trials,
                snr: config.snr,
                policy,
                threshold: config.threshold,
                delta: config.delta.unwrap_or(0.0),
                mode: config.mode.into(),
                seed: config.seed,
            })?;
            let cols = report::sweep_columns(unit);
            let mut t = Table::new(&echo, &cols.iter().map(String::as_str).collect::<Vec<_>>())?;
            for row in &report.rows {
                t.row(report::sweep_row(row, unit))?;
            }
            t
        }
        Command::VerifyBounds => {
            let mut t = Table::new(&echo, &report::CHECK_COLUMNS)?;
            for &n in &config.n {
                let lines = verify::run_suite(&SuiteConfig {
                    n,
                    trials: config.trials,
                    samples: config.samples,
                    policy: policy.clone(),
                    phi: config.phi.rule(),
                    seed: config.seed,
                })?;
                for line in &lines {
                    if !line.passed {
                        outcome = Outcome::VerificationFailed;
                    }
                    t.row(report::check_row(line))?;
                }
            }
            t
        }
    };
    Ok((table.finish()?, outcome))
}

/// Points in the threshold grid used for the TBLAS-versus-optimum gap.
const GAP_GRID_POINTS: usize = 64;

fn oracle_table(config: &RunConfig, echo: &str, unit: Unit) -> Result<Table, CliError> {
    let s = if unit == Unit::Bits { "bits" } else { "nats" };
    let tp = format!("throughput_{s}");
    let tb = format!("tblas_throughput_{s}");
    let mut t = Table::new(
        echo,
        &[
            "n",
            "seed",
            "stream",
            "k_star",
            &tp,
            "best_links",
            "evaluated",
            "tblas_delta",
            &tb,
            "gap_ratio",
        ],
    )?;
    for (group, &n) in config.n.iter().enumerate() {
        if n as usize > MAX_ORACLE_LINKS {
            return Err(fadenet_core::Error::TooLarge {
                n: n as usize,
                max: MAX_ORACLE_LINKS,
            }
            .into());
        }
        let params = NetworkParams::new(n as usize, config.snr)?;
        let spec = config.fading.spec()?;
        for trial in 0..config.trials {
            let seed = SeedSpec::grouped(config.seed, group as u32, trial);
            let g = fading::sample_gain_matrix(&spec, n as usize, seed)?;
            let top = g.direct_gains().into_iter().fold(0.0, f64::max);
            let grid: Vec<f64> = (0..GAP_GRID_POINTS)
                .map(|i| top * i as f64 / (GAP_GRID_POINTS - 1) as f64)
                .collect();
            let gap = oracle::tblas_optimality_gap(&g, &params, &grid)?;
            let links: Vec<String> = gap.oracle.best.iter().map(|l| l.to_string()).collect();
            t.row([
                n.to_string(),
                seed.master.to_string(),
                seed.stream.to_string(),
                gap.oracle.k_star.to_string(),
                num(unit.convert(gap.oracle.throughput)),
                links.join(" "),
                gap.oracle.evaluated.to_string(),
                num(gap.best_delta),
                num(unit.convert(gap.tblas_throughput)),
                num(gap.ratio),
            ])?;
        }
    }
    Ok(t)
}
