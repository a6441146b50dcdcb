//! Monte Carlo harness: batches of trials, summaries and scaling sweeps.
//!
//! Trials run on rayon but every trial reads its own substream and results
//! are collected in trial order, so reports do not depend on the number of
//! worker threads.

use fadenet_core::stats::Summary;
use fadenet_core::tblas::{self, ThresholdMethod};
use fadenet_core::trial::run_trial;
use fadenet_core::{
    Error as CoreError, NetworkParams, SeedSpec, ThresholdPolicy, ThresholdSolution, TrialMode,
    TrialRecord,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fewest trials a sweep aggregate may be built from.
pub const MIN_SWEEP_REPS: u32 = 30;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("a sweep needs at least {min} trials per size, got {reps}")]
    TooFewReps { reps: u32, min: u32 },
    #[error("records mix network sizes or thresholds")]
    Heterogeneous,
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// How the activation threshold is picked for each network size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdChoice {
    Fixed,
    Optimize,
    ZeroOrder,
    Asymptotic,
}

impl ThresholdChoice {
    pub fn method(&self) -> ThresholdMethod {
        match self {
            ThresholdChoice::Fixed => ThresholdMethod::Fixed,
            ThresholdChoice::Optimize => ThresholdMethod::GridGolden,
            ThresholdChoice::ZeroOrder => ThresholdMethod::ZeroOrder,
            ThresholdChoice::Asymptotic => ThresholdMethod::Asymptotic,
        }
    }
}

/// Threshold for `n` links together with its achievable throughput, if
/// defined. `fixed` is only read for [`ThresholdChoice::Fixed`].
pub fn resolve_threshold(
    n: u64,
    choice: ThresholdChoice,
    fixed: f64,
    policy: &ThresholdPolicy,
) -> Result<ThresholdSolution> {
    let nf = n as f64;
    let delta = match choice {
        ThresholdChoice::Optimize => return Ok(tblas::optimize_threshold(nf, policy)?),
        ThresholdChoice::Fixed => fixed,
        ThresholdChoice::ZeroOrder => tblas::solve_zero_order(nf)?,
        ThresholdChoice::Asymptotic => tblas::rayleigh_asymptotics(nf)?.delta,
    };
    match ThresholdSolution::at(nf, delta, policy, choice.method()) {
        Ok(s) => Ok(s),
        Err(CoreError::OutOfRegime { .. }) => Ok(ThresholdSolution {
            delta,
            throughput: f64::NAN,
            predicted_active: nf * policy.fading.ccdf(delta)?,
            predicted_rate_per_link: f64::NAN,
            method: choice.method(),
        }),
        Err(e) => Err(e.into()),
    }
}

pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    builder
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))
}

/// Trials `0..trials` at a fixed threshold; trial `t` uses stream
/// `(group << 32) | t` of `master`.
pub fn run_trials(
    params: &NetworkParams,
    policy: &ThresholdPolicy,
    mode: TrialMode,
    master: u64,
    group: u32,
    trials: u32,
) -> Result<Vec<TrialRecord>> {
    (0..trials)
        .into_par_iter()
        .map(|t| run_trial(params, policy, mode, SeedSpec::grouped(master, group, t)))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(Into::into)
}

/// Aggregates for one network size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: u64,
    pub delta: f64,
    pub trials: usize,
    pub throughput: Summary,
    pub active: Summary,
    /// Over trials with at least one active link.
    pub rate_per_link: Option<Summary>,
    /// `mean T / (ln n - 2 ln ln n + ln(2/e))`
    pub ratio_throughput: f64,
    /// `mean k / (ln^2 n / 2)`
    pub ratio_active: f64,
    /// `mean rbar / (2 / ln n)`
    pub ratio_rate_per_link: f64,
    pub bound_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<SweepRow>,
}

/// Leading-order throughput `ln n - 2 ln ln n + ln(2/e)`.
pub fn leading_throughput(n: f64) -> f64 {
    let l = n.ln();
    l - 2.0 * l.ln() + std::f64::consts::LN_2 - 1.0
}

pub fn leading_active(n: f64) -> f64 {
    0.5 * n.ln().powi(2)
}

pub fn leading_rate_per_link(n: f64) -> f64 {
    2.0 / n.ln()
}

pub fn summarize(records: &[TrialRecord]) -> Result<SweepRow> {
    let first = records.first().ok_or(CoreError::EmptyInput)?;
    if records
        .iter()
        .any(|r| r.n != first.n || r.delta.to_bits() != first.delta.to_bits())
    {
        return Err(ExperimentError::Heterogeneous);
    }
    let throughput = Summary::from_iter_exact(records.iter().map(|r| r.throughput))?;
    let active = Summary::from_iter_exact(records.iter().map(|r| r.k_active as f64))?;
    let rate_per_link =
        Summary::from_iter_exact(records.iter().filter_map(|r| r.rate_per_link)).ok();
    let nf = first.n as f64;
    Ok(SweepRow {
        n: first.n as u64,
        delta: first.delta,
        trials: records.len(),
        ratio_throughput: throughput.mean / leading_throughput(nf),
        ratio_active: active.mean / leading_active(nf),
        ratio_rate_per_link: rate_per_link.map_or(f64::NAN, |s| s.mean / leading_rate_per_link(nf)),
        throughput,
        active,
        rate_per_link,
        bound_violations: records.iter().filter(|r| !r.bound_satisfied).count(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sizes: Vec<u64>,
    pub reps: u32,
    pub snr: f64,
    pub policy: ThresholdPolicy,
    pub threshold: ThresholdChoice,
    /// Used with [`ThresholdChoice::Fixed`].
    pub delta: f64,
    pub mode: TrialMode,
    pub seed: u64,
}

/// Size `i` of the sweep runs its trials in stream group `i`.
pub fn scaling_sweep(config: &SweepConfig) -> Result<ScalingReport> {
    if config.reps < MIN_SWEEP_REPS {
        return Err(ExperimentError::TooFewReps {
            reps: config.reps,
            min: MIN_SWEEP_REPS,
        });
    }
    let mut rows = Vec::with_capacity(config.sizes.len());
    for (group, &n) in config.sizes.iter().enumerate() {
        let params = NetworkParams::new(n as usize, config.snr)?;
        let delta = resolve_threshold(n, config.threshold, config.delta, &config.policy)?.delta;
        let policy = config.policy.clone().with_delta(delta);
        let records = run_trials(
            &params,
            &policy,
            config.mode,
            config.seed,
            group as u32,
            config.reps,
        )?;
        rows.push(summarize(&records)?);
    }
    Ok(ScalingReport { rows })
}

/// Fraction of trials with `T <= T_a(delta)`.
pub fn bound_violation_fraction(records: &[TrialRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| !r.bound_satisfied).count() as f64 / records.len() as f64
}
