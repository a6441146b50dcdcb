//! Parallel drivers for the bound checks and the `verify-bounds` suite.

use fadenet_core::bounds::{self, ConcentrationReport, FrequencyReport, TailCheckReport};
use fadenet_core::{tblas, SeedSpec, SlackRule, ThresholdPolicy};
use rayon::prelude::*;

use crate::experiments::Result;

/// Stream group of the law checks; check `i` reads stream `(group << 32) | i`.
const LAW_GROUP: u32 = 0x1A1A;

/// Same result as [`bounds::concentration_check`], trials spread over rayon.
pub fn concentration_check(
    n: u64,
    delta: f64,
    trials: u32,
    policy: &ThresholdPolicy,
    master: u64,
) -> Result<ConcentrationReport> {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| bounds::concentration_trial(n, delta, policy, master, t))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(bounds::concentration_report(n, delta, policy, &outcomes)?)
}

/// Same result as [`bounds::max_gain_check`], trials spread over rayon.
pub fn max_gain_check(n: u64, trials: u32, phi: f64, master: u64) -> Result<FrequencyReport> {
    if n == 0 {
        return Err(fadenet_core::Error::EmptyNetwork.into());
    }
    let events = (0..trials)
        .into_par_iter()
        .filter(|&t| bounds::max_gain_trial(n, phi, master, t))
        .count();
    Ok(FrequencyReport::new(
        events,
        trials as usize,
        Some(bounds::max_gain_exceedance_probability(n, phi)),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// Network size for the concentration and max-gain checks.
    pub n: u64,
    pub trials: u32,
    /// Samples per tail-law check.
    pub samples: usize,
    pub policy: ThresholdPolicy,
    pub phi: SlackRule,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub samples: usize,
    pub passed: bool,
}

impl CheckLine {
    fn tail(name: String, r: &TailCheckReport) -> Self {
        Self {
            name,
            statistic: r.ks_distance,
            threshold: r.threshold,
            samples: r.samples,
            passed: r.passed,
        }
    }

    /// Frequency within three binomial standard errors of its benchmark.
    fn frequency(name: &str, r: &FrequencyReport) -> Self {
        let p = r.benchmark.unwrap_or(0.0);
        let tolerance = 3.0
            * r.std_error()
                .unwrap_or(0.0)
                .max(1.0 / r.trials.max(1) as f64);
        let deviation = (r.frequency - p).abs();
        Self {
            name: name.to_string(),
            statistic: deviation,
            threshold: tolerance,
            samples: r.trials,
            passed: deviation <= tolerance,
        }
    }
}

/// SINR-law pairs `(k, rho)` checked by the suite.
pub const SINR_LAW_CASES: [(usize, f64); 6] = [
    (2, 1.0),
    (2, 10.0),
    (5, 1.0),
    (5, 10.0),
    (10, 1.0),
    (10, 10.0),
];

/// Tolerance on the sup-distance between empirical and closed-form ccdfs.
pub const SINR_LAW_TOLERANCE: f64 = 0.01;

pub fn sinr_law_checks(samples: usize, master: u64) -> Result<Vec<TailCheckReport>> {
    SINR_LAW_CASES
        .par_iter()
        .enumerate()
        .map(|(i, &(k, snr))| {
            let seed = SeedSpec::grouped(master, LAW_GROUP, i as u32);
            Ok(bounds::sinr_law_check(
                k,
                snr,
                samples,
                SINR_LAW_TOLERANCE,
                seed,
            )?)
        })
        .collect()
}

pub fn xi_law_check(samples: usize, master: u64) -> Result<TailCheckReport> {
    let seed = SeedSpec::grouped(master, LAW_GROUP, SINR_LAW_CASES.len() as u32);
    Ok(bounds::xi_law_check(10, 10.0, samples, 0.02, seed)?)
}

/// Runs every Monte Carlo check; the threshold is optimized for `config.n`
/// under `config.policy`.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();
    for ((k, snr), r) in SINR_LAW_CASES
        .iter()
        .zip(sinr_law_checks(config.samples, config.seed)?)
    {
        lines.push(CheckLine::tail(format!("sinr-law k={k} snr={snr}"), &r));
    }
    let xi = xi_law_check(config.samples, config.seed)?;
    lines.push(CheckLine::tail("xi-exponential k=10 snr=10".into(), &xi));

    let seed = SeedSpec::grouped(config.seed, LAW_GROUP, SINR_LAW_CASES.len() as u32 + 1);
    let dominated = bounds::sample_xi(10, 10.0, config.samples, seed)?
        .iter()
        .filter(|(x, r)| x < r)
        .count();
    lines.push(CheckLine {
        name: "xi-dominates-rate".into(),
        statistic: dominated as f64,
        threshold: 0.0,
        samples: config.samples,
        passed: dominated == 0,
    });

    let nf = config.n as f64;
    let delta = tblas::optimize_threshold(nf, &config.policy)?.delta;
    let conc = concentration_check(config.n, delta, config.trials, &config.policy, config.seed)?;
    lines.push(CheckLine {
        name: "mean-interference-bound".into(),
        statistic: conc.interference.frequency,
        threshold: 0.05,
        samples: conc.interference.trials,
        passed: conc.interference.frequency <= 0.05,
    });
    lines.push(CheckLine::frequency(
        "active-count-vs-binomial",
        &conc.active_count,
    ));

    let phi = config.phi.eval(nf);
    let max_gain = max_gain_check(config.n, config.trials, phi, config.seed)?;
    lines.push(CheckLine::frequency(
        "max-direct-gain-vs-order-statistic",
        &max_gain,
    ));
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_concentration_matches_sequential() {
        let policy = ThresholdPolicy::default();
        let par = concentration_check(3000, 3.5, 64, &policy, 12).unwrap();
        let seq = bounds::concentration_check(3000, 3.5, 64, &policy, 12).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn parallel_max_gain_matches_sequential() {
        let par = max_gain_check(500, 80, 1.0, 4).unwrap();
        let seq = bounds::max_gain_check(500, 80, 1.0, 4).unwrap();
        assert_eq!(par, seq);
    }
}
