//! One TBLAS realization on a random network.
//!
//! Dense mode samples the whole `n x n` gain matrix. Virtual mode samples
//! only what TBLAS throughput depends on: the active count
//! `k ~ Binomial(n, q)`, `k` direct gains conditioned on exceeding the
//! threshold, and the `k (k - 1)` cross gains among active links. Silent
//! links contribute nothing to any SINR, so both modes give the same law for
//! every recorded quantity.

use alloc::vec::Vec;

use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::netmodel::{self, ActiveSet, GainMatrix, NetworkParams, ThroughputReport};
use crate::oracle::{self, MAX_ORACLE_LINKS};
use crate::rng::{SeedSpec, SimRng};
use crate::tblas::{self, ThresholdPolicy};

/// Largest network dense mode will materialize.
pub const MAX_DENSE_LINKS: usize = 30_000;
/// Dense trials also record the exhaustive optimum up to this size.
pub const ORACLE_IN_TRIAL_LINKS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrialMode {
    Dense,
    #[default]
    Virtual,
}

impl TrialMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialMode::Dense => "dense",
            TrialMode::Virtual => "virtual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub seed: u64,
    pub stream: u64,
    pub delta: f64,
    pub k_active: usize,
    pub throughput: f64,
    /// `None` when no link is active.
    pub rate_per_link: Option<f64>,
    /// Achievable throughput `T_a(delta)`; `None` outside its regime.
    pub bound: Option<f64>,
    /// `T > T_a(delta)`, vacuously true when the bound is undefined.
    pub bound_satisfied: bool,
    pub oracle: Option<f64>,
}

/// Exact `Binomial(n, q)` draw.
pub fn sample_active_count(n: u64, q: f64, rng: &mut SimRng) -> u64 {
    match Binomial::new(n, q.clamp(0.0, 1.0)) {
        Ok(b) => b.sample(rng),
        Err(_) => 0,
    }
}

fn dense_report(
    params: &NetworkParams,
    policy: &ThresholdPolicy,
    seed: SeedSpec,
) -> Result<(ThroughputReport, Option<f64>)> {
    if params.n > MAX_DENSE_LINKS {
        return Err(Error::TooLarge {
            n: params.n,
            max: MAX_DENSE_LINKS,
        });
    }
    let g = crate::fading::sample_gain_matrix(&policy.fading, params.n, seed)?;
    let active = tblas::activate(&g.direct_gains(), policy.delta);
    let report = netmodel::throughput(&g, &active, params)?;
    let best = if params.n <= ORACLE_IN_TRIAL_LINKS.min(MAX_ORACLE_LINKS) {
        Some(oracle::max_throughput_exhaustive(&g, params)?.throughput)
    } else {
        None
    };
    Ok((report, best))
}

fn virtual_report(
    params: &NetworkParams,
    policy: &ThresholdPolicy,
    seed: SeedSpec,
) -> Result<ThroughputReport> {
    let truncated = policy.fading.truncated(policy.delta)?;
    let q = policy.fading.ccdf(policy.delta)?;
    let mut rng = seed.rng();
    let k = sample_active_count(params.n as u64, q, &mut rng) as usize;
    if k == 0 {
        return Ok(ThroughputReport {
            links: Vec::new(),
            throughput: 0.0,
            k: 0,
            rate_per_link: None,
        });
    }
    let direct: Vec<f64> = (0..k).map(|_| truncated.sample(&mut rng)).collect();
    let mut entries = Vec::with_capacity(k * k);
    for (tx, &own) in direct.iter().enumerate() {
        for rx in 0..k {
            entries.push(if tx == rx {
                own
            } else {
                policy.fading.sample(&mut rng)
            });
        }
    }
    let g = GainMatrix::new(k, entries)?;
    netmodel::throughput(&g, &ActiveSet::all(k), &NetworkParams::new(k, params.snr)?)
}

/// Runs TBLAS at `policy.delta` on one sampled network.
pub fn run_trial(
    params: &NetworkParams,
    policy: &ThresholdPolicy,
    mode: TrialMode,
    seed: SeedSpec,
) -> Result<TrialRecord> {
    policy.validate()?;
    let (report, best) = match mode {
        TrialMode::Dense => dense_report(params, policy, seed)?,
        TrialMode::Virtual => (virtual_report(params, policy, seed)?, None),
    };
    let bound = match tblas::achievable_throughput(params.n as f64, policy.delta, policy) {
        Ok(t) => Some(t),
        Err(Error::OutOfRegime { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(TrialRecord {
        n: params.n,
        seed: seed.master,
        stream: seed.stream,
        delta: policy.delta,
        k_active: report.k,
        throughput: report.throughput,
        rate_per_link: report.rate_per_link,
        bound,
        bound_satisfied: bound.is_none_or(|b| report.throughput > b),
        oracle: best,
    })
}
