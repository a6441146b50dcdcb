//! Tail laws and concentration checks behind the throughput upper bound.
//!
//! For a random active set of `k` links under Rayleigh fading the
//! interference at a receiver is a sum of `k - 1` unit exponentials, which
//! gives the closed-form SINR and rate tails below. The transform
//! `X = r + (e^r - 1) / (rho (k - 1))` turns a link rate into an exponential
//! variable with mean `1 / (k - 1)` that dominates the rate; the sum of `k`
//! such variables bounds the throughput and yields the union-bound exponent
//! [`throughput_tail_exponent`].
//!
//! The Monte Carlo verifiers here are sequential; each trial reads its own
//! substream so a parallel driver can reproduce them exactly.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fading::FadingSpec;
use crate::math::{self, NeumaierSum};
use crate::netmodel::{self, ActiveSet, NetworkParams};
use crate::rng::{SeedSpec, SimRng};
use crate::stats;
use crate::tblas::{self, SlackRule, ThresholdPolicy};
use crate::trial::sample_active_count;

/// Stream groups used by the trial-based checks.
pub const CONCENTRATION_GROUP: u32 = 0x0C0C;
pub const MAX_GAIN_GROUP: u32 = 0x0A0A;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsConfig {
    pub k: usize,
    pub snr: f64,
    /// Slack on the largest direct gain, `ln ln n` by default.
    pub phi: SlackRule,
    pub samples: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            k: 10,
            snr: 10.0,
            phi: SlackRule::LogLog,
            samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheckReport {
    /// Kolmogorov-Smirnov distance to the target law.
    pub ks_distance: f64,
    /// Pass threshold for `ks_distance`.
    pub threshold: f64,
    pub sample_mean: f64,
    pub target_mean: Option<f64>,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyReport {
    pub events: usize,
    pub trials: usize,
    pub frequency: f64,
    /// Exact probability of the event, where known.
    pub benchmark: Option<f64>,
}

impl FrequencyReport {
    pub fn new(events: usize, trials: usize, benchmark: Option<f64>) -> Self {
        Self {
            events,
            trials,
            frequency: if trials == 0 {
                0.0
            } else {
                events as f64 / trials as f64
            },
            benchmark,
        }
    }

    /// Binomial standard error of the frequency under the benchmark.
    pub fn std_error(&self) -> Option<f64> {
        self.benchmark
            .map(|p| math::sqrt(p * (1.0 - p) / self.trials.max(1) as f64))
    }
}

fn check_sinr_args(x: f64, k: usize, snr: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::domain("x", x, "must be nonnegative"));
    }
    if k == 0 {
        return Err(Error::domain("k", 0.0, "must be at least 1"));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::domain("snr", snr, "must be finite and positive"));
    }
    Ok(())
}

/// `P(gamma > x) = e^{-x/rho} / (1 + x)^{k-1}`.
pub fn sinr_ccdf(x: f64, k: usize, snr: f64) -> Result<f64> {
    check_sinr_args(x, k, snr)?;
    Ok(math::exp(-x / snr - (k - 1) as f64 * math::ln_1p(x)))
}

/// `P(r > x) = e^{-(e^x - 1)/rho} / e^{(k-1) x}`.
pub fn rate_ccdf(x: f64, k: usize, snr: f64) -> Result<f64> {
    check_sinr_args(x, k, snr)?;
    Ok(math::exp(-math::exp_m1(x) / snr - (k - 1) as f64 * x))
}

fn check_transform_args(k: usize, snr: f64) -> Result<()> {
    if k < 2 {
        return Err(Error::domain("k", k as f64, "the transform needs k >= 2"));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::domain("snr", snr, "must be finite and positive"));
    }
    Ok(())
}

/// `X = r + (e^r - 1) / (rho (k - 1))`.
pub fn xi_transform(rate: f64, k: usize, snr: f64) -> Result<f64> {
    check_transform_args(k, snr)?;
    if !(rate >= 0.0) {
        return Err(Error::domain("rate", rate, "must be nonnegative"));
    }
    Ok(rate + math::exp_m1(rate) / (snr * (k - 1) as f64))
}

/// Inverse of [`xi_transform`]. The rate lies below both `x` and
/// `ln(1 + x rho (k - 1))`.
pub fn xi_inverse(x: f64, k: usize, snr: f64) -> Result<f64> {
    check_transform_args(k, snr)?;
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::domain("x", x, "must be finite and nonnegative"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let scale = snr * (k - 1) as f64;
    let hi = x.min(math::ln_1p(x * scale));
    math::bisect(|r| r + math::exp_m1(r) / scale - x, 0.0, hi)
}

/// `E(x, k) = k (ln n - x - ln k + ln x + 2) + ln(k)/2 + x`.
///
/// Refuses `x < k / (k - 1)`, below which the largest Poisson summand is not
/// the last one and the bound derivation does not apply.
pub fn throughput_tail_exponent(x: f64, k: f64, n: f64) -> Result<f64> {
    if !(n >= k) {
        return Err(Error::domain("n", n, "must be at least k"));
    }
    throughput_tail_exponent_ln(x, k, math::ln(n))
}

/// [`throughput_tail_exponent`] with `ln n` supplied directly, for networks
/// too large to represent `n` itself.
pub fn throughput_tail_exponent_ln(x: f64, k: f64, ln_n: f64) -> Result<f64> {
    if !(k >= 2.0 && k.is_finite()) {
        return Err(Error::domain("k", k, "must be at least 2"));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain("x", x, "must be positive"));
    }
    if !(ln_n >= math::ln(k)) {
        return Err(Error::domain("ln n", ln_n, "must be at least ln k"));
    }
    if x < k / (k - 1.0) {
        return Err(Error::domain("x", x, "must be at least k/(k-1)"));
    }
    let ln_k = math::ln(k);
    Ok(k * (ln_n - x - ln_k + math::ln(x) + 2.0) + 0.5 * ln_k + x)
}

/// Exact `P(X_1 + ... + X_k > x)` for i.i.d. exponentials of mean `1/(k-1)`:
/// `e^{-(k-1)x} sum_{m<k} ((k-1)x)^m / m!`.
pub fn throughput_tail_exact(x: f64, k: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain("k", k as f64, "must be at least 2"));
    }
    if !(x >= 0.0) {
        return Err(Error::domain("x", x, "must be nonnegative"));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let lambda = (k - 1) as f64 * x;
    let ln_lambda = math::ln(lambda);
    let terms: Vec<f64> = (0..k)
        .map(|m| m as f64 * ln_lambda - math::ln_factorial(m))
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum = math::compensated_sum(terms.iter().map(|t| math::exp(t - top)));
    Ok(math::exp(top + math::ln(sum) - lambda).min(1.0))
}

/// Stirling-approximated tail `sqrt(k) e^{-(k-1)(x-1)} x^{k-1}`.
pub fn throughput_tail_stirling(x: f64, k: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain("k", k as f64, "must be at least 2"));
    }
    if !(x > 0.0) {
        return Err(Error::domain("x", x, "must be positive"));
    }
    let km1 = (k - 1) as f64;
    Ok(math::exp(
        0.5 * math::ln(k as f64) - km1 * (x - 1.0) + km1 * math::ln(x),
    ))
}

/// `(ln n + c(n)) / ln(1 + rho (ln n + phi))` with
/// `c(n) = -2 ln ln n + ln(2/e)`.
pub fn k_star_lower_bound(n: f64, snr: f64, phi: f64) -> Result<f64> {
    if !(n >= 16.0 && n.is_finite()) {
        return Err(Error::domain("n", n, "needs n >= 16"));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::domain("snr", snr, "must be finite and positive"));
    }
    if !(phi >= 0.0 && phi.is_finite()) {
        return Err(Error::domain("phi", phi, "must be finite and nonnegative"));
    }
    let l = math::ln(n);
    let achievable = l - 2.0 * math::ln(l) + core::f64::consts::LN_2 - 1.0;
    Ok(achievable / math::ln_1p(snr * (l + phi)))
}

/// SINRs of every link in `ceil(count / k)` independent `k x k` Rayleigh
/// networks with all links active, truncated to `count`, paired with rates.
///
/// Receivers in one network see disjoint gain entries, so all `k` values
/// are independent draws of the single-link law.
pub fn sample_sinr_and_rate(
    k: usize,
    snr: f64,
    count: usize,
    seed: SeedSpec,
) -> Result<Vec<(f64, f64)>> {
    check_sinr_args(0.0, k, snr)?;
    let params = NetworkParams::new(k, snr)?;
    let active = ActiveSet::all(k);
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let entries = (0..k * k)
            .map(|_| FadingSpec::Rayleigh.sample(&mut rng))
            .collect();
        let g = netmodel::GainMatrix::new(k, entries)?;
        let report = netmodel::throughput(&g, &active, &params)?;
        out.extend(report.links.iter().map(|m| (m.sinr, m.rate)));
    }
    out.truncate(count);
    Ok(out)
}

/// Sup-distance between the empirical SINR ccdf and [`sinr_ccdf`].
pub fn sinr_law_check(
    k: usize,
    snr: f64,
    samples: usize,
    tolerance: f64,
    seed: SeedSpec,
) -> Result<TailCheckReport> {
    if samples == 0 {
        return Err(Error::EmptyInput);
    }
    let sinrs: Vec<f64> = sample_sinr_and_rate(k, snr, samples, seed)?
        .into_iter()
        .map(|(s, _)| s)
        .collect();
    let d = stats::ks_statistic(&sinrs, |x| 1.0 - sinr_ccdf(x, k, snr).unwrap_or(1.0));
    Ok(TailCheckReport {
        ks_distance: d,
        threshold: tolerance,
        sample_mean: math::compensated_sum(sinrs.iter().copied()) / samples as f64,
        target_mean: None,
        samples,
        passed: d < tolerance,
    })
}

/// Transformed rates and the rates they came from.
pub fn sample_xi(k: usize, snr: f64, count: usize, seed: SeedSpec) -> Result<Vec<(f64, f64)>> {
    sample_sinr_and_rate(k, snr, count, seed)?
        .into_iter()
        .map(|(_, r)| Ok((xi_transform(r, k, snr)?, r)))
        .collect()
}

/// KS test of the transformed rates against an exponential of mean
/// `1/(k-1)` at the 1% level, plus a relative check of the sample mean.
pub fn xi_law_check(
    k: usize,
    snr: f64,
    samples: usize,
    mean_tolerance: f64,
    seed: SeedSpec,
) -> Result<TailCheckReport> {
    if samples == 0 {
        return Err(Error::EmptyInput);
    }
    let xs: Vec<f64> = sample_xi(k, snr, samples, seed)?
        .into_iter()
        .map(|(x, _)| x)
        .collect();
    let rate = (k - 1) as f64;
    let d = stats::ks_statistic(&xs, |x| -math::exp_m1(-rate * x));
    let threshold = stats::ks_critical_value(0.01, samples);
    let mean = math::compensated_sum(xs.iter().copied()) / samples as f64;
    let target = 1.0 / rate;
    Ok(TailCheckReport {
        ks_distance: d,
        threshold,
        sample_mean: mean,
        target_mean: Some(target),
        samples,
        passed: d < threshold && ((mean - target) / target).abs() < mean_tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationTrial {
    pub active: u64,
    pub mean_interference: Option<f64>,
    pub interference_violated: bool,
    pub count_violated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationReport {
    /// `(1/k) sum_i I_i < (k - 1) mu + psi(n)` violated.
    pub interference: FrequencyReport,
    /// `k > n q - xi(n) sqrt(n q)` violated.
    pub active_count: FrequencyReport,
}

struct ConcentrationSetup {
    n: u64,
    q: f64,
    count_bound: f64,
    psi: f64,
    mean: f64,
}

fn concentration_setup(n: u64, delta: f64, policy: &ThresholdPolicy) -> Result<ConcentrationSetup> {
    if policy.fading != FadingSpec::Rayleigh {
        return Err(Error::Config(
            "concentration checks assume Rayleigh fading".into(),
        ));
    }
    policy.xi.validate()?;
    policy.psi.validate()?;
    let q = policy.fading.ccdf(delta)?;
    let nq = n as f64 * q;
    if !(nq >= 1.0) {
        return Err(Error::OutOfRegime {
            delta,
            effective: nq,
        });
    }
    let nf = n as f64;
    Ok(ConcentrationSetup {
        n,
        q,
        count_bound: nq - policy.xi.eval(nf) * math::sqrt(nq),
        psi: policy.psi.eval(nf),
        mean: policy.fading.mean(),
    })
}

fn concentration_sample(setup: &ConcentrationSetup, rng: &mut SimRng) -> ConcentrationTrial {
    let k = sample_active_count(setup.n, setup.q, rng);
    let mean_interference = (k > 0).then(|| {
        let mut total = NeumaierSum::new();
        for _ in 0..k * (k - 1) {
            total.add(FadingSpec::Rayleigh.sample(rng));
        }
        total.value() / k as f64
    });
    let interference_violated =
        mean_interference.is_some_and(|m| !(m < (k as f64 - 1.0) * setup.mean + setup.psi));
    ConcentrationTrial {
        active: k,
        mean_interference,
        interference_violated,
        count_violated: !(k as f64 > setup.count_bound),
    }
}

/// One trial of [`concentration_check`], drawn from its own substream.
pub fn concentration_trial(
    n: u64,
    delta: f64,
    policy: &ThresholdPolicy,
    master: u64,
    trial: u32,
) -> Result<ConcentrationTrial> {
    let setup = concentration_setup(n, delta, policy)?;
    let mut rng = SeedSpec::grouped(master, CONCENTRATION_GROUP, trial).rng();
    Ok(concentration_sample(&setup, &mut rng))
}

/// Exact `P(k <= n q - xi sqrt(n q))` for `k ~ Binomial(n, q)`.
pub fn count_violation_probability(n: u64, delta: f64, policy: &ThresholdPolicy) -> Result<f64> {
    let setup = concentration_setup(n, delta, policy)?;
    if setup.count_bound < 0.0 {
        return Ok(0.0);
    }
    Ok(stats::binomial_cdf(setup.count_bound as u64, n, setup.q))
}

/// Aggregates per-trial outcomes in trial order.
pub fn concentration_report(
    n: u64,
    delta: f64,
    policy: &ThresholdPolicy,
    outcomes: &[ConcentrationTrial],
) -> Result<ConcentrationReport> {
    let trials = outcomes.len();
    Ok(ConcentrationReport {
        interference: FrequencyReport::new(
            outcomes.iter().filter(|o| o.interference_violated).count(),
            trials,
            None,
        ),
        active_count: FrequencyReport::new(
            outcomes.iter().filter(|o| o.count_violated).count(),
            trials,
            Some(count_violation_probability(n, delta, policy)?),
        ),
    })
}

/// Violation frequencies of the mean-interference and active-count bounds
/// over `trials` sampled networks of `n` links.
pub fn concentration_check(
    n: u64,
    delta: f64,
    trials: u32,
    policy: &ThresholdPolicy,
    master: u64,
) -> Result<ConcentrationReport> {
    let setup = concentration_setup(n, delta, policy)?;
    let outcomes: Vec<ConcentrationTrial> = (0..trials)
        .map(|t| {
            let mut rng = SeedSpec::grouped(master, CONCENTRATION_GROUP, t).rng();
            concentration_sample(&setup, &mut rng)
        })
        .collect();
    concentration_report(n, delta, policy, &outcomes)
}

/// `1 - (1 - e^{-(ln n + phi)})^n`.
pub fn max_gain_exceedance_probability(n: u64, phi: f64) -> f64 {
    let nf = n as f64;
    let p = math::exp(-(math::ln(nf) + phi));
    -math::exp_m1(nf * math::ln_1p(-p))
}

/// Whether the largest of `n` direct gains exceeds `ln n + phi`.
pub fn max_gain_trial(n: u64, phi: f64, master: u64, trial: u32) -> bool {
    let mut rng = SeedSpec::grouped(master, MAX_GAIN_GROUP, trial).rng();
    let level = math::ln(n as f64) + phi;
    let mut max = 0.0f64;
    for _ in 0..n {
        max = max.max(FadingSpec::Rayleigh.sample(&mut rng));
    }
    max > level
}

pub fn max_gain_check(n: u64, trials: u32, phi: f64, master: u64) -> Result<FrequencyReport> {
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    if phi.is_nan() {
        return Err(Error::domain("phi", phi, "must be a number"));
    }
    let events = (0..trials)
        .filter(|&t| max_gain_trial(n, phi, master, t))
        .count();
    Ok(FrequencyReport::new(
        events,
        trials as usize,
        Some(max_gain_exceedance_probability(n, phi)),
    ))
}

/// Default slack on the largest direct gain.
pub fn default_phi(n: f64) -> f64 {
    tblas::ln_ln(n)
}
