//! Threshold-based link activation.
//!
//! Each link transmits iff its own direct gain exceeds a common threshold
//! `delta`, so the decision needs no information about other links. This
//! module also evaluates the deterministic throughput that the rule achieves
//! with high probability,
//!
//! ```text
//! T_a(delta) = m * ln(1 + delta / (mu * m + psi)),   m = n q - xi * sqrt(n q),
//! ```
//!
//! where `q = 1 - F(delta)`, and searches for the threshold maximizing it.
//! For Rayleigh fading it also provides the closed-form leading terms and the
//! two-stage analytic approximation of the optimal threshold.

use crate::error::{Error, Result};
use crate::fading::FadingSpec;
use crate::math;
use crate::netmodel::ActiveSet;

use alloc::vec::Vec;

/// Points in the log-uniform threshold grid.
pub const GRID_POINTS: usize = 2048;
/// The grid spans `[GRID_FLOOR * upper, upper]`.
pub const GRID_FLOOR: f64 = 1e-6;

/// `ln ln n`, clamped to zero where `ln n <= 1`.
pub fn ln_ln(n: f64) -> f64 {
    let l = math::ln(n);
    if l > 1.0 {
        math::ln(l)
    } else {
        0.0
    }
}

/// A slack term expressed as a function of the network size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlackRule {
    Zero,
    Constant(f64),
    /// `sqrt(ln ln n)`
    SqrtLogLog,
    /// `ln ln n`
    LogLog,
    /// `ln n`
    Log,
}

impl SlackRule {
    pub fn eval(&self, n: f64) -> f64 {
        match *self {
            SlackRule::Zero => 0.0,
            SlackRule::Constant(c) => c,
            SlackRule::SqrtLogLog => math::sqrt(ln_ln(n)),
            SlackRule::LogLog => ln_ln(n),
            SlackRule::Log => math::ln(n).max(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SlackRule::Constant(c) if !(c.is_finite() && c >= 0.0) => {
                Err(Error::domain("slack", c, "must be finite and nonnegative"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPolicy {
    pub delta: f64,
    /// Slack on the active-count lower bound.
    pub xi: SlackRule,
    /// Slack on the mean-interference upper bound.
    pub psi: SlackRule,
    pub fading: FadingSpec,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self {
            delta: 0.0,
            xi: SlackRule::SqrtLogLog,
            psi: SlackRule::Log,
            fading: FadingSpec::Rayleigh,
        }
    }
}

impl ThresholdPolicy {
    /// Rayleigh fading with `xi = psi = 0`.
    pub fn idealized() -> Self {
        Self {
            xi: SlackRule::Zero,
            psi: SlackRule::Zero,
            ..Self::default()
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::domain(
                "delta",
                self.delta,
                "must be finite and nonnegative",
            ));
        }
        self.xi.validate()?;
        self.psi.validate()?;
        self.fading.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMethod {
    Fixed,
    GridGolden,
    ZeroOrder,
    FirstOrder,
    Asymptotic,
}

impl ThresholdMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThresholdMethod::Fixed => "fixed",
            ThresholdMethod::GridGolden => "grid+golden",
            ThresholdMethod::ZeroOrder => "zero-order",
            ThresholdMethod::FirstOrder => "first-order",
            ThresholdMethod::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSolution {
    pub delta: f64,
    /// `T_a(delta)` in nats.
    pub throughput: f64,
    /// `n q_delta`
    pub predicted_active: f64,
    pub predicted_rate_per_link: f64,
    pub method: ThresholdMethod,
}

impl ThresholdSolution {
    /// Evaluates the achievable-throughput quantities at a given threshold.
    pub fn at(
        n: f64,
        delta: f64,
        policy: &ThresholdPolicy,
        method: ThresholdMethod,
    ) -> Result<Self> {
        let regime = Regime::new(n, delta, policy)?;
        Ok(Self {
            delta,
            throughput: regime.throughput(),
            predicted_active: regime.expected_active,
            predicted_rate_per_link: regime.rate_per_link(),
            method,
        })
    }
}

struct Regime {
    delta: f64,
    expected_active: f64,
    effective: f64,
    mean: f64,
    psi: f64,
}

impl Regime {
    fn new(n: f64, delta: f64, policy: &ThresholdPolicy) -> Result<Self> {
        if !(n >= 1.0) {
            return Err(Error::domain("n", n, "must be at least 1"));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::domain(
                "delta",
                delta,
                "must be finite and nonnegative",
            ));
        }
        let expected_active = math::exp(math::ln(n) + policy.fading.ln_ccdf(delta)?);
        let effective = expected_active - policy.xi.eval(n) * math::sqrt(expected_active);
        if !(effective > 0.0) {
            return Err(Error::OutOfRegime { delta, effective });
        }
        Ok(Self {
            delta,
            expected_active,
            effective,
            mean: policy.fading.mean(),
            psi: policy.psi.eval(n),
        })
    }

    fn rate_per_link(&self) -> f64 {
        math::ln_1p(self.delta / (self.mean * self.effective + self.psi))
    }

    fn throughput(&self) -> f64 {
        self.effective * self.rate_per_link()
    }
}

/// Links whose direct gain strictly exceeds `delta`.
pub fn activate(direct_gains: &[f64], delta: f64) -> ActiveSet {
    ActiveSet::from_sorted_unchecked(
        direct_gains
            .iter()
            .enumerate()
            .filter(|(_, &g)| g > delta)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// `T_a(delta)` for a network of `n` links.
pub fn achievable_throughput(n: f64, delta: f64, policy: &ThresholdPolicy) -> Result<f64> {
    Ok(Regime::new(n, delta, policy)?.throughput())
}

/// Maximizes [`achievable_throughput`] over `delta` with the default grid.
pub fn optimize_threshold(n: f64, policy: &ThresholdPolicy) -> Result<ThresholdSolution> {
    optimize_threshold_with(n, policy, GRID_POINTS)
}

/// Grid scan over `grid_points` log-uniform thresholds followed by
/// golden-section refinement around the best grid point. The objective is
/// not assumed unimodal.
pub fn optimize_threshold_with(
    n: f64,
    policy: &ThresholdPolicy,
    grid_points: usize,
) -> Result<ThresholdSolution> {
    if !(n >= 3.0) {
        return Err(Error::domain("n", n, "threshold search needs n >= 3"));
    }
    policy.xi.validate()?;
    policy.psi.validate()?;
    policy.fading.validate()?;
    let grid = threshold_grid(policy.fading.search_upper(n), grid_points.max(3));
    let objective = |d: f64| achievable_throughput(n, d, policy).unwrap_or(f64::NEG_INFINITY);

    let mut best: Option<(usize, f64)> = None;
    for (i, &d) in grid.iter().enumerate() {
        let v = objective(d);
        if v.is_finite() && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    let (i, grid_value) = best.ok_or_else(|| {
        Error::Config("achievable throughput is out of regime at every grid threshold".into())
    })?;

    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let (x, v) = math::golden_section_max(objective, lo, hi, 1e-13 * hi.max(1.0));
    let delta = if v >= grid_value { x } else { grid[i] };
    ThresholdSolution::at(n, delta, policy, ThresholdMethod::GridGolden)
}

/// The log-uniform search grid over `[GRID_FLOOR * upper, upper]`.
pub fn threshold_grid(upper: f64, points: usize) -> Vec<f64> {
    let lo = math::ln(GRID_FLOOR * upper);
    let hi = math::ln(upper);
    let step = (hi - lo) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points)
        .map(|i| math::exp(lo + step * i as f64))
        .collect();
    grid[points - 1] = upper;
    grid
}

/// `2 n e^{-delta} - 2 delta - delta^2`, evaluated in the log domain.
pub fn zero_order_residual(n: f64, delta: f64) -> f64 {
    2.0 * math::exp(math::ln(n) - delta) - 2.0 * delta - delta * delta
}

/// Root of `2 n e^{-delta} = 2 delta + delta^2` on `(0, ln n + 3]`.
pub fn solve_zero_order(n: f64) -> Result<f64> {
    if !(n >= 3.0 && n.is_finite()) {
        return Err(Error::domain("n", n, "zero-order equation needs n >= 3"));
    }
    let hi = math::ln(n) + 3.0;
    math::bisect(|d| zero_order_residual(n, d), 0.0, hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighAsymptotics {
    pub delta: f64,
    pub throughput: f64,
    pub active_links: f64,
    pub rate_per_link: f64,
}

fn check_asymptotic_n(n: f64) -> Result<f64> {
    if n >= 16.0 && n.is_finite() {
        Ok(math::ln(n))
    } else {
        Err(Error::domain("n", n, "asymptotic forms need n >= 16"))
    }
}

/// Leading terms for the optimal threshold, its throughput, the active
/// count and the rate-per-link under Rayleigh fading.
pub fn rayleigh_asymptotics(n: f64) -> Result<RayleighAsymptotics> {
    let l = check_asymptotic_n(n)?;
    let ll = math::ln(l);
    let delta = l - 2.0 * ll + core::f64::consts::LN_2;
    Ok(RayleighAsymptotics {
        delta,
        throughput: delta - 1.0,
        active_links: 0.5 * l * l,
        rate_per_link: 2.0 / l,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderThreshold {
    pub delta: f64,
    /// Magnitude `xi / ln n` of the omitted remainder.
    pub error_bar: f64,
}

/// Leading terms plus the `4 ln ln n / ln n` correction.
pub fn first_order_correction(n: f64, xi: f64) -> Result<FirstOrderThreshold> {
    let l = check_asymptotic_n(n)?;
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::domain("xi", xi, "must be finite and nonnegative"));
    }
    let ll = math::ln(l);
    Ok(FirstOrderThreshold {
        delta: l - 2.0 * ll + core::f64::consts::LN_2 + 4.0 * ll / l,
        error_bar: xi / l,
    })
}
