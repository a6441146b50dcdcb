//! Channel power-gain distributions and seeded gain sampling.
//!
//! "Rayleigh fading" is modelled in the power domain: gains are i.i.d.
//! exponential with unit mean. Arbitrary distributions can be supplied as a
//! monotone quantile table that is linearly interpolated.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::math;
use crate::netmodel::GainMatrix;
use crate::rng::SeedSpec;

/// Piecewise-linear quantile function `Q(u)` through `(probs[i], values[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    probs: Vec<f64>,
    values: Vec<f64>,
}

impl QuantileTable {
    /// `probs` must increase strictly from 0 to 1; `values` must be finite,
    /// nonnegative and nondecreasing.
    pub fn new(probs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if probs.len() != values.len() {
            return Err(Error::InvalidFading(format!(
                "{} probabilities but {} values",
                probs.len(),
                values.len()
            )));
        }
        if probs.len() < 2 {
            return Err(Error::InvalidFading(
                "table needs at least two knots".into(),
            ));
        }
        if probs[0] != 0.0 || probs[probs.len() - 1] != 1.0 {
            return Err(Error::InvalidFading(
                "table probabilities must start at 0 and end at 1".into(),
            ));
        }
        if probs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidFading(
                "table probabilities must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidFading(
                "table values must be finite and nonnegative".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidFading(
                "table values must be nondecreasing".into(),
            ));
        }
        Ok(Self { probs, values })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let hi = self
            .probs
            .partition_point(|&p| p < u)
            .clamp(1, self.probs.len() - 1);
        let lo = hi - 1;
        let t = (u - self.probs[lo]) / (self.probs[hi] - self.probs[lo]);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }

    /// `F(x)`: the largest `u` with `Q(u) <= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let count = self.values.partition_point(|&v| v <= x);
        if count == 0 {
            return 0.0;
        }
        let i = count - 1;
        if i == self.values.len() - 1 {
            return 1.0;
        }
        let t = (x - self.values[i]) / (self.values[i + 1] - self.values[i]);
        self.probs[i] + t * (self.probs[i + 1] - self.probs[i])
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let count = self.values.partition_point(|&v| v <= x);
        if count == 0 || count == self.values.len() {
            return 0.0;
        }
        let i = count - 1;
        (self.probs[i + 1] - self.probs[i]) / (self.values[i + 1] - self.values[i])
    }

    pub fn mean(&self) -> f64 {
        math::compensated_sum(self.segments().map(|(dp, a, b)| dp * (a + b) / 2.0))
    }

    pub fn variance(&self) -> f64 {
        let second = math::compensated_sum(
            self.segments()
                .map(|(dp, a, b)| dp * (a * a + a * b + b * b) / 3.0),
        );
        let mean = self.mean();
        (second - mean * mean).max(0.0)
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.probs
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(p, v)| (p[1] - p[0], v[0], v[1]))
    }

    fn max_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Distribution of the i.i.d. channel power gains.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FadingSpec {
    /// Unit-mean exponential power gains, `f(x) = e^{-x}`.
    #[default]
    Rayleigh,
    /// Exponential power gains with the given mean.
    Exponential { mean: f64 },
    /// General distribution given by its quantile function.
    Table(QuantileTable),
}

impl FadingSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FadingSpec::Rayleigh | FadingSpec::Table(_) => Ok(()),
            FadingSpec::Exponential { mean } if mean.is_finite() && *mean > 0.0 => Ok(()),
            FadingSpec::Exponential { mean } => Err(Error::InvalidFading(format!(
                "exponential mean must be finite and positive, got {mean}"
            ))),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            FadingSpec::Rayleigh => 1.0,
            FadingSpec::Exponential { mean } => *mean,
            FadingSpec::Table(t) => t.mean(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            FadingSpec::Rayleigh => 1.0,
            FadingSpec::Exponential { mean } => mean * mean,
            FadingSpec::Table(t) => t.variance(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            FadingSpec::Rayleigh => math::exp(-x),
            FadingSpec::Exponential { mean } => math::exp(-x / mean) / mean,
            FadingSpec::Table(t) => t.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return match self {
                FadingSpec::Table(t) => t.cdf(x.max(0.0)),
                _ => 0.0,
            };
        }
        match self {
            FadingSpec::Rayleigh => -math::exp_m1(-x),
            FadingSpec::Exponential { mean } => -math::exp_m1(-x / mean),
            FadingSpec::Table(t) => t.cdf(x),
        }
    }

    /// `q_x = 1 - F(x)`.
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        check_gain_level(x)?;
        Ok(match self {
            FadingSpec::Rayleigh => math::exp(-x),
            FadingSpec::Exponential { mean } => math::exp(-x / mean),
            FadingSpec::Table(t) => 1.0 - t.cdf(x),
        })
    }

    /// `ln q_x`, exact for the exponential kinds even where `q_x` underflows.
    pub fn ln_ccdf(&self, x: f64) -> Result<f64> {
        check_gain_level(x)?;
        Ok(match self {
            FadingSpec::Rayleigh => -x,
            FadingSpec::Exponential { mean } => -x / mean,
            FadingSpec::Table(t) => math::ln(1.0 - t.cdf(x)),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingSpec::Rayleigh => Exp1.sample(rng),
            FadingSpec::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
            FadingSpec::Table(t) => t.quantile(rng.random::<f64>()),
        }
    }

    /// Sampler for the gain conditioned on exceeding `floor`.
    pub fn truncated(&self, floor: f64) -> Result<TruncatedGain<'_>> {
        self.validate()?;
        let q = self.ccdf(floor)?;
        if !(q > 0.0) {
            return Err(Error::Underflow { floor });
        }
        Ok(TruncatedGain {
            spec: self,
            floor,
            base: 1.0 - q,
        })
    }

    /// Upper end of the threshold search interval for `n` links.
    pub fn search_upper(&self, n: f64) -> f64 {
        match self {
            FadingSpec::Rayleigh => math::ln(n) + 3.0,
            FadingSpec::Exponential { mean } => mean * (math::ln(n) + 3.0),
            FadingSpec::Table(t) => t.max_value(),
        }
    }
}

fn check_gain_level(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain("gain level", x, "must be nonnegative"))
    }
}

/// Gain distribution conditioned on `g > floor`.
#[derive(Debug, Clone)]
pub struct TruncatedGain<'a> {
    spec: &'a FadingSpec,
    floor: f64,
    /// `F(floor)`, used by the table sampler.
    base: f64,
}

impl TruncatedGain<'_> {
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = match self.spec {
                // Memorylessness: (g | g > floor) = floor + g.
                FadingSpec::Rayleigh | FadingSpec::Exponential { .. } => {
                    self.floor + self.spec.sample(rng)
                }
                FadingSpec::Table(t) => {
                    let u: f64 = rng.random();
                    t.quantile(self.base + (1.0 - self.base) * u)
                }
            };
            if x > self.floor {
                return x;
            }
        }
    }
}

/// Samples an `n x n` matrix of i.i.d. gains, filled row by row (transmitter
/// `j`, then receiver `i`) from the stream named by `seed`.
pub fn sample_gain_matrix(spec: &FadingSpec, n: usize, seed: SeedSpec) -> Result<GainMatrix> {
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    spec.validate()?;
    let mut rng = seed.rng();
    let entries = (0..n * n).map(|_| spec.sample(&mut rng)).collect();
    GainMatrix::new(n, entries)
}

pub fn gain_ccdf(spec: &FadingSpec, x: f64) -> Result<f64> {
    spec.ccdf(x)
}

pub fn sample_truncated_gain(spec: &FadingSpec, floor: f64, seed: SeedSpec) -> Result<f64> {
    let sampler = spec.truncated(floor)?;
    Ok(sampler.sample(&mut seed.rng()))
}
