//! Sample statistics and goodness-of-fit helpers used by the verifiers.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, NeumaierSum};

/// Mean, sample standard deviation and normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci95: f64,
}

impl Summary {
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::from_iter_exact(values.iter().copied())
    }

    pub fn from_iter_exact<I>(values: I) -> Result<Self>
    where
        I: IntoIterator<Item = f64>,
        I::IntoIter: Clone,
    {
        let iter = values.into_iter();
        let mut sum = NeumaierSum::new();
        let mut count = 0usize;
        for v in iter.clone() {
            sum.add(v);
            count += 1;
        }
        if count == 0 {
            return Err(Error::EmptyInput);
        }
        let mean = sum.value() / count as f64;
        let sd = if count > 1 {
            let ss = math::compensated_sum(iter.map(|v| (v - mean) * (v - mean)));
            math::sqrt(ss / (count - 1) as f64)
        } else {
            0.0
        };
        Ok(Self {
            count,
            mean,
            sd,
            ci95: 1.959_963_984_540_054 * sd / math::sqrt(count as f64),
        })
    }
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| a.total_cmp(b));
    xs
}

/// One-sample Kolmogorov-Smirnov distance `sup |F_n(x) - F(x)|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let xs = sorted(samples);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    })
}

/// Two-sample Kolmogorov-Smirnov distance between empirical cdfs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let xs = sorted(a);
    let ys = sorted(b);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic one-sample critical value `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    ks_coefficient(alpha) / math::sqrt(n as f64)
}

/// Asymptotic two-sample critical value.
pub fn ks_two_sample_critical_value(alpha: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_coefficient(alpha) * math::sqrt((n + m) / (n * m))
}

fn ks_coefficient(alpha: f64) -> f64 {
    math::sqrt(-math::ln(alpha / 2.0) / 2.0)
}

/// `ln P(K = k)` for `K ~ Binomial(n, p)`.
pub fn binomial_ln_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if p <= 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p >= 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    math::ln_factorial(n) - math::ln_factorial(k) - math::ln_factorial(n - k)
        + k as f64 * math::ln(p)
        + (n - k) as f64 * math::ln_1p(-p)
}

/// `P(K <= k)` for `K ~ Binomial(n, p)`, by direct summation.
pub fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    if k >= n {
        return 1.0;
    }
    math::compensated_sum((0..=k).map(|j| math::exp(binomial_ln_pmf(j, n, p)))).min(1.0)
}
