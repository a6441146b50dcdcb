//! Interference, SINR, Shannon rates and network throughput for a fixed set
//! of active links.
//!
//! Gains follow the transmitter-major convention: `gain(j, i)` is the power
//! gain from transmitter `j` to receiver `i`, so `gain(i, i)` is link `i`'s
//! direct channel. Noise enters only through the transmit SNR `rho = P/eta`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, NeumaierSum};

#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl GainMatrix {
    /// `entries` is row-major by transmitter: `entries[j * n + i] = g_ji`.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyNetwork);
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: entries.len(),
            });
        }
        if let Some(pos) = entries.iter().position(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidGain {
                tx: pos / n,
                rx: pos % n,
                value: entries[pos],
            });
        }
        Ok(Self { n, entries })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for tx in 0..n {
            for rx in 0..n {
                entries.push(f(tx, rx));
            }
        }
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn gain(&self, tx: usize, rx: usize) -> f64 {
        self.entries[tx * self.n + rx]
    }

    #[inline]
    pub fn direct(&self, link: usize) -> f64 {
        self.gain(link, link)
    }

    pub fn direct_gains(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.direct(i)).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Relabels links so that new link `a` is old link `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: perm.len(),
            });
        }
        Self::from_fn(self.n, |tx, rx| self.gain(perm[tx], perm[rx]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    pub n: usize,
    /// Transmit SNR `rho = P / eta`.
    pub snr: f64,
}

impl NetworkParams {
    pub fn new(n: usize, snr: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyNetwork);
        }
        if !(snr.is_finite() && snr > 0.0) {
            return Err(Error::domain("snr", snr, "must be finite and positive"));
        }
        Ok(Self { n, snr })
    }

    #[inline]
    pub fn noise(&self) -> f64 {
        1.0 / self.snr
    }
}

/// Sorted, duplicate-free set of transmitting links.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ActiveSet {
    links: Vec<usize>,
}

impl ActiveSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut links: Vec<usize>, n: usize) -> Result<Self> {
        links.sort_unstable();
        if let Some(&index) = links.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        if let Some(w) = links.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateLink(w[0]));
        }
        Ok(Self { links })
    }

    pub fn all(n: usize) -> Self {
        Self {
            links: (0..n).collect(),
        }
    }

    /// Links whose bit is set in `mask`.
    pub fn from_mask(mask: u64) -> Self {
        Self {
            links: (0..64).filter(|b| mask >> b & 1 == 1).collect(),
        }
    }

    pub(crate) fn from_sorted_unchecked(links: Vec<usize>) -> Self {
        Self { links }
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn contains(&self, link: usize) -> bool {
        self.links.binary_search(&link).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.links.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.links
    }

    pub fn is_subset(&self, other: &ActiveSet) -> bool {
        self.iter().all(|l| other.contains(l))
    }

    fn check_range(&self, n: usize) -> Result<()> {
        match self.links.last() {
            Some(&index) if index >= n => Err(Error::IndexOutOfRange { index, n }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetrics {
    pub link: usize,
    /// Aggregate cross gain from the other active transmitters.
    pub interference: f64,
    pub sinr: f64,
    /// nats per channel use
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub links: Vec<LinkMetrics>,
    pub throughput: f64,
    pub k: usize,
    /// `None` when the active set is empty.
    pub rate_per_link: Option<f64>,
}

impl ThroughputReport {
    pub fn rate_per_link(&self) -> Result<f64> {
        self.rate_per_link.ok_or(Error::UndefinedMean)
    }
}

fn interference(g: &GainMatrix, active: &ActiveSet, rx: usize) -> f64 {
    let mut sum = NeumaierSum::new();
    for tx in active.iter().filter(|&tx| tx != rx) {
        sum.add(g.gain(tx, rx));
    }
    sum.value()
}

fn metrics(g: &GainMatrix, active: &ActiveSet, params: &NetworkParams, rx: usize) -> LinkMetrics {
    let interference = interference(g, active, rx);
    let sinr = g.direct(rx) / (params.noise() + interference);
    LinkMetrics {
        link: rx,
        interference,
        sinr,
        rate: math::ln_1p(sinr),
    }
}

/// `gamma_i = g_ii / (1/rho + sum_{j in A, j != i} g_ji)`.
pub fn link_sinr(
    g: &GainMatrix,
    active: &ActiveSet,
    params: &NetworkParams,
    link: usize,
) -> Result<f64> {
    active.check_range(g.n())?;
    if !active.contains(link) {
        return Err(Error::InactiveLink(link));
    }
    Ok(metrics(g, active, params, link).sinr)
}

/// Shannon rate `ln(1 + gamma)` in nats.
pub fn link_rate(sinr: f64) -> Result<f64> {
    if sinr >= 0.0 {
        Ok(math::ln_1p(sinr))
    } else {
        Err(Error::domain("sinr", sinr, "must be nonnegative"))
    }
}

/// Per-link metrics and their sum over the active set.
///
/// The throughput is the compensated sum of `links[..].rate` in link order.
pub fn throughput(
    g: &GainMatrix,
    active: &ActiveSet,
    params: &NetworkParams,
) -> Result<ThroughputReport> {
    active.check_range(g.n())?;
    let links: Vec<LinkMetrics> = active
        .iter()
        .map(|rx| metrics(g, active, params, rx))
        .collect();
    let throughput = math::compensated_sum(links.iter().map(|m| m.rate));
    let k = links.len();
    Ok(ThroughputReport {
        links,
        throughput,
        k,
        rate_per_link: (k > 0).then(|| throughput / k as f64),
    })
}

pub fn rate_per_link(report: &ThroughputReport) -> Result<f64> {
    report.rate_per_link()
}
