//! CSV emission. Every file opens with a `#` block carrying the tool
//! version and the resolved config; numbers use Rust's shortest round-trip
//! formatting so identical runs give identical bytes.

use std::io::Write;

use fadenet_core::TrialRecord;

use crate::experiments::SweepRow;
use crate::verify::CheckLine;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn header_block(config_echo: &str) -> String {
    format!("# fadenet {VERSION}\n# config {config_echo}\n")
}

/// Unit handling for rate-like columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    pub fn from_bits_flag(bits: bool) -> Self {
        if bits {
            Unit::Bits
        } else {
            Unit::Nats
        }
    }

    pub fn convert(&self, nats: f64) -> f64 {
        match self {
            Unit::Nats => nats,
            Unit::Bits => nats / std::f64::consts::LN_2,
        }
    }

    fn suffix(&self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

/// Shortest round-trip form; exponent notation for very small or very
/// large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A CSV table preceded by the header block.
pub struct Table {
    header: String,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(config_echo: &str, columns: &[&str]) -> csv::Result<Self> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(columns)?;
        Ok(Self {
            header: header_block(config_echo),
            writer,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> csv::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)
    }

    pub fn finish(self) -> std::io::Result<Vec<u8>> {
        let body = self
            .writer
            .into_inner()
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        let mut out = self.header.into_bytes();
        out.write_all(&body)?;
        Ok(out)
    }
}

pub fn trial_columns(unit: Unit) -> Vec<String> {
    let s = unit.suffix();
    let bound = match unit {
        Unit::Nats => "bound_Ta".to_string(),
        Unit::Bits => "bound_Ta_bits".to_string(),
    };
    vec![
        "n".into(),
        "seed".into(),
        "stream".into(),
        "delta".into(),
        "k_active".into(),
        format!("throughput_{s}"),
        format!("rate_per_link_{s}"),
        bound,
        "bound_satisfied".into(),
    ]
}

pub fn trial_row(r: &TrialRecord, unit: Unit) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.seed.to_string(),
        r.stream.to_string(),
        num(r.delta),
        r.k_active.to_string(),
        num(unit.convert(r.throughput)),
        opt(r.rate_per_link.map(|v| unit.convert(v))),
        opt(r.bound.map(|v| unit.convert(v))),
        r.bound_satisfied.to_string(),
    ]
}

pub fn sweep_columns(unit: Unit) -> Vec<String> {
    let tag = match unit {
        Unit::Nats => "",
        Unit::Bits => "_bits",
    };
    vec![
        "n".into(),
        "trials".into(),
        format!("mean_T{tag}"),
        format!("sd_T{tag}"),
        "mean_k".into(),
        "sd_k".into(),
        format!("mean_rbar{tag}"),
        "ratio_T".into(),
        "ratio_k".into(),
        "ratio_rbar".into(),
        format!("ci95_T{tag}"),
    ]
}

pub fn sweep_row(r: &SweepRow, unit: Unit) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.trials.to_string(),
        num(unit.convert(r.throughput.mean)),
        num(unit.convert(r.throughput.sd)),
        num(r.active.mean),
        num(r.active.sd),
        opt(r.rate_per_link.map(|s| unit.convert(s.mean))),
        num(r.ratio_throughput),
        num(r.ratio_active),
        num(r.ratio_rate_per_link),
        num(unit.convert(r.throughput.ci95)),
    ]
}

pub const CHECK_COLUMNS: [&str; 5] = ["check", "passed", "statistic", "threshold", "samples"];

pub fn check_row(c: &CheckLine) -> Vec<String> {
    vec![
        c.name.clone(),
        c.passed.to_string(),
        num(c.statistic),
        num(c.threshold),
        c.samples.to_string(),
    ]
}
