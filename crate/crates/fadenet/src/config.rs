//! Run configuration: JSON file, flag overrides and the resolved form that
//! is echoed into every output header.

use std::path::{Path, PathBuf};

use fadenet_core::trial::MAX_DENSE_LINKS;
use fadenet_core::{FadingSpec, QuantileTable, SlackRule, ThresholdPolicy, TrialMode};
use serde::{Deserialize, Serialize};

use crate::experiments::{ThresholdChoice, MIN_SWEEP_REPS};

/// Environment variable naming the directory for output files when no
/// explicit output path is given.
pub const OUTPUT_DIR_ENV: &str = "FADENET_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    OptimizeThreshold,
    SolveThreshold,
    Asymptotics,
    Oracle,
    Sweep,
    VerifyBounds,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::OptimizeThreshold => "optimize-threshold",
            Command::SolveThreshold => "solve-threshold",
            Command::Asymptotics => "asymptotics",
            Command::Oracle => "oracle",
            Command::Sweep => "sweep",
            Command::VerifyBounds => "verify-bounds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Dense,
    Virtual,
}

impl From<Mode> for TrialMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Dense => TrialMode::Dense,
            Mode::Virtual => TrialMode::Virtual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlackName {
    Zero,
    SqrtLogLog,
    LogLog,
    Log,
}

/// A named slack rule or a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlackConfig {
    Named(SlackName),
    Constant(f64),
}

impl SlackConfig {
    pub fn rule(&self) -> SlackRule {
        match *self {
            SlackConfig::Named(SlackName::Zero) => SlackRule::Zero,
            SlackConfig::Named(SlackName::SqrtLogLog) => SlackRule::SqrtLogLog,
            SlackConfig::Named(SlackName::LogLog) => SlackRule::LogLog,
            SlackConfig::Named(SlackName::Log) => SlackRule::Log,
            SlackConfig::Constant(c) => SlackRule::Constant(c),
        }
    }

    pub fn parse_flag(s: &str) -> Result<Self, ConfigError> {
        if let Ok(c) = s.parse::<f64>() {
            return Ok(SlackConfig::Constant(c));
        }
        parse_name(s).map(SlackConfig::Named)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum FadingConfig {
    Rayleigh,
    Exponential { mean: f64 },
    Table { probs: Vec<f64>, values: Vec<f64> },
}

impl FadingConfig {
    pub fn spec(&self) -> Result<FadingSpec, ConfigError> {
        let spec = match self {
            FadingConfig::Rayleigh => FadingSpec::Rayleigh,
            FadingConfig::Exponential { mean } => FadingSpec::Exponential { mean: *mean },
            FadingConfig::Table { probs, values } => FadingSpec::Table(
                QuantileTable::new(probs.clone(), values.clone())
                    .map_err(|e| ConfigError::Invalid(format!("fading: {e}")))?,
            ),
        };
        spec.validate()
            .map_err(|e| ConfigError::Invalid(format!("fading: {e}")))?;
        Ok(spec)
    }

    /// `rayleigh` or `exponential:MEAN`; tables need a config file.
    pub fn parse_flag(s: &str) -> Result<Self, ConfigError> {
        match s.split_once(':') {
            None if s == "rayleigh" => Ok(FadingConfig::Rayleigh),
            Some(("exponential", mean)) => mean
                .parse()
                .map(|mean| FadingConfig::Exponential { mean })
                .map_err(|_| ConfigError::Invalid(format!("fading: bad mean {mean:?}"))),
            _ => invalid(format!(
                "fading: expected `rayleigh` or `exponential:MEAN`, got {s:?}"
            )),
        }
    }
}

/// One size or a list of sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sizes {
    One(u64),
    Many(Vec<u64>),
}

impl Sizes {
    fn into_vec(self) -> Vec<u64> {
        match self {
            Sizes::One(n) => vec![n],
            Sizes::Many(v) => v,
        }
    }
}

/// Every field optional, as read from a file or from flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub subcommand: Option<Command>,
    pub n: Option<Sizes>,
    pub snr: Option<f64>,
    pub fading: Option<FadingConfig>,
    pub threshold: Option<ThresholdChoice>,
    pub delta: Option<f64>,
    pub xi: Option<SlackConfig>,
    pub psi: Option<SlackConfig>,
    pub phi: Option<SlackConfig>,
    pub trials: Option<u32>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub samples: Option<usize>,
    pub bits: Option<bool>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $(if $top.$field.is_some() { $base.$field = $top.$field; })*
    };
}

impl RawConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RawConfig) -> Self {
        overlay!(
            self, top, subcommand, n, snr, fading, threshold, delta, xi, psi, phi, trials, seed,
            mode, samples, bits, threads, output
        );
        self
    }
}

/// Fully resolved configuration. Everything except the worker count and
/// the output location is echoed into output headers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Command,
    pub n: Vec<u64>,
    pub snr: f64,
    pub fading: FadingConfig,
    pub threshold: ThresholdChoice,
    pub delta: Option<f64>,
    pub xi: SlackConfig,
    pub psi: SlackConfig,
    pub phi: SlackConfig,
    pub trials: u32,
    pub seed: u64,
    pub mode: Mode,
    pub samples: usize,
    pub bits: bool,
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

pub const DEFAULT_SWEEP_SIZES: [u64; 4] = [100, 1_000, 10_000, 100_000];
pub const DEFAULT_VERIFY_SIZE: u64 = 10_000;

impl RunConfig {
    /// Applies defaults and validates. `output_dir` is the fallback
    /// directory for the output file, normally from [`OUTPUT_DIR_ENV`].
    pub fn resolve(raw: RawConfig, output_dir: Option<PathBuf>) -> Result<Self, ConfigError> {
        let Some(subcommand) = raw.subcommand else {
            return invalid("subcommand: missing");
        };
        let n = match raw.n.map(Sizes::into_vec) {
            Some(v) if v.is_empty() => return invalid("n: empty list"),
            Some(v) => v,
            None => match subcommand {
                Command::Sweep => DEFAULT_SWEEP_SIZES.to_vec(),
                Command::VerifyBounds => vec![DEFAULT_VERIFY_SIZE],
                _ => return invalid("n: required for this subcommand"),
            },
        };
        if n.contains(&0) {
            return invalid("n: must be at least 1");
        }
        if n.len() > u32::MAX as usize {
            return invalid("n: too many sizes");
        }

        let snr = raw.snr.unwrap_or(1.0);
        if !(snr.is_finite() && snr > 0.0) {
            return invalid(format!("snr: must be finite and positive, got {snr}"));
        }

        let threshold = match (raw.threshold, raw.delta) {
            (None, Some(_)) | (Some(ThresholdChoice::Fixed), Some(_)) => ThresholdChoice::Fixed,
            (Some(ThresholdChoice::Fixed), None) => {
                return invalid("threshold: `fixed` needs a delta")
            }
            (Some(other), Some(_)) => {
                return invalid(format!(
                    "delta: conflicts with threshold `{}`; a fixed delta needs threshold `fixed`",
                    threshold_name(other)
                ))
            }
            (Some(other), None) => other,
            (None, None) => ThresholdChoice::Optimize,
        };
        if let Some(d) = raw.delta {
            if !(d.is_finite() && d >= 0.0) {
                return invalid(format!("delta: must be finite and nonnegative, got {d}"));
            }
        }

        let trials = raw.trials.unwrap_or(match subcommand {
            Command::VerifyBounds => 1000,
            Command::Oracle => 1,
            _ => 100,
        });
        if trials == 0 {
            return invalid("trials: must be at least 1");
        }
        if subcommand == Command::Sweep && trials < MIN_SWEEP_REPS {
            return invalid(format!(
                "trials: a sweep needs at least {MIN_SWEEP_REPS} trials per size, got {trials}"
            ));
        }

        let mode = raw.mode.unwrap_or(Mode::Virtual);
        if mode == Mode::Dense {
            if let Some(&big) = n.iter().find(|&&v| v as usize > MAX_DENSE_LINKS) {
                return invalid(format!(
                    "mode: dense mode supports n <= {MAX_DENSE_LINKS}, got {big}; use virtual"
                ));
            }
        }

        let samples = raw.samples.unwrap_or(100_000);
        if samples == 0 {
            return invalid("samples: must be at least 1");
        }
        if raw.threads == Some(0) {
            return invalid("threads: must be at least 1");
        }

        let fading = raw.fading.unwrap_or(FadingConfig::Rayleigh);
        fading.spec()?;
        let xi = raw.xi.unwrap_or(SlackConfig::Named(SlackName::SqrtLogLog));
        let psi = raw.psi.unwrap_or(SlackConfig::Named(SlackName::Log));
        let phi = raw.phi.unwrap_or(SlackConfig::Named(SlackName::LogLog));
        for (name, s) in [("xi", xi), ("psi", psi), ("phi", phi)] {
            if let SlackConfig::Constant(c) = s {
                if !(c.is_finite() && c >= 0.0) {
                    return invalid(format!("{name}: must be finite and nonnegative, got {c}"));
                }
            }
        }

        let output = raw
            .output
            .or_else(|| output_dir.map(|d| d.join(format!("{}.csv", subcommand.as_str()))));

        Ok(Self {
            subcommand,
            n,
            snr,
            fading,
            threshold,
            delta: raw.delta,
            xi,
            psi,
            phi,
            trials,
            seed: raw.seed.unwrap_or(0),
            mode,
            samples,
            bits: raw.bits.unwrap_or(false),
            threads: raw.threads,
            output,
        })
    }

    /// Threshold policy with `delta` still unset.
    pub fn policy(&self) -> ThresholdPolicy {
        ThresholdPolicy {
            delta: 0.0,
            xi: self.xi.rule(),
            psi: self.psi.rule(),
            fading: self.fading.spec().expect("validated at resolve time"),
        }
    }

    /// Compact JSON echo for output headers.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn threshold_name(t: ThresholdChoice) -> String {
    serde_json::to_value(t)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Parses a kebab-case enum value the same way the JSON config does.
pub fn parse_name<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, ConfigError> {
    serde_json::from_value(serde_json::Value::String(s.to_owned()))
        .map_err(|e| ConfigError::Invalid(format!("{s:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(json: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::resolve(RawConfig::from_json(json, Path::new("test.json"))?, None)
    }

    #[test]
    fn minimal_config_defaults() {
        let c =
            resolve(r#"{"subcommand": "simulate", "n": 1000, "trials": 100, "seed": 1}"#).unwrap();
        assert_eq!(c.snr, 1.0);
        assert_eq!(c.fading, FadingConfig::Rayleigh);
        assert_eq!(c.threshold, ThresholdChoice::Optimize);
        assert_eq!(c.mode, Mode::Virtual);
        assert_eq!(c.n, vec![1000]);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(resolve(r#"{"subcommand": "simulate", "n": 0}"#).is_err());
        assert!(resolve(r#"{"subcommand": "sweep", "n": [100, 0]}"#).is_err());
    }

    #[test]
    fn delta_conflicts_with_optimize() {
        let e = resolve(
            r#"{"subcommand": "simulate", "n": 10, "delta": 2.0, "threshold": "optimize"}"#,
        );
        assert!(matches!(e, Err(ConfigError::Invalid(m)) if m.contains("conflicts")));
        let c = resolve(r#"{"subcommand": "simulate", "n": 10, "delta": 2.0}"#).unwrap();
        assert_eq!(c.threshold, ThresholdChoice::Fixed);
        assert!(resolve(r#"{"subcommand": "simulate", "n": 10, "threshold": "fixed"}"#).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            resolve(r#"{"subcommand": "simulate", "n": 10, "nn": 3}"#),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn slack_and_fading_forms() {
        let c = resolve(
            r#"{"subcommand": "simulate", "n": 10, "xi": 0.5, "psi": "log-log",
                "fading": {"exponential": {"mean": 2.0}}}"#,
        )
        .unwrap();
        assert_eq!(c.xi.rule(), SlackRule::Constant(0.5));
        assert_eq!(c.psi.rule(), SlackRule::LogLog);
        assert_eq!(
            c.fading.spec().unwrap(),
            FadingSpec::Exponential { mean: 2.0 }
        );
        assert_eq!(
            FadingConfig::parse_flag("exponential:3").unwrap(),
            FadingConfig::Exponential { mean: 3.0 }
        );
        assert!(FadingConfig::parse_flag("nakagami").is_err());
        assert!(resolve(r#"{"subcommand": "simulate", "n": 10, "xi": -1.0}"#).is_err());
    }

    #[test]
    fn overlay_prefers_flags() {
        let file = RawConfig {
            subcommand: Some(Command::Simulate),
            n: Some(Sizes::One(10)),
            seed: Some(1),
            ..Default::default()
        };
        let flags = RawConfig {
            seed: Some(7),
            ..Default::default()
        };
        let c = RunConfig::resolve(file.overlay(flags), None).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.n, vec![10]);
    }

    #[test]
    fn echo_omits_threads_and_output() {
        let mut c = resolve(r#"{"subcommand": "sweep", "threads": 4, "output": "x.csv"}"#).unwrap();
        assert_eq!(c.threads, Some(4));
        let echo = c.echo();
        assert!(!echo.contains("threads") && !echo.contains("x.csv"));
        c.threads = Some(1);
        assert_eq!(c.echo(), echo);
    }

    #[test]
    fn output_dir_fallback() {
        let raw = RawConfig::from_json(r#"{"subcommand": "sweep"}"#, Path::new("t")).unwrap();
        let c = RunConfig::resolve(raw, Some(PathBuf::from("/tmp/out"))).unwrap();
        assert_eq!(c.output, Some(PathBuf::from("/tmp/out/sweep.csv")));
    }

    #[test]
    fn dense_size_guard() {
        assert!(resolve(r#"{"subcommand": "simulate", "n": 40000, "mode": "dense"}"#).is_err());
    }
}
