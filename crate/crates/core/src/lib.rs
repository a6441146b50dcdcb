//! Core model for single-hop wireless networks with on-off transmit power
//! under i.i.d. fading.
//!
//! The crate is `no_std` and only needs `alloc`. It covers channel gain
//! sampling ([`fading`]), the SINR/rate/throughput model ([`netmodel`]),
//! threshold-based link activation and its threshold optimization
//! ([`tblas`]), an exhaustive throughput-maximization oracle ([`oracle`]),
//! the tail laws and concentration checks behind the throughput upper bound
//! ([`bounds`]), and single-trial simulation ([`trial`]).
//!
//! Link indices are zero-based throughout. Rates are in nats per channel use.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod fading;
pub mod math;
pub mod netmodel;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod tblas;
pub mod trial;

pub use error::{Error, Result};
pub use fading::{FadingSpec, QuantileTable};
pub use netmodel::{ActiveSet, GainMatrix, LinkMetrics, NetworkParams, ThroughputReport};
pub use rng::SeedSpec;
pub use tblas::{SlackRule, ThresholdMethod, ThresholdPolicy, ThresholdSolution};
pub use trial::{TrialMode, TrialRecord};
