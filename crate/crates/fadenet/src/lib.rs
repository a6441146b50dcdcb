//! Std companion to `fadenet-core`: parallel Monte Carlo harness, bound
//! verification suite, JSON run configs, CSV reports and the `fadenet` CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;
pub mod verify;
