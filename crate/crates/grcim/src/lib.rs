//! Modeling toolkit for analog compute-in-memory MACs with gain ranging.
//!
//! The crate covers minifloat formats, seeded input distributions, behavioral
//! models of the conventional and gain-ranging column MACs, Monte-Carlo ADC
//! resolution requirements, array energy accounting and coupling-capacitor
//! sizing. The `grcim` binary drives the sweeps.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adcspec;
pub mod circuit;
pub mod config;
pub mod energy;
pub mod error;
pub mod figures;
pub mod formats;
pub mod mac;
pub mod numeric;
pub mod output;
pub mod rng;
pub mod stimulus;

pub use error::{Error, Result};
pub use formats::{FpFormat, FpScalar};
pub use mac::{Arch, ArchConfig, Granularity, MacTrace};
pub use stimulus::{DistributionSpec, LabeledSample};
