//! Outage capacity of large half-duplex fading relay networks whose relays
//! fail at random.
//!
//! - [`topology`]: geometry, path loss and placement expectations
//! - [`analytic`]: asymptotic cut-set bound, AF and DF ε-outage rates
//! - [`poweralloc`]: source/relay power split
//! - [`montecarlo`]: finite-N simulation of the same network

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod montecarlo;
pub mod poweralloc;
pub mod quadrature;
pub mod search;
pub mod topology;

pub use analytic::{RateResult, Strategy, SystemParams};
pub use error::{Error, Result};
pub use montecarlo::{OutageEstimate, SimStrategy, TrialConfig};
pub use poweralloc::AlphaResult;
pub use topology::{NetworkGeometry, Point, Region, TopologyMoments};
