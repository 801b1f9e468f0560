//! Downlink covariance reconstruction from codebook feedback.
//!
//! The base station probes the UE with a weighting `Q`, receives the PMI and
//! CQI of the best codeword under `Qᴴ C Q`, and treats every report as a set
//! of linear cuts on the unknown covariance `C`. Each round it recenters the
//! estimate at the analytic center of the feasible set ([`center`]) and
//! designs the next weighting so the report is informative ([`cutplane`]).
//!
//! [`sim`] runs the loop as a seeded Monte Carlo experiment and [`cli`]
//! exposes it as the `covcut` binary.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod center;
pub mod channelgen;
pub mod cli;
pub mod codebook;
pub mod cutplane;
pub mod error;
pub mod feedback;
pub mod matcore;
pub mod sim;

pub use error::{Error, Result};
