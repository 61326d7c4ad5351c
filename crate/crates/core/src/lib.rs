//! Design, evaluation, and validation of non-orthogonal pilot sequence sets
//! for J-cell interference networks.
//!
//! The library revolves around the extended total squared correlation (ETSC)
//! of a pilot matrix under an inter-cell interference power factor matrix B:
//! the squared Frobenius norm of the blockwise √β-weighted Gram matrix. It
//! provides
//!
//! - exact evaluation of ETSC, TSC, interference splits, analytic sum MSE of
//!   the LS channel estimate, and per-sequence PAPR ([`metrics`]);
//! - the three Welch-type lower bounds with applicability gating and
//!   positive-definiteness classification of B ([`bounds`]);
//! - deterministic bound-achieving constructions from truncated DFT matrices
//!   for the K ≥ τ regime ([`construct`]);
//! - the ETSC-MM iterative optimizer with double majorization, optional
//!   SQUAREM acceleration, and a guaranteed-monotone objective trace ([`mm`]);
//! - a Monte-Carlo training-phase simulator that cross-checks the analytic
//!   sum-MSE identity ([`sim`]);
//! - brute-force reference implementations used by the test suite
//!   ([`oracle`]).
//!
//! The `pilotseq` binary exposes all of this as `construct`, `design`,
//! `bound`, `eval`, and `simulate` subcommands over JSON/CSV files.

use std::fmt;

pub mod bounds;
pub mod construct;
pub mod metrics;
pub mod mm;
pub mod model;
pub mod oracle;
pub mod sim;

/// Error type shared by all library entry points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Inputs whose shapes do not line up (set vs B vs problem).
    DimensionMismatch(String),
    /// Inputs that violate a construction precondition or invariant.
    InvalidArgument(String),
    /// B fails the positive-definiteness requirement of an operation.
    NotPositiveDefinite(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NotPositiveDefinite(msg) => write!(f, "not positive definite: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
