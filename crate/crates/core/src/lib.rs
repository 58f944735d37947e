//! Effective Lindbladians of an optically pumped N-level atom coupled to a
//! thermal fermionic reservoir: construction, time evolution and Floquet
//! spectral analysis.
//!
//! Superoperators act on column-stacked matrices, `hbar = 1`, and energies
//! share units with inverse time.

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod evolution;
pub mod floquet;
pub mod lindblad;
pub mod linalg;
pub mod operator_core;
pub mod report;
pub mod reservoir;

pub use error::{Error, Result};
