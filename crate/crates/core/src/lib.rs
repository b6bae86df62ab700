//! Excitation transport through open quantum networks with trapped-ion
//! couplings.
//!
//! - [`ion_chain`]: Coulomb-crystal modes, Mølmer–Sørensen and power-law
//!   coupling matrices, exponent fits and group velocities.
//! - [`network`]: Hamiltonians, sink/source/dephasing dissipators and noise
//!   samplers.
//! - [`engines`]: density-matrix and pure-state propagation, Monte-Carlo
//!   ensembles, steady states and the discrete sink channel.
//! - [`observables`]: absorption probability and rate, populations, trace
//!   distance, source-rate optimization, decay correction.
//! - [`scenario`]: scenario files and CSV output for the command-line tool.

// `!(x > 0.0)` guards reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engines;
pub mod error;
pub mod ion_chain;
pub mod linalg;
pub mod network;
pub mod observables;
pub mod scenario;

pub use error::{Error, Result};
