//! Decoherence of a qubit coupled to a two-level boson environment.
//!
//! The environment is a system of `N` bosons in two levels (`s` and `t`)
//! whose Hamiltonian interpolates between a harmonic limit and a collective
//! quadrupole interaction, and which shows ground-state and excited-state
//! quantum phase transitions. The crate provides:
//!
//! * [`model`]: parameter points and the banded Fock-basis Hamiltonian,
//! * [`spectra`]: eigensystems, the decoherence factor `r(t)` and `r_max`,
//! * [`meanfield`]: coherent-state energy surfaces and critical couplings,
//! * [`dos`]: exact and semiclassical densities of states,
//! * [`tda`]: Tamm-Dancoff approximations to `r(t)`,
//! * [`experiments`]: sweeps, finite-size scaling, caching and output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dos;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod linalg;
pub mod meanfield;
pub mod model;
pub mod propagate;
pub mod spectra;
pub mod tda;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{BandedHamiltonian, ModelParams, StCoefficients};
pub use num_complex::Complex64;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
