//! Numerical laboratory for Feynman-Kac semigroups of symmetric jump Lévy
//! processes.
//!
//! The crate is organized along the pipeline it supports:
//!
//! * [`models`]: Lévy process and potential catalog (symbols, jump
//!   intensities, transition densities by Fourier inversion).
//! * [`assumptions`]: empirical constants for the regularity conditions on
//!   the jump intensity and the potential.
//! * [`spectral`]: periodic pseudospectral discretization of
//!   `H = ψ(-Δ) + V`, a matrix-free eigensolver, the semigroup and kernels.
//! * [`verify`]: ground-state envelopes, eigenfunction domination,
//!   subaveraging bounds and the Green-operator sandwich.
//! * [`classify`]: ground-state domination / intrinsic ultracontractivity
//!   diagnostics and the free-energy functional.
//! * [`montecarlo`]: path sampling and Feynman-Kac estimators used as
//!   independent oracles.
//! * [`io`]: CSV/JSON/binary serialization of results.
//!
//! Data-parallel loops run on rayon when the `parallel` feature (default) is
//! enabled and fall back to sequential iteration otherwise. Results never
//! depend on the number of worker threads.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assumptions;
pub mod classify;
pub mod error;
pub mod io;
pub mod models;
pub mod montecarlo;
pub mod par;
pub mod quad;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod verdict;
pub mod verify;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use models::{Family, LevyModel, Potential, PotentialFamily, QuadratureSpec};
pub use spectral::{DiscreteOperator, Grid, SpectrumResult};
pub use verdict::Verdict;
