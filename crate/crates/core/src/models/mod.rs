//! Catalog of symmetric Lévy processes and confining potentials.
//!
//! Families whose jump intensity is only known up to comparability (geometric
//! stable, relativistic, tempered) use the displayed profile with unit
//! prefactor; anything derived from those intensities is a statement about the
//! profile family ("profile convention").

mod inversion;
mod levy;
mod potential;
mod table;

pub use inversion::{
    density_sup, hitting_probability, total_mass, transition_density, verify_levy_khintchine, DensitySup,
    MassReport,
};
pub(crate) use inversion::truncation_frequency;
pub use levy::{Family, JumpIntensity, LevyModel};
pub use potential::{borderline_potential, evaluate_potential, Potential, PotentialFamily, PotentialSpec};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::quad::Tolerance;

/// Integration scheme tag carried by [`QuadratureSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Scheme {
    /// Globally adaptive 7/15-point Gauss–Kronrod over oscillation-period panels.
    #[default]
    AdaptiveGaussKronrod,
}

/// Truncation and accuracy settings for the model-level integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Frequency truncation is chosen so that `e^{-tψ(Ξ)}` falls below this.
    pub truncation_tol: f64,
    /// Spatial truncation radius for Lévy–Khintchine and tail integrals.
    pub radius: f64,
    /// Upper bound on the number of adaptive intervals.
    pub nodes: usize,
    pub scheme: Scheme,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            truncation_tol: 1e-12,
            radius: 4000.0,
            nodes: 1_000_000,
            scheme: Scheme::AdaptiveGaussKronrod,
            abs_tol: 1e-14,
            rel_tol: 1e-11,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(param("quadrature node count must be at least 2"));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.truncation_tol > 0.0) {
            return Err(param("quadrature tolerances must be positive"));
        }
        if !(self.radius > 0.0) {
            return Err(param("truncation radius must be positive"));
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self) -> Tolerance {
        Tolerance { abs: self.abs_tol, rel: self.rel_tol, max_intervals: self.nodes }
    }
}

/// Euclidean norm of a point or frequency.
pub fn norm(v: &[f64]) -> f64 {
    match v {
        [x] => x.abs(),
        [x, y] => x.hypot(*y),
        _ => v.iter().map(|c| c * c).sum::<f64>().sqrt(),
    }
}
