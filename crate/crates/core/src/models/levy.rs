use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{norm, table};
use crate::error::{param, Error, Result};
use crate::quad::{graded_edges, integrate_panels, Tolerance};
use crate::special::{bessel_j0, stable_constant};

/// Process family. Parameter meaning per family is documented on [`LevyModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Stable,
    StableMixture,
    JumpDiffusion,
    Relativistic,
    GeometricStable,
    TemperedFamily,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Stable => "Stable",
            Family::StableMixture => "StableMixture",
            Family::JumpDiffusion => "JumpDiffusion",
            Family::Relativistic => "Relativistic",
            Family::GeometricStable => "GeometricStable",
            Family::TemperedFamily => "TemperedFamily",
        }
    }
}

/// Radial jump intensity; implemented by [`LevyModel`] and by test fixtures.
pub trait JumpIntensity: Sync {
    fn dim(&self) -> usize;
    /// `ν(x)` for `|x| = r > 0`.
    fn nu_radial(&self, r: f64) -> f64;
    /// `log ν(x)`; override where `ν` underflows before its logarithm does.
    fn ln_nu_radial(&self, r: f64) -> f64 {
        self.nu_radial(r).ln()
    }
}

/// A symmetric Lévy process.
///
/// | family | symbol `ψ(ξ)` (plus `A|ξ|²`) | intensity `ν(x)` |
/// |---|---|---|
/// | `Stable` | `|ξ|^α` | `C(d,α)|x|^{-d-α}` |
/// | `StableMixture` | `a|ξ|^α + b|ξ|^β` | `aC(d,α)|x|^{-d-α} + bC(d,β)|x|^{-d-β}` |
/// | `JumpDiffusion` | `a|ξ|^α + b|ξ|²` | `aC(d,α)|x|^{-d-α}` |
/// | `Relativistic` | `(|ξ|² + m^{2/α})^{α/2} - m` | `e^{-m^{1/α}|x|}|x|^{-d-α}(1+|x|^{(d+α-1)/2})` (profile) |
/// | `GeometricStable` | `log(1+|ξ|^α)` | `|x|^{-d}(1+|x|)^{-α}` (profile) |
/// | `TemperedFamily` | by quadrature of `ν` | `e^{-a|x|^β}|x|^{-d-δ}(1+|x|)^{d+δ-γ}` (profile) |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyModel {
    pub family: Family,
    #[serde(default = "one")]
    pub alpha: f64,
    /// Second stability index (mixtures) or tempering exponent (tempered family).
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "one")]
    pub m: f64,
    /// Mixture weight, or tempering rate for the tempered family.
    #[serde(default = "one")]
    pub a: f64,
    /// Mixture / diffusion weight.
    #[serde(default)]
    pub b: f64,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default = "two")]
    pub gamma: f64,
    #[serde(default = "one_usize")]
    pub dim: usize,
    /// Gaussian coefficient `A` added to every family.
    #[serde(default)]
    pub gaussian_coeff: f64,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn one_usize() -> usize {
    1
}

impl LevyModel {
    fn base(family: Family, dim: usize) -> Self {
        Self { family, alpha: 1.0, beta: 1.0, m: 1.0, a: 1.0, b: 0.0, delta: 1.0, gamma: 2.0, dim, gaussian_coeff: 0.0 }
    }

    pub fn stable(alpha: f64, dim: usize) -> Result<Self> {
        Self { alpha, ..Self::base(Family::Stable, dim) }.validated()
    }

    /// `ψ = a|ξ|^α + b|ξ|^β` with `0 < β < α < 2`.
    pub fn stable_mixture(a: f64, alpha: f64, b: f64, beta: f64, dim: usize) -> Result<Self> {
        Self { alpha, beta, a, b, ..Self::base(Family::StableMixture, dim) }.validated()
    }

    pub fn jump_diffusion(a: f64, alpha: f64, b: f64, dim: usize) -> Result<Self> {
        Self { alpha, a, b, ..Self::base(Family::JumpDiffusion, dim) }.validated()
    }

    pub fn relativistic(alpha: f64, m: f64, dim: usize) -> Result<Self> {
        Self { alpha, m, ..Self::base(Family::Relativistic, dim) }.validated()
    }

    pub fn geometric_stable(alpha: f64, dim: usize) -> Result<Self> {
        Self { alpha, ..Self::base(Family::GeometricStable, dim) }.validated()
    }

    /// Intensity profile `e^{-a|x|^β}|x|^{-d-δ}(1+|x|)^{d+δ-γ}`.
    pub fn tempered(a: f64, beta: f64, delta: f64, gamma: f64, dim: usize) -> Result<Self> {
        Self { a, beta, delta, gamma, ..Self::base(Family::TemperedFamily, dim) }.validated()
    }

    pub fn with_gaussian(mut self, coeff: f64) -> Result<Self> {
        self.gaussian_coeff = coeff;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(param(format!("dimension must be 1 or 2, got {}", self.dim)));
        }
        if !(self.gaussian_coeff >= 0.0) {
            return Err(param("gaussian coefficient must be non-negative"));
        }
        let alpha_ok = self.alpha > 0.0 && self.alpha < 2.0;
        match self.family {
            Family::Stable | Family::GeometricStable => {
                if !alpha_ok {
                    return Err(param(format!("alpha must lie in (0,2), got {}", self.alpha)));
                }
            }
            Family::StableMixture => {
                if !alpha_ok {
                    return Err(param(format!("alpha must lie in (0,2), got {}", self.alpha)));
                }
                if !(self.beta > 0.0 && self.beta < self.alpha) {
                    return Err(param("mixture requires 0 < beta < alpha"));
                }
                if !(self.a >= 0.0 && self.b >= 0.0 && self.a + self.b > 0.0) {
                    return Err(param("mixture weights must be non-negative and not both zero"));
                }
            }
            Family::JumpDiffusion => {
                if !alpha_ok {
                    return Err(param(format!("alpha must lie in (0,2), got {}", self.alpha)));
                }
                if !(self.a > 0.0 && self.b >= 0.0) {
                    return Err(param("jump-diffusion requires a > 0, b >= 0"));
                }
            }
            Family::Relativistic => {
                if !alpha_ok {
                    return Err(param(format!("alpha must lie in (0,2), got {}", self.alpha)));
                }
                if !(self.m > 0.0) {
                    return Err(param("relativistic mass must be positive"));
                }
            }
            Family::TemperedFamily => {
                if !(self.a > 0.0) {
                    return Err(param("tempering rate a must be positive"));
                }
                if !((self.beta > 0.0 && self.beta <= 1.0) || self.beta == 2.0) {
                    return Err(param(format!("tempering exponent beta must lie in (0,1] or equal 2, got {}", self.beta)));
                }
                if !(self.delta >= 0.0 && self.delta < 2.0) {
                    return Err(param("delta must lie in [0,2)"));
                }
                if !(self.gamma > 0.0) {
                    return Err(param("gamma must be positive"));
                }
            }
        }
        Ok(())
    }

    /// True when `ν` carries its exact normalization (so the Lévy–Khintchine
    /// identity can be checked against the closed-form symbol).
    pub fn has_exact_intensity(&self) -> bool {
        matches!(self.family, Family::Stable | Family::StableMixture | Family::JumpDiffusion)
    }

    /// Total Gaussian coefficient `A` in `ψ(ξ) = A|ξ|² + ∫(1-cos)ν`.
    pub fn diffusion_coeff(&self) -> f64 {
        match self.family {
            Family::JumpDiffusion => self.b + self.gaussian_coeff,
            _ => self.gaussian_coeff,
        }
    }

    /// `ψ(ξ)`; validates parameters.
    pub fn symbol(&self, xi: &[f64]) -> Result<f64> {
        self.validate()?;
        self.check_dim(xi)?;
        Ok(self.symbol_radial(norm(xi)))
    }

    /// `ψ` as a function of `|ξ|`, without parameter validation.
    pub fn symbol_radial(&self, rho: f64) -> f64 {
        let rho = rho.abs();
        if rho == 0.0 {
            return 0.0;
        }
        let jump = match self.family {
            Family::Stable => rho.powf(self.alpha),
            Family::StableMixture => self.a * rho.powf(self.alpha) + self.b * rho.powf(self.beta),
            Family::JumpDiffusion => self.a * rho.powf(self.alpha) + self.b * rho * rho,
            Family::Relativistic => {
                // m((1 + ρ²/m^{2/α})^{α/2} - 1), free of cancellation at small ρ.
                let mu = self.m.powf(2.0 / self.alpha);
                self.m * (0.5 * self.alpha * (rho * rho / mu).ln_1p()).exp_m1()
            }
            Family::GeometricStable => rho.powf(self.alpha).ln_1p(),
            Family::TemperedFamily => {
                let key = [self.a, self.beta, self.delta, self.gamma];
                table::cached(key, self.dim, self.delta, |xi| self.tempered_symbol(xi)).eval(rho)
            }
        };
        jump + self.gaussian_coeff * rho * rho
    }

    /// `ν(x)`; `x = 0` is a domain error.
    pub fn levy_density(&self, x: &[f64]) -> Result<f64> {
        self.validate()?;
        self.check_dim(x)?;
        let r = norm(x);
        if r == 0.0 {
            return Err(Error::Domain("jump intensity is not defined at x = 0".into()));
        }
        Ok(self.nu_radial(r))
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Domain(format!("expected a {}-dimensional point, got {}", self.dim, v.len())));
        }
        Ok(())
    }

    fn tempered_profile(&self, r: f64) -> f64 {
        let d = self.dim as f64;
        (-self.a * r.powf(self.beta)).exp() * r.powf(-d - self.delta) * (1.0 + r).powf(d + self.delta - self.gamma)
    }

    /// Radius beyond which the tempered intensity is negligible (`e^{-a r^β} < e^{-45}`).
    fn tempered_cutoff(&self) -> f64 {
        (45.0 / self.a).powf(1.0 / self.beta).max(2.0)
    }

    fn tempered_symbol(&self, rho: f64) -> f64 {
        let z_max = self.tempered_cutoff();
        let period = PI / rho;
        let first = period.min(0.05);
        let edges = graded_edges(0.0, z_max, first, 1.3, period.min(1.0));
        let tol = Tolerance { abs: 1e-15, rel: 1e-11, max_intervals: edges.len() * 8 + 10_000 };
        match self.dim {
            1 => 2.0 * integrate_panels(|z| if z == 0.0 { 0.0 } else { (1.0 - (rho * z).cos()) * self.tempered_profile(z) }, &edges, tol).value,
            _ => {
                2.0 * PI
                    * integrate_panels(
                        |r| if r == 0.0 { 0.0 } else { (1.0 - bessel_j0(rho * r)) * self.tempered_profile(r) * r },
                        &edges,
                        tol,
                    )
                    .value
            }
        }
    }
}

impl JumpIntensity for LevyModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn nu_radial(&self, r: f64) -> f64 {
        let r = r.abs();
        let d = self.dim as f64;
        match self.family {
            Family::Stable => stable_constant(self.dim, self.alpha) * r.powf(-d - self.alpha),
            Family::StableMixture => {
                self.a * stable_constant(self.dim, self.alpha) * r.powf(-d - self.alpha)
                    + self.b * stable_constant(self.dim, self.beta) * r.powf(-d - self.beta)
            }
            Family::JumpDiffusion => self.a * stable_constant(self.dim, self.alpha) * r.powf(-d - self.alpha),
            Family::Relativistic => {
                (-self.m.powf(1.0 / self.alpha) * r).exp()
                    * r.powf(-d - self.alpha)
                    * (1.0 + r.powf(0.5 * (d + self.alpha - 1.0)))
            }
            Family::GeometricStable => r.powf(-d) * (1.0 + r).powf(-self.alpha),
            Family::TemperedFamily => self.tempered_profile(r),
        }
    }

    fn ln_nu_radial(&self, r: f64) -> f64 {
        let r = r.abs();
        let d = self.dim as f64;
        match self.family {
            Family::Relativistic => {
                -self.m.powf(1.0 / self.alpha) * r - (d + self.alpha) * r.ln() + r.powf(0.5 * (d + self.alpha - 1.0)).ln_1p()
            }
            Family::TemperedFamily => -self.a * r.powf(self.beta) - (d + self.delta) * r.ln() + (d + self.delta - self.gamma) * r.ln_1p(),
            _ => self.nu_radial(r).ln(),
        }
    }
}
