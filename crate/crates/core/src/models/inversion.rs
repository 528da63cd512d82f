//! Transition densities and ball probabilities by Fourier inversion of
//! `e^{-tψ}`.
//!
//! In one dimension `p(t,x) = (1/π)∫₀^∞ e^{-tψ(ξ)} cos(ξx) dξ`; in two, the
//! radial reduction `p(t,x) = (1/2π)∫₀^∞ e^{-tψ(ρ)} J₀(ρ|x|) ρ dρ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::levy::{JumpIntensity, LevyModel};
use super::{norm, QuadratureSpec};
use crate::error::{param, Error, Result};
use crate::quad::{graded_edges, integrate_panels, integrate_to_infinity, QuadResult, Tolerance};
use crate::special::{bessel_j0, bessel_j1};

/// Largest frequency considered when searching for the truncation point.
const XI_CAP: f64 = 1e12;
/// Frequency cutoff of the regularized value reported for unbounded densities.
const SUP_CUTOFF: f64 = 1e6;

#[derive(Debug, Clone, Copy)]
struct Truncation {
    xi_max: f64,
    /// Local decay exponent `t·dψ/dlog ξ` at `xi_max`.
    decay: f64,
}

fn log_derivative(model: &LevyModel, xi: f64) -> f64 {
    let h: f64 = 1e-3;
    (model.symbol_radial(xi * h.exp()) - model.symbol_radial(xi * (-h).exp())) / (2.0 * h)
}

/// Frequency `Ξ` with `e^{-tψ(Ξ)} ≈ tol`, or the cap when `ψ` grows too slowly.
fn truncation(model: &LevyModel, t: f64, tol: f64) -> Truncation {
    let target = -tol.ln();
    let mut hi = 1.0;
    while t * model.symbol_radial(hi) < target && hi < XI_CAP {
        hi *= 2.0;
    }
    let xi_max = if t * model.symbol_radial(hi) < target {
        XI_CAP
    } else {
        let mut lo = hi / 2.0;
        if t * model.symbol_radial(lo) >= target {
            lo = 0.0;
        }
        for _ in 0..60 {
            let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
            if t * model.symbol_radial(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-9 * hi {
                break;
            }
        }
        hi
    };
    Truncation { xi_max, decay: t * log_derivative(model, xi_max) }
}

/// Frequency beyond which `e^{-tψ}` is below `tol` (capped at 10¹²).
pub(crate) fn truncation_frequency(model: &LevyModel, t: f64, tol: f64) -> f64 {
    truncation(model, t, tol).xi_max
}

/// Panel edges on `[0, Ξ]`: at most `period` wide while the amplitude is
/// above `1e-10`, geometrically growing afterwards.
fn frequency_edges(model: &LevyModel, t: f64, xi_max: f64, period: f64) -> Vec<f64> {
    let first = period.min(0.05).min(xi_max / 8.0);
    if !period.is_finite() {
        return graded_edges(0.0, xi_max, first, 1.4, f64::INFINITY);
    }
    // Amplitude crossover; beyond it the adaptive rule resolves what remains.
    let target = 23.0;
    let mut osc_end = xi_max;
    if t * model.symbol_radial(xi_max) > target {
        let (mut lo, mut hi) = (0.0, xi_max);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if t * model.symbol_radial(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        osc_end = hi;
    }
    let mut edges = graded_edges(0.0, osc_end, first, 1.4, period);
    if osc_end < xi_max {
        let rest = graded_edges(osc_end, xi_max, period, 1.4, f64::INFINITY);
        edges.extend_from_slice(&rest[1..]);
    }
    edges
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(param(format!("time must be positive and finite, got {t}")));
    }
    Ok(())
}

fn check_point(model: &LevyModel, x: &[f64]) -> Result<()> {
    if x.len() != model.dim {
        return Err(Error::Domain(format!("expected a {}-dimensional point, got {}", model.dim, x.len())));
    }
    Ok(())
}

fn quad_error(what: &str, r: &QuadResult) -> Error {
    Error::Quadrature(format!("{what}: value {} with error estimate {:e} after {} evaluations", r.value, r.error, r.evaluations))
}

fn accept(what: &str, r: QuadResult) -> Result<f64> {
    // A non-converged result whose error estimate is still small in absolute
    // terms is accepted; the adaptive loop only stops early at the interval cap.
    if r.converged || r.error < 1e-9 {
        Ok(r.value)
    } else {
        Err(quad_error(what, &r))
    }
}

/// Transition density `p(t, x)`.
///
/// Returns the raw quadrature value, which may be negative at the level of
/// the quadrature error far in the tails.
pub fn transition_density(model: &LevyModel, t: f64, x: &[f64], q: &QuadratureSpec) -> Result<f64> {
    model.validate()?;
    q.validate()?;
    check_time(t)?;
    check_point(model, x)?;
    let d = model.dim as f64;
    let trunc = truncation(model, t, q.truncation_tol);
    if trunc.decay < d + 0.1 {
        return Err(Error::Integrability {
            t,
            detail: format!(
                "e^(-tψ) decays like |ξ|^(-{:.3}) at ξ = {:.3e}, slower than |ξ|^(-{})",
                trunc.decay,
                trunc.xi_max,
                d + 0.1
            ),
        });
    }
    let r = norm(x);
    let tol = q.tolerance();
    let period = if r > 0.0 { PI / r } else { f64::INFINITY };
    let edges = frequency_edges(model, t, trunc.xi_max, period);
    let (head, prefactor) = match model.dim {
        1 => (integrate_panels(|xi| (-t * model.symbol_radial(xi)).exp() * (xi * r).cos(), &edges, tol), 1.0 / PI),
        _ => (
            integrate_panels(|rho| (-t * model.symbol_radial(rho)).exp() * bessel_j0(rho * r) * rho, &edges, tol),
            1.0 / (2.0 * PI),
        ),
    };
    let mut value = accept("transition density", head)?;
    if r == 0.0 {
        // Slowly decaying symbols leave a non-oscillating tail past Ξ.
        let tail = match model.dim {
            1 => integrate_to_infinity(|xi| (-t * model.symbol_radial(xi)).exp(), trunc.xi_max, tol),
            _ => integrate_to_infinity(|rho| (-t * model.symbol_radial(rho)).exp() * rho, trunc.xi_max, tol),
        };
        value += tail.value;
    }
    Ok(prefactor * value)
}

/// `P^x(X_t ∈ B(0, r)) = ∫_{B(0,r)} p(t, y - x) dy`.
pub fn hitting_probability(model: &LevyModel, t: f64, x: &[f64], ball_radius: f64, q: &QuadratureSpec) -> Result<f64> {
    model.validate()?;
    q.validate()?;
    check_time(t)?;
    check_point(model, x)?;
    if !(ball_radius > 0.0) {
        return Err(param("ball radius must be positive"));
    }
    let trunc = truncation(model, t, q.truncation_tol);
    if trunc.xi_max >= XI_CAP && trunc.decay < 0.1 {
        return Err(Error::Integrability { t, detail: format!("symbol grows too slowly (decay exponent {:.3})", trunc.decay) });
    }
    let r = norm(x);
    let tol = q.tolerance();
    let period = PI / (r + ball_radius);
    let edges = frequency_edges(model, t, trunc.xi_max, period);
    let res = match model.dim {
        1 => {
            let f = |xi: f64| {
                let s = if xi == 0.0 { ball_radius } else { (xi * ball_radius).sin() / xi };
                (-t * model.symbol_radial(xi)).exp() * (xi * r).cos() * s
            };
            let v = accept("ball probability", integrate_panels(f, &edges, tol))?;
            2.0 / PI * v
        }
        _ => {
            let f = |rho: f64| (-t * model.symbol_radial(rho)).exp() * bessel_j1(ball_radius * rho) * bessel_j0(rho * r);
            ball_radius * accept("ball probability", integrate_panels(f, &edges, tol))?
        }
    };
    Ok(res)
}

/// Supremum of `p(t, ·)`, attained at the origin for the radial unimodal
/// catalog families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySup {
    /// `p(t, 0)` when bounded; otherwise the regularized value
    /// `∫_{|ξ|<cutoff} e^{-tψ}` (divided by `(2π)^d`), which grows without
    /// bound as the cutoff increases.
    pub value: f64,
    pub bounded: bool,
    /// Frequency cutoff used for the regularized value.
    pub cutoff: Option<f64>,
}

/// `sup_x p(t, x)`. When the integrability pretest fails the density is
/// reported as unbounded together with a cutoff-regularized value, so blow-up
/// can still be compared across times.
pub fn density_sup(model: &LevyModel, t: f64) -> Result<DensitySup> {
    let q = QuadratureSpec::default();
    let origin = vec![0.0; model.dim];
    match transition_density(model, t, &origin, &q) {
        Ok(value) => Ok(DensitySup { value, bounded: true, cutoff: None }),
        Err(Error::Integrability { .. }) => {
            let edges = graded_edges(0.0, SUP_CUTOFF, 0.05, 1.4, f64::INFINITY);
            let tol = q.tolerance();
            let value = match model.dim {
                1 => accept("regularized density", integrate_panels(|xi| (-t * model.symbol_radial(xi)).exp(), &edges, tol))? / PI,
                _ => {
                    accept("regularized density", integrate_panels(|rho| (-t * model.symbol_radial(rho)).exp() * rho, &edges, tol))?
                        / (2.0 * PI)
                }
            };
            Ok(DensitySup { value, bounded: false, cutoff: Some(SUP_CUTOFF) })
        }
        Err(e) => Err(e),
    }
}

/// Mass of `p(t, ·)`: the ball of radius `window` by inversion plus the
/// large-jump tail `t ν(|z| > window)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub t: f64,
    pub window: f64,
    pub window_mass: f64,
    pub tail_mass: f64,
    pub total: f64,
}

/// Total mass of the transition density; `1` up to quadrature error.
///
/// For heavy-tailed intensities the mass outside any practical window is far
/// above `10⁻⁶`, so it is added back through the first-order tail
/// `t∫_{|z|>W} ν`, whose error is `O(t² ν(|z|>W)²)`.
pub fn total_mass(model: &LevyModel, t: f64, window: f64, q: &QuadratureSpec) -> Result<MassReport> {
    let origin = vec![0.0; model.dim];
    let window_mass = hitting_probability(model, t, &origin, window, q)?;
    let tol = Tolerance { abs: 1e-16, rel: 1e-10, max_intervals: 50_000 };
    let tail = match model.dim {
        1 => 2.0 * integrate_to_infinity(|r| model.nu_radial(r), window, tol).value,
        _ => 2.0 * PI * integrate_to_infinity(|r| model.nu_radial(r) * r, window, tol).value,
    };
    let tail_mass = t * tail;
    Ok(MassReport { t, window, window_mass, tail_mass, total: window_mass + tail_mass })
}

/// `1 - cos(u)` for the 1D integrand, `1 - J₀(u)` for the radial 2D one,
/// without cancellation at small `u`.
fn one_minus_kernel(dim: usize, u: f64) -> f64 {
    match dim {
        1 => 2.0 * (0.5 * u).sin().powi(2),
        _ => {
            if u < 1e-2 {
                let u2 = u * u;
                u2 / 4.0 - u2 * u2 / 64.0
            } else {
                1.0 - bessel_j0(u)
            }
        }
    }
}

/// Relative Lévy–Khintchine residual
/// `|ψ(ξ) - A|ξ|² - ∫(1 - cos ξ·z) ν(z) dz| / max(ψ(ξ), ε)`.
pub fn verify_levy_khintchine(model: &LevyModel, xi: f64, q: &QuadratureSpec) -> Result<f64> {
    model.validate()?;
    q.validate()?;
    if !model.has_exact_intensity() {
        return Err(Error::UnsupportedFamily(format!(
            "{} intensity is a profile without exact normalization",
            model.family.name()
        )));
    }
    let rho = xi.abs();
    if rho == 0.0 {
        return Ok(0.0);
    }
    let psi = model.symbol_radial(rho);
    let dim = model.dim;
    let radius = q.radius;
    let period = PI / rho;
    let edges = graded_edges(0.0, radius, period.min(1e-3), 1.3, period);
    let tol = Tolerance { abs: 1e-15, rel: q.rel_tol, max_intervals: q.nodes.max(edges.len() * 4) };
    let (head, tail) = match dim {
        1 => {
            let h = integrate_panels(|z| if z == 0.0 { 0.0 } else { one_minus_kernel(1, rho * z) * model.nu_radial(z) }, &edges, tol);
            let t = integrate_to_infinity(|z| model.nu_radial(z), radius, tol);
            (2.0 * accept("Lévy–Khintchine integral", h)?, 2.0 * t.value)
        }
        _ => {
            let h = integrate_panels(|r| if r == 0.0 { 0.0 } else { one_minus_kernel(2, rho * r) * model.nu_radial(r) * r }, &edges, tol);
            let t = integrate_to_infinity(|r| model.nu_radial(r) * r, radius, tol);
            (2.0 * PI * accept("Lévy–Khintchine integral", h)?, 2.0 * PI * t.value)
        }
    };
    // Beyond the radius the oscillating part integrates to O(ν(radius)/ξ)
    // and only the mean survives.
    let jump = head + tail;
    let residual = (psi - model.diffusion_coeff() * rho * rho - jump).abs() / psi.max(f64::EPSILON);
    Ok(residual)
}
