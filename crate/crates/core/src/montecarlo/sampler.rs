//! Exact increment samplers for the catalog families, with a tabulated
//! inversion fallback.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::models::{hitting_probability, truncation_frequency, Family, JumpIntensity, LevyModel, QuadratureSpec};
use crate::quad::{integrate_to_infinity, Tolerance};

/// Symmetric stable variable with `E e^{iξS} = e^{-|ξ|^α}` (Chambers–Mallows–Stuck).
pub fn standard_stable_1d<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = PI * (rng.random::<f64>() - 0.5);
    if alpha == 1.0 {
        return u.tan();
    }
    let w: f64 = Exp1.sample(rng);
    (alpha * u).sin() / u.cos().powf(1.0 / alpha) * (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Positive stable variable with `E e^{-λS} = e^{-λ^ρ}`, `0 < ρ < 1` (Kanter).
pub fn positive_stable<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> f64 {
    let u = PI * rng.random::<f64>();
    let e: f64 = Exp1.sample(rng);
    let a = (rho * u).sin().powf(rho / (1.0 - rho)) * ((1.0 - rho) * u).sin() / u.sin().powf(1.0 / (1.0 - rho));
    (a / e).powf((1.0 - rho) / rho)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Isotropic `d`-dimensional variable with symbol `|ξ|^α`, scaled by `s`:
/// symbol `s^α|ξ|^α`.
fn stable_vec<R: Rng + ?Sized>(alpha: f64, scale: f64, out: &mut [f64], rng: &mut R) {
    if out.len() == 1 {
        out[0] = scale * standard_stable_1d(alpha, rng);
        return;
    }
    // Brownian motion subordinated by an (α/2)-stable subordinator.
    let s = positive_stable(0.5 * alpha, rng);
    let k = scale * (2.0 * s).sqrt();
    for o in out.iter_mut() {
        *o = k * gaussian(rng);
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Stable { alpha: f64, scale: f64 },
    Mixture { alpha: f64, scale_a: f64, beta: f64, scale_b: f64 },
    /// Tempered (α/2)-stable subordinator with rate `mu`, by rejection.
    Relativistic { rho: f64, dt: f64, mu: f64 },
    /// Gamma(dt) subordinator on top of an α-stable motion.
    Geometric { alpha: f64, gamma: Gamma<f64> },
    /// Radial CDF table `(r_i, P(|X| ≤ r_i))` with a power-law tail beyond.
    Table { radii: Vec<f64>, cdf: Vec<f64>, tail_index: f64 },
}

/// Draws increments `X_{Δt}` of a catalog process.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    kind: Kind,
    dim: usize,
    /// Standard deviation per coordinate of the Gaussian component.
    gauss_sd: f64,
}

impl IncrementSampler {
    /// Direct sampler where one exists, tabulated inversion otherwise.
    pub fn new(model: &LevyModel, dt: f64) -> Result<Self> {
        model.validate()?;
        let kind = match model.family {
            Family::Stable => Kind::Stable { alpha: model.alpha, scale: dt.powf(1.0 / model.alpha) },
            Family::StableMixture => Kind::Mixture {
                alpha: model.alpha,
                scale_a: (model.a * dt).powf(1.0 / model.alpha),
                beta: model.beta,
                scale_b: (model.b * dt).powf(1.0 / model.beta),
            },
            Family::JumpDiffusion => Kind::Stable { alpha: model.alpha, scale: (model.a * dt).powf(1.0 / model.alpha) },
            Family::Relativistic => Kind::Relativistic { rho: 0.5 * model.alpha, dt, mu: model.m.powf(2.0 / model.alpha) },
            Family::GeometricStable => Kind::Geometric {
                alpha: model.alpha,
                gamma: Gamma::new(dt, 1.0).map_err(|e| Error::Sampling(e.to_string()))?,
            },
            Family::TemperedFamily => return Self::inversion(model, dt),
        };
        Ok(Self { kind, dim: model.dim, gauss_sd: (2.0 * model.diffusion_coeff() * dt).sqrt() })
    }

    /// Tabulated inversion of `r ↦ P(|X_{Δt}| ≤ r)` with a uniform direction.
    pub fn inversion(model: &LevyModel, dt: f64) -> Result<Self> {
        model.validate()?;
        let q = QuadratureSpec { rel_tol: 1e-9, abs_tol: 1e-12, ..QuadratureSpec::default() };
        let origin = vec![0.0; model.dim];
        // Radii from far below the step scale to where the jump tail is tiny.
        // Capped where the oscillatory inversion integral stays cheap; the
        // Pareto tail takes over beyond.
        let xi_max = truncation_frequency(model, dt, q.truncation_tol);
        let r_hi = tail_radius(model, dt).min(3e4 * PI / xi_max);
        let r_lo = r_hi * 1e-9;
        let count = 240;
        let radii: Vec<f64> = crate::stats::geomspace(r_lo, r_hi, count);
        let mut cdf = Vec::with_capacity(count);
        for &r in &radii {
            cdf.push(hitting_probability(model, dt, &origin, r, &q)?.clamp(0.0, 1.0));
        }
        for i in 1..cdf.len() {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        let d = model.dim as f64;
        let tail_index = {
            let (r1, r2) = (r_hi / 2.0, r_hi);
            ((model.nu_radial(r1) * r1.powf(d)).ln() - (model.nu_radial(r2) * r2.powf(d)).ln()) / 2f64.ln()
        };
        let gauss_sd = 0.0; // the Gaussian part is already inside the inverted law
        Ok(Self { kind: Kind::Table { radii, cdf, tail_index: tail_index.max(0.5) }, dim: model.dim, gauss_sd })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes one increment into `out` (length `dim`).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            Kind::Stable { alpha, scale } => stable_vec(*alpha, *scale, out, rng),
            Kind::Mixture { alpha, scale_a, beta, scale_b } => {
                let mut other = [0.0; 2];
                let other = &mut other[..self.dim];
                stable_vec(*alpha, *scale_a, out, rng);
                stable_vec(*beta, *scale_b, other, rng);
                for (o, v) in out.iter_mut().zip(other.iter()) {
                    *o += v;
                }
            }
            Kind::Relativistic { rho, dt, mu } => {
                let scale = dt.powf(1.0 / rho);
                let s = loop {
                    let s = scale * positive_stable(*rho, rng);
                    if rng.random::<f64>() < (-mu * s).exp() {
                        break s;
                    }
                };
                let k = (2.0 * s).sqrt();
                for o in out.iter_mut() {
                    *o = k * gaussian(rng);
                }
            }
            Kind::Geometric { alpha, gamma } => {
                let g: f64 = gamma.sample(rng);
                stable_vec(*alpha, g.powf(1.0 / alpha), out, rng);
            }
            Kind::Table { radii, cdf, tail_index } => {
                let u: f64 = rng.random();
                let r = invert_table(radii, cdf, *tail_index, u);
                if self.dim == 1 {
                    out[0] = if rng.random::<bool>() { r } else { -r };
                } else {
                    let th = 2.0 * PI * rng.random::<f64>();
                    out[0] = r * th.cos();
                    out[1] = r * th.sin();
                }
            }
        }
        if self.gauss_sd > 0.0 {
            for o in out.iter_mut() {
                *o += self.gauss_sd * gaussian(rng);
            }
        }
    }
}

/// Radius with `Δt·ν(|z| > r) ≈ 10⁻⁷`.
fn tail_radius(model: &LevyModel, dt: f64) -> f64 {
    let tol = Tolerance { abs: 1e-16, rel: 1e-8, max_intervals: 10_000 };
    let d = model.dim as f64;
    let area = if model.dim == 1 { 2.0 } else { 2.0 * PI };
    let tail = |r: f64| dt * area * integrate_to_infinity(|s| model.nu_radial(s) * s.powf(d - 1.0), r, tol).value;
    let mut r = 1.0;
    while tail(r) > 1e-7 && r < 1e8 {
        r *= 2.0;
    }
    r
}

fn invert_table(radii: &[f64], cdf: &[f64], tail_index: f64, u: f64) -> f64 {
    let last = *cdf.last().expect("table is non-empty");
    if u >= last {
        // Pareto-type tail matched at the last node.
        let r_hi = *radii.last().expect("table is non-empty");
        let mass = (1.0 - last).max(1e-300);
        let v = ((1.0 - u) / mass).clamp(1e-300, 1.0);
        return r_hi * v.powf(-1.0 / tail_index);
    }
    if u <= cdf[0] {
        return radii[0] * u / cdf[0].max(1e-300);
    }
    let i = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
    let (c0, c1) = (cdf[i - 1], cdf[i]);
    let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
    // Interpolate in log radius: the table is geometric.
    (radii[i - 1].ln() + w * (radii[i].ln() - radii[i - 1].ln())).exp()
}
