//! Special functions: the stable-intensity normalization and Bessel J0/J1.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// `C(d, α) = α 2^{α-1} Γ((d+α)/2) / (π^{d/2} Γ(1-α/2))`, the constant for
/// which `C |x|^{-d-α}` is the jump intensity of the process with symbol `|ξ|^α`.
pub fn stable_constant(dim: usize, alpha: f64) -> f64 {
    let d = dim as f64;
    alpha * 2f64.powf(alpha - 1.0) * gamma(0.5 * (d + alpha)) / (PI.powf(0.5 * d) * gamma(1.0 - 0.5 * alpha))
}

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(x: f64) -> f64 {
    bessel_jn(0, x)
}

/// Bessel function of the first kind, order 1.
pub fn bessel_j1(x: f64) -> f64 {
    bessel_jn(1, x)
}

fn bessel_jn(order: u32, x: f64) -> f64 {
    let ax = x.abs();
    let sign = if order == 1 && x < 0.0 { -1.0 } else { 1.0 };
    if ax > 25.0 {
        return sign * hankel_asymptotic(order, ax);
    }
    // Bessel's integral over a full period; the trapezoid rule converges
    // geometrically for periodic analytic integrands.
    const M: usize = 96;
    let n = order as f64;
    let mut s = 0.0;
    for j in 0..M {
        let th = 2.0 * PI * j as f64 / M as f64;
        s += (n * th - ax * th.sin()).cos();
    }
    sign * s / M as f64
}

fn hankel_asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    // a_k = (mu-1)(mu-9)...(mu-(2k-1)^2) / (k! 8^k)
    let mut terms = [0.0; 12];
    terms[0] = 1.0;
    for k in 1..terms.len() {
        let odd = (2 * k - 1) as f64;
        terms[k] = terms[k - 1] * (mu - odd * odd) / (k as f64 * 8.0);
    }
    let mut p = 0.0;
    let mut q = 0.0;
    let mut xp = 1.0;
    for (k, a) in terms.iter().enumerate() {
        let term = a / xp;
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        xp *= x;
    }
    let chi = x - (0.5 * order as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
