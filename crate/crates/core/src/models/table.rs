//! Tabulated symbols for families whose `ψ` is itself a quadrature.
//!
//! Direct evaluation costs a full adaptive integral per frequency and carries
//! panel-dependent jitter of order 1e-8, which stalls adaptive outer
//! integrals. The table interpolates `log ψ` against `log ξ` with a natural
//! cubic spline, which is smooth and agrees with the direct values to ~1e-9.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use statrs::function::gamma::gamma;

use crate::special::stable_constant;

const XI_LO: f64 = 1e-3;
const XI_HI: f64 = 1e3;
const PER_DECADE: usize = 48;

#[derive(Debug)]
pub(crate) struct SymbolTable {
    u0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
    /// Large-frequency increment `ψ(ξ) - ψ(ξ_hi)` from the `|z|^{-d-δ}` singularity.
    dim: usize,
    delta: f64,
}

impl SymbolTable {
    fn build(dim: usize, delta: f64, psi: impl Fn(f64) -> f64) -> Self {
        let n = ((XI_HI / XI_LO).log10() * PER_DECADE as f64).round() as usize + 1;
        let u0 = XI_LO.ln();
        let h = (XI_HI / XI_LO).ln() / (n - 1) as f64;
        let y: Vec<f64> = (0..n).map(|i| psi((u0 + h * i as f64).exp()).ln()).collect();
        let m = natural_spline(&y, h);
        Self { u0, h, y, m, dim, delta }
    }

    pub(crate) fn eval(&self, xi: f64) -> f64 {
        let n = self.y.len();
        if xi <= XI_LO {
            // Finite second moment: ψ is quadratic at the origin.
            return self.y[0].exp() * (xi / XI_LO).powi(2);
        }
        if xi >= XI_HI {
            return self.y[n - 1].exp() + self.tail(xi);
        }
        let s = (xi.ln() - self.u0) / self.h;
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let (a, b) = (1.0 - t, t);
        let h2 = self.h * self.h / 6.0;
        let v = a * self.y[i] + b * self.y[i + 1] + h2 * ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]);
        v.exp()
    }

    fn tail(&self, xi: f64) -> f64 {
        if self.delta > 0.0 {
            (xi.powf(self.delta) - XI_HI.powf(self.delta)) / stable_constant(self.dim, self.delta)
        } else {
            let d = self.dim as f64;
            let sphere = 2.0 * PI.powf(0.5 * d) / gamma(0.5 * d);
            sphere * (xi / XI_HI).ln()
        }
    }
}

/// Second derivatives of the natural cubic spline through equally spaced `y`.
fn natural_spline(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior system (1, 4, 1) m = 6 Δ²y / h².
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
        let denom = 4.0 - c[i - 1];
        c[i] = 1.0 / denom;
        d[i] = (rhs - d[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d[i] - c[i] * m[i + 1];
    }
    m
}

type Key = (u64, u64, u64, u64, usize);

/// Shared table for a parameter set, built on first use.
pub(crate) fn cached(key: [f64; 4], dim: usize, delta: f64, psi: impl Fn(f64) -> f64) -> Arc<SymbolTable> {
    static TABLES: OnceLock<Mutex<HashMap<Key, Arc<SymbolTable>>>> = OnceLock::new();
    let k = (key[0].to_bits(), key[1].to_bits(), key[2].to_bits(), key[3].to_bits(), dim);
    let mut map = TABLES.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    map.entry(k).or_insert_with(|| Arc::new(SymbolTable::build(dim, delta, psi))).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_smooth_symbol() {
        // ψ(ξ) = 2[ξ atan ξ - ½ log(1+ξ²)] behaves like ξ² at 0 and πξ at ∞.
        let exact = |xi: f64| 2.0 * (xi * xi.atan() - 0.5 * xi.mul_add(xi, 1.0).ln());
        let table = SymbolTable::build(1, 1.0, exact);
        for &xi in &[2e-3, 0.0173, 0.5, 3.3, 47.0, 612.0] {
            let (got, want) = (table.eval(xi), exact(xi));
            assert!((got - want).abs() < 1e-8 * want, "ξ={xi}: {got} vs {want}");
        }
        // Beyond the table the increment follows πξ.
        let (got, want) = (table.eval(4e3), exact(4e3));
        assert!((got - want).abs() < 1e-3 * want, "{got} vs {want}");
    }
}
