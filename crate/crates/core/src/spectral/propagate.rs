//! `e^{-tH}f` by Chebyshev expansion on the spectral interval `[a, b]`.
//!
//! With `H = c + rY` and `Y` having spectrum in `[-1, 1]`,
//! `e^{-tH} = e^{-ta} Σ_k c_k T_k(Y)` where `c_k = (2 - δ_k0)(-1)^k e^{-z}I_k(z)`
//! and `z = tr`. The exponentially scaled Bessel values are produced by
//! Miller's backward recurrence normalized with `e^z = I₀ + 2ΣI_k`.

use super::DiscreteOperator;

pub(crate) const DEFAULT_ACCURACY: f64 = 1e-15;

/// `e^{-z} I_k(z)` for `k = 0..=kmax`.
fn scaled_bessel_i(z: f64, kmax: usize) -> Vec<f64> {
    let start = kmax + 30 + (z.sqrt() as usize);
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-280;
    for k in (1..=start).rev() {
        vals[k - 1] = (2.0 * k as f64 / z) * vals[k] + vals[k + 1];
        if vals[k - 1] > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals[1..=start].iter().sum::<f64>();
    vals.truncate(kmax + 1);
    vals.iter_mut().for_each(|v| *v /= norm);
    vals
}

/// Chebyshev coefficients of `e^{-z(1+y)}` on `[-1, 1]`, trimmed to accuracy.
fn coefficients(z: f64, accuracy: f64) -> Vec<f64> {
    let kmax = (9.0 * z.sqrt() + 30.0).ceil() as usize;
    let i = scaled_bessel_i(z, kmax);
    let mut c: Vec<f64> = i
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            if k == 0 {
                *v
            } else {
                2.0 * sign * v
            }
        })
        .collect();
    while c.len() > 1 && c.last().is_some_and(|v| v.abs() < accuracy * 1e-2) {
        c.pop();
    }
    c
}

pub(crate) fn chebyshev_exp(op: &DiscreteOperator, t: f64, f: &[f64], accuracy: f64) -> Vec<f64> {
    assert!(t >= 0.0, "propagation time must be non-negative");
    if t == 0.0 {
        return f.to_vec();
    }
    let (a, b) = op.spectral_bounds();
    let center = 0.5 * (a + b);
    let radius = 0.5 * (b - a);
    if radius <= 1e-14 * center.abs().max(1.0) {
        let s = (-t * center).exp();
        return f.iter().map(|x| s * x).collect();
    }
    let c = coefficients(t * radius, accuracy);
    let scale = (-t * a).exp();
    let n = f.len();
    let mut hv = vec![0.0; n];
    // Y v = (H v - center v) / radius
    let apply_y = |v: &[f64], out: &mut Vec<f64>, hv: &mut Vec<f64>| {
        op.apply(v, hv);
        for i in 0..n {
            out[i] = (hv[i] - center * v[i]) / radius;
        }
    };
    let mut prev = f.to_vec();
    let mut acc: Vec<f64> = f.iter().map(|x| c[0] * x).collect();
    if c.len() == 1 {
        return acc.into_iter().map(|v| v * scale).collect();
    }
    let mut cur = vec![0.0; n];
    apply_y(f, &mut cur, &mut hv);
    for i in 0..n {
        acc[i] += c[1] * cur[i];
    }
    let mut next = vec![0.0; n];
    for ck in c.iter().skip(2) {
        apply_y(&cur, &mut next, &mut hv);
        for i in 0..n {
            next[i] = 2.0 * next[i] - prev[i];
            acc[i] += ck * next[i];
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    acc.into_iter().map(|v| v * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn bessel_normalization_and_values() {
        // e^{-1} I_0(1) = 0.4657596075936404, e^{-1} I_1(1) = 0.2079104153497085
        let v = scaled_bessel_i(1.0, 10);
        assert!((v[0] - 0.4657596075936404).abs() < 1e-14);
        assert!((v[1] - 0.2079104153497085).abs() < 1e-14);
        let big = scaled_bessel_i(5000.0, 800);
        // e^{-z} I_0(z) ≈ 1/sqrt(2πz) (1 + 1/(8z))
        let approx = (1.0 / (2.0 * std::f64::consts::PI * 5000.0)).sqrt() * (1.0 + 1.0 / 40000.0);
        assert!((big[0] - approx).abs() < 1e-9);
    }

    #[test]
    fn scalar_exponential_reproduced() {
        // Diagonal operator: V only, multiplier zero except it must vanish at 0.
        let g = Grid::one_d(1.0, 64).unwrap();
        let v: Vec<f64> = (0..64).map(|i| i as f64 * 10.0).collect();
        let op = DiscreteOperator::from_tables(&g, vec![0.0; 64], v.clone()).unwrap();
        let f = vec![1.0; 64];
        for &t in &[0.01, 0.3, 2.0] {
            let out = chebyshev_exp(&op, t, &f, DEFAULT_ACCURACY);
            for i in 0..64 {
                let exact = (-t * v[i]).exp();
                assert!((out[i] - exact).abs() < 1e-13, "t={t} i={i} {} vs {}", out[i], exact);
            }
        }
    }
}
