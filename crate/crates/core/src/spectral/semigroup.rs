//! Truncated spectral representations of the semigroup and its kernels.

use serde::{Deserialize, Serialize};

use super::{grid_dot, grid_norm, SpectrumResult};

/// Tail-bound level above which kernel values are flagged as truncated.
pub const KERNEL_TAIL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupOutput {
    pub values: Vec<f64>,
    /// `e^{-λ_{k-1} t} ‖f‖`, the size of the discarded modes.
    pub truncation_estimate: f64,
    /// Minimum of the returned values (positivity diagnostic).
    pub min_value: f64,
}

/// `Σ_{n<k} e^{-λₙt}⟨f, φₙ⟩φₙ`.
pub fn semigroup_apply(spec: &SpectrumResult, t: f64, f: &[f64]) -> SemigroupOutput {
    assert_eq!(f.len(), spec.grid.len(), "grid function has the wrong length");
    let mut values = vec![0.0; f.len()];
    for (lam, phi) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
        let c = (-lam * t).exp() * grid_dot(&spec.grid, f, phi);
        for (v, p) in values.iter_mut().zip(phi) {
            *v += c * p;
        }
    }
    let last = *spec.eigenvalues.last().expect("spectrum is non-empty");
    let truncation_estimate = (-last * t).exp() * grid_norm(&spec.grid, f);
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    SemigroupOutput { values, truncation_estimate, min_value }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    /// `e^{-(λ_{k-1} − λ₀)t} (N/2L)^d`.
    pub tail_bound: f64,
    /// Set when the tail bound exceeds [`KERNEL_TAIL_TOL`].
    pub truncated: bool,
}

fn tail_bound(spec: &SpectrumResult, t: f64) -> f64 {
    let last = *spec.eigenvalues.last().expect("spectrum is non-empty");
    (-(last - spec.lambda0()) * t).exp() / spec.grid.weight()
}

/// `u(t, x_i, x_j) = Σ e^{-λₙt} φₙ(x_i) φₙ(x_j)`.
pub fn heat_kernel(spec: &SpectrumResult, t: f64, i: usize, j: usize) -> KernelValue {
    let value = spec
        .eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .map(|(lam, phi)| (-lam * t).exp() * phi[i] * phi[j])
        .sum();
    let tb = tail_bound(spec, t) * (-spec.lambda0() * t).exp();
    KernelValue { value, tail_bound: tb, truncated: tb > KERNEL_TAIL_TOL }
}

/// `ũ(t, x_i, x_j) = e^{λ₀t} u(t, x_i, x_j) / (φ₀(x_i) φ₀(x_j))`.
pub fn intrinsic_kernel(spec: &SpectrumResult, t: f64, i: usize, j: usize) -> KernelValue {
    let phi0 = spec.phi0();
    let l0 = spec.lambda0();
    let value: f64 = spec
        .eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .map(|(lam, phi)| (-(lam - l0) * t).exp() * phi[i] * phi[j])
        .sum::<f64>()
        / (phi0[i] * phi0[j]);
    let tb = tail_bound(spec, t) / (phi0[i] * phi0[j]);
    KernelValue { value, tail_bound: tb, truncated: tb > KERNEL_TAIL_TOL }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LevyModel, Potential};
    use crate::spectral::{build_operator, lowest_eigenpairs, Grid};

    fn flagship_small() -> SpectrumResult {
        let m = LevyModel::stable(1.0, 1).unwrap();
        let g = Grid::one_d(10.0, 256).unwrap();
        let op = build_operator(&m, &Potential::power(1.0, 2.0), &g).unwrap();
        lowest_eigenpairs(&op, 8, 1e-10).unwrap()
    }

    #[test]
    fn ground_state_is_scaled() {
        let s = flagship_small();
        let out = semigroup_apply(&s, 0.7, s.phi0());
        let f = (-s.lambda0() * 0.7).exp();
        for (a, b) in out.values.iter().zip(s.phi0()) {
            assert!((a - f * b).abs() < 1e-10);
        }
    }

    #[test]
    fn semigroup_property() {
        let s = flagship_small();
        let f: Vec<f64> = s.grid.axis().iter().map(|x| (-x * x).exp()).collect();
        let a = semigroup_apply(&s, 0.8, &f).values;
        let b = semigroup_apply(&s, 0.5, &semigroup_apply(&s, 0.3, &f).values).values;
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        assert!(grid_norm(&s.grid, &diff) <= 1e-8 * grid_norm(&s.grid, &f));
    }

    #[test]
    fn kernels_symmetric_and_intrinsic_tends_to_one() {
        let s = flagship_small();
        let (i, j) = (100, 140);
        assert_eq!(heat_kernel(&s, 1.0, i, j).value, heat_kernel(&s, 1.0, j, i).value);
        let far = intrinsic_kernel(&s, 40.0, i, j);
        assert!((far.value - 1.0).abs() < 1e-8);
        assert!(!far.truncated);
    }
}
