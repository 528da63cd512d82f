//! Periodic pseudospectral discretization of `H = ψ(-Δ) + V`.
//!
//! The kinetic part acts as the Fourier multiplier `ψ(ξ_k)` on the grid
//! frequencies, the potential as pointwise multiplication. Everything built on
//! top (eigenpairs, semigroup, kernels) only needs the operator's action.

mod eigen;
mod propagate;
mod semigroup;

pub use eigen::{dense_eigenpairs, lowest_eigenpairs, lowest_eigenpairs_with, SolverOptions, SpectrumResult};
pub use semigroup::{heat_kernel, intrinsic_kernel, semigroup_apply, KernelValue, SemigroupOutput};

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::models::{LevyModel, Potential};
use crate::par;

/// Uniform periodic grid on `[-L, L)^d` with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        let g = Self { dim, half_width, points_per_axis };
        g.validate()?;
        Ok(g)
    }

    pub fn one_d(half_width: f64, points: usize) -> Result<Self> {
        Self::new(1, half_width, points)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(param("grid dimension must be 1 or 2"));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(param("grid half-width must be positive"));
        }
        let n = self.points_per_axis;
        if n < 64 || !n.is_power_of_two() {
            return Err(param(format!("points per axis must be a power of two >= 64, got {n}")));
        }
        Ok(())
    }

    /// Spacing `2L/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// Quadrature weight of one node, `(2L/N)^d`.
    pub fn weight(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of nodes, `N^d`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Axis coordinates `x_j = -L + 2Lj/N`.
    pub fn axis(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points_per_axis).map(|j| -self.half_width + h * j as f64).collect()
    }

    /// Frequencies `ξ_k = πk/L` in FFT order (`k = 0, …, N/2-1, -N/2, …, -1`).
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.points_per_axis as isize;
        (0..n).map(|k| if k < n / 2 { k } else { k - n }).map(|k| PI * k as f64 / self.half_width).collect()
    }

    /// Coordinates of node `i` (row-major, last axis fastest).
    pub fn point(&self, i: usize) -> Vec<f64> {
        let h = self.spacing();
        let n = self.points_per_axis;
        match self.dim {
            1 => vec![-self.half_width + h * i as f64],
            _ => vec![-self.half_width + h * (i / n) as f64, -self.half_width + h * (i % n) as f64],
        }
    }

    /// `|x_i|`.
    pub fn radius(&self, i: usize) -> f64 {
        crate::models::norm(&self.point(i))
    }

    /// Index of the node mirrored through the origin (`x ↦ -x`), which exists
    /// for every node except those on the `-L` face.
    pub fn mirror(&self, i: usize) -> Option<usize> {
        let n = self.points_per_axis;
        let flip = |j: usize| if j == 0 { None } else { Some(n - j) };
        match self.dim {
            1 => flip(i),
            _ => Some(flip(i / n)? * n + flip(i % n)?),
        }
    }

    /// Indices of nodes with `r_min ≤ |x| ≤ r_max`.
    pub fn window(&self, r_min: f64, r_max: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| {
            let r = self.radius(i);
            r >= r_min && r <= r_max
        })
        .collect()
    }

    /// The grid with `N` and `L` scaled by the given factors.
    pub fn refined(&self, n_factor: usize, l_factor: f64) -> Result<Self> {
        Self::new(self.dim, self.half_width * l_factor, self.points_per_axis * n_factor)
    }
}

/// Matrix-free discrete Schrödinger operator on a [`Grid`].
pub struct DiscreteOperator {
    grid: Grid,
    multiplier: Vec<f64>,
    potential: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    applications: AtomicUsize,
}

impl Clone for DiscreteOperator {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid,
            multiplier: self.multiplier.clone(),
            potential: self.potential.clone(),
            fft: Arc::clone(&self.fft),
            ifft: Arc::clone(&self.ifft),
            applications: AtomicUsize::new(self.applications()),
        }
    }
}

impl std::fmt::Debug for DiscreteOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteOperator")
            .field("grid", &self.grid)
            .field("applications", &self.applications())
            .finish_non_exhaustive()
    }
}

/// Assembles `ψ(-Δ) + V` on `grid` with `ψ` evaluated exactly at the grid
/// frequencies.
pub fn build_operator(model: &LevyModel, v: &Potential, grid: &Grid) -> Result<DiscreteOperator> {
    model.validate()?;
    v.validate()?;
    if model.dim != grid.dim {
        return Err(param(format!("model dimension {} does not match grid dimension {}", model.dim, grid.dim)));
    }
    DiscreteOperator::from_symbol(grid, |rho| model.symbol_radial(rho), |x| v.eval(x))
}

impl DiscreteOperator {
    /// Operator with radial multiplier `psi(|ξ|)` and potential `v(x)`.
    pub fn from_symbol<P, W>(grid: &Grid, psi: P, v: W) -> Result<Self>
    where
        P: Fn(f64) -> f64 + Sync,
        W: Fn(&[f64]) -> f64 + Sync,
    {
        grid.validate()?;
        let freqs = grid.frequencies();
        let n = grid.points_per_axis;
        let multiplier = par::map_range(grid.len(), |i| match grid.dim {
            1 => psi(freqs[i].abs()),
            _ => psi(freqs[i / n].hypot(freqs[i % n])),
        });
        let potential = par::map_range(grid.len(), |i| v(&grid.point(i)));
        Self::from_tables(grid, multiplier, potential)
    }

    /// Operator from explicit tables: `multiplier` in FFT order, `potential`
    /// on the nodes.
    pub fn from_tables(grid: &Grid, multiplier: Vec<f64>, potential: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if multiplier.len() != grid.len() || potential.len() != grid.len() {
            return Err(param("operator tables do not match the grid size"));
        }
        if multiplier.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(param("symbol multiplier must be finite and non-negative"));
        }
        if multiplier[0] != 0.0 {
            return Err(param("symbol multiplier must vanish at zero frequency"));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(param("potential table must be finite"));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(grid.points_per_axis);
        let ifft = planner.plan_fft_inverse(grid.points_per_axis);
        Ok(Self { grid: *grid, multiplier, potential, fft, ifft, applications: AtomicUsize::new(0) })
    }

    /// `H + cI`.
    pub fn with_shift(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.potential.iter_mut().for_each(|v| *v += c);
        out.applications = AtomicUsize::new(0);
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn multiplier(&self) -> &[f64] {
        &self.multiplier
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Number of operator applications so far.
    pub fn applications(&self) -> usize {
        self.applications.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lower and upper bounds of the spectrum: `[min V, max ψ + max V]`.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let vmin = self.potential.iter().copied().fold(f64::INFINITY, f64::min);
        let vmax = self.potential.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let kmax = self.multiplier.iter().copied().fold(0.0, f64::max);
        (vmin, kmax + vmax)
    }

    /// Operator-norm bound `max ψ + max |V|`.
    pub fn norm_bound(&self) -> f64 {
        let vabs = self.potential.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.multiplier.iter().copied().fold(0.0, f64::max) + vabs
    }

    /// `out = ψ(-Δ) f`.
    pub fn apply_kinetic(&self, f: &[f64], out: &mut [f64]) {
        assert_eq!(f.len(), self.len());
        assert_eq!(out.len(), self.len());
        let mut buf: Vec<Complex<f64>> = f.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.multiply_in_fourier(&mut buf);
        for (o, c) in out.iter_mut().zip(&buf) {
            *o = c.re;
        }
    }

    /// `out = H f`.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        self.apply_kinetic(f, out);
        for ((o, v), x) in out.iter_mut().zip(&self.potential).zip(f) {
            *o += v * x;
        }
        self.applications.fetch_add(1, Ordering::Relaxed);
    }

    pub fn apply_vec(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.apply(f, &mut out);
        out
    }

    /// Applies `H` to two vectors at once by packing them as real and
    /// imaginary parts; valid because the multiplier is real and even.
    pub fn apply_pair(&self, f: &[f64], g: &[f64], out_f: &mut [f64], out_g: &mut [f64]) {
        let mut buf: Vec<Complex<f64>> = f.iter().zip(g).map(|(&a, &b)| Complex::new(a, b)).collect();
        self.multiply_in_fourier(&mut buf);
        for i in 0..self.len() {
            out_f[i] = buf[i].re + self.potential[i] * f[i];
            out_g[i] = buf[i].im + self.potential[i] * g[i];
        }
        self.applications.fetch_add(2, Ordering::Relaxed);
    }

    fn multiply_in_fourier(&self, buf: &mut [Complex<f64>]) {
        let n = self.grid.points_per_axis;
        let scale = 1.0 / self.len() as f64;
        match self.grid.dim {
            1 => {
                let mut scratch = vec![Complex::default(); self.fft.get_inplace_scratch_len()];
                self.fft.process_with_scratch(buf, &mut scratch);
                for (c, m) in buf.iter_mut().zip(&self.multiplier) {
                    *c *= m * scale;
                }
                self.ifft.process_with_scratch(buf, &mut scratch);
            }
            _ => {
                let rows = |data: &mut [Complex<f64>], plan: &Arc<dyn Fft<f64>>| {
                    par::for_each_chunk_mut(data, n, |row| plan.process(row));
                };
                rows(buf, &self.fft);
                let mut t = transpose(buf, n);
                rows(&mut t, &self.fft);
                // The radial multiplier is symmetric under swapping axes.
                for (c, m) in t.iter_mut().zip(&self.multiplier) {
                    *c *= m * scale;
                }
                rows(&mut t, &self.ifft);
                let back = transpose(&t, n);
                buf.copy_from_slice(&back);
                rows(buf, &self.ifft);
            }
        }
    }

    /// Dense matrix of the operator, column by column (small grids only).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        // Symmetrize away FFT round-off.
        (&m + m.transpose()) * 0.5
    }

    /// `e^{-tH} f`, exact up to the requested relative accuracy (Chebyshev
    /// expansion on the spectral interval; no spectral truncation).
    pub fn propagate(&self, t: f64, f: &[f64]) -> Vec<f64> {
        propagate::chebyshev_exp(self, t, f, propagate::DEFAULT_ACCURACY)
    }

    /// `e^{-tH} f` for several times.
    pub fn propagate_many(&self, times: &[f64], f: &[f64]) -> Vec<Vec<f64>> {
        par::map_slice(times, |&t| self.propagate(t, f))
    }
}

fn transpose(data: &[Complex<f64>], n: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::default(); data.len()];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = data[i * n + j];
        }
    }
    out
}

/// Trigonometric interpolation of the grid function `f` at the point `x`
/// (1D grids); exact for band-limited functions on the grid.
pub fn interpolate(grid: &Grid, f: &[f64], x: f64) -> f64 {
    assert_eq!(grid.dim, 1, "interpolation is implemented for 1D grids");
    assert_eq!(f.len(), grid.len());
    let n = grid.points_per_axis;
    let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let freqs = grid.frequencies();
    let shift = x + grid.half_width;
    let mut acc = 0.0;
    for (k, (c, xi)) in buf.iter().zip(&freqs).enumerate() {
        let phase = xi * shift;
        let term = c.re * phase.cos() - c.im * phase.sin();
        // The Nyquist mode is split evenly between ±N/2.
        acc += if k == n / 2 { c.re * phase.cos() } else { term };
    }
    acc / n as f64
}

/// Weighted inner product `Σ f g h^d`.
pub fn grid_dot(grid: &Grid, f: &[f64], g: &[f64]) -> f64 {
    let prods: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    crate::stats::pairwise_sum(&prods) * grid.weight()
}

/// Weighted norm `(Σ f² h^d)^{1/2}`.
pub fn grid_norm(grid: &Grid, f: &[f64]) -> f64 {
    grid_dot(grid, f, f).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cauchy_x2(l: f64, n: usize) -> DiscreteOperator {
        let m = LevyModel::stable(1.0, 1).unwrap();
        build_operator(&m, &Potential::power(1.0, 2.0), &Grid::one_d(l, n).unwrap()).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = Grid::one_d(4.0, 64).unwrap();
        let x = g.axis();
        assert_eq!(x[0], -4.0);
        assert_eq!(x[32], 0.0);
        assert_eq!(g.mirror(10), Some(54));
        assert_eq!(x[10], -x[54]);
        let xi = g.frequencies();
        assert_eq!(xi[0], 0.0);
        assert_eq!(xi[32], -PI * 32.0 / 4.0);
        assert!(Grid::one_d(4.0, 48).is_err());
        assert!(Grid::one_d(4.0, 32).is_err());
    }

    #[test]
    fn fourier_mode_is_eigenfunction_of_laplacian() {
        let g = Grid::one_d(5.0, 128).unwrap();
        let op = DiscreteOperator::from_symbol(&g, |r| r * r, |_| 0.0).unwrap();
        let f: Vec<f64> = g.axis().iter().map(|x| (PI * x / 5.0).sin()).collect();
        let hf = op.apply_vec(&f);
        let lam = (PI / 5.0).powi(2);
        for (a, b) in hf.iter().zip(&f) {
            assert!((a - lam * b).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let op = DiscreteOperator::from_symbol(&Grid::one_d(5.0, 64).unwrap(), |r| r.powf(0.7), |_| 0.0).unwrap();
        let hf = op.apply_vec(&vec![1.0; 64]);
        assert!(hf.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn operator_is_symmetric_and_positive() {
        let op = cauchy_x2(10.0, 256);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let norm_h = op.norm_bound();
        for _ in 0..5 {
            let f: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
            let hf = op.apply_vec(&f);
            let hg = op.apply_vec(&g);
            let a: f64 = hf.iter().zip(&g).map(|(x, y)| x * y).sum();
            let b: f64 = f.iter().zip(&hg).map(|(x, y)| x * y).sum();
            let nf = f.iter().map(|x| x * x).sum::<f64>().sqrt();
            let ng = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((a - b).abs() <= 1e-10 * nf * ng * norm_h);
            let form: f64 = hf.iter().zip(&f).map(|(x, y)| x * y).sum();
            assert!(form > 0.0);
        }
    }

    #[test]
    fn pair_application_matches_single() {
        let op = cauchy_x2(10.0, 128);
        let f: Vec<f64> = (0..128).map(|i| (i as f64 * 0.3).sin()).collect();
        let g: Vec<f64> = (0..128).map(|i| (i as f64 * 0.11).cos()).collect();
        let (mut a, mut b) = (vec![0.0; 128], vec![0.0; 128]);
        op.apply_pair(&f, &g, &mut a, &mut b);
        let fa = op.apply_vec(&f);
        let gb = op.apply_vec(&g);
        for i in 0..128 {
            assert!((a[i] - fa[i]).abs() < 1e-10 && (b[i] - gb[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn two_dimensional_laplacian_mode() {
        let g = Grid::new(2, 3.0, 64).unwrap();
        let op = DiscreteOperator::from_symbol(&g, |r| r * r, |_| 0.0).unwrap();
        let k = PI / 3.0;
        let f: Vec<f64> = (0..g.len()).map(|i| {
            let p = g.point(i);
            (k * p[0]).cos() * (2.0 * k * p[1]).sin()
        })
        .collect();
        let hf = op.apply_vec(&f);
        let lam = 5.0 * k * k;
        for (a, b) in hf.iter().zip(&f) {
            assert!((a - lam * b).abs() < 1e-10);
        }
    }

    #[test]
    fn interpolation_is_exact_for_trigonometric_polynomials() {
        let g = Grid::one_d(3.0, 64).unwrap();
        let f = |x: f64| 1.0 + (PI * x / 3.0).sin() - 0.5 * (5.0 * PI * x / 3.0).cos();
        let vals: Vec<f64> = g.axis().iter().map(|&x| f(x)).collect();
        for &x in &[0.123, -2.9, 1.7] {
            assert!((interpolate(&g, &vals, x) - f(x)).abs() < 1e-12);
        }
        assert!((interpolate(&g, &vals, g.axis()[7]) - vals[7]).abs() < 1e-12);
    }

    #[test]
    fn application_count_increments() {
        let op = cauchy_x2(10.0, 64);
        let f = vec![1.0; 64];
        op.apply_vec(&f);
        op.apply_vec(&f);
        assert_eq!(op.applications(), 2);
    }
}
