//! Lowest eigenpairs by thick-restart Lanczos with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{grid_dot, grid_norm, DiscreteOperator, Grid};
use crate::error::{param, Error, Result};
use crate::par;

/// Low spectrum of a discrete operator together with the operator tables, so
/// later stages can rebuild the exact operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub grid: Grid,
    /// Ascending eigenvalues `λ₀ < λ₁ ≤ …`.
    pub eigenvalues: Vec<f64>,
    /// `φₙ` on the nodes, normalized by `Σ φₙ² (2L/N)^d = 1`; `φ₀ > 0`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Hφₙ − λₙφₙ‖` in the same norm.
    pub residuals: Vec<f64>,
    pub tolerance: f64,
    /// Operator applications used by the solver.
    pub applications: usize,
    pub warnings: Vec<String>,
    /// Kinetic multiplier in FFT order.
    pub multiplier: Vec<f64>,
    /// Potential on the nodes.
    pub potential: Vec<f64>,
}

impl SpectrumResult {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda0(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn phi0(&self) -> &[f64] {
        &self.eigenvectors[0]
    }

    /// `λ₁ − λ₀` (infinite when only one pair was computed).
    pub fn gap(&self) -> f64 {
        if self.k() > 1 {
            self.eigenvalues[1] - self.eigenvalues[0]
        } else {
            f64::INFINITY
        }
    }

    /// Rebuilds the discrete operator the spectrum belongs to.
    pub fn operator(&self) -> Result<DiscreteOperator> {
        DiscreteOperator::from_tables(&self.grid, self.multiplier.clone(), self.potential.clone())
    }

    /// `max |⟨φ_i, φ_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.k() {
            for j in 0..=i {
                let d = grid_dot(&self.grid, &self.eigenvectors[i], &self.eigenvectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }
}

/// Solver knobs; defaults suit grids up to a few times 10⁴ nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Krylov basis size between restarts.
    pub basis_size: usize,
    pub max_restarts: usize,
    /// Seed of the starting vector.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { basis_size: 120, max_restarts: 2000, seed: 0x5eed }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Classical Gram–Schmidt applied twice; returns the accumulated coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut total = vec![0.0; basis.len()];
    for _ in 0..2 {
        let wr: &[f64] = w;
        let h: Vec<f64> = par::map_slice(basis, |q| dot(q, wr));
        for (q, c) in basis.iter().zip(&h) {
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
        for (t, c) in total.iter_mut().zip(&h) {
            *t += c;
        }
    }
    total
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng, basis: &[Vec<f64>]) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| 1.0 + rng.random_range(-0.5..0.5)).collect();
        orthogonalize(basis, &mut v);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return v;
        }
    }
}

fn sorted_eigen(t: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// `k` lowest eigenpairs with residuals `≤ tol`.
pub fn lowest_eigenpairs(op: &DiscreteOperator, k: usize, tol: f64) -> Result<SpectrumResult> {
    lowest_eigenpairs_with(op, k, tol, SolverOptions::default())
}

pub fn lowest_eigenpairs_with(op: &DiscreteOperator, k: usize, tol: f64, opts: SolverOptions) -> Result<SpectrumResult> {
    let n = op.len();
    if k == 0 || k > 32 {
        return Err(param(format!("number of eigenpairs must lie in 1..=32, got {k}")));
    }
    if !(tol > 0.0) {
        return Err(param("solver tolerance must be positive"));
    }
    if k >= n {
        return Err(param("more eigenpairs requested than grid nodes"));
    }
    let start_apps = op.applications();
    let m = opts.basis_size.max(2 * k + 20).min(n - 1);
    let keep = (k + 8 + k / 2).min(m.saturating_sub(8)).max(k);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<Vec<f64>> = vec![random_unit(n, &mut rng, &[])];
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut p = 0usize;
    let mut w = vec![0.0; n];
    let breakdown = 1e-13 * op.norm_bound().max(1.0);
    let mut best: Vec<f64> = vec![f64::INFINITY; k];
    let weight_sqrt = op.grid().weight().sqrt();

    for _restart in 0..opts.max_restarts {
        let mut beta_last = 0.0;
        for j in p..m {
            op.apply(&q[j], &mut w);
            let h = orthogonalize(&q[..=j], &mut w);
            for (i, hi) in h.iter().enumerate() {
                t[(i, j)] = *hi;
                t[(j, i)] = *hi;
            }
            let beta = norm(&w);
            if beta < breakdown {
                // Invariant subspace found; continue with a fresh direction.
                let v = random_unit(n, &mut rng, &q);
                q.push(v);
                beta_last = 0.0;
            } else {
                q.push(w.iter().map(|x| x / beta).collect());
                beta_last = beta;
            }
            if j + 1 < m {
                t[(j + 1, j)] = beta_last;
                t[(j, j + 1)] = beta_last;
            }
        }
        let (theta, s) = sorted_eigen(t.clone());
        let estimates: Vec<f64> = (0..k).map(|i| (beta_last * s[(m - 1, i)]).abs()).collect();
        for (b, e) in best.iter_mut().zip(&estimates) {
            *b = b.min(*e);
        }
        let ritz = |i: usize| -> Vec<f64> {
            let mut y = vec![0.0; n];
            for (j, qj) in q.iter().take(m).enumerate() {
                let c = s[(j, i)];
                for (yi, qi) in y.iter_mut().zip(qj) {
                    *yi += c * qi;
                }
            }
            y
        };
        if estimates.iter().all(|e| *e <= 0.5 * tol) {
            let vectors: Vec<Vec<f64>> = par::map_range(k, ritz);
            let mut phis: Vec<Vec<f64>> = vectors.into_iter().map(|y| y.into_iter().map(|v| v / weight_sqrt).collect()).collect();
            fix_signs(&mut phis);
            let residuals = explicit_residuals(op, &theta[..k], &phis);
            if residuals.iter().all(|r| *r <= tol) {
                return Ok(finish(op, theta[..k].to_vec(), phis, residuals, tol, op.applications() - start_apps));
            }
        }
        // Thick restart: keep the lowest Ritz vectors plus the residual direction.
        let kept: Vec<Vec<f64>> = par::map_range(keep, ritz);
        let residual_dir = q.pop().expect("basis holds m + 1 vectors");
        q = kept;
        q.push(residual_dir);
        t.fill(0.0);
        for i in 0..keep {
            t[(i, i)] = theta[i];
            let c = beta_last * s[(m - 1, i)];
            t[(i, keep)] = c;
            t[(keep, i)] = c;
        }
        p = keep;
    }
    Err(Error::Convergence { iterations: op.applications() - start_apps, residuals: best })
}

fn fix_signs(phis: &mut [Vec<f64>]) {
    for (n, phi) in phis.iter_mut().enumerate() {
        let flip = if n == 0 {
            phi.iter().sum::<f64>() < 0.0
        } else {
            let (mut imax, mut vmax) = (0, 0.0f64);
            for (i, v) in phi.iter().enumerate() {
                // Ties are broken by the first index so the choice is deterministic.
                if v.abs() > vmax * (1.0 + 1e-9) {
                    imax = i;
                    vmax = v.abs();
                }
            }
            phi[imax] < 0.0
        };
        if flip {
            phi.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

fn explicit_residuals(op: &DiscreteOperator, lambdas: &[f64], phis: &[Vec<f64>]) -> Vec<f64> {
    let grid = *op.grid();
    par::map_range(phis.len(), |i| {
        let hp = op.apply_vec(&phis[i]);
        let r: Vec<f64> = hp.iter().zip(&phis[i]).map(|(a, b)| a - lambdas[i] * b).collect();
        grid_norm(&grid, &r)
    })
}

fn finish(
    op: &DiscreteOperator,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    tol: f64,
    applications: usize,
) -> SpectrumResult {
    let mut warnings = Vec::new();
    if eigenvalues.len() > 1 && eigenvalues[1] - eigenvalues[0] < 10.0 * tol {
        warnings.push(format!("ground state gap {:e} is below 10·tol; simplicity not resolved", eigenvalues[1] - eigenvalues[0]));
    }
    let min_phi0 = eigenvectors[0].iter().copied().fold(f64::INFINITY, f64::min);
    if min_phi0 <= 0.0 {
        warnings.push(format!("ground state is not strictly positive on the grid (min {min_phi0:e})"));
    }
    SpectrumResult {
        grid: *op.grid(),
        eigenvalues,
        eigenvectors,
        residuals,
        tolerance: tol,
        applications,
        warnings,
        multiplier: op.multiplier().to_vec(),
        potential: op.potential().to_vec(),
    }
}

/// Dense reference solve (assembles the full matrix; small grids only).
pub fn dense_eigenpairs(op: &DiscreteOperator, k: usize) -> Result<SpectrumResult> {
    let n = op.len();
    if n > 4096 {
        return Err(param("dense eigensolve is limited to 4096 nodes"));
    }
    if k == 0 || k > n {
        return Err(param("invalid number of eigenpairs"));
    }
    let (vals, vecs) = sorted_eigen(op.to_dense());
    let ws = op.grid().weight().sqrt();
    let mut phis: Vec<Vec<f64>> = (0..k).map(|i| (0..n).map(|r| vecs[(r, i)] / ws).collect()).collect();
    fix_signs(&mut phis);
    let residuals = explicit_residuals(op, &vals[..k], &phis);
    Ok(finish(op, vals[..k].to_vec(), phis, residuals, f64::NAN, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LevyModel, Potential};
    use crate::spectral::build_operator;

    #[test]
    fn matches_dense_on_small_grid() {
        let m = LevyModel::stable(1.0, 1).unwrap();
        let g = Grid::one_d(6.0, 64).unwrap();
        let op = build_operator(&m, &Potential::power(1.0, 2.0), &g).unwrap();
        let it = lowest_eigenpairs(&op, 6, 1e-9).unwrap();
        let dense = dense_eigenpairs(&op, 6).unwrap();
        for (a, b) in it.eigenvalues.iter().zip(&dense.eigenvalues) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(it.orthonormality_defect() < 1e-8);
        assert!(it.phi0().iter().all(|v| *v > 0.0));
    }

    #[test]
    fn harmonic_oscillator() {
        let g = Grid::one_d(20.0, 1024).unwrap();
        let op = DiscreteOperator::from_symbol(&g, |r| r * r, |x| x[0] * x[0]).unwrap();
        let s = lowest_eigenpairs(&op, 4, 1e-8).unwrap();
        for (n, l) in s.eigenvalues.iter().enumerate() {
            assert!((l - (2 * n + 1) as f64).abs() < 1e-3, "n={n} λ={l}");
        }
        assert!(s.residuals.iter().all(|r| *r <= 1e-8));
    }

    #[test]
    fn shift_moves_eigenvalues_only() {
        let m = LevyModel::stable(1.5, 1).unwrap();
        let g = Grid::one_d(8.0, 128).unwrap();
        let op = build_operator(&m, &Potential::power(1.0, 2.0), &g).unwrap();
        let a = lowest_eigenpairs(&op, 4, 1e-10).unwrap();
        let b = lowest_eigenpairs(&op.with_shift(3.0), 4, 1e-10).unwrap();
        for i in 0..4 {
            assert!((b.eigenvalues[i] - a.eigenvalues[i] - 3.0).abs() < 1e-9);
            let diff = a.eigenvectors[i].iter().zip(&b.eigenvectors[i]).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(diff < 1e-8, "mode {i} differs by {diff}");
        }
    }

    #[test]
    fn deterministic() {
        let m = LevyModel::stable(1.0, 1).unwrap();
        let g = Grid::one_d(10.0, 256).unwrap();
        let op = build_operator(&m, &Potential::power(1.0, 2.0), &g).unwrap();
        let a = lowest_eigenpairs(&op, 3, 1e-9).unwrap();
        let b = lowest_eigenpairs(&op, 3, 1e-9).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn rejects_bad_requests() {
        let g = Grid::one_d(5.0, 64).unwrap();
        let op = DiscreteOperator::from_symbol(&g, |r| r, |x| x[0] * x[0]).unwrap();
        assert!(lowest_eigenpairs(&op, 0, 1e-8).is_err());
        assert!(lowest_eigenpairs(&op, 33, 1e-8).is_err());
        assert!(lowest_eigenpairs(&op, 3, 0.0).is_err());
    }
}
