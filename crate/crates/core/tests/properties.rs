use std::sync::OnceLock;

use levykac::assumptions::{check_monotone_domination, check_ratio_regularity, SampleSpec};
use levykac::classify::{borderline_ratio, default_radii, free_energy, Annulus};
use levykac::models::{transition_density, JumpIntensity};
use levykac::montecarlo::{feynman_kac, PathConfig};
use levykac::spectral::{build_operator, grid_dot, grid_norm, lowest_eigenpairs};
use levykac::verify::{eigenfunction_domination, ground_state_envelope, Window};
use levykac::{DiscreteOperator, Grid, LevyModel, Potential, QuadratureSpec, SpectrumResult};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = LevyModel> {
    prop_oneof![
        (0.3..1.9f64).prop_map(|a| LevyModel::stable(a, 1).unwrap()),
        (1.0..1.9f64, 0.2..0.9f64).prop_map(|(a, b)| LevyModel::stable_mixture(1.0, a, 0.5, b, 1).unwrap()),
        (0.3..1.9f64, 0.1..2.0f64).prop_map(|(a, m)| LevyModel::relativistic(a, m, 1).unwrap()),
        (0.3..1.9f64).prop_map(|a| LevyModel::geometric_stable(a, 1).unwrap()),
        (0.3..1.9f64, 0.0..1.0f64).prop_map(|(a, b)| LevyModel::jump_diffusion(1.0, a, b, 1).unwrap()),
    ]
}

fn potential_strategy() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.1..3.0f64, 0.5..4.0f64).prop_map(|(c, p)| Potential::power(c, p)),
        (0.1..3.0f64, 0.5..3.0f64, 0.0..2.0f64).prop_map(|(c, p, q)| Potential::power_log(c, p, q)),
        (0.1..3.0f64).prop_map(Potential::log),
        (0.1..3.0f64).prop_map(Potential::log_log),
    ]
}

/// Flagship operator on a small grid, shared across cases.
fn flagship() -> &'static (DiscreteOperator, SpectrumResult) {
    static CELL: OnceLock<(DiscreteOperator, SpectrumResult)> = OnceLock::new();
    CELL.get_or_init(|| {
        let op = build_operator(&LevyModel::stable(1.0, 1).unwrap(), &Potential::power(1.0, 2.0), &Grid::one_d(20.0, 1024).unwrap()).unwrap();
        let spec = lowest_eigenpairs(&op, 6, 1e-10).unwrap();
        (op, spec)
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_and_intensity_are_even(m in model_strategy(), xi in 0.01..50.0f64, x in 0.01..50.0f64) {
        prop_assert_eq!(m.symbol(&[0.0]).unwrap(), 0.0);
        prop_assert_eq!(m.symbol(&[xi]).unwrap(), m.symbol(&[-xi]).unwrap());
        let nu = m.levy_density(&[x]).unwrap();
        prop_assert!(nu > 0.0);
        prop_assert_eq!(nu, m.levy_density(&[-x]).unwrap());
    }

    #[test]
    fn symbol_is_nondecreasing(m in model_strategy(), xi in 0.01..50.0f64, factor in 1.0..4.0f64) {
        prop_assert!(m.symbol_radial(xi * factor) >= m.symbol_radial(xi) * (1.0 - 1e-12));
    }

    #[test]
    fn potentials_are_radial_and_confining(v in potential_strategy(), x in 0.0..1e3f64) {
        prop_assert_eq!(v.eval(&[x]), v.eval(&[-x]));
        prop_assert!(v.radial(10.0 * x + 1e4) > v.radial(x));
    }

    #[test]
    fn empirical_constants_are_at_least_one(alpha in 0.3..1.9f64) {
        let m = LevyModel::stable(alpha, 1).unwrap();
        let sample = SampleSpec::default();
        let c1 = check_ratio_regularity(&m, 0.5, &sample).unwrap();
        let c2 = check_monotone_domination(&m, &sample).unwrap();
        prop_assert!(c1.constant >= 1.0);
        prop_assert!(c2.constant >= 1.0);
    }

    #[test]
    fn ratio_profile_is_scale_free(v in potential_strategy(), c in 0.1..10.0f64) {
        let m = LevyModel::stable(1.0, 1).unwrap();
        let radii = default_radii();
        let base = borderline_ratio(&m, &v, &radii).unwrap();
        let scaled = borderline_ratio(&m, &v.scaled(c), &radii).unwrap();
        for (a, b) in base.rows.iter().zip(&scaled.rows) {
            prop_assert!(rel_close(b.value, c * a.value, 1e-12));
        }
        prop_assert_eq!(base.trend, scaled.trend);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stable_density_scales(alpha in 0.6..1.8f64, t in 0.3..3.0f64, x in -8.0..8.0f64) {
        let m = LevyModel::stable(alpha, 1).unwrap();
        let q = QuadratureSpec::default();
        let lhs = transition_density(&m, t, &[x], &q).unwrap();
        let s = t.powf(-1.0 / alpha);
        let rhs = s * transition_density(&m, 1.0, &[s * x], &q).unwrap();
        prop_assert!(rel_close(lhs, rhs, 1e-6), "{} vs {}", lhs, rhs);
        prop_assert_eq!(lhs, transition_density(&m, t, &[-x], &q).unwrap());
    }

    #[test]
    fn free_energy_is_linear_in_the_potential(c in 0.1..5.0f64, t0 in 0.25..4.0f64) {
        let m = LevyModel::stable(1.0, 1).unwrap();
        let v = Potential::power(1.0, 2.0);
        let annuli = [Annulus::new(10.0, 20.0), Annulus::new(20.0, 40.0)];
        let q = QuadratureSpec::default();
        let base = free_energy(&m, &v, t0, &annuli, &q).unwrap();
        let scaled = free_energy(&m, &v.scaled(c), t0, &annuli, &q).unwrap();
        for (a, b) in base.rows.iter().zip(&scaled.rows) {
            prop_assert!(rel_close(b.energy, c * a.energy, 1e-8));
            prop_assert!(rel_close(b.entropy, a.entropy, 1e-12));
            prop_assert_eq!(b.free, b.energy - b.entropy);
        }
    }

    #[test]
    fn operator_is_symmetric(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let (op, _) = flagship();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..op.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..op.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let grid = op.grid();
        let lhs = grid_dot(grid, &op.apply_vec(&f), &g);
        let rhs = grid_dot(grid, &f, &op.apply_vec(&g));
        let scale = grid_norm(grid, &f) * grid_norm(grid, &g) * op.norm_bound();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
    }

    #[test]
    fn propagator_is_a_semigroup(seed in any::<u64>(), t in 0.05..1.5f64, s in 0.05..1.5f64) {
        use rand::{Rng, SeedableRng};
        let (op, _) = flagship();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..op.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        let direct = op.propagate(t + s, &f);
        let composed = op.propagate(t, &op.propagate(s, &f));
        let diff: Vec<f64> = direct.iter().zip(&composed).map(|(a, b)| a - b).collect();
        prop_assert!(grid_norm(op.grid(), &diff) <= 1e-8 * grid_norm(op.grid(), &f));
        // Positivity preserving.
        prop_assert!(direct.iter().all(|&u| u > -1e-12));
    }

    #[test]
    fn envelope_is_normalization_free(c in 0.01..100.0f64) {
        let (_, spec) = flagship();
        let m = LevyModel::stable(1.0, 1).unwrap();
        let v = Potential::power(1.0, 2.0);
        let w = Window::new(4.0, 12.0);
        let base = ground_state_envelope(spec, &m, &v, &w).unwrap();
        let mut scaled_spec = spec.clone();
        scaled_spec.eigenvectors[0].iter_mut().for_each(|p| *p *= c);
        let scaled = ground_state_envelope(&scaled_spec, &m, &v, &w).unwrap();
        prop_assert!(rel_close(base.spread, scaled.spread, 1e-12));
        prop_assert!(rel_close(base.decay.slope, scaled.decay.slope, 1e-9));
        for (a, b) in base.rows.iter().zip(&scaled.rows) {
            prop_assert!(rel_close(b.ratio, c * a.ratio, 1e-12));
        }
    }

    #[test]
    fn monte_carlo_ignores_worker_count(seed in any::<u64>(), workers in 2usize..9) {
        let m = LevyModel::stable(1.0, 1).unwrap();
        let v = Potential::power(1.0, 2.0);
        let cfg = PathConfig { dt: 2e-2, n_paths: 400, seed, workers: Some(1), ..PathConfig::default() };
        let one = feynman_kac(&m, &v, 1.0, &[0.3], &cfg).unwrap();
        let many = feynman_kac(&m, &v, 1.0, &[0.3], &PathConfig { workers: Some(workers), ..cfg }).unwrap();
        prop_assert_eq!(one.mean.to_bits(), many.mean.to_bits());
        prop_assert_eq!(one.stderr.to_bits(), many.stderr.to_bits());
        prop_assert!(one.stderr >= 0.0);
    }

    #[test]
    fn zero_potential_weight_is_exactly_one(seed in any::<u64>(), steps in 5u32..100) {
        let t = 0.02 * steps as f64;
        let m = LevyModel::stable(1.2, 1).unwrap();
        let cfg = PathConfig { dt: 2e-2, horizon: 2.0, n_paths: 200, seed, ..PathConfig::default() };
        let est = feynman_kac(&m, &Potential::constant(0.0), t, &[0.0], &cfg).unwrap();
        prop_assert_eq!(est.mean, 1.0);
        prop_assert_eq!(est.stderr, 0.0);
    }
}

#[test]
fn ground_state_dominates_itself_exactly() {
    let (_, spec) = flagship();
    let report = eigenfunction_domination(spec, 0, &Window::new(2.0, 12.0)).unwrap();
    assert_eq!(report.sup, 1.0);
}

#[test]
fn spectrum_invariants_hold() {
    let (_, spec) = flagship();
    assert!(spec.phi0().iter().all(|&p| p > 0.0));
    assert!(spec.orthonormality_defect() < 1e-8);
    assert!(spec.eigenvalues[0] < spec.eigenvalues[1]);
    assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    assert!(spec.residuals.iter().all(|&r| r <= spec.tolerance));
}

#[test]
fn intensity_trait_is_object_safe() {
    let m = LevyModel::stable(1.0, 1).unwrap();
    let nu: &dyn JumpIntensity = &m;
    assert!((nu.ln_nu_radial(3.0) - m.nu_radial(3.0).ln()).abs() < 1e-12);
}
