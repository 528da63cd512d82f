//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any fails.

use std::f64::consts::PI;
use std::time::Instant;

use levykac::assumptions::{check_convolution_condition, convolution_ratio};
use levykac::classify::{classify, free_energy, Class, ClassificationReport, ClassifyOptions};
use levykac::models::{borderline_potential, density_sup, total_mass, transition_density, verify_levy_khintchine};
use levykac::montecarlo::{feynman_kac, green_mc, survival, Ball, PathConfig, Region};
use levykac::spectral::{build_operator, dense_eigenpairs, interpolate, lowest_eigenpairs, semigroup_apply};
use levykac::verify::{domination_change, eigenfunction_domination, ground_state_envelope, green_sandwich, Window};
use levykac::{DiscreteOperator, Grid, LevyModel, Potential, QuadratureSpec, SpectrumResult, Verdict};

type Check = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn cauchy() -> LevyModel {
    LevyModel::stable(1.0, 1).unwrap()
}

fn spectrum(model: &LevyModel, v: &Potential, points: usize, half_width: f64, k: usize) -> Result<SpectrumResult, String> {
    let grid = Grid::one_d(half_width, points).map_err(err)?;
    lowest_eigenpairs(&build_operator(model, v, &grid).map_err(err)?, k, 1e-9).map_err(err)
}

fn symbol_consistency() -> Check {
    let q = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.5] {
        let m = LevyModel::stable(alpha, 1).map_err(err)?;
        for xi in [0.5, 1.0, 2.0, 5.0] {
            worst = worst.max(verify_levy_khintchine(&m, xi, &q).map_err(err)?);
        }
    }
    Ok((worst < 1e-3, format!("max residual {worst:.2e} (< 1e-3)")))
}

fn density_oracle() -> Check {
    let (m, q) = (cauchy(), QuadratureSpec::default());
    let mut worst_rel: f64 = 0.0;
    let mut worst_mass: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        for i in 0..=40 {
            let x = -10.0 + 0.5 * i as f64;
            let exact = t / (PI * (t * t + x * x));
            let got = transition_density(&m, t, &[x], &q).map_err(err)?;
            worst_rel = worst_rel.max((got - exact).abs() / exact);
        }
        worst_mass = worst_mass.max((total_mass(&m, t, 1000.0, &q).map_err(err)?.total - 1.0).abs());
    }
    Ok((worst_rel < 1e-4 && worst_mass < 1e-6, format!("max relative error {worst_rel:.2e} (< 1e-4), |mass - 1| {worst_mass:.2e} (< 1e-6)")))
}

fn convolution_condition() -> Check {
    let q = QuadratureSpec::default();
    let m = cauchy();
    let (k20, k30) = (convolution_ratio(&m, 20.0, &q).k, convolution_ratio(&m, 30.0, &q).k);
    let change = (k30 - k20).abs() / k20;
    let tempered = LevyModel::tempered(1.0, 2.0, 1.0, 2.0, 1).map_err(err)?;
    let (t2, t20) = (convolution_ratio(&tempered, 2.0, &q).k, convolution_ratio(&tempered, 20.0, &q).k);
    let entry = check_convolution_condition(&tempered, &[2.0, 5.0, 10.0, 15.0, 20.0], &q).map_err(err)?;
    let pass = change < 0.1 && t20 / t2 > 1e3 && entry.verdict == Verdict::FailDivergent;
    Ok((
        pass,
        format!(
            "Cauchy |K(30)-K(20)|/K(20) = {change:.3} (< 0.1); tempered K(20)/K(2) = {:.2e} (> 1e3), verdict {}",
            t20 / t2,
            entry.verdict
        ),
    ))
}

fn envelope(base: &SpectrumResult, wide: &SpectrumResult) -> Check {
    let (m, v) = (cauchy(), Potential::power(1.0, 2.0));
    let w = Window::new(5.0, 15.0);
    let report = ground_state_envelope(base, &m, &v, &w).map_err(err)?;
    let refined = ground_state_envelope(wide, &m, &v, &w).map_err(err)?;
    let report = report.with_refinement(&refined);
    let change = report.refinement.as_ref().map_or(f64::INFINITY, |r| r.change_factor);
    let slope = report.decay.slope;
    let pass = report.spread < 50.0 && change < 2.0 && (slope + 4.0).abs() <= 0.3;
    Ok((pass, format!("spread {:.3} (< 50), change under L -> 80 x{change:.3} (< 2), decay exponent {slope:.3} (-4 +- 0.3)", report.spread)))
}

fn domination(base: &SpectrumResult, fine: &SpectrumResult) -> Check {
    let w = Window::new(5.0, 15.0);
    let mut worst: f64 = 0.0;
    let mut finite = true;
    let mut sups = Vec::new();
    for n in 1..=5 {
        let coarse = eigenfunction_domination(base, n, &w).map_err(err)?;
        let refined = eigenfunction_domination(fine, n, &w).map_err(err)?;
        finite &= coarse.sup.is_finite() && refined.sup.is_finite();
        worst = worst.max(domination_change(&coarse, &refined));
        sups.push(format!("{:.3}", coarse.sup));
    }
    Ok((finite && worst < 0.2, format!("sup|phi_n|/phi_0 = [{}], max change under N -> 8192 {worst:.2e} (< 0.2)", sups.join(", "))))
}

fn solver_oracle() -> Check {
    let (m, v) = (cauchy(), Potential::power(1.0, 2.0));
    let op = build_operator(&m, &v, &Grid::one_d(8.0, 64).map_err(err)?).map_err(err)?;
    let dense = dense_eigenpairs(&op, 6).map_err(err)?;
    let lanczos = lowest_eigenpairs(&op, 6, 1e-12).map_err(err)?;
    let gap = dense.eigenvalues.iter().zip(&lanczos.eigenvalues).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let grid = Grid::one_d(12.0, 512).map_err(err)?;
    let ho = DiscreteOperator::from_symbol(&grid, |rho| rho * rho, |x| x[0] * x[0]).map_err(err)?;
    let ho = lowest_eigenpairs(&ho, 4, 1e-10).map_err(err)?;
    let ho_err = ho.eigenvalues.iter().enumerate().map(|(n, l)| (l - (2 * n + 1) as f64).abs()).fold(0.0, f64::max);
    Ok((gap < 1e-8 && ho_err < 1e-3, format!("dense vs Lanczos at N = 64 {gap:.2e} (< 1e-8), oscillator max |lambda_n - (2n+1)| {ho_err:.2e} (< 1e-3)")))
}

fn classify_config(model: &LevyModel, v: &Potential) -> Result<ClassificationReport, String> {
    let base = spectrum(model, v, 4096, 40.0, 6)?;
    let doubled = spectrum(model, v, 8192, 80.0, 6)?;
    classify(model, v, &base, &doubled, &ClassifyOptions::default(), &QuadratureSpec::default()).map_err(err)
}

fn classification_triangle(quadratic: &ClassificationReport) -> Check {
    let m = cauchy();
    let q = QuadratureSpec::default();
    let opts = ClassifyOptions::default();

    let a = quadratic.routes.agreed() == Some(Class::Gsd) && quadratic.free_energy.iter().all(|r| r.all_nonnegative());

    let border = borderline_potential(&m, 1.0, 2.0).map_err(err)?;
    let b_report = classify_config(&m, &border)?;
    let at_one = free_energy(&m, &border, 1.0, &opts.annuli, &q).map_err(err)?;
    let flat = at_one.rows.iter().map(|r| r.free.abs() / r.energy.abs().max(r.entropy.abs())).fold(0.0, f64::max);
    let at_two = free_energy(&m, &border, 2.0, &opts.annuli, &q).map_err(err)?;
    let positive = at_two.rows.iter().all(|r| r.free > 0.0);
    let b = b_report.routes.agreed() == Some(Class::AgsdOnly) && flat < 1e-8 && positive;

    let c_report = classify_config(&m, &Potential::log_log(1.0))?;
    let c = c_report.routes.agreed() == Some(Class::NotAgsd) && c_report.free_energy.iter().all(|r| r.outer_negative());

    Ok((
        a && b && c,
        format!(
            "x^2: {} ({:?}); borderline: {} (max |F|/max(E,H) at t0=1 {flat:.1e}, F > 0 at t0=2: {positive}); loglog: {} ({:?})",
            quadratic.verdict, quadratic.routes, b_report.verdict, c_report.verdict, c_report.routes
        ),
    ))
}

fn geometric_stable() -> Check {
    let m = LevyModel::geometric_stable(1.0, 1).map_err(err)?;
    let (small, reference) = (density_sup(&m, 0.1).map_err(err)?, density_sup(&m, 1.0).map_err(err)?);
    let report = classify_config(&m, &Potential::power(1.0, 2.0))?;
    let pass = small.value > 10.0 * reference.value && !report.ultracontractivity.bounded && report.verdict.label() == "GSD, not IUC";
    Ok((
        pass,
        format!(
            "sup p(0.1) = {:.3e} vs 10 x sup p(1) = {:.3e}; flag {}; verdict {}",
            small.value,
            10.0 * reference.value,
            report.ultracontractivity.bounded,
            report.verdict
        ),
    ))
}

fn mc_cross_validation() -> Check {
    let (m, v) = (cauchy(), Potential::power(1.0, 2.0));
    let spec = spectrum(&m, &v, 4096, 40.0, 32)?;
    let ones = vec![1.0; spec.grid.len()];
    let semigroup = semigroup_apply(&spec, 1.0, &ones);
    let cfg = PathConfig { dt: 1e-3, n_paths: 100_000, seed: 7, ..PathConfig::default() };
    let mut pass = semigroup.truncation_estimate < 1e-5;
    let mut parts = Vec::new();
    for x in [0.0, 2.0, 5.0] {
        let spectral = interpolate(&spec.grid, &semigroup.values, x);
        let est = feynman_kac(&m, &v, 1.0, &[x], &cfg).map_err(err)?;
        let z = (est.mean - spectral).abs() / est.stderr;
        pass &= z <= 3.0;
        parts.push(format!("x={x}: {:.5} vs {spectral:.5} ({z:.2} se)", est.mean));
    }
    let cheap = PathConfig { n_paths: 2_000, ..cfg };
    for c in [0.5, 1.0, 2.0] {
        let est = feynman_kac(&m, &Potential::constant(c), 1.0, &[0.0], &cheap).map_err(err)?;
        pass &= (est.mean - (-c).exp()).abs() <= (3.0 * est.stderr).max(1e-12);
    }
    parts.push(format!("spectral tail {:.1e}, V = c sanity ok: {pass}", semigroup.truncation_estimate));
    Ok((pass, parts.join("; ")))
}

fn green_sandwich_check() -> Check {
    let (m, v) = (cauchy(), Potential::power(1.0, 2.0));
    let d = Ball::new(vec![10.0], 1.0);
    let cfg = PathConfig { dt: 1e-3, n_paths: 20_000, horizon: 2.0, seed: 3, ..PathConfig::default() };
    let sandwich = green_sandwich(&m, &v, &[10.0], &d, &cfg).map_err(err)?;
    let g = green_mc(&m, &v, &Region::ball(vec![10.0], 1.0), &[10.0], &cfg).map_err(err)?;
    Ok((
        sandwich.contains(&g, 3.0),
        format!("G = {:.5} +- {:.1e} in [{:.5}, {:.5}]", g.mean, g.stderr, sandwich.lower, sandwich.upper),
    ))
}

fn reproducibility() -> Check {
    let (m, v) = (cauchy(), Potential::power(1.0, 2.0));
    let region = Region::ball(vec![0.0], 3.0);
    let records = |workers: usize| -> Result<String, String> {
        let cfg = PathConfig { dt: 1e-2, n_paths: 5_000, horizon: 2.0, seed: 11, workers: Some(workers), ..PathConfig::default() };
        let estimates = vec![
            feynman_kac(&m, &v, 1.0, &[0.5], &cfg).map_err(err)?,
            survival(&m, &region, 1.0, &[0.5], &cfg).map_err(err)?,
            green_mc(&m, &v, &region, &[0.5], &cfg).map_err(err)?,
        ];
        serde_json::to_string(&estimates).map_err(err)
    };
    let one = records(1)?;
    let same = [4, 8].iter().map(|&w| records(w)).collect::<Result<Vec<_>, _>>()?.iter().all(|r| *r == one);
    Ok((same, format!("{} bytes of records identical across 1, 4, 8 workers: {same}", one.len())))
}

fn main() {
    let start = Instant::now();
    let mut failures = 0;
    let mut report = |id: usize, name: &str, t: Instant, outcome: Check| {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += usize::from(!pass);
        println!("[{}] {id:>2}. {name}: {detail} ({:.1} s)", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    };

    let t = Instant::now();
    report(1, "symbol consistency", t, symbol_consistency());
    let t = Instant::now();
    report(2, "Cauchy density oracle", t, density_oracle());
    let t = Instant::now();
    report(3, "convolution condition", t, convolution_condition());

    let (m, v) = (cauchy(), Potential::power(1.0, 2.0));
    let t = Instant::now();
    let spectra = (|| Ok::<_, String>((spectrum(&m, &v, 4096, 40.0, 6)?, spectrum(&m, &v, 8192, 80.0, 6)?, spectrum(&m, &v, 8192, 40.0, 6)?)))();
    match &spectra {
        Ok((base, wide, fine)) => {
            report(4, "ground-state envelope", t, envelope(base, wide));
            let t = Instant::now();
            report(5, "eigenfunction domination", t, domination(base, fine));
        }
        Err(e) => {
            report(4, "ground-state envelope", t, Err(e.clone()));
            report(5, "eigenfunction domination", t, Err(e.clone()));
        }
    }
    let t = Instant::now();
    report(6, "solver oracle", t, solver_oracle());
    let t = Instant::now();
    let quadratic = match &spectra {
        Ok((base, wide, _)) => classify(&m, &v, base, wide, &ClassifyOptions::default(), &QuadratureSpec::default()).map_err(err),
        Err(e) => Err(e.clone()),
    };
    report(7, "classification triangle", t, quadratic.and_then(|q| classification_triangle(&q)));
    let t = Instant::now();
    report(8, "GSD without IUC", t, geometric_stable());
    let t = Instant::now();
    report(9, "Monte Carlo vs spectral", t, mc_cross_validation());
    let t = Instant::now();
    report(10, "Green sandwich", t, green_sandwich_check());
    let t = Instant::now();
    report(11, "reproducibility", t, reproducibility());

    println!("acceptance: {} of 11 criteria failed ({:.1} s)", failures, start.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
