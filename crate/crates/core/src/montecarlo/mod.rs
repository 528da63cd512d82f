//! Path sampling and Monte Carlo estimators of Feynman–Kac functionals.
//!
//! Path `i` draws from a ChaCha8 generator seeded with the master seed on
//! stream `i`, and per-path results are reduced in index order by pairwise
//! summation, so estimates are bit-identical for any number of workers.

mod sampler;

pub use sampler::{positive_stable, standard_stable_1d, IncrementSampler};

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{param, Error, Result};
use crate::models::{LevyModel, Potential};
use crate::par;
use crate::stats::{linear_fit, mean_stderr};

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub dt: f64,
    /// Horizon for estimators without a natural end time (Green operator).
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Worker count hint; never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Re-run the estimator at `Δt/2` and report the shift.
    #[serde(default)]
    pub halving_check: bool,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self { dt: 1e-3, horizon: 1.0, n_paths: 10_000, seed: 1, workers: None, halving_check: false }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(param("time step must be positive"));
        }
        if !(self.horizon >= self.dt) {
            return Err(param("horizon must be at least one time step"));
        }
        if self.n_paths < 100 {
            return Err(param("at least 100 paths are required"));
        }
        Ok(())
    }

    fn halved(&self) -> Self {
        Self { dt: 0.5 * self.dt, halving_check: false, ..*self }
    }
}

/// Result of a Δt-halving re-run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Halving {
    pub mean: f64,
    pub stderr: f64,
    /// `|mean(Δt) − mean(Δt/2)|` in combined standard errors.
    pub shift_in_se: f64,
}

/// A Monte Carlo estimate, serialized as one JSON record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimator: String,
    pub inputs: Value,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halved: Option<Halving>,
}

impl McEstimate {
    fn from_samples(estimator: &str, inputs: Value, samples: &[f64], cfg: &PathConfig) -> Self {
        let (mean, stderr) = mean_stderr(samples);
        Self { estimator: estimator.into(), inputs, mean, stderr, n: samples.len(), dt: cfg.dt, seed: cfg.seed, note: None, halved: None }
    }

    fn with_halving(mut self, other: &McEstimate) -> Self {
        let se = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        let shift = (self.mean - other.mean).abs();
        let shift_in_se = if se > 0.0 { shift / se } else if shift == 0.0 { 0.0 } else { f64::INFINITY };
        self.halved = Some(Halving { mean: other.mean, stderr: other.stderr, shift_in_se });
        self
    }
}

/// Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 < self.radius * self.radius
    }

    /// Range of `|y|` over the ball.
    pub fn radial_range(&self) -> (f64, f64) {
        let c = crate::models::norm(&self.center);
        ((c - self.radius).max(0.0), c + self.radius)
    }
}

/// Finite union of open balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub balls: Vec<Ball>,
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Self { balls: vec![Ball::new(center, radius)] }
    }

    pub fn union(mut self, other: Region) -> Self {
        self.balls.extend(other.balls);
        self
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.balls.iter().any(|b| b.contains(x))
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.balls.is_empty() {
            return Err(param("region must contain at least one ball"));
        }
        if self.balls.iter().any(|b| b.center.len() != dim || !(b.radius > 0.0)) {
            return Err(param("region balls need positive radius and matching dimension"));
        }
        Ok(())
    }
}

fn steps_for(t: f64, dt: f64) -> Result<usize> {
    if !(t >= 0.0) {
        return Err(param("time must be non-negative"));
    }
    let k = (t / dt).round();
    if (k * dt - t).abs() > 1e-9 * t.max(dt) {
        return Err(param(format!("time {t} is not a multiple of the step {dt}")));
    }
    Ok(k as usize)
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Walks path `index` for up to `steps` steps, calling `visit(k, X_k)` for
/// `k = 0, 1, …`; stops early when `visit` returns `false`.
///
/// Positions are `start + S_k` with `S_k` the running increment sum, so the
/// same path from another start is an exact translate.
fn walk<F>(sampler: &IncrementSampler, seed: u64, index: usize, start: &[f64], steps: usize, mut visit: F)
where
    F: FnMut(usize, &[f64]) -> bool,
{
    let dim = start.len();
    let mut rng = path_rng(seed, index);
    let mut sum = [0.0f64; 2];
    let mut inc = [0.0f64; 2];
    let mut pos = [0.0f64; 2];
    pos[..dim].copy_from_slice(start);
    if !visit(0, &pos[..dim]) {
        return;
    }
    for k in 1..=steps {
        sampler.sample(&mut rng, &mut inc[..dim]);
        for i in 0..dim {
            sum[i] += inc[i];
            pos[i] = start[i] + sum[i];
        }
        if !visit(k, &pos[..dim]) {
            return;
        }
    }
}

fn check_start(model: &LevyModel, x: &[f64]) -> Result<()> {
    if x.len() != model.dim {
        return Err(Error::Domain(format!("start point must be {}-dimensional", model.dim)));
    }
    Ok(())
}

/// Discrete path `X_0 = start, X_{Δt}, …, X_{horizon}` on stream `stream`.
pub fn sample_path(model: &LevyModel, cfg: &PathConfig, start: &[f64], stream: u64) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    check_start(model, start)?;
    let sampler = IncrementSampler::new(model, cfg.dt)?;
    let steps = steps_for(cfg.horizon, cfg.dt)?;
    let mut out = Vec::with_capacity(steps + 1);
    walk(&sampler, cfg.seed, stream as usize, start, steps, |_, x| {
        out.push(x.to_vec());
        true
    });
    Ok(out)
}

/// Writes `n` sampled paths as CSV rows `path,step,t,x[,y]` (debugging aid).
pub fn write_path_traces<W: Write>(model: &LevyModel, cfg: &PathConfig, start: &[f64], n: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["path".to_string(), "step".into(), "t".into(), "x".into()];
    if model.dim == 2 {
        header.push("y".into());
    }
    w.write_record(&header)?;
    for p in 0..n {
        let path = sample_path(model, cfg, start, p as u64)?;
        for (k, x) in path.iter().enumerate() {
            let mut row = vec![p.to_string(), k.to_string(), format!("{}", k as f64 * cfg.dt)];
            row.extend(x.iter().map(|v| format!("{v}")));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-path results in index order, on `cfg.workers` threads when given.
fn paths<T, F>(cfg: &PathConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    par::with_workers(cfg.workers, || par::map_range(cfg.n_paths, f))
}

fn fk_samples(sampler: &IncrementSampler, v: &Potential, t: f64, x: &[f64], cfg: &PathConfig) -> Result<Vec<f64>> {
    let steps = steps_for(t, cfg.dt)?;
    let dt = cfg.dt;
    Ok(paths(cfg, |i| {
        let mut integral = 0.0;
        let mut prev = 0.0;
        walk(sampler, cfg.seed, i, x, steps, |k, pos| {
            let val = v.eval(pos);
            if k > 0 {
                integral += 0.5 * dt * (prev + val);
            }
            prev = val;
            true
        });
        (-integral).exp()
    }))
}

/// `T_t 1(x) = E^x[e^{-∫₀ᵗ V(X_s) ds}]` with the trapezoid rule along the path.
pub fn feynman_kac(model: &LevyModel, v: &Potential, t: f64, x: &[f64], cfg: &PathConfig) -> Result<McEstimate> {
    cfg.validate()?;
    check_start(model, x)?;
    let inputs = json!({"model": model, "potential": v.to_spec(), "t": t, "x": x});
    let run = |c: &PathConfig| -> Result<McEstimate> {
        let sampler = IncrementSampler::new(model, c.dt)?;
        Ok(McEstimate::from_samples("feynman_kac", inputs.clone(), &fk_samples(&sampler, v, t, x, c)?, c))
    };
    let est = run(cfg)?;
    if cfg.halving_check {
        let h = run(&cfg.halved())?;
        return Ok(est.with_halving(&h));
    }
    Ok(est)
}

/// `P^x(τ_D > t)` from discrete monitoring (biased upward: excursions
/// between monitoring times are missed).
pub fn survival(model: &LevyModel, d: &Region, t: f64, x: &[f64], cfg: &PathConfig) -> Result<McEstimate> {
    cfg.validate()?;
    check_start(model, x)?;
    d.validate(model.dim)?;
    if !d.contains(x) {
        return Err(Error::Domain("start point must lie in D".into()));
    }
    let inputs = json!({"model": model, "D": d, "t": t, "x": x});
    let run = |c: &PathConfig| -> Result<McEstimate> {
        let sampler = IncrementSampler::new(model, c.dt)?;
        let steps = steps_for(t, c.dt)?;
        let samples = paths(c, |i| {
            let mut alive = true;
            walk(&sampler, c.seed, i, x, steps, |_, pos| {
                alive = d.contains(pos);
                alive
            });
            if alive {
                1.0
            } else {
                0.0
            }
        });
        let mut e = McEstimate::from_samples("survival", inputs.clone(), &samples, c);
        e.note = Some("discrete monitoring overestimates survival (one-sided bias)".into());
        Ok(e)
    };
    let est = run(cfg)?;
    if cfg.halving_check {
        let h = run(&cfg.halved())?;
        return Ok(est.with_halving(&h));
    }
    Ok(est)
}

/// `G^V_D 1(x) = E^x[∫₀^{τ_D} e^{-∫₀ᵗ V(X_s) ds} dt]`, truncated at the
/// configured horizon.
pub fn green_mc(model: &LevyModel, v: &Potential, d: &Region, x: &[f64], cfg: &PathConfig) -> Result<McEstimate> {
    cfg.validate()?;
    check_start(model, x)?;
    d.validate(model.dim)?;
    if !d.contains(x) {
        return Err(Error::Domain("start point must lie in D".into()));
    }
    let inputs = json!({"model": model, "potential": v.to_spec(), "D": d, "x": x, "horizon": cfg.horizon});
    let run = |c: &PathConfig| -> Result<McEstimate> {
        let sampler = IncrementSampler::new(model, c.dt)?;
        let steps = steps_for(c.horizon, c.dt)?;
        let dt = c.dt;
        let samples = paths(c, |i| {
            let mut integral = 0.0;
            let mut prev_v = 0.0;
            let mut prev_w = 1.0;
            let mut occupation = 0.0;
            walk(&sampler, c.seed, i, x, steps, |k, pos| {
                let val = v.eval(pos);
                if k == 0 {
                    prev_v = val;
                    return true;
                }
                if !d.contains(pos) {
                    return false;
                }
                integral += 0.5 * dt * (prev_v + val);
                let w = (-integral).exp();
                occupation += 0.5 * dt * (prev_w + w);
                prev_v = val;
                prev_w = w;
                // Remaining contributions are below double precision.
                w > 1e-18
            });
            occupation
        });
        let mut e = McEstimate::from_samples("green_mc", inputs.clone(), &samples, c);
        e.note = Some(format!("occupation truncated at horizon {}", c.horizon));
        Ok(e)
    };
    let est = run(cfg)?;
    if cfg.halving_check {
        let h = run(&cfg.halved())?;
        return Ok(est.with_halving(&h));
    }
    Ok(est)
}

/// One sampled start point of [`survival_ratio`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub x: Vec<f64>,
    /// `E^x[e_V(t); X_t ∈ A]`.
    pub numerator: McEstimate,
    /// `E^x[e_V(t); X_t ∈ D]`.
    pub denominator: McEstimate,
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// Paths (unweighted) ending in `D`.
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    pub max_ratio: f64,
    /// Slope of `log ratio` against `log |x|`.
    pub growth_slope: f64,
}

/// Ratio `E^x[e_V(t); X_t ∈ A] / E^x[e_V(t); X_t ∈ D]` at each sample point,
/// with both expectations taken over the same paths.
pub fn survival_ratio(
    model: &LevyModel,
    v: &Potential,
    t: f64,
    d: &Region,
    a: &Region,
    xs: &[Vec<f64>],
    cfg: &PathConfig,
) -> Result<RatioReport> {
    cfg.validate()?;
    d.validate(model.dim)?;
    a.validate(model.dim)?;
    let sampler = IncrementSampler::new(model, cfg.dt)?;
    let steps = steps_for(t, cfg.dt)?;
    let dt = cfg.dt;
    let mut rows = Vec::with_capacity(xs.len());
    for x in xs {
        check_start(model, x)?;
        // (weight in A, weight in D, landed in D)
        let per_path: Vec<(f64, f64, bool)> = paths(cfg, |i| {
            let mut integral = 0.0;
            let mut prev = 0.0;
            let mut end = [0.0; 2];
            walk(&sampler, cfg.seed, i, x, steps, |k, pos| {
                let val = v.eval(pos);
                if k > 0 {
                    integral += 0.5 * dt * (prev + val);
                }
                prev = val;
                if k == steps {
                    end[..pos.len()].copy_from_slice(pos);
                }
                true
            });
            let end = &end[..x.len()];
            let w = (-integral).exp();
            let in_d = d.contains(end);
            (if a.contains(end) { w } else { 0.0 }, if in_d { w } else { 0.0 }, in_d)
        });
        let hits = per_path.iter().filter(|p| p.2).count();
        if hits < 10 {
            return Err(Error::InsufficientStatistics { x: x.clone(), hits });
        }
        let na: Vec<f64> = per_path.iter().map(|p| p.0).collect();
        let nd: Vec<f64> = per_path.iter().map(|p| p.1).collect();
        let inputs = json!({"model": model, "potential": v.to_spec(), "t": t, "x": x, "A": a, "D": d});
        let numerator = McEstimate::from_samples("survival_ratio_numerator", inputs.clone(), &na, cfg);
        let denominator = McEstimate::from_samples("survival_ratio_denominator", inputs, &nd, cfg);
        let ratio = numerator.mean / denominator.mean;
        // Delta method with the sample covariance of the paired samples.
        let n = na.len() as f64;
        let cov = na.iter().zip(&nd).map(|(p, q)| (p - numerator.mean) * (q - denominator.mean)).sum::<f64>() / (n - 1.0) / n;
        let var = (numerator.stderr.powi(2) - 2.0 * ratio * cov + ratio * ratio * denominator.stderr.powi(2)) / denominator.mean.powi(2);
        rows.push(RatioRow { x: x.clone(), numerator, denominator, ratio, ratio_stderr: var.max(0.0).sqrt(), hits });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let (lx, ly): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.ratio > 0.0 && crate::models::norm(&r.x) > 0.0)
        .map(|r| (crate::models::norm(&r.x).ln(), r.ratio.ln()))
        .unzip();
    let growth_slope = if lx.len() >= 2 { linear_fit(&lx, &ly).slope } else { 0.0 };
    Ok(RatioReport { rows, max_ratio, growth_slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cauchy() -> LevyModel {
        LevyModel::stable(1.0, 1).unwrap()
    }

    fn cfg(n: usize, dt: f64) -> PathConfig {
        PathConfig { dt, horizon: 1.0, n_paths: n, seed: 42, workers: None, halving_check: false }
    }

    #[test]
    fn zero_potential_gives_one() {
        let e = feynman_kac(&cauchy(), &Potential::constant(0.0), 0.5, &[0.0], &cfg(500, 0.01)).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn constant_potential() {
        for &c in &[0.5, 1.0, 2.0] {
            for &t in &[0.5, 1.0] {
                let e = feynman_kac(&cauchy(), &Potential::constant(c), t, &[0.3], &cfg(200, 0.01)).unwrap();
                assert!((e.mean - (-c * t).exp()).abs() <= (3.0 * e.stderr).max(1e-12));
            }
        }
    }

    #[test]
    fn translation() {
        let c = cfg(100, 0.01);
        let a = sample_path(&cauchy(), &c, &[0.0], 3).unwrap();
        let b = sample_path(&cauchy(), &c, &[2.5], 3).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(q[0], 2.5 + p[0]);
        }
    }

    #[test]
    fn survival_is_one_at_time_zero_and_decreasing() {
        let d = Region::ball(vec![0.0], 1.0);
        let c = cfg(4000, 0.01);
        let s0 = survival(&cauchy(), &d, 0.0, &[0.0], &c).unwrap();
        assert_eq!(s0.mean, 1.0);
        let s1 = survival(&cauchy(), &d, 0.3, &[0.0], &c).unwrap();
        let s2 = survival(&cauchy(), &d, 0.8, &[0.0], &c).unwrap();
        assert!(s2.mean <= s1.mean + 3.0 * (s1.stderr + s2.stderr));
    }

    #[test]
    fn green_with_constant_potential_below_inverse() {
        let d = Region::ball(vec![0.0], 1.0);
        let c = PathConfig { horizon: 5.0, ..cfg(2000, 0.01) };
        let g = green_mc(&cauchy(), &Potential::constant(2.0), &d, &[0.0], &c).unwrap();
        assert!(g.mean <= 0.5 + 3.0 * g.stderr);
        let tau = green_mc(&cauchy(), &Potential::constant(0.0), &d, &[0.0], &c).unwrap();
        assert!(g.mean <= tau.mean);
    }

    #[test]
    fn ratio_with_equal_sets_is_one() {
        let d = Region::ball(vec![0.0], 1.0);
        let r = survival_ratio(&cauchy(), &Potential::power(1.0, 2.0), 0.2, &d, &d, &[vec![0.5], vec![1.0]], &cfg(2000, 0.01)).unwrap();
        for row in &r.rows {
            assert_eq!(row.ratio, 1.0);
        }
    }

    #[test]
    fn ratio_reports_insufficient_statistics() {
        let d = Region::ball(vec![0.0], 0.01);
        let err = survival_ratio(&cauchy(), &Potential::constant(0.0), 0.1, &d, &d, &[vec![50.0]], &cfg(100, 0.01)).unwrap_err();
        assert!(matches!(err, Error::InsufficientStatistics { .. }));
    }

    #[test]
    fn estimate_json_record() {
        let e = feynman_kac(&cauchy(), &Potential::constant(1.0), 0.1, &[0.0], &cfg(100, 0.01)).unwrap();
        let v: Value = serde_json::to_value(&e).unwrap();
        for key in ["estimator", "inputs", "mean", "stderr", "n", "dt", "seed"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
