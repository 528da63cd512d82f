//! Checks of the eigenfunction estimates against a computed spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::models::{norm, JumpIntensity, LevyModel, Potential};
use crate::montecarlo::{green_mc, survival, Ball, McEstimate, PathConfig, Region};
use crate::spectral::{interpolate, SpectrumResult};
use crate::stats::{linear_fit, LinearFit};
use crate::Verdict;

/// Fraction of the half-width trusted against wrap-around effects.
pub const TRUSTED_FRACTION: f64 = 0.85;

/// Radial window `r_min ≤ |x| ≤ r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub r_min: f64,
    pub r_max: f64,
}

impl Window {
    pub fn new(r_min: f64, r_max: f64) -> Self {
        Self { r_min, r_max }
    }
}

/// Nodes of `window`, which must lie inside the trusted part of the grid.
pub fn window_nodes(spec: &SpectrumResult, window: &Window) -> Result<Vec<usize>> {
    let limit = TRUSTED_FRACTION * spec.grid.half_width;
    if !(window.r_min >= 0.0 && window.r_min < window.r_max) {
        return Err(Error::Window(format!("empty window [{}, {}]", window.r_min, window.r_max)));
    }
    if window.r_max > limit {
        return Err(Error::Window(format!(
            "window edge {} lies in the wrap-around zone (trusted up to {limit})",
            window.r_max
        )));
    }
    let nodes = spec.grid.window(window.r_min, window.r_max);
    if nodes.is_empty() {
        return Err(Error::Window("window contains no grid nodes".into()));
    }
    Ok(nodes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub x: Vec<f64>,
    pub phi0: f64,
    pub nu: f64,
    pub v: f64,
    /// `φ₀(x) V(x) / ν(x)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub spread_refined: f64,
    /// `max(s/s', s'/s)` for the two spreads.
    pub change_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub window: Window,
    pub rows: Vec<EnvelopeRow>,
    pub min: f64,
    pub max: f64,
    /// `max / min`.
    pub spread: f64,
    /// Fit of `log φ₀` against `log |x|`; the slope is the decay exponent.
    pub decay: LinearFit,
    pub spread_bound: f64,
    pub stability_factor: f64,
    pub refinement: Option<Refinement>,
    pub verdict: Verdict,
}

/// Thresholds for [`ground_state_envelope_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeOptions {
    pub spread_bound: f64,
    pub stability_factor: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self { spread_bound: 50.0, stability_factor: 2.0 }
    }
}

pub fn ground_state_envelope(spec: &SpectrumResult, model: &LevyModel, v: &Potential, window: &Window) -> Result<EnvelopeReport> {
    ground_state_envelope_with(spec, model, v, window, EnvelopeOptions::default())
}

/// Profile of `φ₀ V / ν` on the window. The verdict here reflects the spread
/// bound only; [`EnvelopeReport::with_refinement`] adds the stability test.
pub fn ground_state_envelope_with(
    spec: &SpectrumResult,
    model: &LevyModel,
    v: &Potential,
    window: &Window,
    opts: EnvelopeOptions,
) -> Result<EnvelopeReport> {
    let nodes = window_nodes(spec, window)?;
    let phi0 = spec.phi0();
    let rows: Vec<EnvelopeRow> = nodes
        .iter()
        .map(|&i| {
            let x = spec.grid.point(i);
            let r = norm(&x);
            let nu = model.nu_radial(r);
            let vv = v.eval(&x);
            EnvelopeRow { x, phi0: phi0[i], nu, v: vv, ratio: phi0[i] * vv / nu }
        })
        .collect();
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let spread = if min > 0.0 { max / min } else { f64::INFINITY };
    let (lx, ly): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.phi0 > 0.0).map(|r| (norm(&r.x).ln(), r.phi0.ln())).unzip();
    let decay = linear_fit(&lx, &ly);
    let verdict = if spread.is_finite() && spread < opts.spread_bound { Verdict::Pass } else { Verdict::FailDivergent };
    Ok(EnvelopeReport {
        window: *window,
        rows,
        min,
        max,
        spread,
        decay,
        spread_bound: opts.spread_bound,
        stability_factor: opts.stability_factor,
        refinement: None,
        verdict,
    })
}

impl EnvelopeReport {
    /// Combines with the same envelope on a refined (e.g. `L → 2L`) grid.
    pub fn with_refinement(mut self, refined: &EnvelopeReport) -> Self {
        let change_factor = (self.spread / refined.spread).max(refined.spread / self.spread);
        self.refinement = Some(Refinement { spread_refined: refined.spread, change_factor });
        let stable = change_factor.is_finite() && change_factor < self.stability_factor;
        self.verdict = if self.verdict == Verdict::Pass && refined.verdict == Verdict::Pass && stable {
            Verdict::Pass
        } else {
            Verdict::FailDivergent
        };
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub n: usize,
    /// `sup |φₙ| / φ₀` over the window.
    pub sup: f64,
    pub sup_radius: f64,
    /// Largest ratio on the outermost window nodes.
    pub edge_value: f64,
    pub interior: bool,
}

/// `sup_{window} |φₙ(x)| / φ₀(x)`.
pub fn eigenfunction_domination(spec: &SpectrumResult, n: usize, window: &Window) -> Result<DominationReport> {
    if n >= spec.k() {
        return Err(param(format!("eigenfunction index {n} exceeds the {} computed pairs", spec.k())));
    }
    let nodes = window_nodes(spec, window)?;
    let (phi0, phin) = (spec.phi0(), &spec.eigenvectors[n]);
    let mut sup = 0.0f64;
    let mut sup_radius = 0.0;
    let r_edge = nodes.iter().map(|&i| spec.grid.radius(i)).fold(0.0f64, f64::max);
    let mut edge_value = 0.0f64;
    for &i in &nodes {
        let ratio = if n == 0 { 1.0 } else { phin[i].abs() / phi0[i] };
        let r = spec.grid.radius(i);
        if ratio > sup {
            sup = ratio;
            sup_radius = r;
        }
        if (r - r_edge).abs() <= 0.5 * spec.grid.spacing() {
            edge_value = edge_value.max(ratio);
        }
    }
    Ok(DominationReport { n, sup, sup_radius, edge_value, interior: edge_value < sup })
}

/// Relative change `|a − b| / a` of a domination supremum under refinement.
pub fn domination_change(coarse: &DominationReport, fine: &DominationReport) -> f64 {
    (coarse.sup - fine.sup).abs() / coarse.sup
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubaveragingReport {
    pub lambda: f64,
    /// `(t, min_x (e^{λt} T_t f − f)(x))` over the probe times.
    pub defects: Vec<(f64, f64)>,
    /// `sup_{window} f(x) / (‖f‖∞ ν(x))`.
    pub sup: f64,
    pub sup_radius: f64,
    pub verdict: Verdict,
}

/// Probe times of the subaveraging precondition.
pub const SUBAVERAGING_TIMES: [f64; 3] = [0.5, 1.0, 2.0];

/// Bound `f ≤ C ‖f‖∞ ν` for a λ-subaveraging `f`, after checking the
/// precondition with the exact discrete semigroup.
pub fn subaveraging_envelope(spec: &SpectrumResult, model: &LevyModel, lambda: f64, f: &[f64], window: &Window) -> Result<SubaveragingReport> {
    if f.len() != spec.grid.len() {
        return Err(param("grid function has the wrong length"));
    }
    if lambda < spec.lambda0() - 1e-9 * spec.lambda0().abs().max(1.0) {
        return Err(param(format!("λ = {lambda} is below λ₀ = {}", spec.lambda0())));
    }
    if f.iter().any(|v| *v < 0.0) {
        return Err(param("subaveraging functions are non-negative"));
    }
    let nodes = window_nodes(spec, window)?;
    let op = spec.operator()?;
    let sup_f = f.iter().copied().fold(0.0f64, f64::max);
    let threshold = -1e-8 * sup_f.max(1.0);
    let propagated = op.propagate_many(&SUBAVERAGING_TIMES, f);
    let mut defects = Vec::with_capacity(SUBAVERAGING_TIMES.len());
    for (t, tf) in SUBAVERAGING_TIMES.iter().zip(&propagated) {
        let g = (lambda * t).exp();
        let min_defect = tf.iter().zip(f).map(|(a, b)| g * a - b).fold(f64::INFINITY, f64::min);
        defects.push((*t, min_defect));
        if min_defect < threshold {
            return Err(Error::NotSubaveraging { t: *t, min_defect });
        }
    }
    let mut sup = 0.0f64;
    let mut sup_radius = 0.0;
    for &i in &nodes {
        let r = spec.grid.radius(i);
        let val = f[i] / (sup_f * model.nu_radial(r));
        if val > sup {
            sup = val;
            sup_radius = r;
        }
    }
    let verdict = if sup.is_finite() { Verdict::Pass } else { Verdict::FailDivergent };
    Ok(SubaveragingReport { lambda, defects, sup, sup_radius, verdict })
}

/// Two-sided bound on `G^V_D 1(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenSandwich {
    pub inf_v: f64,
    pub sup_v: f64,
    /// `1 / inf_D V` (infinite when the infimum is 0).
    pub upper: f64,
    /// `(1 − e^{−sup_D V}) P̂^x(τ_D > 1) / sup_D V` (0 when the supremum is infinite).
    pub lower: f64,
    pub lower_stderr: f64,
    pub survival: McEstimate,
}

impl GreenSandwich {
    /// Whether an estimate lies in `[lower, upper]` up to `k` standard errors.
    pub fn contains(&self, g: &McEstimate, k: f64) -> bool {
        let slack = k * (g.stderr + self.lower_stderr);
        g.mean >= self.lower - slack && g.mean <= self.upper + k * g.stderr
    }
}

fn potential_range(v: &Potential, d: &Ball) -> (f64, f64) {
    let (lo, hi) = d.radial_range();
    let n = 4001;
    (0..n)
        .map(|i| v.radial(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), val| (a.min(val), b.max(val)))
}

/// Sandwich `(1 − e^{−sup V}) P^x(τ_D > 1)/sup V ≤ G^V_D 1(x) ≤ 1/inf V`.
pub fn green_sandwich(model: &LevyModel, v: &Potential, x: &[f64], d: &Ball, cfg: &PathConfig) -> Result<GreenSandwich> {
    let (inf_v, sup_v) = potential_range(v, d);
    if inf_v < 0.0 {
        return Err(param("the sandwich needs V ≥ 0 on D"));
    }
    if sup_v == 0.0 {
        return Err(param("V vanishes identically on D"));
    }
    let upper = if inf_v > 0.0 { 1.0 / inf_v } else { f64::INFINITY };
    let region = Region { balls: vec![d.clone()] };
    let surv_cfg = PathConfig { horizon: 1.0_f64.max(cfg.dt), ..*cfg };
    let surv = survival(model, &region, 1.0, x, &surv_cfg)?;
    let factor = if sup_v.is_finite() { -(-sup_v).exp_m1() / sup_v } else { 0.0 };
    Ok(GreenSandwich { inf_v, sup_v, upper, lower: factor * surv.mean, lower_stderr: factor * surv.stderr, survival: surv })
}

/// Monte Carlo spot check of the ground-state bound with the Green factor in
/// place of the potential proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenEnvelopeRow {
    pub x: f64,
    pub phi0: f64,
    pub nu: f64,
    pub green: McEstimate,
    /// `φ₀(x) / (G^{V+η}_{B(x,1)} 1(x) ν(x))`.
    pub ratio: f64,
}

/// Shift making `λ₀ + η > 0`.
pub fn eta_shift(lambda0: f64) -> f64 {
    if lambda0 > 0.0 {
        0.0
    } else {
        1.0 - lambda0
    }
}

/// Evaluates `φ₀ / (G^{V+η}_{B(x,1)}1 · ν)` at the given 1D points.
pub fn green_envelope_spot(spec: &SpectrumResult, model: &LevyModel, v: &Potential, xs: &[f64], cfg: &PathConfig) -> Result<Vec<GreenEnvelopeRow>> {
    if spec.grid.dim != 1 {
        return Err(param("the Green spot check is implemented for 1D spectra"));
    }
    let eta = eta_shift(spec.lambda0());
    let shifted = v.shifted(eta);
    xs.iter()
        .map(|&x| {
            let phi0 = interpolate(&spec.grid, spec.phi0(), x);
            let green = green_mc(model, &shifted, &Region::ball(vec![x], 1.0), &[x], cfg)?;
            let nu = model.nu_radial(x);
            Ok(GreenEnvelopeRow { x, phi0, nu, ratio: phi0 / (green.mean * nu), green })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_operator, lowest_eigenpairs, Grid};

    fn spectrum(l: f64, n: usize) -> (LevyModel, Potential, SpectrumResult) {
        let m = LevyModel::stable(1.0, 1).unwrap();
        let v = Potential::power(1.0, 2.0);
        let op = build_operator(&m, &v, &Grid::one_d(l, n).unwrap()).unwrap();
        let s = lowest_eigenpairs(&op, 4, 1e-9).unwrap();
        (m, v, s)
    }

    #[test]
    fn window_must_avoid_wraparound() {
        let (m, v, s) = spectrum(10.0, 256);
        assert!(matches!(ground_state_envelope(&s, &m, &v, &Window::new(2.0, 9.0)), Err(Error::Window(_))));
        assert!(ground_state_envelope(&s, &m, &v, &Window::new(2.0, 8.0)).is_ok());
    }

    #[test]
    fn envelope_ratio_symmetric_and_scale_free() {
        let (m, v, s) = spectrum(10.0, 256);
        let rep = ground_state_envelope(&s, &m, &v, &Window::new(2.0, 8.0)).unwrap();
        for row in &rep.rows {
            let mirror = rep.rows.iter().find(|o| (o.x[0] + row.x[0]).abs() < 1e-12);
            if let Some(o) = mirror {
                assert!((o.ratio - row.ratio).abs() < 1e-9 * row.ratio);
            }
        }
        let mut scaled = s.clone();
        scaled.eigenvectors[0].iter_mut().for_each(|p| *p *= 3.0);
        let rep2 = ground_state_envelope(&scaled, &m, &v, &Window::new(2.0, 8.0)).unwrap();
        assert!((rep2.spread - rep.spread).abs() < 1e-12 * rep.spread);
    }

    #[test]
    fn domination_of_ground_state_is_one() {
        let (_, _, s) = spectrum(10.0, 256);
        let d = eigenfunction_domination(&s, 0, &Window::new(1.0, 8.0)).unwrap();
        assert_eq!(d.sup, 1.0);
        assert!(eigenfunction_domination(&s, 4, &Window::new(1.0, 8.0)).is_err());
    }

    #[test]
    fn subaveraging_ground_state_and_scaling() {
        let (m, _, s) = spectrum(10.0, 256);
        let w = Window::new(2.0, 8.0);
        let a = subaveraging_envelope(&s, &m, s.lambda0(), s.phi0(), &w).unwrap();
        let doubled: Vec<f64> = s.phi0().iter().map(|p| 2.0 * p).collect();
        let b = subaveraging_envelope(&s, &m, s.lambda0(), &doubled, &w).unwrap();
        assert!((a.sup - b.sup).abs() < 1e-12 * a.sup);
        let abs1: Vec<f64> = s.eigenvectors[1].iter().map(|p| p.abs()).collect();
        assert!(subaveraging_envelope(&s, &m, s.eigenvalues[1], &abs1, &w).is_ok());
        // A bump concentrated away from where mass flows in is not subaveraging
        // at λ₀.
        let mut bump = vec![0.0; s.grid.len()];
        bump[128] = 1.0;
        assert!(matches!(subaveraging_envelope(&s, &m, s.lambda0(), &bump, &w), Err(Error::NotSubaveraging { .. })));
    }

    #[test]
    fn sandwich_ordering_for_constant_potential() {
        let m = LevyModel::stable(1.0, 1).unwrap();
        let cfg = PathConfig { dt: 0.01, horizon: 1.0, n_paths: 2000, seed: 3, workers: None, halving_check: false };
        let d = Ball::new(vec![0.0], 1.0);
        let s = green_sandwich(&m, &Potential::constant(2.0), &[0.0], &d, &cfg).unwrap();
        assert_eq!(s.upper, 0.5);
        assert!(s.lower <= s.upper);
    }
}
