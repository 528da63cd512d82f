//! Empirical constants of the standing assumptions on `ν` and `V`.
//!
//! The assumptions quantify over all points, so a checker can only profile
//! them: each defining ratio is sampled on nested windows and a constant that
//! keeps growing with the window is reported as divergent.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::models::{hitting_probability, transition_density, JumpIntensity, LevyModel, Potential, QuadratureSpec};
use crate::par;
use crate::quad::integrate_panels;
use crate::stats::{geomspace, linear_fit, linspace};
use crate::Verdict;

/// One sampled value of a defining ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub condition: String,
    /// Radius `|x|` or separation `s`.
    pub s: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionEntry {
    pub condition: String,
    pub window: String,
    /// Supremum of the defining ratio over all samples.
    pub constant: f64,
    /// Slope of `log C(W)` against `log W` over the nested windows.
    pub slope: f64,
    /// `(W, C(W))` for each window.
    pub trend: Vec<(f64, f64)>,
    pub verdict: Verdict,
    pub note: String,
    pub rows: Vec<SampleRow>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub entries: Vec<AssumptionEntry>,
}

impl AssumptionReport {
    pub fn push(&mut self, entry: AssumptionEntry) {
        self.entries.push(entry);
    }

    pub fn verdict(&self) -> Verdict {
        self.entries.iter().fold(Verdict::Pass, |v, e| v.worst(e.verdict))
    }

    /// Process exit code of the `check` subcommand.
    pub fn exit_code(&self) -> i32 {
        match self.verdict() {
            Verdict::Pass => 0,
            Verdict::FailDivergent => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

/// Nested outer radii and sampling density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSpec {
    /// Increasing outer radii; at least 4.
    pub windows: Vec<f64>,
    /// Radii sampled per window doubling.
    pub points_per_octave: usize,
    /// Offsets sampled inside unit-length pair ranges.
    pub offsets: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { windows: vec![4.0, 8.0, 16.0, 32.0, 64.0], points_per_octave: 24, offsets: 21 }
    }
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.windows.len() < 4 {
            return Err(param("at least 4 windows are needed for a trend"));
        }
        if self.windows.windows(2).any(|w| w[1] <= w[0]) || self.windows[0] <= 0.0 {
            return Err(param("windows must be positive and increasing"));
        }
        if self.points_per_octave < 2 || self.offsets < 2 {
            return Err(param("sampling density too low"));
        }
        Ok(())
    }

    fn radii(&self, r_min: f64) -> Vec<f64> {
        let r_max = *self.windows.last().unwrap();
        let n = ((r_max / r_min).log2() * self.points_per_octave as f64).ceil() as usize + 1;
        geomspace(r_min, r_max, n.max(2))
    }
}

/// Growth of the nested suprema beyond which a constant counts as divergent.
const DIVERGENT_GROWTH: f64 = 1.5;
/// Growth below which a constant counts as settled.
const SETTLED_GROWTH: f64 = 1.05;

/// Trend of nested suprema `C(W)` over the windows.
fn window_trend(samples: &[(f64, f64)], windows: &[f64]) -> (Vec<(f64, f64)>, f64, Verdict) {
    let trend: Vec<(f64, f64)> = windows
        .iter()
        .map(|&w| (w, samples.iter().filter(|s| s.0 <= w * (1.0 + 1e-12)).map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)))
        .collect();
    let lx: Vec<f64> = trend.iter().map(|t| t.0.ln()).collect();
    let ly: Vec<f64> = trend.iter().map(|t| t.1.ln()).collect();
    let fit = linear_fit(&lx, &ly);
    let growth = trend.last().unwrap().1 / trend[0].1;
    let verdict = if !growth.is_finite() {
        Verdict::FailDivergent
    } else if growth < SETTLED_GROWTH {
        Verdict::Pass
    } else if growth > DIVERGENT_GROWTH && fit.slope > 2.0 * fit.slope_se {
        Verdict::FailDivergent
    } else {
        Verdict::Inconclusive
    };
    (trend, fit.slope, verdict)
}

fn entry(condition: &str, window: String, samples: Vec<(f64, f64)>, windows: &[f64], note: &str) -> AssumptionEntry {
    let (trend, slope, verdict) = window_trend(&samples, windows);
    let constant = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let rows = samples.into_iter().map(|(s, value)| SampleRow { condition: condition.into(), s, value }).collect();
    AssumptionEntry { condition: condition.into(), window, constant, slope, trend, verdict, note: note.into(), rows }
}

/// Worst sampled ratio per radius, keyed by the larger radius of the pair.
fn reduce_by_radius(pairs: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (r, v) in pairs {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 = last.1.max(v),
            _ => out.push((r, v)),
        }
    }
    out
}

/// `C₁ = sup max(ν(x)/ν(y), ν(y)/ν(x))` over `r ≤ |y| ≤ |x| ≤ |y| + 1`.
pub fn check_ratio_regularity<J: JumpIntensity + ?Sized>(nu: &J, r: f64, sample: &SampleSpec) -> Result<AssumptionEntry> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(param("r must lie in (0, 1/2]"));
    }
    sample.validate()?;
    let offsets = linspace(0.0, 1.0, sample.offsets);
    let samples = reduce_by_radius(sample.radii(r).into_iter().flat_map(|y| {
        let ly = nu.ln_nu_radial(y);
        offsets.iter().map(move |&o| (y, (nu.ln_nu_radial(y + o) - ly).abs().exp())).collect::<Vec<_>>()
    }));
    Ok(entry("C1", format!("{r} <= |y| <= |x| <= |y| + 1, |y| <= W"), samples, &sample.windows, "ratio regularity"))
}

/// `C₂ = sup ν(x)/ν(y)` over `1/2 ≤ |y| ≤ |x|`.
pub fn check_monotone_domination<J: JumpIntensity + ?Sized>(nu: &J, sample: &SampleSpec) -> Result<AssumptionEntry> {
    sample.validate()?;
    let radii = sample.radii(0.5);
    let logs: Vec<f64> = radii.iter().map(|&r| nu.ln_nu_radial(r)).collect();
    // For each |x|, the worst |y| ≤ |x| is the one with the smallest ν.
    let mut running_min = f64::INFINITY;
    let samples = radii
        .iter()
        .zip(&logs)
        .map(|(&r, &l)| {
            running_min = running_min.min(l);
            (r, (l - running_min).exp())
        })
        .collect();
    Ok(entry("C2", "1/2 <= |y| <= |x| <= W".into(), samples, &sample.windows, "monotone domination"))
}

/// `K(s)` of the convolution condition with its quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionValue {
    pub s: f64,
    pub k: f64,
    pub error: f64,
    /// Bound on the part of the integral beyond `|z| = s + 50`.
    pub tail_bound: f64,
    pub converged: bool,
}

/// Truncation margin beyond the separation.
const CONVOLUTION_MARGIN: f64 = 50.0;

/// `K(s) = ∫_{|z|>1/2, |z−s|>1/2} ν(z)ν(s−z) dz / ν(s)` in one dimension.
pub fn convolution_ratio<J: JumpIntensity + ?Sized>(nu: &J, s: f64, q: &QuadratureSpec) -> ConvolutionValue {
    let ln_s = nu.ln_nu_radial(s);
    let f = |z: f64| (nu.ln_nu_radial(z) + nu.ln_nu_radial(s - z) - ln_s).exp();
    let z_max = s + CONVOLUTION_MARGIN;
    let mut edges_left: Vec<f64> = geomspace(0.5, z_max, 64).into_iter().map(|x| -x).collect();
    edges_left.reverse();
    let mut edges_right = geomspace(s + 0.5, z_max, 64);
    if (edges_right[0] - z_max).abs() < 1e-12 {
        edges_right.truncate(1);
    }
    let tol = q.tolerance();
    let mut parts = vec![integrate_panels(f, &edges_left, tol), integrate_panels(f, &edges_right, tol)];
    if s > 1.0 {
        // Grade the middle segment towards both excluded balls.
        let half = 0.5 * s;
        let left = geomspace(0.5, half, 24);
        let mut middle = left.clone();
        middle.extend(left.iter().rev().skip(1).map(|x| s - x));
        parts.push(integrate_panels(f, &middle, tol));
    }
    let k: f64 = parts.iter().map(|p| p.value).sum();
    let error: f64 = parts.iter().map(|p| p.error).sum();
    let far = integrate_panels(|r: f64| nu.nu_radial(r), &geomspace(z_max, 1e3 * z_max, 64), tol).value;
    let tail_bound = 2.0 * (nu.ln_nu_radial(CONVOLUTION_MARGIN) - ln_s).exp() * far;
    ConvolutionValue { s, k, error, tail_bound, converged: parts.iter().all(|p| p.converged) }
}

/// Convolution condition over a set of separations `s ≥ 1` (1D intensities).
///
/// Fail-divergent when `log K` keeps growing against `log s` over the outer
/// half of the separations (local slope above 1/2, significant), pass when
/// that slope stays below 1/2.
pub fn check_convolution_condition<J: JumpIntensity + ?Sized>(nu: &J, separations: &[f64], q: &QuadratureSpec) -> Result<AssumptionEntry> {
    if nu.dim() != 1 {
        return Err(param("the convolution check is implemented for d = 1"));
    }
    if separations.len() < 4 {
        return Err(param("at least 4 separations are needed"));
    }
    if separations.windows(2).any(|w| w[1] <= w[0]) || separations[0] < 1.0 {
        return Err(param("separations must be ascending and at least 1"));
    }
    let values = par::map_slice(separations, |&s| convolution_ratio(nu, s, q));
    let converged = values.iter().all(|v| v.converged);
    let half = &values[values.len() / 2..];
    let lx: Vec<f64> = half.iter().map(|v| v.s.ln()).collect();
    let ly: Vec<f64> = half.iter().map(|v| v.k.ln()).collect();
    let fit = linear_fit(&lx, &ly);
    let trend: Vec<(f64, f64)> = values.iter().map(|v| (v.s, v.k)).collect();
    let constant = trend.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let verdict = if !converged || !constant.is_finite() {
        if constant.is_infinite() {
            Verdict::FailDivergent
        } else {
            Verdict::Inconclusive
        }
    } else if fit.slope > 0.5 && fit.slope > 2.0 * fit.slope_se {
        Verdict::FailDivergent
    } else if fit.slope <= 0.5 {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    let tail = values.iter().map(|v| v.tail_bound).fold(0.0f64, f64::max);
    let note = format!("z truncated at |z| = s + {CONVOLUTION_MARGIN}; tail bound {tail:.2e}");
    let rows = values.iter().map(|v| SampleRow { condition: "C3".into(), s: v.s, value: v.k }).collect();
    Ok(AssumptionEntry {
        condition: "C3".into(),
        window: format!("s in [{}, {}]", separations[0], separations[separations.len() - 1]),
        constant,
        slope: fit.slope,
        trend,
        verdict,
        note,
        rows,
    })
}

/// `C₁₄ = sup V(y)/V(x)` over `R < |x| ≤ W`, `y ∈ B(x, 1)`.
pub fn check_potential_comparability(v: &Potential, radius: f64, sample: &SampleSpec) -> Result<AssumptionEntry> {
    if !(radius > 1.0) {
        return Err(param("R must exceed 1"));
    }
    if !v.is_confining() && !matches!(v, Potential::Constant { .. }) {
        return Err(param("the potential must be confining"));
    }
    sample.validate()?;
    let offsets = linspace(-1.0, 1.0, sample.offsets);
    let samples = reduce_by_radius(sample.radii(radius).into_iter().flat_map(|x| {
        let vx = v.radial(x);
        offsets.iter().map(move |&o| (x, v.radial((x + o).abs()) / vx)).collect::<Vec<_>>()
    }));
    Ok(entry("C14", format!("{radius} < |x| <= W, |y - x| <= 1"), samples, &sample.windows, "potential comparability"))
}

/// `∫_{|x|>R} |log ν| ν dx`, integrated decade by decade; the integral is
/// declared divergent when the decade contributions stop shrinking.
pub fn check_log_nu_integrability<J: JumpIntensity + ?Sized>(nu: &J, radius: f64, q: &QuadratureSpec) -> Result<AssumptionEntry> {
    if !(radius > 0.0) {
        return Err(param("R must be positive"));
    }
    let d = nu.dim();
    let shell = |r: f64| if d == 1 { 2.0 } else { 2.0 * std::f64::consts::PI * r };
    let integrand = |r: f64| {
        let l = nu.ln_nu_radial(r);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            shell(r) * l.abs() * l.exp()
        }
    };
    let decades = 12;
    let mut increments = Vec::with_capacity(decades);
    let mut converged = true;
    for k in 0..decades {
        let a = radius * 10f64.powi(k as i32);
        let res = integrate_panels(integrand, &geomspace(a, 10.0 * a, 8), q.tolerance());
        converged &= res.converged;
        increments.push((10.0 * a, res.value));
    }
    let mut total = 0.0;
    let trend: Vec<(f64, f64)> = increments
        .iter()
        .map(|&(w, inc)| {
            total += inc;
            (w, total)
        })
        .collect();
    let last = increments[decades - 1].1;
    let prev = increments[decades - 2].1;
    let ratio = if prev > 0.0 { last / prev } else { 0.0 };
    let (verdict, note) = if !converged {
        (Verdict::Inconclusive, "decade quadrature did not converge".to_string())
    } else if ratio < 0.9 {
        let tail = if ratio > 0.0 { last * ratio / (1.0 - ratio) } else { 0.0 };
        (Verdict::Pass, format!("geometric tail estimate beyond the last decade {tail:.2e}"))
    } else if ratio >= 0.999 {
        (Verdict::FailDivergent, format!("decade contributions do not shrink (ratio {ratio:.3})"))
    } else {
        (Verdict::Inconclusive, format!("decade contributions shrink slowly (ratio {ratio:.3})"))
    };
    let lx: Vec<f64> = trend.iter().map(|t| t.0.ln()).collect();
    let ly: Vec<f64> = trend.iter().map(|t| t.1.max(f64::MIN_POSITIVE).ln()).collect();
    let slope = linear_fit(&lx[decades / 2..], &ly[decades / 2..]).slope;
    let rows = trend.iter().map(|&(s, value)| SampleRow { condition: "log-nu".into(), s, value }).collect();
    Ok(AssumptionEntry {
        condition: "log-nu".into(),
        window: format!("{radius} < |x| <= {:.0e}", trend[decades - 1].0),
        constant: total,
        slope,
        trend,
        verdict,
        note,
        rows,
    })
}

/// `C₁₇` (against `|log p(t,x)|`) and `C₁₈` (against
/// `|log P^x(X_t ∈ B(0,1))|`): suprema of `max(ρ, 1/ρ)` for the ratio `ρ` of
/// `|log ν(x)|` to the respective logarithm over `r_min ≤ |x| ≤ W`.
pub fn check_log_comparison(model: &LevyModel, t: f64, r_min: f64, sample: &SampleSpec, q: &QuadratureSpec) -> Result<(AssumptionEntry, AssumptionEntry)> {
    sample.validate()?;
    if !(r_min > 0.0 && r_min < sample.windows[0]) {
        return Err(param("r_min must lie below the first window"));
    }
    let n = 8 * sample.windows.len();
    let radii = geomspace(r_min, *sample.windows.last().unwrap(), n);
    let d = model.dim;
    let vals = par::map_slice(&radii, |&r| -> Result<Option<(f64, f64)>> {
        let mut x = vec![0.0; d];
        x[0] = r;
        let ln_nu = model.ln_nu_radial(r).abs();
        let p = transition_density(model, t, &x, q)?;
        let hit = hitting_probability(model, t, &x, 1.0, q)?;
        if p < UNRESOLVED || hit < UNRESOLVED {
            return Ok(None);
        }
        let sym = |ratio: f64| ratio.max(1.0 / ratio);
        Ok(Some((sym(ln_nu / p.ln().abs()), sym(ln_nu / hit.ln().abs()))))
    });
    let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
    let resolved: Vec<(f64, (f64, f64))> = radii.iter().zip(&vals).filter_map(|(&r, v)| v.map(|v| (r, v))).collect();
    let skipped = radii.len() - resolved.len();
    let c17: Vec<(f64, f64)> = resolved.iter().map(|&(r, v)| (r, v.0)).collect();
    let c18: Vec<(f64, f64)> = resolved.iter().map(|&(r, v)| (r, v.1)).collect();
    let window = format!("{r_min} <= |x| <= W, t = {t}");
    let finish = |mut e: AssumptionEntry| {
        if skipped > 0 {
            e.note = format!("{}; {skipped} radii skipped (values below {UNRESOLVED:e})", e.note);
            if e.trend.iter().any(|w| !w.1.is_finite()) {
                e.verdict = Verdict::Inconclusive;
            }
        }
        e
    };
    Ok((
        finish(entry("C17", window.clone(), c17, &sample.windows, "log comparison with p(t,x)")),
        finish(entry("C18", window, c18, &sample.windows, "log comparison with P^x(X_t in B(0,1))")),
    ))
}

/// Values below this are not resolved by the Fourier inversion.
const UNRESOLVED: f64 = 1e-12;
