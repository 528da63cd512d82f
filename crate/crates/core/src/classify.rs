//! Ground-state domination classification of a (process, potential) pair.
//!
//! Three independent routes are compared: the trend of `V/|log ν|`, the sign
//! of the free energy `F = E − H` over a set of scalings `t₀`, and the growth
//! of `sup T_t1/φ₀` when the periodic box is doubled.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::models::{density_sup, hitting_probability, transition_density, JumpIntensity, LevyModel, Potential, QuadratureSpec};
use crate::par;
use crate::quad::integrate_panels;
use crate::spectral::SpectrumResult;
use crate::stats::{geomspace, linear_fit, LinearFit};
use crate::verify::TRUSTED_FRACTION;

/// Slope threshold separating the three trend tags.
pub const TREND_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    ToInfinity,
    BoundedPositive,
    ToZero,
}

impl Trend {
    fn from_slope(slope: f64) -> Self {
        if slope > TREND_THRESHOLD {
            Trend::ToInfinity
        } else if slope < -TREND_THRESHOLD {
            Trend::ToZero
        } else {
            Trend::BoundedPositive
        }
    }

    pub fn class(self) -> Class {
        match self {
            Trend::ToInfinity => Class::Gsd,
            Trend::BoundedPositive => Class::AgsdOnly,
            Trend::ToZero => Class::NotAgsd,
        }
    }
}

/// Domination class suggested by one route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    Gsd,
    AgsdOnly,
    NotAgsd,
}

/// Final verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    GsdIuc,
    GsdNotIuc,
    AgsdOnly,
    NotAgsd,
    Inconclusive,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::GsdIuc => "GSD+IUC",
            Classification::GsdNotIuc => "GSD, not IUC",
            Classification::AgsdOnly => "AGSD-only",
            Classification::NotAgsd => "not-AGSD",
            Classification::Inconclusive => "inconclusive",
        }
    }

    /// Process exit code of the `classify` subcommand.
    pub fn exit_code(&self) -> i32 {
        match self {
            Classification::GsdIuc | Classification::GsdNotIuc => 0,
            Classification::AgsdOnly => 4,
            Classification::NotAgsd => 5,
            Classification::Inconclusive => 3,
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub r: f64,
    pub value: f64,
}

/// A radial ratio profile with its trend.
///
/// The trend slope is the regression of `log ρ` on `log log r` over the outer
/// half of the samples: ratios of interest vary like powers of `log r`, for
/// which a slope in `log r` tends to zero whatever the limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioProfile {
    pub rows: Vec<ProfileRow>,
    pub fit: LinearFit,
    pub trend: Trend,
}

fn profile(rows: Vec<ProfileRow>) -> Result<RatioProfile> {
    if rows.len() < 4 {
        return Err(param("a ratio profile needs at least 4 radial samples"));
    }
    if let Some(bad) = rows.iter().find(|row| !(row.value > 0.0 && row.value.is_finite())) {
        return Err(Error::Sampling(format!("ratio {} at r = {} is not positive and finite", bad.value, bad.r)));
    }
    let outer = &rows[rows.len() / 2..];
    let lx: Vec<f64> = outer.iter().map(|row| row.r.ln().ln()).collect();
    let ly: Vec<f64> = outer.iter().map(|row| row.value.ln()).collect();
    let fit = linear_fit(&lx, &ly);
    Ok(RatioProfile { rows, trend: Trend::from_slope(fit.slope), fit })
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(param("radial samples must be strictly increasing"));
    }
    match radii.first() {
        Some(&r) if r > std::f64::consts::E => Ok(()),
        _ => Err(param("radial samples must exceed e")),
    }
}

/// Default radial samples for the ratio profiles.
pub fn default_radii() -> Vec<f64> {
    geomspace(10.0, 1e4, 48)
}

/// Profile of `ρ(r) = V(r)/|log ν(r)|`.
pub fn borderline_ratio(model: &LevyModel, v: &Potential, radii: &[f64]) -> Result<RatioProfile> {
    check_radii(radii)?;
    let rows = radii
        .iter()
        .map(|&r| {
            let nu = model.nu_radial(r);
            if nu >= 1.0 {
                return Err(Error::Sampling(format!("ν({r}) = {nu} ≥ 1")));
            }
            Ok(ProfileRow { r, value: v.radial(r) / nu.ln().abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    profile(rows)
}

/// Profiles of `V/|log P^x(X_t ∈ B(0,1))|` and `V/|log p(t,x)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilisticRatio {
    pub t: f64,
    pub hitting: RatioProfile,
    pub density: RatioProfile,
    /// Both trends agree with the trend of `V/|log ν|`.
    pub consistent: bool,
}

pub fn probabilistic_ratio(model: &LevyModel, v: &Potential, t: f64, radii: &[f64], q: &QuadratureSpec) -> Result<ProbabilisticRatio> {
    check_radii(radii)?;
    let d = model.dim;
    let point = |r: f64| {
        let mut x = vec![0.0; d];
        x[0] = r;
        x
    };
    let values = par::map_slice(radii, |&r| -> Result<(f64, f64)> {
        let x = point(r);
        Ok((hitting_probability(model, t, &x, 1.0, q)?, transition_density(model, t, &x, q)?))
    });
    let mut hit_rows = Vec::with_capacity(radii.len());
    let mut dens_rows = Vec::with_capacity(radii.len());
    for (&r, val) in radii.iter().zip(values) {
        let (p_hit, p) = val?;
        let vr = v.radial(r);
        hit_rows.push(ProfileRow { r, value: vr / p_hit.ln().abs() });
        dens_rows.push(ProfileRow { r, value: vr / p.ln().abs() });
    }
    let hitting = profile(hit_rows)?;
    let density = profile(dens_rows)?;
    let reference = borderline_ratio(model, v, radii)?.trend;
    Ok(ProbabilisticRatio { t, consistent: hitting.trend == reference && density.trend == reference, hitting, density })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub a: f64,
    pub b: f64,
}

impl Annulus {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }
}

/// Default annuli: dyadic shells from 10 to 640.
pub fn default_annuli() -> Vec<Annulus> {
    (0..6).map(|i| Annulus::new(10.0 * 2f64.powi(i), 10.0 * 2f64.powi(i + 1))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyRow {
    pub annulus: Annulus,
    /// `E = ∫_A t₀V ν`.
    pub energy: f64,
    /// `H = −∫_A ν log ν`.
    pub entropy: f64,
    /// `F = E − H`.
    pub free: f64,
    /// Sign of `F`, with `|F| ≤ 10⁻⁸ max(E, H)` counted as 0.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyReport {
    pub t0: f64,
    pub rows: Vec<FreeEnergyRow>,
}

impl FreeEnergyReport {
    pub fn all_nonnegative(&self) -> bool {
        self.rows.iter().all(|r| r.sign >= 0)
    }

    pub fn outer_negative(&self) -> bool {
        self.rows.last().is_some_and(|r| r.sign < 0)
    }
}

/// Relative size below which `F` is reported as zero.
pub const FREE_ENERGY_ZERO: f64 = 1e-8;

fn shell_integral<F: Fn(f64) -> f64>(dim: usize, ann: &Annulus, f: F, q: &QuadratureSpec) -> Result<f64> {
    let edges = geomspace(ann.a, ann.b, 9);
    let res = if dim == 1 {
        integrate_panels(|r| 2.0 * f(r), &edges, q.tolerance())
    } else {
        integrate_panels(|r| 2.0 * std::f64::consts::PI * r * f(r), &edges, q.tolerance())
    };
    if !res.converged {
        return Err(Error::Quadrature(format!("shell [{}, {}] error estimate {:.2e}", ann.a, ann.b, res.error)));
    }
    Ok(res.value)
}

/// `E`, `H` and `F` of `t₀V` on each annulus.
pub fn free_energy(model: &LevyModel, v: &Potential, t0: f64, annuli: &[Annulus], q: &QuadratureSpec) -> Result<FreeEnergyReport> {
    if !(t0 > 0.0) {
        return Err(param("t₀ must be positive"));
    }
    if annuli.is_empty() {
        return Err(param("no annuli given"));
    }
    for (i, ann) in annuli.iter().enumerate() {
        if !(ann.a > 0.0 && ann.b > ann.a) {
            return Err(param(format!("annulus [{}, {}] is empty", ann.a, ann.b)));
        }
        if i > 0 && ann.a < annuli[i - 1].b {
            return Err(param("annuli must be disjoint and ordered"));
        }
        if geomspace(ann.a, ann.b, 33).iter().any(|&r| model.nu_radial(r) >= 1.0) {
            return Err(param(format!("ν ≥ 1 inside annulus [{}, {}]", ann.a, ann.b)));
        }
    }
    let rows = par::map_slice(annuli, |ann| -> Result<FreeEnergyRow> {
        let energy = shell_integral(model.dim, ann, |r| t0 * v.radial(r) * model.nu_radial(r), q)?;
        let entropy = shell_integral(
            model.dim,
            ann,
            |r| {
                let nu = model.nu_radial(r);
                -nu * nu.ln()
            },
            q,
        )?;
        let free = energy - entropy;
        let sign = if free.abs() <= FREE_ENERGY_ZERO * energy.abs().max(entropy.abs()) {
            0
        } else if free > 0.0 {
            1
        } else {
            -1
        };
        Ok(FreeEnergyRow { annulus: *ann, energy, entropy, free, sign })
    });
    Ok(FreeEnergyReport { t0, rows: rows.into_iter().collect::<Result<Vec<_>>>()? })
}

/// Class implied by free-energy signs over several `t₀`: `F ≥ 0` everywhere
/// for every `t₀` means GSD, `F < 0` on the outermost annulus for every `t₀`
/// means not-AGSD, anything in between AGSD-only.
pub fn free_energy_class(reports: &[FreeEnergyReport]) -> Class {
    if reports.iter().all(|r| r.all_nonnegative()) {
        Class::Gsd
    } else if reports.iter().all(|r| r.outer_negative()) {
        Class::NotAgsd
    } else {
        Class::AgsdOnly
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    /// Supremum on the trusted window of the base grid.
    pub sup: f64,
    pub sup_radius: f64,
    /// Same supremum on the doubled box.
    pub sup_doubled: f64,
    /// `sup_doubled / sup`.
    pub growth: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsdTable {
    pub rows: Vec<DiagnosticRow>,
    pub growth_threshold: f64,
    /// `T_t1 ≥ e^{−λ₀t} φ₀/‖φ₀‖∞` held on the window at every `t`.
    pub lower_bound_ok: bool,
}

impl GsdTable {
    /// GSD when bounded at every `t`; AGSD-only when bounded at the largest
    /// `t` only; not-AGSD otherwise.
    pub fn class(&self) -> Class {
        if self.rows.iter().all(|r| r.bounded) {
            Class::Gsd
        } else if self.rows.last().is_some_and(|r| r.bounded) {
            Class::AgsdOnly
        } else {
            Class::NotAgsd
        }
    }
}

fn trusted_nodes(spec: &SpectrumResult) -> Vec<usize> {
    spec.grid.window(0.0, TRUSTED_FRACTION * spec.grid.half_width)
}

fn check_pair(spec: &SpectrumResult, doubled: &SpectrumResult, times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) {
        return Err(param("probe times must be positive"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(param("probe times must be increasing"));
    }
    if doubled.grid.dim != spec.grid.dim || doubled.grid.half_width <= spec.grid.half_width {
        return Err(param("the comparison spectrum must live on a larger box of the same dimension"));
    }
    Ok(())
}

/// `(sup, argmax radius, lower bound held)` of `T_t1/φ₀` on the trusted window.
fn gsd_sups(spec: &SpectrumResult, times: &[f64]) -> Result<Vec<(f64, f64, bool)>> {
    let op = spec.operator()?;
    let ones = vec![1.0; spec.grid.len()];
    let nodes = trusted_nodes(spec);
    let phi0 = spec.phi0();
    let phi_max = phi0.iter().copied().fold(0.0f64, f64::max);
    Ok(op
        .propagate_many(times, &ones)
        .iter()
        .zip(times)
        .map(|(tt, &t)| {
            let floor = (-spec.lambda0() * t).exp() / phi_max;
            let mut best = (0.0f64, 0.0, true);
            for &i in &nodes {
                let ratio = tt[i] / phi0[i];
                if ratio > best.0 {
                    best = (ratio, spec.grid.radius(i), best.2);
                }
                if ratio < floor * (1.0 - 1e-6) {
                    best.2 = false;
                }
            }
            best
        })
        .collect())
}

/// `sup T_t1/φ₀` on the trusted window, on the base box and on the doubled
/// box. `T_t` is the exact discrete semigroup, so no spectral truncation
/// enters at small `t`.
pub fn gsd_diagnostic(spec: &SpectrumResult, doubled: &SpectrumResult, times: &[f64], growth_threshold: f64) -> Result<GsdTable> {
    check_pair(spec, doubled, times)?;
    let base = gsd_sups(spec, times)?;
    let big = gsd_sups(doubled, times)?;
    let rows = times
        .iter()
        .zip(base.iter().zip(&big))
        .map(|(&t, (b, g))| {
            let growth = g.0 / b.0;
            DiagnosticRow { t, sup: b.0, sup_radius: b.1, sup_doubled: g.0, growth, bounded: growth.is_finite() && growth < growth_threshold }
        })
        .collect();
    let lower_bound_ok = base.iter().chain(&big).all(|b| b.2);
    Ok(GsdTable { rows, growth_threshold, lower_bound_ok })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IucTable {
    pub rows: Vec<DiagnosticRow>,
    pub sources: usize,
    /// Largest `|x|` of a resolved pair, base and doubled box.
    pub resolved_radius: (f64, f64),
    /// Non-increasing in `t` up to round-off.
    pub monotone: bool,
}

/// Round-off level of the propagator relative to the Euclidean input norm.
const PROPAGATION_NOISE: f64 = 1e-13;
/// Pairs whose estimated round-off in `ũ` exceeds this are skipped.
const IUC_NOISE_LIMIT: f64 = 1e-2;

fn nearest_node(spec: &SpectrumResult, nodes: &[usize], r: f64) -> usize {
    let mut target = vec![0.0; spec.grid.dim];
    target[0] = r;
    *nodes
        .iter()
        .min_by(|&&a, &&b| {
            let da: f64 = spec.grid.point(a).iter().zip(&target).map(|(p, q)| (p - q).powi(2)).sum();
            let db: f64 = spec.grid.point(b).iter().zip(&target).map(|(p, q)| (p - q).powi(2)).sum();
            da.total_cmp(&db)
        })
        .expect("trusted window is never empty")
}

/// Per time: `(sup ũ, argmax radius)` and the largest resolved radius.
fn iuc_sups(spec: &SpectrumResult, times: &[f64], sources: usize) -> Result<(Vec<(f64, f64)>, f64)> {
    let op = spec.operator()?;
    let nodes = trusted_nodes(spec);
    let width = TRUSTED_FRACTION * spec.grid.half_width;
    let picks: Vec<usize> = (0..sources)
        .map(|k| nearest_node(spec, &nodes, width * k as f64 / (sources.max(2) - 1) as f64))
        .collect();
    let phi0 = spec.phi0();
    let w = spec.grid.weight();
    let per_source = par::map_slice(&picks, |&j| {
        let mut delta = vec![0.0; spec.grid.len()];
        delta[j] = 1.0 / w;
        op.propagate_many(times, &delta)
            .iter()
            .zip(times)
            .map(|(u, &t)| {
                let scale = (spec.lambda0() * t).exp() / phi0[j];
                let noise = scale * PROPAGATION_NOISE / w;
                let mut best = (0.0f64, 0.0f64);
                let mut reach = 0.0f64;
                for &i in &nodes {
                    if noise / phi0[i] > IUC_NOISE_LIMIT {
                        continue;
                    }
                    let r = spec.grid.radius(i);
                    reach = reach.max(r);
                    let val = scale * u[i] / phi0[i];
                    if val > best.0 {
                        best = (val, r);
                    }
                }
                (best, reach)
            })
            .collect::<Vec<_>>()
    });
    let sups = (0..times.len())
        .map(|k| per_source.iter().map(|s| s[k].0).fold((0.0f64, 0.0), |a, b| if b.0 > a.0 { b } else { a }))
        .collect();
    let reach = per_source.iter().flatten().map(|s| s.1).fold(0.0f64, f64::max);
    Ok((sups, reach))
}

/// `sup ũ(t,x,y)` over trusted-window `x` and `sources` points `y` spread
/// evenly over the trusted radius, on the base and doubled boxes. Pairs where
/// `φ₀(x)φ₀(y)` is too small for `ũ` to rise above propagation round-off are
/// skipped; the reach of the resolved set is reported.
pub fn iuc_diagnostic(spec: &SpectrumResult, doubled: &SpectrumResult, times: &[f64], sources: usize, growth_threshold: f64) -> Result<IucTable> {
    check_pair(spec, doubled, times)?;
    if sources < 2 {
        return Err(param("at least two source nodes are needed"));
    }
    let (base, reach_base) = iuc_sups(spec, times, sources)?;
    let (big, reach_big) = iuc_sups(doubled, times, sources)?;
    let rows: Vec<DiagnosticRow> = times
        .iter()
        .zip(base.iter().zip(&big))
        .map(|(&t, (b, g))| {
            let growth = g.0 / b.0;
            DiagnosticRow { t, sup: b.0, sup_radius: b.1, sup_doubled: g.0, growth, bounded: growth.is_finite() && growth < growth_threshold }
        })
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].sup <= w[0].sup * (1.0 + 1e-6) && w[1].sup_doubled <= w[0].sup_doubled * (1.0 + 1e-6));
    Ok(IucTable { rows, sources, resolved_radius: (reach_base, reach_big), monotone })
}

/// Small-time density bound used for the ultracontractivity flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ultracontractivity {
    pub t_small: f64,
    pub t_ref: f64,
    pub sup_small: f64,
    pub sup_ref: f64,
    /// Densities at `t_small` pass the integrability pretest.
    pub bounded: bool,
}

pub fn ultracontractivity(model: &LevyModel, t_small: f64, t_ref: f64) -> Result<Ultracontractivity> {
    let small = density_sup(model, t_small)?;
    let reference = density_sup(model, t_ref)?;
    Ok(Ultracontractivity { t_small, t_ref, sup_small: small.value, sup_ref: reference.value, bounded: small.bounded })
}

/// Probe sets and thresholds of [`classify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub t0s: Vec<f64>,
    pub annuli: Vec<Annulus>,
    pub iuc_sources: usize,
    pub growth_threshold: f64,
    pub t_small: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            radii: default_radii(),
            times: vec![0.25, 0.5, 1.0, 2.0],
            t0s: vec![0.5, 1.0, 2.0, 4.0],
            annuli: default_annuli(),
            iuc_sources: 12,
            growth_threshold: 1.5,
            t_small: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Routes {
    pub ratio: Class,
    pub free_energy: Class,
    pub gsd: Class,
}

impl Routes {
    pub fn agreed(&self) -> Option<Class> {
        (self.ratio == self.free_energy && self.ratio == self.gsd).then_some(self.ratio)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub ratio: RatioProfile,
    pub gsd: GsdTable,
    pub iuc: IucTable,
    pub ultracontractivity: Ultracontractivity,
    pub free_energy: Vec<FreeEnergyReport>,
    pub routes: Routes,
    pub verdict: Classification,
    /// The intensity is a profile fixed up to constants.
    pub profile_convention: bool,
    pub note: String,
}

/// Classifies `(model, V)` from a spectrum and its doubled-box counterpart.
pub fn classify(
    model: &LevyModel,
    v: &Potential,
    spec: &SpectrumResult,
    doubled: &SpectrumResult,
    opts: &ClassifyOptions,
    q: &QuadratureSpec,
) -> Result<ClassificationReport> {
    let ratio = borderline_ratio(model, v, &opts.radii)?;
    let free_energy = opts.t0s.iter().map(|&t0| free_energy(model, v, t0, &opts.annuli, q)).collect::<Result<Vec<_>>>()?;
    let gsd = gsd_diagnostic(spec, doubled, &opts.times, opts.growth_threshold)?;
    let mut iuc_times = opts.times.clone();
    iuc_times.extend(opts.times.iter().map(|t| 2.0 * t));
    iuc_times.sort_by(f64::total_cmp);
    iuc_times.dedup();
    let iuc = iuc_diagnostic(spec, doubled, &iuc_times, opts.iuc_sources, opts.growth_threshold)?;
    let uc = ultracontractivity(model, opts.t_small, 1.0)?;
    let routes = Routes { ratio: ratio.trend.class(), free_energy: free_energy_class(&free_energy), gsd: gsd.class() };
    let verdict = match routes.agreed() {
        Some(Class::Gsd) if uc.bounded => Classification::GsdIuc,
        Some(Class::Gsd) => Classification::GsdNotIuc,
        Some(Class::AgsdOnly) => Classification::AgsdOnly,
        Some(Class::NotAgsd) => Classification::NotAgsd,
        None => Classification::Inconclusive,
    };
    let mut notes = Vec::new();
    if routes.agreed().is_none() {
        notes.push(format!(
            "routes disagree (ratio: {:?}, free energy: {:?}, GSD growth: {:?})",
            routes.ratio, routes.free_energy, routes.gsd
        ));
    }
    if !uc.bounded {
        notes.push(format!("densities at t = {} fail the integrability pretest; IUC is not certified", uc.t_small));
    }
    if uc.bounded {
        for row in gsd.rows.iter().filter(|r| r.bounded) {
            if let Some(later) = iuc.rows.iter().find(|r| (r.t - 2.0 * row.t).abs() < 1e-12) {
                if !later.bounded {
                    notes.push(format!("GSD bounded at t = {} but the intrinsic kernel grows at t = {}", row.t, later.t));
                }
            }
        }
    }
    if notes.is_empty() {
        notes.push("all routes agree".into());
    }
    Ok(ClassificationReport {
        ratio,
        gsd,
        iuc,
        ultracontractivity: uc,
        free_energy,
        routes,
        verdict,
        profile_convention: !model.has_exact_intensity(),
        note: notes.join("; "),
    })
}
