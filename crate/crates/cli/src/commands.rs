//! Subcommand implementations. Each writes its payload files plus a manifest
//! into the output directory and returns the process exit code.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use levykac::assumptions::{
    check_convolution_condition, check_log_comparison, check_log_nu_integrability, check_monotone_domination,
    check_potential_comparability, check_ratio_regularity, AssumptionEntry, AssumptionReport,
};
use levykac::classify::{classify as run_classify, ClassificationReport};
use levykac::io::{read_csv_header, read_spectrum_binary, write_csv, write_envelope_csv, write_json, write_records, write_spectrum_binary, write_spectrum_csv};
use levykac::montecarlo::{feynman_kac, green_mc, survival, Ball, McEstimate, Region};
use levykac::spectral::{build_operator, lowest_eigenpairs};
use levykac::verify::{
    domination_change, eigenfunction_domination, ground_state_envelope_with, green_sandwich, subaveraging_envelope, DominationReport,
    EnvelopeReport, GreenSandwich, SubaveragingReport,
};
use levykac::{SpectrumResult, Verdict};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Estimator, RunConfig};
use crate::manifest::Timer;

pub struct Ctx {
    pub cfg: RunConfig,
    pub hash: String,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Ctx {
    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out.join(name);
        Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
    }
}

fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => 0,
        Verdict::FailDivergent => 2,
        Verdict::Inconclusive => 3,
    }
}

#[derive(Serialize)]
struct EntrySummary<'a> {
    condition: &'a str,
    window: &'a str,
    constant: f64,
    slope: f64,
    trend: &'a [(f64, f64)],
    verdict: Verdict,
    note: &'a str,
}

fn inconclusive(condition: &str, err: impl std::fmt::Display) -> AssumptionEntry {
    AssumptionEntry {
        condition: condition.into(),
        window: String::new(),
        constant: f64::NAN,
        slope: f64::NAN,
        trend: Vec::new(),
        verdict: Verdict::Inconclusive,
        note: format!("not evaluated: {err}"),
        rows: Vec::new(),
    }
}

pub fn check(ctx: &Ctx) -> Result<i32> {
    let timer = Timer::start();
    let (m, c) = (&ctx.cfg.model, &ctx.cfg.check);
    let v = ctx.cfg.potential()?;
    let q = &ctx.cfg.quadrature;
    let mut report = AssumptionReport::default();
    report.push(check_ratio_regularity(m, c.r, &c.sample)?);
    report.push(check_monotone_domination(m, &c.sample)?);
    if m.dim == 1 {
        report.push(check_convolution_condition(m, &c.separations, q)?);
    } else {
        report.push(inconclusive("C3", "the convolution check is one-dimensional"));
    }
    report.push(check_potential_comparability(&v, c.comparability_radius, &c.sample)?);
    report.push(check_log_nu_integrability(m, c.integrability_radius, q)?);
    match check_log_comparison(m, c.log_comparison_t, c.log_comparison_r_min, &c.sample, q) {
        Ok((c17, c18)) => {
            report.push(c17);
            report.push(c18);
        }
        Err(e) => {
            report.push(inconclusive("C17", &e));
            report.push(inconclusive("C18", &e));
        }
    }
    let code = report.exit_code();
    let summary: Vec<EntrySummary> = report
        .entries
        .iter()
        .map(|e| EntrySummary {
            condition: &e.condition,
            window: &e.window,
            constant: e.constant,
            slope: e.slope,
            trend: &e.trend,
            verdict: e.verdict,
            note: &e.note,
        })
        .collect();
    write_json(ctx.create("check.json")?, &json!({"config_hash": ctx.hash, "verdict": report.verdict(), "entries": summary}))?;
    let rows: Vec<_> = report.entries.iter().flat_map(|e| e.rows.iter()).collect();
    write_records(ctx.create("check.csv")?, &json!({"kind": "assumptions", "config_hash": ctx.hash}), &rows)?;
    timer.finish(&ctx.out, "check", &ctx.hash, ctx.seed, vec!["check.json".into(), "check.csv".into()], code)?;
    Ok(code)
}

/// Grid variants written by `solve`.
const VARIANTS: [(&str, usize, f64); 3] = [("spectrum", 1, 1.0), ("spectrum-wide", 2, 2.0), ("spectrum-fine", 2, 1.0)];

pub fn solve(ctx: &Ctx) -> Result<i32> {
    let timer = Timer::start();
    let v = ctx.cfg.potential()?;
    let base = ctx.cfg.grid()?;
    let count = if ctx.cfg.solver.refine { VARIANTS.len() } else { 1 };
    let mut outputs = Vec::new();
    let mut summary = Vec::new();
    for &(name, n_factor, l_factor) in &VARIANTS[..count] {
        let grid = base.refined(n_factor, l_factor)?;
        let spec = lowest_eigenpairs(&build_operator(&ctx.cfg.model, &v, &grid)?, ctx.cfg.solver.k, ctx.cfg.solver.tol)?;
        write_spectrum_binary(ctx.create(&format!("{name}.bin"))?, &spec, &ctx.hash)?;
        outputs.push(format!("{name}.bin"));
        if name == "spectrum" {
            write_spectrum_csv(ctx.create("spectrum.csv")?, &spec, &ctx.hash)?;
            outputs.push("spectrum.csv".into());
        }
        summary.push(json!({
            "name": name,
            "grid": spec.grid,
            "eigenvalues": spec.eigenvalues,
            "residuals": spec.residuals,
            "gap": spec.gap(),
            "orthonormality_defect": spec.orthonormality_defect(),
            "applications": spec.applications,
            "warnings": spec.warnings,
        }));
    }
    write_json(ctx.create("solve.json")?, &json!({"config_hash": ctx.hash, "spectra": summary}))?;
    outputs.push("solve.json".into());
    timer.finish(&ctx.out, "solve", &ctx.hash, ctx.seed, outputs, 0)?;
    Ok(0)
}

fn load_spectrum(dir: &Path, name: &str, hash: &str) -> Result<SpectrumResult> {
    let path = dir.join(format!("{name}.bin"));
    let f = File::open(&path).with_context(|| format!("opening {} (run `solve` first)", path.display()))?;
    let (spec, stored) = read_spectrum_binary(std::io::BufReader::new(f))?;
    if stored != hash {
        bail!("{} was produced by a different configuration (hash {stored})", path.display());
    }
    Ok(spec)
}

#[derive(Serialize)]
struct DominationSummary {
    coarse: DominationReport,
    fine: Option<DominationReport>,
    change: Option<f64>,
    verdict: Verdict,
}

#[derive(Serialize)]
struct SubaveragingSummary {
    label: &'static str,
    report: SubaveragingReport,
    refined_sup: Option<f64>,
    verdict: Verdict,
}

pub fn verify(ctx: &Ctx, spectrum_dir: &Path) -> Result<i32> {
    let timer = Timer::start();
    let (m, vs) = (&ctx.cfg.model, &ctx.cfg.verify);
    let v = ctx.cfg.potential()?;
    let spec = load_spectrum(spectrum_dir, "spectrum", &ctx.hash)?;
    let wide = load_spectrum(spectrum_dir, "spectrum-wide", &ctx.hash).ok();
    let fine = load_spectrum(spectrum_dir, "spectrum-fine", &ctx.hash).ok();
    let window = vs.window();

    let mut envelope: EnvelopeReport = ground_state_envelope_with(&spec, m, &v, &window, vs.envelope)?;
    let mut notes = Vec::new();
    match &wide {
        Some(w) => envelope = envelope.with_refinement(&ground_state_envelope_with(w, m, &v, &window, vs.envelope)?),
        None => {
            envelope.verdict = envelope.verdict.worst(Verdict::Inconclusive);
            notes.push("no doubled-box spectrum: envelope stability not tested");
        }
    }
    let mut verdict = envelope.verdict;

    let mut domination = Vec::new();
    for n in 1..=vs.domination_max_n {
        let coarse = eigenfunction_domination(&spec, n, &window)?;
        let fine_rep = fine.as_ref().map(|f| eigenfunction_domination(f, n, &window)).transpose()?;
        let change = fine_rep.as_ref().map(|f| domination_change(&coarse, f));
        let v = match change {
            Some(c) if coarse.sup.is_finite() && c < vs.domination_change => Verdict::Pass,
            Some(_) => Verdict::FailDivergent,
            None => Verdict::Inconclusive,
        };
        verdict = verdict.worst(v);
        domination.push(DominationSummary { coarse, fine: fine_rep, change, verdict: v });
    }

    let mut subaveraging = Vec::new();
    let probes: Vec<(&'static str, usize)> = if spec.k() > 1 { vec![("phi_0", 0), ("|phi_1|", 1)] } else { vec![("phi_0", 0)] };
    for (label, n) in probes {
        let f = |s: &SpectrumResult| -> Vec<f64> { s.eigenvectors[n].iter().map(|x| x.abs()).collect() };
        let report = subaveraging_envelope(&spec, m, spec.eigenvalues[n], &f(&spec), &window)?;
        let refined_sup = wide.as_ref().map(|w| subaveraging_envelope(w, m, w.eigenvalues[n], &f(w), &window).map(|r| r.sup)).transpose()?;
        let v = match refined_sup {
            Some(s) if report.verdict == Verdict::Pass && (s / report.sup).max(report.sup / s) < vs.envelope.stability_factor => Verdict::Pass,
            Some(_) => Verdict::FailDivergent,
            None => Verdict::Inconclusive,
        };
        verdict = verdict.worst(v);
        subaveraging.push(SubaveragingSummary { label, report, refined_sup, verdict: v });
    }

    let mut green: Option<(GreenSandwich, McEstimate, bool)> = None;
    if let Some(x) = vs.green_point {
        let mut cfg = ctx.cfg.path_config(ctx.seed);
        cfg.workers = ctx.threads;
        let ball = Ball::new(vec![x], 1.0);
        let sandwich = green_sandwich(m, &v, &[x], &ball, &cfg)?;
        let g = green_mc(m, &v, &Region { balls: vec![ball] }, &[x], &cfg)?;
        let inside = sandwich.contains(&g, 3.0);
        verdict = verdict.worst(if inside { Verdict::Pass } else { Verdict::FailDivergent });
        green = Some((sandwich, g, inside));
    }

    let code = verdict_exit(verdict);
    write_envelope_csv(ctx.create("envelope.csv")?, &envelope, &ctx.hash)?;
    let envelope_summary = json!({
        "window": envelope.window,
        "min": envelope.min,
        "max": envelope.max,
        "spread": envelope.spread,
        "decay_slope": envelope.decay.slope,
        "decay_slope_se": envelope.decay.slope_se,
        "refinement": envelope.refinement,
        "verdict": envelope.verdict,
    });
    write_json(
        ctx.create("verify.json")?,
        &json!({
            "config_hash": ctx.hash,
            "verdict": verdict,
            "envelope": envelope_summary,
            "domination": domination,
            "subaveraging": subaveraging,
            "green": green.map(|(s, g, inside)| json!({"sandwich": s, "estimate": g, "inside": inside})),
            "notes": notes,
        }),
    )?;
    timer.finish(&ctx.out, "verify", &ctx.hash, ctx.seed, vec!["envelope.csv".into(), "verify.json".into()], code)?;
    Ok(code)
}

fn classification_tables(ctx: &Ctx, r: &ClassificationReport) -> Result<Vec<String>> {
    let header = |kind: &str| json!({"kind": kind, "config_hash": ctx.hash});
    let rows: Vec<Vec<f64>> = r.ratio.rows.iter().map(|p| vec![p.r, p.value]).collect();
    write_csv(ctx.create("ratio.csv")?, &header("ratio"), &["r", "rho"], &rows)?;
    let table = |rows: &[levykac::classify::DiagnosticRow]| -> Vec<Vec<f64>> {
        rows.iter().map(|d| vec![d.t, d.sup, d.sup_radius, d.sup_doubled, d.growth]).collect()
    };
    let cols = ["t", "sup", "sup_radius", "sup_doubled", "growth"];
    write_csv(ctx.create("gsd.csv")?, &header("gsd"), &cols, &table(&r.gsd.rows))?;
    write_csv(ctx.create("iuc.csv")?, &header("iuc"), &cols, &table(&r.iuc.rows))?;
    let fe: Vec<Vec<f64>> = r
        .free_energy
        .iter()
        .flat_map(|rep| rep.rows.iter().map(move |row| vec![rep.t0, row.annulus.a, row.annulus.b, row.energy, row.entropy, row.free, row.sign as f64]))
        .collect();
    write_csv(ctx.create("free_energy.csv")?, &header("free-energy"), &["t0", "a", "b", "E", "H", "F", "sign"], &fe)?;
    Ok(vec!["ratio.csv".into(), "gsd.csv".into(), "iuc.csv".into(), "free_energy.csv".into()])
}

pub fn classify(ctx: &Ctx, spectrum_dir: &Path) -> Result<i32> {
    let timer = Timer::start();
    let v = ctx.cfg.potential()?;
    let spec = load_spectrum(spectrum_dir, "spectrum", &ctx.hash)?;
    let wide = load_spectrum(spectrum_dir, "spectrum-wide", &ctx.hash).context("classification needs the doubled-box spectrum (solver.refine = true)")?;
    let report = run_classify(&ctx.cfg.model, &v, &spec, &wide, &ctx.cfg.classify, &ctx.cfg.quadrature)?;
    let code = report.verdict.exit_code();
    let mut outputs = classification_tables(ctx, &report)?;
    write_json(
        ctx.create("classification.json")?,
        &json!({"config_hash": ctx.hash, "verdict": report.verdict.label(), "report": report}),
    )?;
    outputs.push("classification.json".into());
    timer.finish(&ctx.out, "classify", &ctx.hash, ctx.seed, outputs, code)?;
    Ok(code)
}

pub fn mc(ctx: &Ctx) -> Result<i32> {
    let timer = Timer::start();
    let m = &ctx.cfg.model;
    let spec = &ctx.cfg.mc;
    let v = ctx.cfg.potential()?;
    let mut cfg = ctx.cfg.path_config(ctx.seed);
    cfg.workers = ctx.threads;
    let mut records = Vec::new();
    for &x0 in &spec.points {
        let mut x = vec![0.0; m.dim];
        x[0] = x0;
        for est in &spec.estimators {
            let ball = Region::ball(x.clone(), spec.ball_radius);
            records.push(match est {
                Estimator::FeynmanKac => feynman_kac(m, &v, spec.t, &x, &cfg)?,
                Estimator::Survival => survival(m, &ball, spec.t, &x, &cfg)?,
                Estimator::Green => green_mc(m, &v, &ball, &x, &cfg)?,
            });
        }
    }
    write_json(ctx.create("mc.json")?, &json!({"config_hash": ctx.hash, "records": records}))?;
    timer.finish(&ctx.out, "mc", &ctx.hash, ctx.seed, vec!["mc.json".into()], 0)?;
    Ok(0)
}

const STAGE_FILES: [(&str, &str); 5] =
    [("solve", "solve.json"), ("check", "check.json"), ("verify", "verify.json"), ("classify", "classification.json"), ("mc", "mc.json")];

const PLOT_TABLES: [&str; 5] = ["envelope.csv", "ratio.csv", "gsd.csv", "iuc.csv", "free_energy.csv"];

/// Consolidates a run directory; refuses files from different configurations.
pub fn report(run_dir: &Path) -> Result<i32> {
    let timer = Timer::start();
    let mut hash: Option<String> = None;
    let mut agree = |found: &str, source: &str| -> Result<()> {
        match &hash {
            Some(h) if h != found => bail!("{source} has config hash {found}, expected {h}"),
            Some(_) => Ok(()),
            None => {
                hash = Some(found.to_string());
                Ok(())
            }
        }
    };
    let mut stages = serde_json::Map::new();
    for (stage, file) in STAGE_FILES {
        let path = run_dir.join(file);
        if !path.exists() {
            continue;
        }
        let value: Value = serde_json::from_reader(std::io::BufReader::new(File::open(&path)?))?;
        let h = value["config_hash"].as_str().with_context(|| format!("{file} has no config hash"))?.to_string();
        agree(&h, file)?;
        stages.insert(stage.into(), value);
    }
    let plots = run_dir.join("plots");
    let mut copied = Vec::new();
    for table in PLOT_TABLES.iter().chain(["spectrum.csv"].iter()) {
        let path = run_dir.join(table);
        if !path.exists() {
            continue;
        }
        let header = read_csv_header(File::open(&path)?)?;
        let h = header["config_hash"].as_str().with_context(|| format!("{table} has no config hash"))?.to_string();
        agree(&h, table)?;
        copied.push(*table);
    }
    for name in ["spectrum", "spectrum-wide", "spectrum-fine"] {
        let path = run_dir.join(format!("{name}.bin"));
        if path.exists() {
            let (_, h) = read_spectrum_binary(std::io::BufReader::new(File::open(&path)?))?;
            agree(&h, &format!("{name}.bin"))?;
        }
    }
    let Some(hash) = hash else {
        bail!("{} contains no stage outputs", run_dir.display());
    };
    std::fs::create_dir_all(&plots)?;
    let mut outputs = vec!["report.json".to_string()];
    for table in copied {
        if table == "spectrum.csv" {
            continue;
        }
        std::fs::copy(run_dir.join(table), plots.join(table))?;
        outputs.push(format!("plots/{table}"));
    }
    if run_dir.join("spectrum.bin").exists() {
        let (spec, _) = read_spectrum_binary(std::io::BufReader::new(File::open(run_dir.join("spectrum.bin"))?))?;
        let rows: Vec<Vec<f64>> = (0..spec.grid.len())
            .filter(|&i| spec.grid.point(i).iter().skip(1).all(|c| *c == 0.0))
            .map(|i| vec![spec.grid.point(i)[0], spec.phi0()[i]])
            .collect();
        write_csv(BufWriter::new(File::create(plots.join("phi0.csv"))?), &json!({"kind": "phi0", "config_hash": hash}), &["x", "phi0"], &rows)?;
        outputs.push("plots/phi0.csv".into());
    }
    write_json(BufWriter::new(File::create(run_dir.join("report.json"))?), &json!({"config_hash": hash, "stages": stages}))?;
    timer.finish(run_dir, "report", &hash, 0, outputs, 0)?;
    Ok(0)
}
