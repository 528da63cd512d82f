//! Run configuration (TOML).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use levykac::assumptions::SampleSpec;
use levykac::classify::ClassifyOptions;
use levykac::models::PotentialSpec;
use levykac::montecarlo::PathConfig;
use levykac::verify::{EnvelopeOptions, Window};
use levykac::{Grid, LevyModel, Potential, QuadratureSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub model: LevyModel,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub check: CheckSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub classify: ClassifyOptions,
    #[serde(default)]
    pub mc: McSpec,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    pub half_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 4096, half_width: 40.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub k: usize,
    pub tol: f64,
    /// Also solve on the `(2N, 2L)` and `(2N, L)` grids used by the
    /// refinement checks of `verify` and `classify`.
    pub refine: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { k: 6, tol: 1e-9, refine: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSpec {
    pub r: f64,
    pub separations: Vec<f64>,
    pub comparability_radius: f64,
    pub integrability_radius: f64,
    pub log_comparison_t: f64,
    pub log_comparison_r_min: f64,
    pub sample: SampleSpec,
}

impl Default for CheckSpec {
    fn default() -> Self {
        Self {
            r: 0.5,
            separations: vec![1.0, 2.0, 5.0, 10.0, 20.0, 30.0],
            comparability_radius: 2.0,
            integrability_radius: 1.0,
            log_comparison_t: 1.0,
            log_comparison_r_min: 2.0,
            sample: SampleSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub window: [f64; 2],
    pub envelope: EnvelopeOptions,
    /// Eigenfunctions `1..=max_n` are tested for domination.
    pub domination_max_n: usize,
    pub domination_change: f64,
    /// Run the Monte Carlo Green sandwich at this point (1D).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub green_point: Option<f64>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self { window: [5.0, 15.0], envelope: EnvelopeOptions::default(), domination_max_n: 5, domination_change: 0.2, green_point: None }
    }
}

impl VerifySpec {
    pub fn window(&self) -> Window {
        Window::new(self.window[0], self.window[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    FeynmanKac,
    Survival,
    Green,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSpec {
    pub dt: f64,
    pub n_paths: usize,
    /// Horizon of the Green estimator.
    pub horizon: f64,
    /// Time of the Feynman-Kac and survival estimators.
    pub t: f64,
    /// Start points (first coordinate; the others are 0).
    pub points: Vec<f64>,
    pub estimators: Vec<Estimator>,
    /// Radius of the ball `B(x, r)` used by survival and Green estimators.
    pub ball_radius: f64,
    pub halving_check: bool,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            n_paths: 10_000,
            horizon: 2.0,
            t: 1.0,
            points: vec![0.0],
            estimators: vec![Estimator::FeynmanKac],
            ball_radius: 1.0,
            halving_check: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.potential()?.validate()?;
        self.grid()?;
        self.quadrature.validate()?;
        if self.solver.k == 0 || self.solver.k > 32 || !(self.solver.tol > 0.0) {
            bail!("solver needs 1 <= k <= 32 and tol > 0");
        }
        let [a, b] = self.verify.window;
        if !(a >= 0.0 && b > a) {
            bail!("verify window must satisfy 0 <= r_min < r_max");
        }
        if self.verify.domination_max_n >= self.solver.k {
            bail!("domination_max_n must be below k");
        }
        self.check.sample.validate()?;
        self.path_config(self.seed).validate()?;
        if self.mc.points.is_empty() {
            bail!("mc.points is empty");
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<Potential> {
        Ok(Potential::from_spec(&self.potential, &self.model)?)
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.model.dim, self.grid.half_width, self.grid.points)?)
    }

    pub fn path_config(&self, seed: u64) -> PathConfig {
        PathConfig {
            dt: self.mc.dt,
            horizon: self.mc.horizon,
            n_paths: self.mc.n_paths,
            seed,
            workers: None,
            halving_check: self.mc.halving_check,
        }
    }

    /// SHA-256 of the canonical (re-serialized) configuration, excluding the
    /// output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = None;
        let json = serde_json::to_string(&canonical).expect("configuration serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
