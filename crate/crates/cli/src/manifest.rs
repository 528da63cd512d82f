//! Per-stage run manifests.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Result;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Versions {
    pub levykac: &'static str,
    pub levykac_cli: &'static str,
}

/// Everything that may legitimately differ between two identical runs lives
/// here and nowhere else.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub stage: String,
    pub config_hash: String,
    pub seed: u64,
    pub versions: Versions,
    pub parallel: bool,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub exit_code: i32,
    pub started_unix: u64,
    pub wall_time_s: f64,
}

pub struct Timer {
    start: Instant,
    started_unix: u64,
}

impl Timer {
    pub fn start() -> Self {
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self { start: Instant::now(), started_unix }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn finish(self, dir: &Path, stage: &str, config_hash: &str, seed: u64, outputs: Vec<String>, exit_code: i32) -> Result<()> {
        let m = Manifest {
            stage: stage.into(),
            config_hash: config_hash.into(),
            seed,
            versions: Versions { levykac: levykac::VERSION, levykac_cli: env!("CARGO_PKG_VERSION") },
            parallel: levykac::par::is_parallel(),
            threads: rayon::current_num_threads(),
            outputs,
            exit_code,
            started_unix: self.started_unix,
            wall_time_s: self.start.elapsed().as_secs_f64(),
        };
        let f = std::fs::File::create(dir.join(format!("manifest-{stage}.json")))?;
        levykac::io::write_json(std::io::BufWriter::new(f), &m)?;
        Ok(())
    }
}
