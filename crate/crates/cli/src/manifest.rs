use std::fs;
use std::io;
use std::path::Path;

use entforge::experiments::ExperimentConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Settings;

/// Bumped whenever a CSV column set changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct GateCounts {
    pub nq: usize,
    pub actual: usize,
    pub reference: usize,
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Everything needed to repeat a run, plus digests of what it wrote.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub schema_version: u32,
    pub command: String,
    pub arguments: Vec<String>,
    pub settings: Settings,
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub gate_counts: Vec<GateCounts>,
    pub gamma_convention: String,
    pub warnings: Vec<String>,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

pub fn digest_file(dir: &Path, name: &str) -> io::Result<OutputDigest> {
    let bytes = fs::read(dir.join(name))?;
    let hash = Sha256::digest(&bytes);
    Ok(OutputDigest {
        file: name.to_string(),
        sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
        bytes: bytes.len() as u64,
    })
}
