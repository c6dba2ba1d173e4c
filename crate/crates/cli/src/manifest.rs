use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "DISPERSIVE_KIT_SEED";
pub const FILE: &str = "manifest.json";

/// Written last into every output directory. All fields except
/// `timestamp_unix` are identical across reruns of the same command.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<String>,
    pub version: String,
    pub timestamp_unix: u64,
}

/// `--seed`, then the environment override, then the config value, then 0.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> anyhow::Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(v) = std::env::var(SEED_ENV) {
        return v.trim().parse().map_err(|_| anyhow::anyhow!("{SEED_ENV}=`{v}` is not an unsigned integer"));
    }
    Ok(config.unwrap_or(0))
}

pub fn write(
    out: &Path,
    command: &str,
    config: Option<&Path>,
    seed: Option<u64>,
    inputs: &[&Path],
    mut outputs: Vec<String>,
) -> anyhow::Result<()> {
    outputs.sort();
    let m = RunManifest {
        command: command.into(),
        config: config.map(Path::to_path_buf),
        seed,
        inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
        outputs,
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    std::fs::write(out.join(FILE), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}
