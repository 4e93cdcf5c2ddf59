use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Data files of one run. `manifest.json` is derived from these.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub ledger_csv: Option<String>,
    pub report: String,
    pub extra: Vec<(String, String)>,
}

/// SHA-256 over `blob <len>\0<bytes>`, the git object framing.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

/// `--out`, then `WAVE_LAB_OUT`, then `wave-lab-out/<scenario>`.
pub fn resolve_out_dir(flag: Option<&str>, scenario: &str) -> PathBuf {
    if let Some(dir) = flag {
        return PathBuf::from(dir);
    }
    match std::env::var("WAVE_LAB_OUT") {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from("wave-lab-out").join(scenario),
    }
}

pub fn write_artifacts(out: &Path, cfg: &ExperimentConfig, art: &Artifacts) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    let mut files: Vec<(String, &str)> = Vec::new();
    if let Some(csv) = &art.ledger_csv {
        files.push(("ledger.csv".into(), csv));
    }
    files.push(("report.json".into(), &art.report));
    for (name, body) in &art.extra {
        files.push((name.clone(), body));
    }
    let mut hashes = BTreeMap::new();
    for (name, body) in &files {
        std::fs::write(out.join(name), body)?;
        hashes.insert(name.clone(), blob_hash(body.as_bytes()));
    }
    let combined: String = hashes.iter().map(|(k, v)| format!("{v}  {k}\n")).collect();
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "scenario": cfg.scenario,
        "config": cfg.entries(),
        "files": hashes,
        "content_hash": blob_hash(combined.as_bytes()),
        "timestamp": timestamp,
    });
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}
