//! Run manifests: the resolved settings text, digests of every input file,
//! the tool version, wall time, and command counters.  The manifest is the
//! one artifact allowed to differ between otherwise identical runs (it
//! carries the timing), so reproducibility checks exclude it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::{CliError, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

pub fn manifest_json(
    command: &str,
    config_text: &str,
    inputs: &BTreeMap<String, String>,
    wall_ms: f64,
    counters: serde_json::Value,
) -> String {
    let v = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config_text,
        "inputs": inputs,
        "wallMs": wall_ms,
        "counters": counters,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("manifest is plain data");
    s.push('\n');
    s
}
