//! Output envelopes: every artifact carries the provenance needed to
//! reproduce it.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use xrsa::{Error, Result};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub command: String,
    pub config_hash: String,
    pub data_hash: String,
    pub seed: u64,
    pub created_unix: u64,
}

/// A written artifact: provenance, the run configuration, and the result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<C, R> {
    pub provenance: Provenance,
    pub config: C,
    pub result: R,
}

pub fn config_hash<C: Serialize>(config: &C) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(command: &str, data_hash: String, seed: u64, config: C, result: R) -> Result<Self> {
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let provenance = Provenance {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config_hash: config_hash(&config)?,
            data_hash,
            seed,
            created_unix,
        };
        Ok(Self { provenance, config, result })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        write_file(path, &json)
    }
}

pub fn read_envelope<C: DeserializeOwned, R: DeserializeOwned>(path: &Path) -> Result<Envelope<C, R>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{} is not a valid artifact: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
