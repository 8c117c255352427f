//! Output headers, digests and the run manifest.
//!
//! Every file a stage writes starts with one `#` line naming the tool
//! version, the stage, the seed and the digest of the resolved configuration.
//! All readers skip `#` lines. The manifest itself lives next to the outputs
//! and records wall-clock times, so it is not part of the byte-identical set.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the canonical TOML rendering of the configuration.
pub fn config_digest(config: &RunConfig) -> String {
    sha256_hex(config.to_toml().as_bytes())
}

pub fn header_line(stage: &str, config: &RunConfig) -> String {
    format!(
        "# dirflow {VERSION} stage={stage} seed={} config={}\n",
        config.seed,
        config_digest(config)
    )
}

/// Drop leading `#` lines.
pub fn strip_header(text: &str) -> &str {
    let mut rest = text;
    while rest.starts_with('#') {
        rest = rest.split_once('\n').map_or("", |(_, r)| r);
    }
    rest
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub wall_clock_seconds: f64,
    /// Output path to SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config_digest: String,
    pub config: String,
    pub stages: BTreeMap<String, StageRecord>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn load_or_new(path: &Path, config: &RunConfig) -> CliResult<Self> {
        let digest = config_digest(config);
        if let Ok(text) = fs::read_to_string(path) {
            if let Ok(m) = serde_json::from_str::<RunManifest>(&text) {
                if m.config_digest == digest {
                    return Ok(m);
                }
            }
        }
        Ok(Self {
            version: VERSION.to_string(),
            config_digest: digest,
            config: config.to_toml(),
            stages: BTreeMap::new(),
            notes: Vec::new(),
        })
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }
}

/// Writes stage outputs with headers and remembers their digests.
pub struct StageWriter<'a> {
    stage: &'static str,
    config: &'a RunConfig,
    pub record: StageRecord,
}

impl<'a> StageWriter<'a> {
    pub fn new(stage: &'static str, config: &'a RunConfig) -> Self {
        Self {
            stage,
            config,
            record: StageRecord::default(),
        }
    }

    pub fn write(&mut self, path: &Path, body: &str) -> CliResult<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            ensure_dir(parent)?;
        }
        let text = header_line(self.stage, self.config) + body;
        fs::write(path, &text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.record
            .outputs
            .insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(())
    }

    /// Record the stage in `output_dir/manifest.json`.
    pub fn finish(self, seconds: f64, notes: &[String]) -> CliResult<PathBuf> {
        let dir = &self.config.paths.output_dir;
        ensure_dir(dir)?;
        let path = dir.join(MANIFEST_FILE);
        let mut manifest = RunManifest::load_or_new(&path, self.config)?;
        let mut record = self.record;
        record.wall_clock_seconds = seconds;
        manifest.stages.insert(self.stage.to_string(), record);
        for n in notes {
            if !manifest.notes.contains(n) {
                manifest.notes.push(n.clone());
            }
        }
        manifest.save(&path)?;
        Ok(path)
    }
}
