//! Versioned run manifest tying every artifact of a pipeline run together.
//!
//! Paths are stored relative to the manifest's own directory so a run
//! folder can be archived or moved wholesale. Maps are ordered so the
//! serialized form is stable, and no timestamps are recorded: rerunning a
//! pipeline with the same seed must produce byte-identical output.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const MANIFEST_FORMAT: &str = "certopt.manifest/1";
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub run_id: String,
    pub tool_version: String,
    pub problem: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dtlz2_form: Option<String>,
    /// Seed actually fed to each stochastic stage, keyed by stage label.
    pub seeds: BTreeMap<String, u64>,
    /// Flat dotted-key snapshot of the effective configuration.
    pub config: BTreeMap<String, String>,
    /// Artifact paths relative to the manifest location, keyed by role.
    pub artifacts: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(run_id: &str, problem: &str) -> RunManifest {
        RunManifest {
            format: MANIFEST_FORMAT.into(),
            run_id: run_id.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            problem: problem.into(),
            dtlz2_form: None,
            seeds: BTreeMap::new(),
            config: BTreeMap::new(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn record_seed(&mut self, stage: &str, seed: u64) {
        self.seeds.insert(stage.into(), seed);
    }

    pub fn record_config(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.into(), value.to_string());
    }

    pub fn record_artifact(&mut self, role: &str, relative_path: &str) {
        self.artifacts.insert(role.into(), relative_path.into());
    }

    pub fn artifact_path(&self, dir: &Path, role: &str) -> Result<PathBuf> {
        let rel = self
            .artifacts
            .get(role)
            .with_context(|| format!("manifest has no '{role}' artifact"))?;
        Ok(dir.join(rel))
    }

    /// Writes the manifest after checking that every referenced artifact
    /// actually exists next to it.
    pub fn finalize(&self, dir: &Path) -> Result<PathBuf> {
        for (role, rel) in &self.artifacts {
            let p = dir.join(rel);
            if !p.is_file() {
                bail!("manifest artifact '{role}' points at missing file {}", p.display());
            }
        }
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let manifest: RunManifest =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if manifest.format != MANIFEST_FORMAT {
            bail!(
                "unsupported manifest format '{}' (expected '{MANIFEST_FORMAT}')",
                manifest.format
            );
        }
        Ok(manifest)
    }
}
