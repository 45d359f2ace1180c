use serde::Serialize;
use std::path::Path;

/// JSON record of one command invocation, written next to its artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub status: String,
    pub error: Option<String>,
    /// SHA-256 of the config file bytes, if one was read.
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub parallel: bool,
    pub workers: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            status: "running".into(),
            error: None,
            config_hash: None,
            seed: None,
            version: env!("CARGO_PKG_VERSION").into(),
            parallel: surrogate_core::parallel::ENABLED,
            workers: surrogate_core::parallel::workers(),
            wall_time_s: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join("run_manifest.json"), json + "\n")
    }
}
