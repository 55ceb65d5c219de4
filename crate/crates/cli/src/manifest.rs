use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use dimtrunc::config::KeyValues;

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.txt";

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Record of one run: the fully resolved configuration plus provenance.
/// Keys under `run.` are informational and ignored when the file is fed
/// back through `--config`.
pub struct RunManifest {
    subcommand: String,
    started: u64,
    outputs: Vec<PathBuf>,
    config: KeyValues,
}

impl RunManifest {
    pub fn start(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            started: unix_now(),
            outputs: Vec::new(),
            config: KeyValues::new(),
        }
    }

    pub fn set_config(&mut self, config: KeyValues) {
        self.config = config;
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let mut kv = KeyValues::new();
        kv.set("run.subcommand", self.subcommand.clone());
        kv.set("run.version", env!("CARGO_PKG_VERSION"));
        kv.set("run.started_unix", self.started.to_string());
        kv.set("run.finished_unix", unix_now().to_string());
        let outputs: Vec<String> = self.outputs.iter().map(|p| p.display().to_string()).collect();
        kv.set("run.outputs", outputs.join(";"));
        let text = format!("# dimtrunc run manifest\n{}{}", kv.render(), self.config.render());
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Reads a config file, dropping the informational `run.` keys.
pub fn load_config(path: Option<&Path>) -> Result<KeyValues, CliError> {
    let Some(path) = path else {
        return Ok(KeyValues::new());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parsed = KeyValues::parse(&text)?;
    let mut kv = KeyValues::new();
    for (k, v) in parsed.iter().filter(|(k, _)| !k.starts_with("run.")) {
        kv.set(k, v);
    }
    Ok(kv)
}
