//! JSON sidecar recording how an output file was produced.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::{Error, Result};

#[derive(Serialize)]
pub struct RunManifest {
    /// Subcommand name.
    pub command: String,
    /// Input files, as given on the command line.
    pub inputs: Vec<String>,
    /// Flattened parameter map.
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub unix_time: u64,
    pub wall_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<String>, params: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            params,
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            unix_time: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            wall_seconds: 0.0,
        }
    }

    /// Writes `<output>.manifest.json` next to the given output file.
    pub fn write_for(&self, output: &Path) -> Result<()> {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = Path::new(&name);
        let text = serde_json::to_string_pretty(self).expect("serializable");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
