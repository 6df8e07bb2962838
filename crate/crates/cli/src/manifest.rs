use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bellswap::formats::FORMAT_VERSION;
use bellswap::Result;
use serde::Serialize;

/// Description of one run, written next to its output files.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub version: &'static str,
    pub format_version: u32,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new(seed: u64) -> Self {
        Self {
            command: String::new(),
            parameters: BTreeMap::new(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            format_version: FORMAT_VERSION,
            inputs: Vec::new(),
            outputs: Vec::new(),
            duration_seconds: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Display) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    pub fn finish(&mut self, started: Instant, path: &Path) -> Result<()> {
        self.duration_seconds = started.elapsed().as_secs_f64();
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        super::write(path, &text)
    }
}
