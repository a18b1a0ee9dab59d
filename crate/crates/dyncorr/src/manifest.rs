//! Run manifests: every file-producing command records what it read, what it
//! wrote, and the settings that govern reproduction.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

/// One input file and its content digest: the logical series checksum for
/// series files, an FNV-1a byte digest for text inputs.
#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub checksum: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowSettings {
    pub k: usize,
    pub degenerate_epsilon: f64,
}

/// Settings and provenance of one CLI run. Re-running the command with the
/// same inputs and settings reproduces the listed outputs byte-for-byte
/// (the manifest itself records the wall clock, so it varies).
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub tool_version: String,
    pub inputs: Vec<InputRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tile_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub outputs: Vec<String>,
    pub duration_ms: u64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            argv: std::env::args().collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            window: None,
            normalization: None,
            seed: None,
            tile_width: None,
            threads: None,
            outputs: Vec::new(),
            duration_ms: 0,
        }
    }

    pub fn record_input(&mut self, path: &Path, checksum: u64) {
        self.inputs.push(InputRecord {
            path: path.display().to_string(),
            checksum: format!("{checksum:016x}"),
        });
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut writer = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut writer, self).map_err(io::Error::other)?;
        writer.write_all(b"\n")?;
        writer.flush()
    }
}

/// FNV-1a digest of a file's bytes, for text inputs (plans, configs,
/// fixtures).
pub fn file_checksum(path: &Path) -> io::Result<u64> {
    let mut file = File::open(path)?;
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut buf = [0u8; 8192];
    loop {
        let read = file.read(&mut buf)?;
        if read == 0 {
            break;
        }
        for &b in &buf[..read] {
            hash = (hash ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3);
        }
    }
    Ok(hash)
}
