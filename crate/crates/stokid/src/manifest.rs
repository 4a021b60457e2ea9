//! Run manifests.
//!
//! Every CLI command records what it ran, with content digests of its inputs
//! and outputs, into `manifest.json` next to the outputs. Re-running the
//! recorded command line with the same seed reproduces the outputs byte for
//! byte, and the digests make silent divergence visible.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command_line: Vec<String>,
    /// Resolved configuration snapshot of the command.
    pub config: serde_json::Value,
    pub master_seed: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub duration_secs: f64,
}

/// Hex SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    Ok(out)
}

/// Builder used by the CLI: collects digests while a command runs.
pub struct ManifestBuilder {
    started: Instant,
    manifest: RunManifest,
}

impl ManifestBuilder {
    pub fn new(command_line: Vec<String>, config: serde_json::Value, master_seed: u64) -> Self {
        ManifestBuilder {
            started: Instant::now(),
            manifest: RunManifest {
                schema_version: 1,
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                command_line,
                config,
                master_seed,
                inputs: Vec::new(),
                outputs: Vec::new(),
                duration_secs: 0.0,
            },
        }
    }

    pub fn add_input(&mut self, path: &Path) -> io::Result<()> {
        self.manifest.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) -> io::Result<()> {
        self.manifest.outputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    /// Finalize and write `manifest.json` into `dir`; returns its path.
    pub fn write(mut self, dir: &Path) -> io::Result<PathBuf> {
        self.manifest.duration_secs = self.started.elapsed().as_secs_f64();
        let path = dir.join("manifest.json");
        let mut f = File::create(&path)?;
        serde_json::to_writer_pretty(&mut f, &self.manifest)?;
        f.write_all(b"\n")?;
        Ok(path)
    }
}
