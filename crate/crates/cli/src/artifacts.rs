//! Artifact directories: refusal to clobber, JSON/CSV/SVG writers and the
//! run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::UsageError;

pub struct ArtifactDir {
    root: PathBuf,
}

impl ArtifactDir {
    /// Opens `root` for writing. A non-empty directory is refused unless
    /// `overwrite` (or `resume`) is set.
    pub fn create(root: PathBuf, overwrite: bool) -> Result<Self> {
        if root.exists() {
            let occupied = fs::read_dir(&root)
                .with_context(|| format!("reading {}", root.display()))?
                .next()
                .is_some();
            if occupied && !overwrite {
                return Err(UsageError(format!(
                    "{} already contains results; pass --overwrite to replace them",
                    root.display()
                ))
                .into());
            }
        }
        fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn writer(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        let mut w = self.writer(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let mut w = self.writer(name)?;
        w.write_all(bytes)?;
        w.flush()?;
        Ok(())
    }

    /// Writes a CSV table; cells are already formatted.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.writer(name)?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// What produced an artifact directory. Contains no timestamps, so
/// identical inputs give an identical manifest.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seeds: Vec<u64>,
    /// Digest of `config.json`.
    pub config_sha256: String,
    pub inputs: Vec<InputDigest>,
}

impl Manifest {
    pub fn new<C: Serialize>(command: &'static str, config: &C, seeds: Vec<u64>) -> Result<Self> {
        let mut resolved = serde_json::to_vec_pretty(config)?;
        resolved.push(b'\n');
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seeds,
            config_sha256: sha256_hex(&resolved),
            inputs: Vec::new(),
        })
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }
}

/// Writes `config.json` (resolved), a verbatim copy of the config file if
/// one was given, and `manifest.json`.
pub fn record_run<C: Serialize>(
    dir: &ArtifactDir,
    command: &'static str,
    config: &C,
    raw_config: Option<(&Path, &[u8])>,
    extra_inputs: &[&Path],
    seeds: Vec<u64>,
) -> Result<()> {
    let mut manifest = Manifest::new(command, config, seeds)?;
    dir.write_json("config.json", config)?;
    if let Some((path, bytes)) = raw_config {
        dir.write_bytes("config.input.json", bytes)?;
        manifest.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }
    for p in extra_inputs {
        manifest.add_input(p)?;
    }
    dir.write_json("manifest.json", &manifest)
}
