//! Output directory bookkeeping and the checksum manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::sha256_hex;
use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub config_sha256: String,
    pub seed: u64,
    pub grid_scale: usize,
    /// Every file of the output directory except the manifest itself.
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Option<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_NAME)).ok()?;
        serde_json::from_str(&text).ok()
    }
}

/// An output directory that remembers what was written into it.
#[derive(Debug)]
pub struct OutputDir {
    pub root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    /// Creates `root`. Files listed by a manifest of an earlier run are
    /// removed first so that stale artifacts cannot leak into the new one.
    pub fn prepare(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        if let Some(old) = Manifest::read(root) {
            for f in old.files {
                let p = root.join(&f.path);
                if p.is_file() {
                    fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
                }
            }
            let m = root.join(MANIFEST_NAME);
            fs::remove_file(&m).map_err(|e| CliError::io(&m, e))?;
        }
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
        self.written.push(p.clone());
        Ok(p)
    }

    /// Streams into `name` through a buffered writer.
    pub fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut dyn Write) -> degenlab_core::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        let file = fs::File::create(&p).map_err(|e| CliError::io(&p, e))?;
        let mut w = std::io::BufWriter::new(file);
        f(&mut w).map_err(CliError::Core)?;
        w.flush().map_err(|e| CliError::io(&p, e))?;
        self.written.push(p.clone());
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Plot(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Hashes every regular file under the root and writes the manifest.
    pub fn finish(&self, mut head: Manifest) -> Result<Manifest, CliError> {
        let mut files = Vec::new();
        collect(&self.root, &self.root, &mut files)?;
        files.sort();
        head.files = files
            .into_iter()
            .filter(|rel| rel != MANIFEST_NAME)
            .map(|rel| {
                let p = self.root.join(&rel);
                let bytes = fs::read(&p).map_err(|e| CliError::io(&p, e))?;
                Ok(FileEntry { path: rel, bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) })
            })
            .collect::<Result<_, CliError>>()?;
        let mut text = serde_json::to_string_pretty(&head).map_err(|e| CliError::Plot(e.to_string()))?;
        text.push('\n');
        let p = self.path(MANIFEST_NAME);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
        Ok(head)
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<(), CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let p = entry.path();
        if p.is_dir() {
            collect(root, &p, out)?;
        } else if p.is_file() {
            let rel = p.strip_prefix(root).expect("under root");
            let parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            out.push(parts.join("/"));
        }
    }
    Ok(())
}
