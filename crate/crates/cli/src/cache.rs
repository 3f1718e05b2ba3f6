//! On-disk cache: one directory per entry holding `manifest.json` and the
//! entry's matrix in the zlinalg text format. All access goes through an
//! advisory lock on `<root>/lock`.

use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use ordist_core::zlinalg::IntMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

const MANIFEST_SCHEMA: &str = "ordist.cache/1";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    schema: String,
    version: String,
    kind: String,
    key: String,
    matrix_rows: usize,
    matrix_cols: usize,
    result: Value,
}

#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

fn sanitize(key: &str) -> String {
    key.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

impl Cache {
    /// Opens (creating if needed) the cache at `dir`, or `None` when the
    /// directory is not writable.
    pub fn open(dir: &Path) -> Option<Cache> {
        fs::create_dir_all(dir).ok()?;
        let cache = Cache { root: dir.to_path_buf() };
        cache.lock_file().ok()?;
        Some(cache)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock_file(&self) -> std::io::Result<File> {
        OpenOptions::new().create(true).truncate(false).write(true).open(self.root.join("lock"))
    }

    fn entry_dir(&self, kind: &str, key: &str) -> PathBuf {
        self.root.join(format!("v{}", env!("CARGO_PKG_VERSION"))).join(kind).join(sanitize(key))
    }

    /// The cached result, or `None` on a miss. Entries that do not parse or
    /// do not match their key count as misses.
    pub fn load(&self, kind: &str, key: &str) -> Result<Option<Value>, CliError> {
        let lock = self.lock_file().map_err(|e| CliError::Cache(e.to_string()))?;
        lock.lock_shared().map_err(|e| CliError::Cache(e.to_string()))?;
        let dir = self.entry_dir(kind, key);
        let Ok(text) = fs::read_to_string(dir.join("manifest.json")) else {
            return Ok(None);
        };
        let Ok(m) = serde_json::from_str::<Manifest>(&text) else {
            return Ok(None);
        };
        if m.schema != MANIFEST_SCHEMA || m.version != env!("CARGO_PKG_VERSION") || m.kind != kind || m.key != key {
            return Ok(None);
        }
        let Ok(mtext) = fs::read_to_string(dir.join("matrix.txt")) else {
            return Ok(None);
        };
        match IntMatrix::from_text(&mtext) {
            Ok(mat) if mat.rows() == m.matrix_rows && mat.cols() == m.matrix_cols => Ok(Some(m.result)),
            _ => Ok(None),
        }
    }

    pub fn store(&self, kind: &str, key: &str, result: &Value, matrix: &IntMatrix) -> Result<(), CliError> {
        let err = |e: std::io::Error| CliError::Cache(e.to_string());
        let lock = self.lock_file().map_err(err)?;
        lock.lock().map_err(err)?;
        let dir = self.entry_dir(kind, key);
        fs::create_dir_all(&dir).map_err(err)?;
        let manifest = Manifest {
            schema: MANIFEST_SCHEMA.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            kind: kind.into(),
            key: key.into(),
            matrix_rows: matrix.rows(),
            matrix_cols: matrix.cols(),
            result: result.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        // matrix first, so a manifest never points at a missing matrix
        write_atomic(&dir.join("matrix.txt"), &matrix.to_text()).map_err(err)?;
        write_atomic(&dir.join("manifest.json"), &text).map_err(err)?;
        Ok(())
    }
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(tmp, path)
}
