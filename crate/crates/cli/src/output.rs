use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "SPARSELAB_OUT_DIR";
pub const THREADS_ENV: &str = "SPARSELAB_THREADS";

/// Base directory for relative outputs: `$SPARSELAB_OUT_DIR` or `.`.
pub fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Write through a temporary file in the target directory and rename it into
/// place, so the target is either absent, the old file, or complete.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Apply `$SPARSELAB_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Some(raw) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let raw = raw.to_string_lossy();
    let threads: usize =
        raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
            CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{raw}'"))
        })?;
    // A second initialization in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}
