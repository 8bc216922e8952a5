//! On-disk state directory plumbing: advisory locking and atomic writes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use super::OrchestratorError;

/// Advisory exclusive lock over a state directory, taken by creating a
/// `.lock` file. Read-only commands work without it; anything that mutates
/// state holds it for the duration of the command.
pub struct StateLock {
    path: PathBuf,
}

impl StateLock {
    pub fn acquire(state_dir: &Path) -> Result<Self, OrchestratorError> {
        fs::create_dir_all(state_dir)?;
        let path = state_dir.join(".lock");
        for _ in 0..100 {
            match fs::OpenOptions::new()
                .write(true)
                .create_new(true)
                .open(&path)
            {
                Ok(_) => return Ok(StateLock { path }),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    std::thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Err(OrchestratorError::Locked)
    }
}

impl Drop for StateLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Write bytes atomically: temp file in the same directory, then rename.
/// Readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .expect("state files live inside the state dir");
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("state")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
