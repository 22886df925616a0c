//! Run manifest: one appended line per executed stage.
//!
//! Columns: `stage version seed inputs config unix_time`. `inputs` lists
//! `file=sha256` for every file the stage read. The timestamp is the last
//! column and the only field that differs between identical runs.

use std::fs::{File, OpenOptions};
use std::io::{BufReader, Read, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::artifacts::MANIFEST;
use crate::config::{PipelineConfig, Stage};
use crate::error::{PipelineError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn file_digest(path: &Path) -> Result<String> {
    let f = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut reader = BufReader::new(f);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = reader.read(&mut buf).map_err(|e| PipelineError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub fn append(config: &PipelineConfig, stage: Stage, inputs: &[&Path]) -> Result<()> {
    let digests = inputs
        .iter()
        .map(|p| {
            let name = p.file_name().map_or_else(
                || p.display().to_string(),
                |n| n.to_string_lossy().into_owned(),
            );
            Ok(format!("{name}={}", file_digest(p)?))
        })
        .collect::<Result<Vec<_>>>()?
        .join(",");
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let path = config.artifact(MANIFEST);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| PipelineError::io(&path, e))?;
    writeln!(
        f,
        "{stage}\t{VERSION}\t{}\t{}\t{}\t{now}",
        config.seed,
        if digests.is_empty() { "-" } else { &digests },
        config.describe()
    )
    .map_err(|e| PipelineError::io(&path, e))
}
