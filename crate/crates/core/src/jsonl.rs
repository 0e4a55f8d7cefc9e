use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Writes `contents` to a sibling temp file and renames it into place.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub(crate) fn to_lines<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub(crate) fn write_all<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    write_atomic(path, to_lines(records)?.as_bytes())
}

pub(crate) fn append<T: Serialize>(file: &mut fs::File, path: &Path, record: &T) -> Result<()> {
    let mut line = serde_json::to_string(record)?;
    line.push('\n');
    file.write_all(line.as_bytes())
        .and_then(|_| file.flush())
        .map_err(|e| Error::io(path, e))
}

/// Parses one record per non-blank line. On failure returns the 1-based line
/// number alongside the parse message.
pub(crate) fn parse_lines<T: DeserializeOwned>(path: &Path) -> Result<Result<Vec<T>, (usize, String)>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => out.push(v),
            Err(e) => return Ok(Err((idx + 1, e.to_string()))),
        }
    }
    Ok(Ok(out))
}

pub(crate) fn read_all<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    parse_lines(path)?.map_err(|(line, msg)| Error::artifact(path, format!("line {line}: {msg}")))
}
