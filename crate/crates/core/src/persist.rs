//! Canonical serialization, content hashing, and file plumbing.
//!
//! Every configuration and report document is a key-value tree serialized
//! as JSON. Hashes are computed over a canonical form — keys sorted,
//! numbers in their shortest round-trip decimal form, no whitespace — so
//! the same content hashes identically regardless of key order or number
//! formatting in the source file. Record streams are newline-delimited
//! JSON, one record per line, suitable for append-only writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Name of the digest used for all content hashes; recorded in the audit trail.
pub const HASH_ALGORITHM: &str = "sha256";

/// Serde adapter for extended reals: JSON has no infinity, so +inf
/// serializes as `null` and `null` parses back as +inf. Used by report
/// fields that can legitimately be unbounded.
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            serializer.serialize_f64(*value)
        } else {
            serializer.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(deserializer)?.unwrap_or(f64::INFINITY))
    }
}

/// Serialize a value to its canonical JSON form.
///
/// `serde_json::Value` maps are backed by `BTreeMap`, so re-encoding
/// through `Value` sorts object keys. Numbers come out of ryu/itoa in
/// shortest round-trip form.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value)?;
    Ok(serde_json::to_string(&tree)?)
}

/// SHA-256 of the canonical JSON form, as lowercase hex.
pub fn canonical_hash<T: Serialize>(value: &T) -> Result<String> {
    let canon = canonical_json(value)?;
    Ok(sha256_hex(canon.as_bytes()))
}

/// Lowercase-hex SHA-256 of raw bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn file_err(path: &Path, source: std::io::Error) -> Error {
    Error::File {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, err: serde_json::Error) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: err.to_string(),
    }
}

/// Write bytes atomically: write to a sibling temp file, then rename over
/// the destination.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| file_err(dir, e))?;
    let tmp = dir.join(format!(
        ".{}.tmp.{}",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".to_string()),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| file_err(&tmp, e))?;
        f.write_all(bytes).map_err(|e| file_err(&tmp, e))?;
        f.sync_all().map_err(|e| file_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| file_err(path, e))
}

/// Serialize `value` as pretty JSON and write it atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// Parse a JSON document, naming the file in any error.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

/// Write records as newline-delimited JSON, atomically.
pub fn write_ndjson<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for record in records {
        serde_json::to_writer(&mut buf, record)?;
        buf.push(b'\n');
    }
    atomic_write(path, &buf)
}

/// Read a newline-delimited JSON stream; blank lines are skipped.
pub fn read_ndjson<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    let mut out = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| parse_err(path, e))?);
    }
    Ok(out)
}
