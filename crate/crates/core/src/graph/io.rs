//! Edge-list files.
//!
//! Text: one `u v` pair per line in ASCII decimal; blank lines and lines
//! starting with `#` are skipped.
//!
//! Binary: little-endian 16-byte records `(u: u64, v: u64)`, optionally
//! preceded by a 24-byte header `"GWEL" | version: u32 | n: u64 | m: u64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EdgeList, VertexId, MAX_VERTEX_BITS};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: [u8; 4] = *b"GWEL";
pub const BINARY_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;
const RECORD_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeListFormat {
    Text,
    Binary,
}

impl FromStr for EdgeListFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(EdgeListFormat::Text),
            "bin" | "binary" => Ok(EdgeListFormat::Binary),
            other => Err(Error::Config(format!("unknown edge-list format {other:?}"))),
        }
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn check_id(path: &Path, line: usize, id: u64) -> Result<u64> {
    if id >> MAX_VERTEX_BITS != 0 {
        return Err(parse_err(
            path,
            line,
            format!("vertex id {id} is not below 2^{MAX_VERTEX_BITS}"),
        ));
    }
    Ok(id)
}

pub fn load_edge_list(path: impl AsRef<Path>, format: EdgeListFormat) -> Result<EdgeList> {
    let path = path.as_ref();
    match format {
        EdgeListFormat::Text => load_text(path),
        EdgeListFormat::Binary => load_binary(path),
    }
}

fn load_text(path: &Path) -> Result<EdgeList> {
    let reader = BufReader::new(File::open(path)?);
    let mut edges = Vec::new();
    let mut max_id: Option<u64> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut next_id = || -> Result<u64> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(path, line_no, "expected two vertex ids"))?;
            let id = tok
                .parse::<u64>()
                .map_err(|e| parse_err(path, line_no, format!("bad vertex id {tok:?}: {e}")))?;
            check_id(path, line_no, id)
        };
        let u = next_id()?;
        let v = next_id()?;
        if fields.next().is_some() {
            return Err(parse_err(path, line_no, "trailing fields after edge"));
        }
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v));
    }
    Ok(EdgeList {
        n: max_id.map_or(0, |m| m + 1),
        edges,
        directed: true,
        original_edge_count: None,
    })
}

fn load_binary(path: &Path) -> Result<EdgeList> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let u64_at = |b: &[u8], at: usize| u64::from_le_bytes(b[at..at + 8].try_into().unwrap());

    let (header, body) = if bytes.len() >= HEADER_LEN && bytes[..4] == BINARY_MAGIC {
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != BINARY_VERSION {
            return Err(parse_err(path, 0, format!("unsupported version {version}")));
        }
        let n = u64_at(&bytes, 8);
        let m = u64_at(&bytes, 16);
        (Some((n, m)), &bytes[HEADER_LEN..])
    } else {
        (None, &bytes[..])
    };
    if body.len() % RECORD_LEN != 0 {
        return Err(parse_err(
            path,
            body.len() / RECORD_LEN + 1,
            "truncated edge record",
        ));
    }
    let mut edges: Vec<(VertexId, VertexId)> = Vec::with_capacity(body.len() / RECORD_LEN);
    let mut max_id: Option<u64> = None;
    for (idx, rec) in body.chunks_exact(RECORD_LEN).enumerate() {
        let u = check_id(path, idx + 1, u64_at(rec, 0))?;
        let v = check_id(path, idx + 1, u64_at(rec, 8))?;
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v));
    }
    let inferred_n = max_id.map_or(0, |m| m + 1);
    let n = match header {
        Some((n, m)) => {
            if m != edges.len() as u64 {
                return Err(parse_err(
                    path,
                    0,
                    format!("header declares {m} edges, file holds {}", edges.len()),
                ));
            }
            if n < inferred_n {
                return Err(parse_err(
                    path,
                    0,
                    format!("header n = {n} but ids reach {}", inferred_n - 1),
                ));
            }
            n
        }
        None => inferred_n,
    };
    Ok(EdgeList {
        n,
        edges,
        directed: true,
        original_edge_count: None,
    })
}

/// Writes `g`; binary output always carries the header so `n` survives.
pub fn write_edge_list(path: impl AsRef<Path>, g: &EdgeList, format: EdgeListFormat) -> Result<()> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let mut w = BufWriter::new(File::create(&path)?);
    match format {
        EdgeListFormat::Text => {
            for &(u, v) in &g.edges {
                writeln!(w, "{u} {v}")?;
            }
        }
        EdgeListFormat::Binary => {
            w.write_all(&BINARY_MAGIC)?;
            w.write_all(&BINARY_VERSION.to_le_bytes())?;
            w.write_all(&g.n.to_le_bytes())?;
            w.write_all(&(g.edges.len() as u64).to_le_bytes())?;
            for &(u, v) in &g.edges {
                w.write_all(&u.to_le_bytes())?;
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
