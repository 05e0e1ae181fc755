//! Field snapshot files.
//!
//! CSV: a header line `# grid dim=<d> n=<n> L=<L> t=<time>` followed by one
//! value per line in storage order. Numbers use Rust's shortest round-trip
//! formatting, so reading back is bit-exact.
//!
//! Binary, all little-endian:
//!
//! | offset | size | content                  |
//! |--------|------|--------------------------|
//! | 0      | 8    | ASCII `RHSNAP01`         |
//! | 8      | 4    | `u32` dim                |
//! | 12     | 4    | `u32` n                  |
//! | 16     | 8    | `f64` L                  |
//! | 24     | 8    | `f64` t                  |
//! | 32     | 8·Nᵈ | `f64` values, storage order |

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::{PeriodicGrid, ScalarField};

pub const BINARY_MAGIC: &[u8; 8] = b"RHSNAP01";

/// Snapshot file encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotFormat {
    Csv,
    Binary,
}

impl SnapshotFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SnapshotFormat::Csv => "csv",
            SnapshotFormat::Binary => "bin",
        }
    }
}

pub fn to_csv(field: &ScalarField, t: f64) -> String {
    let g = field.grid();
    let mut out = String::with_capacity(24 * g.len() + 64);
    let _ = writeln!(
        out,
        "# grid dim={} n={} L={} t={}",
        g.dim(),
        g.n(),
        g.half_width(),
        t
    );
    for v in field.values() {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn from_csv(text: &str) -> Result<(ScalarField, f64)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty snapshot".into()))?;
    let rest = header
        .strip_prefix("# grid ")
        .ok_or_else(|| Error::Format(format!("bad header {header:?}")))?;
    let (mut dim, mut n, mut l, mut t) = (None, None, None, None);
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header token {token:?}")))?;
        let bad = || Error::Format(format!("bad value for {key}: {value:?}"));
        match key {
            "dim" => dim = Some(value.parse::<usize>().map_err(|_| bad())?),
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
            "L" => l = Some(value.parse::<f64>().map_err(|_| bad())?),
            "t" => t = Some(value.parse::<f64>().map_err(|_| bad())?),
            _ => return Err(Error::Format(format!("unknown header key {key:?}"))),
        }
    }
    let (Some(dim), Some(n), Some(l), Some(t)) = (dim, n, l, t) else {
        return Err(Error::Format("header must carry dim, n, L and t".into()));
    };
    let grid = PeriodicGrid::new(dim, n, l)?;
    let values = lines
        .filter(|line| !line.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("value {i}: cannot parse {line:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ScalarField::new(grid, values)?, t))
}

pub fn to_binary(field: &ScalarField, t: f64) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(32 + 8 * g.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.half_width().to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn from_binary(bytes: &[u8]) -> Result<(ScalarField, f64)> {
    if bytes.len() < 32 || &bytes[..8] != BINARY_MAGIC {
        return Err(Error::Format("missing RHSNAP01 header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let grid = PeriodicGrid::new(u32_at(8), u32_at(12), f64_at(16))?;
    let t = f64_at(24);
    let body = &bytes[32..];
    if body.len() != 8 * grid.len() {
        return Err(Error::Format(format!(
            "expected {} value bytes, found {}",
            8 * grid.len(),
            body.len()
        )));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((ScalarField::new(grid, values)?, t))
}

pub fn write(path: &Path, field: &ScalarField, t: f64, format: SnapshotFormat) -> Result<()> {
    let bytes = match format {
        SnapshotFormat::Csv => to_csv(field, t).into_bytes(),
        SnapshotFormat::Binary => to_binary(field, t),
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads either format, detected by the magic bytes.
pub fn read(path: &Path) -> Result<(ScalarField, f64)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(BINARY_MAGIC) {
        from_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Format(format!("{} is neither binary nor text", path.display())))?;
        from_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScalarField {
        let g = PeriodicGrid::new(2, 4, 1.5).unwrap();
        ScalarField::from_fn(g, |x| (x[0] * 1.7).exp() - x[1] / 3.0)
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = sample();
        let text = to_csv(&f, 0.125);
        assert!(text.starts_with("# grid dim=2 n=4 L=1.5 t=0.125\n"));
        assert_eq!(text.lines().count(), 17);
        let (back, t) = from_csv(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(t, 0.125);
    }

    #[test]
    fn binary_layout_and_round_trip() {
        let f = sample();
        let bytes = to_binary(&f, 2.0);
        assert_eq!(bytes.len(), 32 + 16 * 8);
        assert_eq!(&bytes[..8], b"RHSNAP01");
        assert_eq!(bytes[8..12], 2u32.to_le_bytes());
        assert_eq!(bytes[12..16], 4u32.to_le_bytes());
        assert_eq!(bytes[16..24], 1.5f64.to_le_bytes());
        let (back, t) = from_binary(&bytes).unwrap();
        assert_eq!(back, f);
        assert_eq!(t, 2.0);
        assert!(from_binary(&bytes[..40]).is_err());
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = sample();
        for format in [SnapshotFormat::Csv, SnapshotFormat::Binary] {
            let path = dir.path().join(format!("rho.{}", format.extension()));
            write(&path, &f, 0.5, format).unwrap();
            assert_eq!(read(&path).unwrap(), (f.clone(), 0.5));
        }
    }

    #[test]
    fn rejects_malformed_csv() {
        assert!(from_csv("").is_err());
        assert!(from_csv("# grid dim=1 n=2 L=1\n0\n0\n").is_err());
        assert!(from_csv("# grid dim=1 n=2 L=1 t=0\n0\n").is_err());
        assert!(from_csv("# grid dim=1 n=2 L=1 t=0\n0\nx\n").is_err());
    }
}
