//! On-disk formats.
//!
//! Integer matrices come as CSV (one row per line) or as `CIMX` binary:
//! a 16-byte header of magic `b"CIMX"`, `u32` rows, `u32` cols and `u32`
//! bit width, followed by row-major `i32` values, all little-endian.
//!
//! Score matrices use `CIMS` binary: magic `b"CIMS"`, `u32` rows, `u32`
//! cols, `f64` dequantization scale, then row-major `i64` values.
//!
//! Fused weights are stored as a `CIMX` (or CSV) matrix plus a `.meta`
//! sidecar of `key = value` lines.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CimError, Result};
use crate::fixedpoint::FixedPointMatrix;
use crate::fusion::{FusedWeights, WeightMode};
use crate::near_memory::ScoreMatrix;

pub const MATRIX_MAGIC: &[u8; 4] = b"CIMX";
pub const SCORE_MAGIC: &[u8; 4] = b"CIMS";

/// Parses integer CSV; blank lines are ignored.
pub fn parse_csv(text: &str) -> Result<(usize, usize, Vec<i64>)> {
    let mut cols = None;
    let mut rows = 0;
    let mut data = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for (col, field) in line.split(',').enumerate() {
            let v = field.trim().parse::<i64>().map_err(|_| {
                CimError::Format(format!(
                    "line {}, column {}: '{}' is not an integer",
                    line_no + 1,
                    col + 1,
                    field.trim()
                ))
            })?;
            data.push(v);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(CimError::Format(format!(
                    "line {} has {width} values, expected {c}",
                    line_no + 1
                )))
            }
            _ => {}
        }
        rows += 1;
    }
    Ok((rows, cols.unwrap_or(0), data))
}

fn to_i32(data: Vec<i64>, cols: usize) -> Result<Vec<i32>> {
    data.iter()
        .enumerate()
        .map(|(pos, &v)| {
            i32::try_from(v).map_err(|_| CimError::OutOfRange {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
                value: v,
                bits: 32,
            })
        })
        .collect()
}

pub fn matrix_from_csv(text: &str, bits: u32) -> Result<FixedPointMatrix> {
    let (rows, cols, data) = parse_csv(text)?;
    FixedPointMatrix::new(rows, cols, bits, to_i32(data, cols)?)
}

pub fn values_to_csv<T: std::fmt::Display>(values: &[T], cols: usize) -> String {
    let mut out = String::new();
    for row in values.chunks(cols.max(1)) {
        let line: Vec<String> = row.iter().map(ToString::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_to_csv(m: &FixedPointMatrix) -> String {
    values_to_csv(m.data(), m.cols())
}

/// `CIMX` header and payload without bit-width policy applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawMatrix {
    pub rows: usize,
    pub cols: usize,
    pub bits: u32,
    pub data: Vec<i32>,
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

pub fn decode_raw(bytes: &[u8]) -> Result<RawMatrix> {
    if bytes.len() < 16 || &bytes[..4] != MATRIX_MAGIC {
        return Err(CimError::Format("missing CIMX header".into()));
    }
    let rows = u32_at(bytes, 4) as usize;
    let cols = u32_at(bytes, 8) as usize;
    let bits = u32_at(bytes, 12);
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| CimError::Format("header dimensions overflow".into()))?;
    if bytes.len() - 16 != expected {
        return Err(CimError::Format(format!(
            "payload is {} bytes, header implies {expected}",
            bytes.len() - 16
        )));
    }
    if !(2..=32).contains(&bits) {
        return Err(CimError::Format(format!("bit width {bits} in header")));
    }
    let data = bytes[16..]
        .chunks_exact(4)
        .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(RawMatrix {
        rows,
        cols,
        bits,
        data,
    })
}

pub fn encode_raw(m: &RawMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * m.data.len());
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(m.rows as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols as u32).to_le_bytes());
    out.extend_from_slice(&m.bits.to_le_bytes());
    for v in &m.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn matrix_from_bin(bytes: &[u8]) -> Result<FixedPointMatrix> {
    let raw = decode_raw(bytes)?;
    FixedPointMatrix::new(raw.rows, raw.cols, raw.bits, raw.data)
}

pub fn matrix_to_bin(m: &FixedPointMatrix) -> Vec<u8> {
    encode_raw(&RawMatrix {
        rows: m.rows(),
        cols: m.cols(),
        bits: m.bits(),
        data: m.data().to_vec(),
    })
}

/// Reads a matrix by extension: `.csv` uses `csv_bits`, anything else is
/// parsed as `CIMX`.
pub fn read_matrix(path: &Path, csv_bits: u32) -> Result<FixedPointMatrix> {
    if is_csv(path) {
        matrix_from_csv(&std::fs::read_to_string(path)?, csv_bits)
    } else {
        matrix_from_bin(&std::fs::read(path)?)
    }
}

pub fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusedMeta {
    /// `exact` or `requantized`
    pub mode: String,
    pub d: usize,
    /// Stored width; the narrowest covering width in exact mode.
    pub weight_bits: u32,
    pub scale: f64,
}

impl FusedMeta {
    pub fn of(w: &FusedWeights) -> Self {
        Self {
            mode: match w.mode() {
                WeightMode::Exact => "exact".into(),
                WeightMode::Requantized { .. } => "requantized".into(),
            },
            d: w.dim(),
            weight_bits: w.value_bits(),
            scale: w.scale(),
        }
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("metadata serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CimError::Format(format!("metadata: {}", e.message())))
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn fused_from_parts(
    values: Vec<i64>,
    rows: usize,
    cols: usize,
    meta: &FusedMeta,
) -> Result<FusedWeights> {
    if rows != meta.d || cols != meta.d {
        return Err(CimError::Shape(format!(
            "fused matrix is {rows}x{cols} but metadata says d={}",
            meta.d
        )));
    }
    let mode = match meta.mode.as_str() {
        "exact" => WeightMode::Exact,
        "requantized" => WeightMode::Requantized {
            bits: meta.weight_bits,
            scale: meta.scale,
        },
        other => return Err(CimError::Format(format!("unknown weight mode '{other}'"))),
    };
    FusedWeights::new(meta.d, mode, values)
}

/// Writes the matrix (CSV when `path` ends in `.csv`, `CIMX` otherwise)
/// and its sidecar.
pub fn write_fused(path: &Path, w: &FusedWeights) -> Result<()> {
    let meta = FusedMeta::of(w);
    if is_csv(path) {
        std::fs::write(path, values_to_csv(w.values(), w.dim()))?;
    } else {
        let data = to_i32(w.values().to_vec(), w.dim())?;
        std::fs::write(
            path,
            encode_raw(&RawMatrix {
                rows: w.dim(),
                cols: w.dim(),
                bits: meta.weight_bits,
                data,
            }),
        )?;
    }
    std::fs::write(meta_path(path), meta.to_text())?;
    Ok(())
}

/// Reads fused weights; without a sidecar the matrix is taken as exact.
pub fn read_fused(path: &Path) -> Result<FusedWeights> {
    let meta_file = meta_path(path);
    let (rows, cols, values) = if is_csv(path) {
        parse_csv(&std::fs::read_to_string(path)?)?
    } else {
        let raw = decode_raw(&std::fs::read(path)?)?;
        (
            raw.rows,
            raw.cols,
            raw.data.into_iter().map(i64::from).collect(),
        )
    };
    let meta = if meta_file.exists() {
        FusedMeta::from_text(&std::fs::read_to_string(meta_file)?)?
    } else {
        FusedMeta {
            mode: "exact".into(),
            d: rows,
            weight_bits: 32,
            scale: 1.0,
        }
    };
    fused_from_parts(values, rows, cols, &meta)
}

pub fn scores_to_bin(s: &ScoreMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 8 * s.values().len());
    out.extend_from_slice(SCORE_MAGIC);
    out.extend_from_slice(&(s.n() as u32).to_le_bytes());
    out.extend_from_slice(&(s.n() as u32).to_le_bytes());
    out.extend_from_slice(&s.scale().to_le_bytes());
    for v in s.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn scores_from_bin(bytes: &[u8]) -> Result<ScoreMatrix> {
    if bytes.len() < 20 || &bytes[..4] != SCORE_MAGIC {
        return Err(CimError::Format("missing CIMS header".into()));
    }
    let rows = u32_at(bytes, 4) as usize;
    let cols = u32_at(bytes, 8) as usize;
    if rows != cols {
        return Err(CimError::Format(format!(
            "score matrix {rows}x{cols} is not square"
        )));
    }
    let scale = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    if bytes.len() - 20 != rows * cols * 8 {
        return Err(CimError::Format("score payload length mismatch".into()));
    }
    let values = bytes[20..]
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ScoreMatrix::new(rows, values, scale)
}

pub fn scores_to_csv(s: &ScoreMatrix) -> String {
    values_to_csv(s.values(), s.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_parses_and_reports_errors() {
        let m = matrix_from_csv("1, 2,3\n-4,5,6\n\n", 8).unwrap();
        assert_eq!(m.shape(), (2, 3));
        assert_eq!(m.data(), &[1, 2, 3, -4, 5, 6]);
        let err = matrix_from_csv("1,2\n3,x\n", 8).unwrap_err().to_string();
        assert!(err.contains("line 2, column 2"), "{err}");
        assert!(matrix_from_csv("1,2\n3\n", 8).is_err());
        assert!(matrix_from_csv("300\n", 8).is_err());
    }

    #[test]
    fn binary_header_layout() {
        let m = FixedPointMatrix::new(1, 2, 4, vec![-1, 7]).unwrap();
        let b = matrix_to_bin(&m);
        assert_eq!(&b[..4], b"CIMX");
        assert_eq!(&b[4..16], &[1, 0, 0, 0, 2, 0, 0, 0, 4, 0, 0, 0]);
        assert_eq!(&b[16..], &[0xff, 0xff, 0xff, 0xff, 7, 0, 0, 0]);
        assert_eq!(matrix_from_bin(&b).unwrap(), m);
        assert!(matrix_from_bin(&b[..20]).is_err());
        assert!(matrix_from_bin(b"XXXX").is_err());
    }

    #[test]
    fn fused_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("cimsim-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let exact = FusedWeights::new(2, WeightMode::Exact, vec![17, 23, 39, 53]).unwrap();
        for name in ["w.bin", "w.csv"] {
            let p = dir.join(name);
            write_fused(&p, &exact).unwrap();
            assert_eq!(read_fused(&p).unwrap(), exact);
            let q = exact.requantize(4).unwrap();
            write_fused(&p, &q).unwrap();
            assert_eq!(read_fused(&p).unwrap(), q);
        }
        let meta = std::fs::read_to_string(meta_path(&dir.join("w.bin"))).unwrap();
        assert!(meta.contains("mode = \"requantized\""), "{meta}");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn score_binary_layout() {
        let s = ScoreMatrix::new(2, vec![1, -2, 3, i64::MIN], 0.5).unwrap();
        let b = scores_to_bin(&s);
        assert_eq!(&b[..4], b"CIMS");
        assert_eq!(b.len(), 20 + 32);
        assert_eq!(scores_from_bin(&b).unwrap(), s);
        assert_eq!(scores_to_csv(&s), "1,-2\n3,-9223372036854775808\n");
    }

    proptest! {
        #[test]
        fn csv_and_binary_round_trip(rows in 1usize..6, cols in 1usize..6, bits in 2u32..=16, seed in any::<u64>()) {
            let lo = -(1i64 << (bits - 1));
            let span = 1u64 << bits;
            let data: Vec<i32> = (0..rows * cols)
                .map(|i| (lo + (seed.wrapping_mul(i as u64 * 2 + 1).rotate_left(i as u32) % span) as i64) as i32)
                .collect();
            let m = FixedPointMatrix::new(rows, cols, bits, data).unwrap();
            prop_assert_eq!(matrix_from_bin(&matrix_to_bin(&m)).unwrap(), m.clone());
            prop_assert_eq!(matrix_from_csv(&matrix_to_csv(&m), bits).unwrap(), m);
        }
    }
}
