//! Signed two's-complement integer matrices and bit-plane slicing.
//!
//! A `K`-bit value `x` decomposes as
//! `x = -2^(K-1)·x(K-1) + Σ_{k<K-1} 2^k·x(k)`, where `x(k)` is bit `k` of
//! its two's-complement encoding. The simulator never needs any other
//! encoding.
//!
//! Bit widths are capped at 16. With `d ≤ 1024` inputs and weights both
//! within 16 bits, the largest score magnitude `d²·2^30·2^15` stays below
//! `2^65`; the exact per-configuration bound is checked before any run
//! (see [`crate::near_memory::check_accumulator_bound`]).

use crate::error::{CimError, Result};

pub const MIN_BITS: u32 = 2;
pub const MAX_BITS: u32 = 16;

pub fn check_bits(bits: u32) -> Result<()> {
    if (MIN_BITS..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(CimError::BitWidth(bits))
    }
}

#[inline]
pub fn min_value(bits: u32) -> i64 {
    -(1i64 << (bits - 1))
}

#[inline]
pub fn max_value(bits: u32) -> i64 {
    (1i64 << (bits - 1)) - 1
}

/// Smallest two's-complement width (at least 2) able to hold `v`.
pub fn signed_width(v: i64) -> u32 {
    let magnitude_bits = if v < 0 {
        64 - (!v).leading_zeros()
    } else {
        64 - v.leading_zeros()
    };
    (magnitude_bits + 1).max(MIN_BITS)
}

/// Row-major matrix of `bits`-wide signed integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPointMatrix {
    rows: usize,
    cols: usize,
    bits: u32,
    data: Vec<i32>,
}

impl FixedPointMatrix {
    pub fn new(rows: usize, cols: usize, bits: u32, data: Vec<i32>) -> Result<Self> {
        check_bits(bits)?;
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(CimError::DataLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        let (lo, hi) = (min_value(bits), max_value(bits));
        if let Some(pos) = data
            .iter()
            .position(|&v| (v as i64) < lo || (v as i64) > hi)
        {
            return Err(CimError::OutOfRange {
                row: pos / cols,
                col: pos % cols,
                value: data[pos] as i64,
                bits,
            });
        }
        Ok(Self {
            rows,
            cols,
            bits,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<i32>], bits: u32) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(CimError::Shape(format!(
                "row {bad} has {} columns, expected {cols}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), cols, bits, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize, bits: u32) -> Result<Self> {
        Self::new(rows, cols, bits, vec![0; rows * cols])
    }

    pub fn identity(n: usize, bits: u32) -> Result<Self> {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self::new(n, n, bits, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[i32] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[i32]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// Quantizes a row-major real matrix: `clamp(round(v / scale))` with
/// round-half-away-from-zero.
pub fn quantize(
    values: &[f64],
    rows: usize,
    cols: usize,
    bits: u32,
    scale: f64,
) -> Result<FixedPointMatrix> {
    check_bits(bits)?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(CimError::Scale(scale));
    }
    if rows.checked_mul(cols) != Some(values.len()) {
        return Err(CimError::DataLength {
            rows,
            cols,
            len: values.len(),
        });
    }
    let (lo, hi) = (min_value(bits) as f64, max_value(bits) as f64);
    let data = values
        .iter()
        .enumerate()
        .map(|(pos, &v)| {
            if !v.is_finite() {
                return Err(CimError::NonFinite {
                    row: pos / cols,
                    col: pos % cols,
                });
            }
            // f64::round rounds half away from zero
            Ok((v / scale).round().clamp(lo, hi) as i32)
        })
        .collect::<Result<Vec<_>>>()?;
    FixedPointMatrix::new(rows, cols, bits, data)
}

/// Bit `index` of the `bits`-wide two's-complement encoding of `x`.
pub fn bit_slice(x: i32, index: u32, bits: u32) -> Result<u8> {
    check_bits(bits)?;
    if index >= bits {
        return Err(CimError::BitIndex { index, bits });
    }
    let x64 = x as i64;
    if x64 < min_value(bits) || x64 > max_value(bits) {
        return Err(CimError::OutOfRange {
            row: 0,
            col: 0,
            value: x64,
            bits,
        });
    }
    Ok(((x as u32 >> index) & 1) as u8)
}

/// One bit position across a whole vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitPlane {
    pub index: u32,
    pub is_sign: bool,
    pub bits: Vec<u8>,
}

impl BitPlane {
    pub fn new(index: u32, is_sign: bool, bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(CimError::Format("bit plane entries must be 0 or 1".into()));
        }
        Ok(Self {
            index,
            is_sign,
            bits,
        })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }
}

/// Plane `index` of a row of `bits`-wide values.
pub fn extract_plane(row: &[i32], index: u32, bits: u32) -> Result<BitPlane> {
    let bits_vec = row
        .iter()
        .map(|&v| bit_slice(v, index, bits))
        .collect::<Result<Vec<_>>>()?;
    Ok(BitPlane {
        index,
        is_sign: index == bits - 1,
        bits: bits_vec,
    })
}

/// All `bits` planes of a row, least significant first.
pub fn extract_planes(row: &[i32], bits: u32) -> Result<Vec<BitPlane>> {
    (0..bits).map(|k| extract_plane(row, k, bits)).collect()
}

/// Inverse of [`extract_planes`]: weights the sign plane by `-2^(K-1)`.
pub fn reassemble(planes: &[BitPlane]) -> Vec<i64> {
    let len = planes.first().map_or(0, BitPlane::len);
    let mut out = vec![0i64; len];
    for plane in planes {
        let weight = if plane.is_sign {
            -(1i64 << plane.index)
        } else {
            1i64 << plane.index
        };
        for (o, &b) in out.iter_mut().zip(&plane.bits) {
            *o += weight * b as i64;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantize_zero_matrix() {
        let m = quantize(&[0.0; 6], 2, 3, 8, 1.0).unwrap();
        assert!(m.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn quantize_saturates() {
        let m = quantize(&[200.0, -300.0], 1, 2, 8, 1.0).unwrap();
        assert_eq!(m.data(), &[127, -128]);
    }

    #[test]
    fn quantize_rounds_half_away() {
        let m = quantize(&[-0.6, 0.125, -0.125, 0.375], 1, 4, 4, 0.25).unwrap();
        // -2.4 -> -2, 0.5 -> 1, -0.5 -> -1, 1.5 -> 2
        assert_eq!(m.data(), &[-2, 1, -1, 2]);
    }

    #[test]
    fn quantize_rejects_nan_with_coordinates() {
        let err = quantize(&[0.0, 1.0, 2.0, f64::NAN], 2, 2, 8, 1.0).unwrap_err();
        assert!(matches!(err, CimError::NonFinite { row: 1, col: 1 }));
        assert!(quantize(&[1.0], 1, 1, 8, 0.0).is_err());
        assert!(quantize(&[1.0], 1, 1, 17, 1.0).is_err());
    }

    #[test]
    fn matrix_validates_range_and_length() {
        assert!(FixedPointMatrix::new(1, 2, 4, vec![7, -8]).is_ok());
        assert!(matches!(
            FixedPointMatrix::new(1, 2, 4, vec![8, 0]),
            Err(CimError::OutOfRange { row: 0, col: 0, .. })
        ));
        assert!(matches!(
            FixedPointMatrix::new(2, 2, 4, vec![0; 3]),
            Err(CimError::DataLength { .. })
        ));
        assert!(FixedPointMatrix::new(1, 1, 1, vec![0]).is_err());
    }

    #[test]
    fn bit_slice_examples() {
        for k in 0..4 {
            assert_eq!(bit_slice(0, k, 4).unwrap(), 0);
        }
        let minus_one: Vec<u8> = (0..4).map(|k| bit_slice(-1, k, 4).unwrap()).collect();
        assert_eq!(minus_one, vec![1, 1, 1, 1]);
        let minus_eight: Vec<u8> = (0..4).map(|k| bit_slice(-8, k, 4).unwrap()).collect();
        assert_eq!(minus_eight, vec![0, 0, 0, 1]);
        assert!(matches!(
            bit_slice(1, 4, 4),
            Err(CimError::BitIndex { index: 4, bits: 4 })
        ));
    }

    #[test]
    fn extract_plane_examples() {
        let p = extract_plane(&[0, 0, 0, 0], 0, 8).unwrap();
        assert_eq!(p.popcount(), 0);
        let p = extract_plane(&[5, -1], 2, 4).unwrap();
        assert_eq!(p.bits, vec![1, 1]);
        assert!(!p.is_sign);
        let p = extract_plane(&[5, -1], 3, 4).unwrap();
        assert_eq!(p.bits, vec![0, 1]);
        assert!(p.is_sign);
    }

    #[test]
    fn reconstruction_identity_exhaustive() {
        for bits in MIN_BITS..=10 {
            for x in min_value(bits)..=max_value(bits) {
                let x = x as i32;
                let mut acc = -(1i64 << (bits - 1)) * bit_slice(x, bits - 1, bits).unwrap() as i64;
                for k in 0..bits - 1 {
                    acc += (1i64 << k) * bit_slice(x, k, bits).unwrap() as i64;
                }
                assert_eq!(acc, x as i64, "K={bits}");
            }
        }
    }

    #[test]
    fn signed_width_matches_range() {
        for v in -600i64..=600 {
            let w = signed_width(v);
            assert!(v >= min_value(w) && v <= max_value(w));
            if w > MIN_BITS {
                assert!(v < min_value(w - 1) || v > max_value(w - 1));
            }
        }
    }

    proptest! {
        #[test]
        fn planes_reassemble(bits in 2u32..=16, seed in prop::collection::vec(any::<i32>(), 1..40)) {
            let lo = min_value(bits);
            let span = max_value(bits) - lo + 1;
            let row: Vec<i32> = seed.iter().map(|&s| (lo + (s as i64).rem_euclid(span)) as i32).collect();
            let planes = extract_planes(&row, bits).unwrap();
            let back = reassemble(&planes);
            prop_assert_eq!(back, row.iter().map(|&v| v as i64).collect::<Vec<_>>());
        }

        #[test]
        fn quantize_monotone(a in -1e6f64..1e6, b in -1e6f64..1e6, scale in 0.01f64..100.0, bits in 2u32..=16) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let q = quantize(&[lo, hi], 1, 2, bits, scale).unwrap();
            prop_assert!(q.data()[0] <= q.data()[1]);
        }
    }
}
