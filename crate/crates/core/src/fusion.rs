//! Offline fusion of the query and key projections into one stationary
//! weight matrix `W_QK = W_Q · W_Kᵀ`, plus optional narrowing to the
//! macro's stored weight width.

use serde::{Deserialize, Serialize};

use crate::error::{CimError, Result};
use crate::fixedpoint::{check_bits, max_value, signed_width, FixedPointMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum WeightMode {
    /// Full-width integer product, no information lost.
    Exact,
    /// Symmetric per-matrix max-abs requantization; `stored · scale ≈ exact`.
    Requantized { bits: u32, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedWeights {
    dim: usize,
    mode: WeightMode,
    values: Vec<i64>,
}

impl FusedWeights {
    pub fn new(dim: usize, mode: WeightMode, values: Vec<i64>) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(CimError::DataLength {
                rows: dim,
                cols: dim,
                len: values.len(),
            });
        }
        if let WeightMode::Requantized { bits, scale } = mode {
            check_bits(bits)?;
            if !(scale.is_finite() && scale > 0.0) {
                return Err(CimError::Scale(scale));
            }
            let hi = max_value(bits);
            if let Some(pos) = values.iter().position(|v| v.abs() > hi) {
                return Err(CimError::OutOfRange {
                    row: pos / dim,
                    col: pos % dim,
                    value: values[pos],
                    bits,
                });
            }
        }
        Ok(Self { dim, mode, values })
    }

    /// Reads a square integer matrix directly as exact fused weights.
    pub fn from_matrix(m: &FixedPointMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(CimError::Shape(format!(
                "fused weights must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Self::new(
            m.rows(),
            WeightMode::Exact,
            m.data().iter().map(|&v| v as i64).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.values[row * self.dim + col]
    }

    /// Multiplier from stored value to exact value (1 in exact mode).
    pub fn scale(&self) -> f64 {
        match self.mode {
            WeightMode::Exact => 1.0,
            WeightMode::Requantized { scale, .. } => scale,
        }
    }

    pub fn max_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Bits needed per stored weight: the requantized width, or the
    /// narrowest two's-complement width covering every exact value.
    pub fn value_bits(&self) -> u32 {
        match self.mode {
            WeightMode::Requantized { bits, .. } => bits,
            WeightMode::Exact => self
                .values
                .iter()
                .map(|&v| signed_width(v))
                .max()
                .unwrap_or(2),
        }
    }

    pub fn dequantized(&self) -> Vec<f64> {
        let s = self.scale();
        self.values.iter().map(|&v| v as f64 * s).collect()
    }

    /// Narrows exact weights to `bits` with `scale = max|v| / (2^(bits-1) - 1)`.
    pub fn requantize(&self, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        if self.mode != WeightMode::Exact {
            return Err(CimError::Config(
                "requantize expects exact fused weights".into(),
            ));
        }
        let max_abs = self.max_abs();
        let limit = max_value(bits);
        let scale = if max_abs == 0 {
            1.0
        } else {
            max_abs as f64 / limit as f64
        };
        let values = self
            .values
            .iter()
            .map(|&v| ((v as f64 / scale).round() as i64).clamp(-limit, limit))
            .collect();
        Self::new(self.dim, WeightMode::Requantized { bits, scale }, values)
    }
}

/// `W_Q · W_Kᵀ` in exact integer arithmetic.
pub fn fuse(w_q: &FixedPointMatrix, w_k: &FixedPointMatrix) -> Result<FusedWeights> {
    if w_q.rows() != w_q.cols() || w_k.rows() != w_k.cols() || w_q.shape() != w_k.shape() {
        return Err(CimError::Shape(format!(
            "W_Q is {}x{} and W_K is {}x{}; both must be square with equal size",
            w_q.rows(),
            w_q.cols(),
            w_k.rows(),
            w_k.cols()
        )));
    }
    if w_q.bits() != w_k.bits() {
        return Err(CimError::Shape(format!(
            "W_Q is {}-bit and W_K is {}-bit",
            w_q.bits(),
            w_k.bits()
        )));
    }
    let d = w_q.rows();
    let mut values = Vec::with_capacity(d * d);
    for i in 0..d {
        let q_row = w_q.row(i);
        for j in 0..d {
            let k_row = w_k.row(j);
            values.push(
                q_row
                    .iter()
                    .zip(k_row)
                    .map(|(&a, &b)| a as i64 * b as i64)
                    .sum(),
            );
        }
    }
    FusedWeights::new(d, WeightMode::Exact, values)
}
