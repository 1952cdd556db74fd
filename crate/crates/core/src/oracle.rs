//! Reference results that share no code with the macro model: naive
//! wide-integer matmuls, the unfused `Q·Kᵀ` pipeline, and memory-access
//! traces for the proposed and baseline dataflows.

use serde::{Deserialize, Serialize};

use crate::error::{CimError, Result};
use crate::fixedpoint::FixedPointMatrix;
use crate::fusion::FusedWeights;
use crate::near_memory::ScoreMatrix;

/// Row-major `i128` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WideMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<i128>,
}

impl WideMatrix {
    pub fn from_fixed(m: &FixedPointMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            values: m.data().iter().map(|&v| v as i128).collect(),
        }
    }

    pub fn from_fused(w: &FusedWeights) -> Self {
        Self {
            rows: w.dim(),
            cols: w.dim(),
            values: w.values().iter().map(|&v| v as i128).collect(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> i128 {
        self.values[r * self.cols + c]
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                values.push(self.get(r, c));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            values,
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(CimError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut values = vec![0i128; self.rows * rhs.cols];
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0i128;
                for m in 0..self.cols {
                    acc += self.get(i, m) * rhs.get(m, j);
                }
                values[i * rhs.cols + j] = acc;
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: rhs.cols,
            values,
        })
    }

    pub fn equals_scores(&self, s: &ScoreMatrix) -> bool {
        self.rows == s.n()
            && self.cols == s.n()
            && self
                .values
                .iter()
                .zip(s.values())
                .all(|(&a, &b)| a == b as i128)
    }
}

/// `Q = X·W_Q`, `K = X·W_K`, `S = Q·Kᵀ`, all in `i128`.
pub fn oracle_scores(
    x: &FixedPointMatrix,
    w_q: &FixedPointMatrix,
    w_k: &FixedPointMatrix,
) -> Result<WideMatrix> {
    let x = WideMatrix::from_fixed(x);
    let q = x.matmul(&WideMatrix::from_fixed(w_q))?;
    let k = x.matmul(&WideMatrix::from_fixed(w_k))?;
    if q.cols != k.cols {
        return Err(CimError::Shape(format!(
            "Q has {} columns but K has {}",
            q.cols, k.cols
        )));
    }
    q.matmul(&k.transpose())
}

/// `X·W·Xᵀ` for already-fused weights, in `i128`.
pub fn fused_oracle_scores(x: &FixedPointMatrix, w: &FusedWeights) -> Result<WideMatrix> {
    let x = WideMatrix::from_fixed(x);
    x.matmul(&WideMatrix::from_fused(w))?.matmul(&x.transpose())
}

/// Width of one stored score word in both traces.
pub const SCORE_WORD_BITS: u64 = 32;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Traffic {
    pub words: u64,
    pub bits: u64,
}

impl Traffic {
    fn new(words: u64, word_bits: u64) -> Self {
        Self {
            words,
            bits: words * word_bits,
        }
    }

    fn plus(self, o: Self) -> Self {
        Self {
            words: self.words + o.words,
            bits: self.bits + o.bits,
        }
    }
}

/// Memory traffic for one attention-score inference of one head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessTrace {
    pub scheme: String,
    /// One-time weight writes into CIM arrays.
    pub weight_writes: Traffic,
    /// Per-inference writes of generated data into CIM arrays.
    pub dynamic_writes: Traffic,
    /// Activations fed into CIM arrays.
    pub input_reads: Traffic,
    /// Results leaving the arrays for buffers.
    pub output_writes: Traffic,
    /// Full-precision multiply-accumulates performed.
    pub macs: u64,
}

impl AccessTrace {
    /// Traffic that touches a CIM array.
    pub fn array_traffic(&self) -> Traffic {
        self.weight_writes
            .plus(self.dynamic_writes)
            .plus(self.input_reads)
    }

    /// Array traffic plus output buffer writes.
    pub fn total_traffic(&self) -> Traffic {
        self.array_traffic().plus(self.output_writes)
    }
}

pub const COUNTING_MODEL: &str = "baseline: W_Q and W_K written once (2*d^2 words of W bits); \
X read twice to project Q and K (2*N*d words of K bits); K^T written into a CIM array per \
inference (N*d words of W bits); Q read as activations (N*d words of K bits); Q and K \
(2*N*d words of K bits) and S (N^2 words of 32 bits) written to buffers. proposed: fused \
W_QK written once (d^2 words of stored width); X read once (N*d words of K bits); no \
dynamic array writes; S (N^2 words of 32 bits) written out. array traffic = weight writes \
+ dynamic writes + input reads; total traffic adds output writes";

/// Conventional weight-stationary CIM: project `Q` and `K` in arrays
/// holding `W_Q` and `W_K`, then write `Kᵀ` into an array to multiply by `Q`.
pub fn baseline_trace(tokens: usize, dim: usize, input_bits: u32, weight_bits: u32) -> AccessTrace {
    let (n, d) = (tokens as u64, dim as u64);
    let (k, w) = (input_bits as u64, weight_bits as u64);
    AccessTrace {
        scheme: "baseline".into(),
        weight_writes: Traffic::new(2 * d * d, w),
        dynamic_writes: Traffic::new(n * d, w),
        input_reads: Traffic::new(2 * n * d, k).plus(Traffic::new(n * d, k)),
        output_writes: Traffic::new(2 * n * d, k).plus(Traffic::new(n * n, SCORE_WORD_BITS)),
        macs: 2 * n * d * d + n * n * d,
    }
}

/// Fused weight-stationary dataflow: only `X` moves per inference.
pub fn proposed_trace(
    tokens: usize,
    dim: usize,
    input_bits: u32,
    stored_weight_bits: u32,
) -> AccessTrace {
    let (n, d) = (tokens as u64, dim as u64);
    AccessTrace {
        scheme: "proposed".into(),
        weight_writes: Traffic::new(d * d, stored_weight_bits as u64),
        dynamic_writes: Traffic::default(),
        input_reads: Traffic::new(n * d, input_bits as u64),
        output_writes: Traffic::new(n * n, SCORE_WORD_BITS),
        macs: n * n * d * d,
    }
}
