//! Functional model of one weight-stationary CIM bank.
//!
//! The bank holds a tile of the fused weight matrix. One array cycle takes
//! one pair of input bit planes `(a, b)`: `a` gates the wordlines (rows),
//! `b` selects which bitline (column) sums enter the accumulator, so the
//! cycle produces `Σ_r Σ_c a[r]·b[c]·w[r][c]` without a multiplier.
//!
//! Event accounting per executed cycle, by skip mode:
//!
//! | mode      | wordlines  | bitline reads | adder ops           |
//! |-----------|------------|---------------|---------------------|
//! | `None`    | rows       | cols          | rows·cols           |
//! | `Plane`   | rows       | cols          | rows·cols           |
//! | `Element` | popcount a | popcount b    | popcount a·popcount b |
//!
//! `None` never skips; `Plane` and `Element` skip the cycle when either
//! plane is all zero.

use std::ops::{AddAssign, Range};

use serde::{Deserialize, Serialize};

use crate::config::{MacroConfig, SkipMode};
use crate::error::{CimError, Result};
use crate::fixedpoint::{extract_plane, signed_width, BitPlane};
use crate::fusion::FusedWeights;
use crate::near_memory::GroupAccumulators;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankCounters {
    pub cycles: u64,
    pub skipped_cycles: u64,
    pub wordline_activations: u64,
    pub bitline_reads: u64,
    pub adder_ops: u64,
    pub weight_bit_writes: u64,
}

impl BankCounters {
    /// Charges one bit-plane pair against a `rows`x`cols` tile. Returns
    /// whether the array cycle actually runs.
    #[inline]
    pub fn charge_pair(
        &mut self,
        mode: SkipMode,
        pop_a: u64,
        pop_b: u64,
        rows: u64,
        cols: u64,
    ) -> bool {
        let zero = pop_a == 0 || pop_b == 0;
        match mode {
            SkipMode::None => {
                self.cycles += 1;
                self.wordline_activations += rows;
                self.bitline_reads += cols;
                self.adder_ops += rows * cols;
                true
            }
            _ if zero => {
                self.skipped_cycles += 1;
                false
            }
            SkipMode::Plane => {
                self.cycles += 1;
                self.wordline_activations += rows;
                self.bitline_reads += cols;
                self.adder_ops += rows * cols;
                true
            }
            SkipMode::Element => {
                self.cycles += 1;
                self.wordline_activations += pop_a;
                self.bitline_reads += pop_b;
                self.adder_ops += pop_a * pop_b;
                true
            }
        }
    }
}

impl AddAssign for BankCounters {
    fn add_assign(&mut self, o: Self) {
        self.cycles += o.cycles;
        self.skipped_cycles += o.skipped_cycles;
        self.wordline_activations += o.wordline_activations;
        self.bitline_reads += o.bitline_reads;
        self.adder_ops += o.adder_ops;
        self.weight_bit_writes += o.weight_bit_writes;
    }
}

impl std::iter::Sum for BankCounters {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |mut acc, c| {
            acc += c;
            acc
        })
    }
}

/// Row-major block of fused weights sized for one bank.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTile {
    rows: usize,
    cols: usize,
    values: Vec<i64>,
}

impl WeightTile {
    pub fn new(rows: usize, cols: usize, values: Vec<i64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(CimError::DataLength {
                rows,
                cols,
                len: values.len(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_fused(w: &FusedWeights, rows: Range<usize>, cols: Range<usize>) -> Self {
        let mut values = Vec::with_capacity(rows.len() * cols.len());
        for r in rows.clone() {
            values.extend(cols.clone().map(|c| w.get(r, c)));
        }
        Self {
            rows: rows.len(),
            cols: cols.len(),
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.values[row * self.cols + col]
    }

    fn value_bits(&self) -> u32 {
        self.values
            .iter()
            .map(|&v| signed_width(v))
            .max()
            .unwrap_or(2)
    }

    /// Per-column sums of the rows whose wordline is raised by `row_mask`.
    pub fn bitline_sums(&self, row_mask: u64) -> Vec<i64> {
        let mut sums = vec![0i64; self.cols];
        let mut m = row_mask;
        while m != 0 {
            let r = m.trailing_zeros() as usize;
            m &= m - 1;
            for (s, &w) in sums.iter_mut().zip(&self.values[r * self.cols..]) {
                *s += w;
            }
        }
        sums
    }
}

/// Accumulates the bitline sums selected by `col_mask`.
#[inline]
pub fn gated_sum(sums: &[i64], col_mask: u64) -> i64 {
    let mut acc = 0i64;
    let mut m = col_mask;
    while m != 0 {
        acc += sums[m.trailing_zeros() as usize];
        m &= m - 1;
    }
    acc
}

/// Bit `index` of every element of `values`, packed LSB-first.
#[inline]
pub fn plane_mask(values: &[i32], index: u32) -> u64 {
    debug_assert!(values.len() <= 64);
    values.iter().enumerate().fold(0u64, |m, (i, &v)| {
        m | ((((v as u32) >> index) & 1) as u64) << i
    })
}

#[derive(Debug, Clone)]
pub struct BankState {
    array_rows: usize,
    array_cols: usize,
    word_bits: u32,
    skip_mode: SkipMode,
    tile: Option<WeightTile>,
    counters: BankCounters,
}

impl BankState {
    pub fn new(cfg: &MacroConfig) -> Self {
        Self {
            array_rows: cfg.array.rows,
            array_cols: cfg.array.cols,
            word_bits: cfg.array.weight_bits,
            skip_mode: cfg.skip_mode,
            tile: None,
            counters: BankCounters::default(),
        }
    }

    pub fn is_loaded(&self) -> bool {
        self.tile.is_some()
    }

    pub fn tile(&self) -> Option<&WeightTile> {
        self.tile.as_ref()
    }

    pub fn counters(&self) -> BankCounters {
        self.counters
    }

    pub fn skip_mode(&self) -> SkipMode {
        self.skip_mode
    }

    /// Folds counters gathered elsewhere (e.g. by a worker thread) in.
    pub fn absorb(&mut self, counters: BankCounters) {
        self.counters += counters;
    }

    /// Writes a tile into the array. Cost is `rows·cols·word` bit writes,
    /// where the word is the configured weight width, widened if the tile
    /// holds values that need more bits.
    pub fn load_weights(&mut self, tile: WeightTile) -> Result<()> {
        if tile.rows > self.array_rows || tile.cols > self.array_cols {
            return Err(CimError::OversizeTile {
                rows: tile.rows,
                cols: tile.cols,
                array_rows: self.array_rows,
                array_cols: self.array_cols,
            });
        }
        let word = self.word_bits.max(tile.value_bits()) as u64;
        self.counters.weight_bit_writes += (tile.rows * tile.cols) as u64 * word;
        self.tile = Some(tile);
        Ok(())
    }

    fn loaded_tile(&self, rows: usize, cols: usize) -> Result<&WeightTile> {
        let tile = self.tile.as_ref().ok_or(CimError::NotLoaded)?;
        if rows != tile.rows || cols != tile.cols {
            return Err(CimError::Shape(format!(
                "planes of length {rows} and {cols} do not match the {}x{} tile",
                tile.rows, tile.cols
            )));
        }
        Ok(tile)
    }

    /// One array cycle over the loaded tile.
    pub fn bit_plane_mac(&mut self, a: &BitPlane, b: &BitPlane) -> Result<i64> {
        let tile = self.loaded_tile(a.len(), b.len())?;
        let mut acc = 0i64;
        for (r, &ar) in a.bits.iter().enumerate() {
            if ar == 0 {
                continue;
            }
            for (c, &bc) in b.bits.iter().enumerate() {
                if bc == 1 {
                    acc += tile.get(r, c);
                }
            }
        }
        let (rows, cols) = (tile.rows as u64, tile.cols as u64);
        self.counters.charge_pair(
            self.skip_mode,
            a.popcount() as u64,
            b.popcount() as u64,
            rows,
            cols,
        );
        Ok(acc)
    }

    /// Runs all `bits²` plane pairs for one `(xi, xj)` pair and routes each
    /// raw sum into its group.
    pub fn process_pair(&mut self, xi: &[i32], xj: &[i32], bits: u32) -> Result<GroupAccumulators> {
        self.loaded_tile(xi.len(), xj.len())?;
        let a_planes = (0..bits)
            .map(|k| extract_plane(xi, k, bits))
            .collect::<Result<Vec<_>>>()?;
        let b_planes = (0..bits)
            .map(|k| extract_plane(xj, k, bits))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = GroupAccumulators::default();
        for a in &a_planes {
            for b in &b_planes {
                let raw = self.bit_plane_mac(a, b)?;
                acc.route(a.index, b.index, bits, raw);
            }
        }
        Ok(acc)
    }
}
