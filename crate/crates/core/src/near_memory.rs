//! Near-memory stage and full score-matrix assembly.
//!
//! Splitting each token element into a sign bit and magnitude bits turns
//! `s_ij = X_i·W·X_jᵀ` into four groups of shifted bit-plane MACs:
//!
//! ```text
//! s_ij = 2^(2K-2)·G1 - G2 - G3 + G4
//! G1 = raw(K-1, K-1)
//! G2 = Σ_{j*<K-1} 2^(K-1+j*)·raw(K-1, j*)
//! G3 = Σ_{i*<K-1} 2^(K-1+i*)·raw(i*, K-1)
//! G4 = Σ_{i*,j*<K-1} 2^(i*+j*)·raw(i*, j*)
//! ```
//!
//! where `raw(i*, j*)` is one bank cycle on planes `i*` of `X_i` and `j*`
//! of `X_j`. G2..G4 are held pre-shifted; G1's shift is applied when the
//! groups are combined.
//!
//! For `d` larger than the array, `W` is cut into a grid of bank tiles and
//! every bank contributes to the same four groups.

use std::ops::{AddAssign, Range};

use crate::cim_bank::{gated_sum, plane_mask, BankCounters, BankState, WeightTile};
use crate::config::MacroConfig;
use crate::cost_model::{price, AccessComparison, CostReport, UsageCounters};
use crate::error::{CimError, Result};
use crate::fixedpoint::FixedPointMatrix;
use crate::fusion::FusedWeights;
use crate::parallel::map_indexed;

/// Four signed partial sums for one score element.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroupAccumulators {
    /// sign × sign, unshifted
    pub g1: i64,
    /// sign × magnitude, pre-shifted
    pub g2: i64,
    /// magnitude × sign, pre-shifted
    pub g3: i64,
    /// magnitude × magnitude, pre-shifted
    pub g4: i64,
}

impl GroupAccumulators {
    /// Adds the raw MAC of plane pair `(i_plane, j_plane)` to its group.
    #[inline]
    pub fn route(&mut self, i_plane: u32, j_plane: u32, bits: u32, raw: i64) {
        let sign = bits - 1;
        match (i_plane == sign, j_plane == sign) {
            (true, true) => self.g1 += raw,
            (true, false) => self.g2 += raw << (sign + j_plane),
            (false, true) => self.g3 += raw << (sign + i_plane),
            (false, false) => self.g4 += raw << (i_plane + j_plane),
        }
    }
}

impl AddAssign for GroupAccumulators {
    fn add_assign(&mut self, o: Self) {
        self.g1 += o.g1;
        self.g2 += o.g2;
        self.g3 += o.g3;
        self.g4 += o.g4;
    }
}

/// `2^(2K-2)·g1 - g2 - g3 + g4`.
#[inline]
pub fn combine_groups(acc: &GroupAccumulators, bits: u32) -> i64 {
    (acc.g1 << (2 * bits - 2)) - acc.g2 - acc.g3 + acc.g4
}

/// Rejects configurations whose partial sums could leave the `i64` range.
///
/// Every group is bounded by `d²·max|w|·2^(2K-2)`, and their absolute sum
/// by `d²·max|w|·2^(2K)`; that is the bound checked.
pub fn check_accumulator_bound(dim: usize, bits: u32, max_weight: i64) -> Result<()> {
    let d = dim as i128;
    let bound = d
        .saturating_mul(d)
        .saturating_mul(max_weight.unsigned_abs() as i128)
        .saturating_mul(1i128 << (2 * bits));
    if bound > i64::MAX as i128 {
        return Err(CimError::Overflow {
            bound,
            dim,
            bits,
            max_weight,
        });
    }
    Ok(())
}

/// `n × n` integer scores with the weight scale for a real-valued view.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    values: Vec<i64>,
    scale: f64,
}

impl ScoreMatrix {
    pub fn new(n: usize, values: Vec<i64>, scale: f64) -> Result<Self> {
        if values.len() != n * n {
            return Err(CimError::DataLength {
                rows: n,
                cols: n,
                len: values.len(),
            });
        }
        Ok(Self { n, values, scale })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.values[i * self.n + j]
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dequantized(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64 * self.scale).collect()
    }
}

fn blocks(dim: usize, edge: usize) -> Vec<Range<usize>> {
    (0..dim)
        .step_by(edge)
        .map(|s| s..(s + edge).min(dim))
        .collect()
}

/// Bit-plane masks of one token under one blocking, indexed `[block*K + k]`.
struct TokenPlanes {
    masks: Vec<u64>,
    pops: Vec<u64>,
}

impl TokenPlanes {
    fn new(row: &[i32], blocks: &[Range<usize>], bits: u32) -> Self {
        let mut masks = Vec::with_capacity(blocks.len() * bits as usize);
        for b in blocks {
            for k in 0..bits {
                masks.push(plane_mask(&row[b.clone()], k));
            }
        }
        let pops = masks.iter().map(|m| m.count_ones() as u64).collect();
        Self { masks, pops }
    }
}

/// Per-row work product, merged in row order.
struct RowResult {
    scores: Vec<i64>,
    banks: Vec<BankCounters>,
    near_memory_ops: u64,
    buffer_read_bits: u64,
}

/// A macro with fused weights resident in a grid of banks.
#[derive(Debug, Clone)]
pub struct MacroEngine {
    cfg: MacroConfig,
    dim: usize,
    scale: f64,
    max_weight: i64,
    row_blocks: Vec<Range<usize>>,
    col_blocks: Vec<Range<usize>>,
    banks: Vec<BankState>,
    near_memory_ops: u64,
    buffer_read_bits: u64,
}

impl MacroEngine {
    /// Tiles `weights` over `⌈d/rows⌉·⌈d/cols⌉` banks and loads them once.
    pub fn new(weights: &FusedWeights, cfg: &MacroConfig) -> Result<Self> {
        cfg.validate()?;
        let dim = weights.dim();
        if dim == 0 {
            return Err(CimError::Shape("fused weights are empty".into()));
        }
        let row_blocks = blocks(dim, cfg.array.rows);
        let col_blocks = blocks(dim, cfg.array.cols);
        let mut banks = Vec::with_capacity(row_blocks.len() * col_blocks.len());
        for rb in &row_blocks {
            for cb in &col_blocks {
                let mut bank = BankState::new(cfg);
                bank.load_weights(WeightTile::from_fused(weights, rb.clone(), cb.clone()))?;
                banks.push(bank);
            }
        }
        Ok(Self {
            cfg: cfg.clone(),
            dim,
            scale: weights.scale(),
            max_weight: weights.max_abs(),
            row_blocks,
            col_blocks,
            banks,
            near_memory_ops: 0,
            buffer_read_bits: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bank_count(&self) -> usize {
        self.banks.len()
    }

    pub fn banks(&self) -> &[BankState] {
        &self.banks
    }

    pub fn config(&self) -> &MacroConfig {
        &self.cfg
    }

    /// Every counter accumulated since the weights were loaded.
    pub fn usage(&self) -> UsageCounters {
        let bank: BankCounters = self.banks.iter().map(BankState::counters).sum();
        UsageCounters {
            cycles: bank.cycles,
            skipped_cycles: bank.skipped_cycles,
            wordline_activations: bank.wordline_activations,
            bitline_reads: bank.bitline_reads,
            adder_ops: bank.adder_ops,
            near_memory_ops: self.near_memory_ops,
            buffer_read_bits: self.buffer_read_bits,
            weight_bit_writes: bank.weight_bit_writes,
        }
    }

    fn check_tokens(&self, bits: u32) -> Result<()> {
        check_accumulator_bound(self.dim, bits, self.max_weight)
    }

    fn activations(&self, planes: &TokenPlanes, bits: u32) -> Vec<Vec<i64>> {
        let k = bits as usize;
        let u_count = self.col_blocks.len();
        let mut out = Vec::with_capacity(self.banks.len() * k);
        for (b, bank) in self.banks.iter().enumerate() {
            let t = b / u_count;
            let tile = bank.tile().expect("banks are loaded at construction");
            for ki in 0..k {
                let mask = planes.masks[t * k + ki];
                out.push(if mask == 0 {
                    Vec::new()
                } else {
                    tile.bitline_sums(mask)
                });
            }
        }
        out
    }

    /// One score element over every bank. Counters go to `counters`
    /// (one slot per bank); returns the element and its
    /// `(near_memory_ops, buffer_read_bits)`.
    fn element(
        &self,
        row_i: &TokenPlanes,
        act_i: &[Vec<i64>],
        col_j: &TokenPlanes,
        bits: u32,
        counters: &mut [BankCounters],
    ) -> (i64, u64, u64) {
        let k = bits as usize;
        let mode = self.cfg.skip_mode;
        let u_count = self.col_blocks.len();
        let mut groups = GroupAccumulators::default();
        let mut executed = 0u64;
        let mut buffer_bits = 0u64;
        for (b, slot) in counters.iter_mut().enumerate() {
            let (t, u) = (b / u_count, b % u_count);
            let rows = self.row_blocks[t].len() as u64;
            let cols = self.col_blocks[u].len() as u64;
            for ki in 0..k {
                let pa = row_i.pops[t * k + ki];
                let act = &act_i[b * k + ki];
                for kj in 0..k {
                    let pb = col_j.pops[u * k + kj];
                    if slot.charge_pair(mode, pa, pb, rows, cols) {
                        executed += 1;
                        buffer_bits += rows + cols;
                        if pa != 0 && pb != 0 {
                            let raw = gated_sum(act, col_j.masks[u * k + kj]);
                            groups.route(ki as u32, kj as u32, bits, raw);
                        }
                    }
                }
            }
        }
        // one shift-add per executed cycle, three adds/subs to combine
        let nm_ops = if executed > 0 { executed + 3 } else { 0 };
        (combine_groups(&groups, bits), nm_ops, buffer_bits)
    }

    /// `xi · W · xjᵀ` for two `bits`-wide token rows.
    pub fn score_element(&mut self, xi: &[i32], xj: &[i32], bits: u32) -> Result<i64> {
        if xi.len() != self.dim || xj.len() != self.dim {
            return Err(CimError::Shape(format!(
                "token lengths {} and {} do not match d={}",
                xi.len(),
                xj.len(),
                self.dim
            )));
        }
        // validates range and bit width
        FixedPointMatrix::new(2, self.dim, bits, [xi, xj].concat())?;
        self.check_tokens(bits)?;
        let ri = TokenPlanes::new(xi, &self.row_blocks, bits);
        let cj = TokenPlanes::new(xj, &self.col_blocks, bits);
        let act = self.activations(&ri, bits);
        let mut counters = vec![BankCounters::default(); self.banks.len()];
        let (s, nm, buf) = self.element(&ri, &act, &cj, bits, &mut counters);
        for (bank, c) in self.banks.iter_mut().zip(counters) {
            bank.absorb(c);
        }
        self.near_memory_ops += nm;
        self.buffer_read_bits += buf;
        Ok(s)
    }

    /// Every `s_ij` of `x · W · xᵀ`, rows spread over `threads` workers
    /// (0 = all available). Output and counters do not depend on `threads`.
    pub fn run(&mut self, x: &FixedPointMatrix, threads: usize) -> Result<ScoreMatrix> {
        if x.cols() != self.dim {
            return Err(CimError::Shape(format!(
                "X is {}x{} but fused weights are {}x{}",
                x.rows(),
                x.cols(),
                self.dim,
                self.dim
            )));
        }
        if x.rows() == 0 {
            return Err(CimError::Shape("X has no tokens".into()));
        }
        let bits = x.bits();
        self.check_tokens(bits)?;
        let n = x.rows();
        let row_planes: Vec<TokenPlanes> = x
            .row_iter()
            .map(|r| TokenPlanes::new(r, &self.row_blocks, bits))
            .collect();
        let col_planes: Vec<TokenPlanes> = if self.row_blocks == self.col_blocks {
            Vec::new()
        } else {
            x.row_iter()
                .map(|r| TokenPlanes::new(r, &self.col_blocks, bits))
                .collect()
        };
        let col_planes = if col_planes.is_empty() {
            &row_planes
        } else {
            &col_planes
        };

        let this = &*self;
        let rows: Vec<RowResult> = map_indexed(n, threads, |i| {
            let act = this.activations(&row_planes[i], bits);
            let mut banks = vec![BankCounters::default(); this.banks.len()];
            let mut scores = Vec::with_capacity(n);
            let (mut nm_total, mut buf_total) = (0, 0);
            for cj in col_planes.iter() {
                let (s, nm, buf) = this.element(&row_planes[i], &act, cj, bits, &mut banks);
                scores.push(s);
                nm_total += nm;
                buf_total += buf;
            }
            RowResult {
                scores,
                banks,
                near_memory_ops: nm_total,
                buffer_read_bits: buf_total,
            }
        });

        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            values.extend(row.scores);
            for (bank, c) in self.banks.iter_mut().zip(row.banks) {
                bank.absorb(c);
            }
            self.near_memory_ops += row.near_memory_ops;
            self.buffer_read_bits += row.buffer_read_bits;
        }
        ScoreMatrix::new(n, values, self.scale)
    }
}

/// Word width the macro actually stores for `weights` under `cfg`.
pub fn stored_weight_bits(weights: &FusedWeights, cfg: &MacroConfig) -> u32 {
    cfg.array.weight_bits.max(weights.value_bits())
}

/// Full pipeline: load `weights`, score every token pair, price the run.
pub fn attention_scores(
    x: &FixedPointMatrix,
    weights: &FusedWeights,
    cfg: &MacroConfig,
) -> Result<(ScoreMatrix, CostReport)> {
    attention_scores_with_threads(x, weights, cfg, 0)
}

pub fn attention_scores_with_threads(
    x: &FixedPointMatrix,
    weights: &FusedWeights,
    cfg: &MacroConfig,
    threads: usize,
) -> Result<(ScoreMatrix, CostReport)> {
    let mut engine = MacroEngine::new(weights, cfg)?;
    let scores = engine.run(x, threads)?;
    let mut report = price(&engine.usage(), &cfg.energy, cfg.clock_hz);
    report.access = Some(AccessComparison::build(
        x.rows(),
        weights.dim(),
        x.bits(),
        stored_weight_bits(weights, cfg),
        cfg.array.weight_bits,
        &cfg.energy,
        report.energy_j,
    ));
    Ok((scores, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SkipMode;
    use crate::fusion::WeightMode;
    use crate::oracle::{fused_oracle_scores, WideMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(
        rng: &mut ChaCha8Rng,
        rows: usize,
        cols: usize,
        bits: u32,
    ) -> FixedPointMatrix {
        let lo = -(1i32 << (bits - 1));
        let hi = (1i32 << (bits - 1)) - 1;
        let data = (0..rows * cols)
            .map(|_| rng.random_range(lo..=hi))
            .collect();
        FixedPointMatrix::new(rows, cols, bits, data).unwrap()
    }

    fn random_weights(rng: &mut ChaCha8Rng, d: usize, range: i64) -> FusedWeights {
        let v = (0..d * d)
            .map(|_| rng.random_range(-range..=range))
            .collect();
        FusedWeights::new(d, WeightMode::Exact, v).unwrap()
    }

    fn oracle(x: &FixedPointMatrix, w: &FusedWeights) -> WideMatrix {
        fused_oracle_scores(x, w).unwrap()
    }

    #[test]
    fn combine_zero_groups() {
        assert_eq!(combine_groups(&GroupAccumulators::default(), 8), 0);
    }

    #[test]
    fn combine_scalar_example() {
        let g = GroupAccumulators {
            g2: 3 << 1,
            ..Default::default()
        };
        assert_eq!(combine_groups(&g, 2), -6);
    }

    #[test]
    fn combine_random_int8_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = MacroConfig::default();
        for _ in 0..50 {
            let x = random_matrix(&mut rng, 2, 8, 8);
            let w = random_weights(&mut rng, 8, 127);
            let mut bank = BankState::new(&cfg);
            bank.load_weights(WeightTile::from_fused(&w, 0..8, 0..8))
                .unwrap();
            let g = bank.process_pair(x.row(0), x.row(1), 8).unwrap();
            assert_eq!(combine_groups(&g, 8) as i128, oracle(&x, &w).get(0, 1));
        }
    }

    #[test]
    fn decomposition_identity_exhaustive_small_widths() {
        for bits in 2..=4u32 {
            let lo = -(1i32 << (bits - 1));
            let hi = (1i32 << (bits - 1)) - 1;
            for w in [-9i64, -1, 0, 1, 5, 13] {
                let mut bank = BankState::new(&MacroConfig::default());
                bank.load_weights(WeightTile::new(1, 1, vec![w]).unwrap())
                    .unwrap();
                for a in lo..=hi {
                    for b in lo..=hi {
                        let g = bank.process_pair(&[a], &[b], bits).unwrap();
                        assert_eq!(combine_groups(&g, bits), a as i64 * w * b as i64);
                    }
                }
            }
        }
    }

    #[test]
    fn one_hot_selects_weight() {
        let w = FusedWeights::new(3, WeightMode::Exact, (1..=9).collect()).unwrap();
        let mut e = MacroEngine::new(&w, &MacroConfig::default()).unwrap();
        assert_eq!(e.score_element(&[1, 0, 0], &[0, 1, 0], 8).unwrap(), 2);
    }

    #[test]
    fn quadratic_form_sign_follows_definiteness() {
        // symmetric positive-definite: 2 on diagonal, -1 off
        let d = 4;
        let mut v = vec![0i64; d * d];
        for i in 0..d {
            v[i * d + i] = 2;
            if i + 1 < d {
                v[i * d + i + 1] = -1;
                v[(i + 1) * d + i] = -1;
            }
        }
        let w = FusedWeights::new(d, WeightMode::Exact, v).unwrap();
        let mut e = MacroEngine::new(&w, &MacroConfig::default()).unwrap();
        let x = [3, -5, 7, 1];
        let s = e.score_element(&x, &x, 8).unwrap();
        let expect = oracle(&FixedPointMatrix::new(1, 4, 8, x.to_vec()).unwrap(), &w);
        assert_eq!(s as i128, expect.get(0, 0));
        assert!(s > 0);
    }

    #[test]
    fn tiled_matches_untiled() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_matrix(&mut rng, 3, 128, 8);
        let w = random_weights(&mut rng, 128, 1 << 12);
        let mut e = MacroEngine::new(&w, &MacroConfig::default()).unwrap();
        assert_eq!(e.bank_count(), 4);
        let s = e.score_element(x.row(0), x.row(2), 8).unwrap();
        assert_eq!(s as i128, oracle(&x, &w).get(0, 2));
    }

    #[test]
    fn identity_tokens_reproduce_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random_weights(&mut rng, 16, 500);
        let x = FixedPointMatrix::identity(16, 8).unwrap();
        let (s, _) = attention_scores(&x, &w, &MacroConfig::default()).unwrap();
        assert_eq!(s.values(), w.values());
    }

    #[test]
    fn single_token() {
        let w = FusedWeights::new(2, WeightMode::Exact, vec![1, 2, 3, 4]).unwrap();
        let x = FixedPointMatrix::new(1, 2, 8, vec![3, -2]).unwrap();
        let (s, _) = attention_scores(&x, &w, &MacroConfig::default()).unwrap();
        // [3,-2]·[[1,2],[3,4]] = [-3,-2]; ·[3,-2] = -9+4
        assert_eq!(s.values(), &[-5]);
    }

    #[test]
    fn random_scores_match_oracle_under_every_mode_and_tiling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (rows, cols) in [(64, 64), (16, 16), (5, 7), (1, 64)] {
            for mode in [SkipMode::None, SkipMode::Plane, SkipMode::Element] {
                let cfg = MacroConfig::default()
                    .with_array(rows, cols)
                    .with_skip_mode(mode);
                let x = random_matrix(&mut rng, 8, 16, 8);
                let w = random_weights(&mut rng, 16, 3000);
                let (s, _) = attention_scores(&x, &w, &cfg).unwrap();
                let o = oracle(&x, &w);
                assert!(o.equals_scores(&s), "{rows}x{cols} {mode}");
            }
        }
    }

    #[test]
    fn engine_counters_match_bank_reference_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for mode in [SkipMode::None, SkipMode::Plane, SkipMode::Element] {
            let cfg = MacroConfig::default().with_skip_mode(mode);
            let mut x = random_matrix(&mut rng, 4, 12, 6).data().to_vec();
            x[12..24].iter_mut().for_each(|v| *v = 0);
            x[30] = 0;
            let x = FixedPointMatrix::new(4, 12, 6, x).unwrap();
            let w = random_weights(&mut rng, 12, 99);
            let mut e = MacroEngine::new(&w, &cfg).unwrap();
            e.run(&x, 1).unwrap();

            let mut bank = BankState::new(&cfg);
            bank.load_weights(WeightTile::from_fused(&w, 0..12, 0..12))
                .unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    bank.process_pair(x.row(i), x.row(j), 6).unwrap();
                }
            }
            assert_eq!(e.banks()[0].counters(), bank.counters(), "{mode}");
        }
    }

    #[test]
    fn thread_count_does_not_change_anything() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = random_matrix(&mut rng, 24, 80, 4);
        let w = random_weights(&mut rng, 80, 2000);
        let cfg = MacroConfig::default();
        let (s1, r1) = attention_scores_with_threads(&x, &w, &cfg, 1).unwrap();
        for threads in [0, 2, 3] {
            let (s, r) = attention_scores_with_threads(&x, &w, &cfg, threads).unwrap();
            assert_eq!(s, s1);
            assert_eq!(r.counters, r1.counters);
        }
    }

    #[test]
    fn symmetric_weights_give_symmetric_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = 10;
        let mut v = vec![0i64; d * d];
        for i in 0..d {
            for j in i..d {
                let r = rng.random_range(-300..=300);
                v[i * d + j] = r;
                v[j * d + i] = r;
            }
        }
        let w = FusedWeights::new(d, WeightMode::Exact, v).unwrap();
        let x = random_matrix(&mut rng, 6, d, 8);
        let (s, _) = attention_scores(&x, &w, &MacroConfig::default()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(s.get(i, j), s.get(j, i));
            }
        }
    }

    #[test]
    fn shape_and_overflow_errors() {
        let w = FusedWeights::new(2, WeightMode::Exact, vec![1, 0, 0, 1]).unwrap();
        let x = FixedPointMatrix::zeros(3, 3, 8).unwrap();
        assert!(matches!(
            attention_scores(&x, &w, &MacroConfig::default()),
            Err(CimError::Shape(_))
        ));
        let mut e = MacroEngine::new(&w, &MacroConfig::default()).unwrap();
        assert!(e.score_element(&[1, 2], &[1], 8).is_err());

        let huge = FusedWeights::new(2, WeightMode::Exact, vec![i64::MAX / 4; 4]).unwrap();
        let x = FixedPointMatrix::zeros(1, 2, 8).unwrap();
        assert!(matches!(
            attention_scores(&x, &huge, &MacroConfig::default()),
            Err(CimError::Overflow { .. })
        ));
        assert!(check_accumulator_bound(1024, 16, 1 << 15).is_err());
        assert!(check_accumulator_bound(64, 8, 1 << 20).is_ok());
    }

    #[test]
    fn weight_load_traffic_is_counted_once() {
        let w = FusedWeights::new(2, WeightMode::Exact, vec![1, 0, 0, 1]).unwrap();
        let x = FixedPointMatrix::identity(2, 8).unwrap();
        let (_, r) = attention_scores(&x, &w, &MacroConfig::default()).unwrap();
        assert_eq!(r.counters.weight_bit_writes, 2 * 2 * 8);
        let access = r.access.unwrap();
        assert_eq!(access.proposed.weight_writes.bits, 32);
        assert_eq!(access.proposed.dynamic_writes.bits, 0);
    }
}
