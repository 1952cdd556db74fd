//! Seeded synthetic workloads and parameter sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::MacroConfig;
use crate::cost_model::{CostReport, SparsityProfile};
use crate::error::{CimError, Result};
use crate::fixedpoint::{check_bits, max_value, min_value, FixedPointMatrix};
use crate::fusion::{fuse, FusedWeights};
use crate::near_memory::{attention_scores_with_threads, ScoreMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix<R: Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    bits: u32,
) -> Result<FixedPointMatrix> {
    check_bits(bits)?;
    let (lo, hi) = (min_value(bits) as i32, max_value(bits) as i32);
    let data = (0..rows * cols)
        .map(|_| rng.random_range(lo..=hi))
        .collect();
    FixedPointMatrix::new(rows, cols, bits, data)
}

fn set_bit(v: i32, k: u32, bits: u32) -> i32 {
    let mask = (1u32 << bits) - 1;
    let u = (v as u32 & mask) | (1 << k);
    // sign-extend from `bits`
    ((u << (32 - bits)) as i32) >> (32 - bits)
}

/// Token matrix with the last `round(padding · tokens)` rows zero and every
/// bit plane of every other row non-zero within each bank block, so the
/// zero plane pairs are exactly those touching a padded token.
pub fn padded_tokens<R: Rng>(
    rng: &mut R,
    tokens: usize,
    dim: usize,
    bits: u32,
    padding: f64,
    cfg: &MacroConfig,
) -> Result<FixedPointMatrix> {
    if !(0.0..=1.0).contains(&padding) {
        return Err(CimError::Sparsity(padding));
    }
    let live = tokens - (padding * tokens as f64).round() as usize;
    let mut x = random_matrix(rng, tokens, dim, bits)?.data().to_vec();
    x[live * dim..].iter_mut().for_each(|v| *v = 0);
    for row in x.chunks_mut(dim.max(1)).take(live) {
        for edge in [cfg.array.rows, cfg.array.cols] {
            for block in row.chunks_mut(edge) {
                for k in 0..bits {
                    if block.iter().all(|&v| (v as u32 >> k) & 1 == 0) {
                        let at = rng.random_range(0..block.len());
                        block[at] = set_bit(block[at], k, bits);
                    }
                }
            }
        }
    }
    FixedPointMatrix::new(tokens, dim, bits, x)
}

/// How the fused product is held in the array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FusedStorage {
    Exact,
    Requantized(u32),
}

impl std::str::FromStr for FusedStorage {
    type Err = CimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            _ => s
                .strip_prefix("int")
                .and_then(|b| b.parse::<u32>().ok())
                .filter(|b| check_bits(*b).is_ok())
                .map(Self::Requantized)
                .ok_or_else(|| {
                    CimError::Config(format!(
                        "unknown weight mode '{s}' (expected exact or intN)"
                    ))
                }),
        }
    }
}

impl FusedStorage {
    pub fn apply(&self, exact: FusedWeights) -> Result<FusedWeights> {
        match *self {
            Self::Exact => Ok(exact),
            Self::Requantized(bits) => exact.requantize(bits),
        }
    }
}

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchPoint {
    pub tokens: usize,
    pub dim: usize,
    pub bits: u32,
    /// Fraction of padded (all-zero) tokens.
    pub sparsity: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticCase {
    pub x: FixedPointMatrix,
    pub w_q: FixedPointMatrix,
    pub w_k: FixedPointMatrix,
}

impl SyntheticCase {
    /// Fully determined by `(point, cfg geometry, weight width, seed)`.
    pub fn generate(point: &BenchPoint, cfg: &MacroConfig, seed: u64) -> Result<Self> {
        if point.tokens == 0 || point.dim == 0 {
            return Err(CimError::Config(
                "sweep points need tokens and dim > 0".into(),
            ));
        }
        let mut r = rng(seed);
        let wb = cfg.array.weight_bits;
        let w_q = random_matrix(&mut r, point.dim, point.dim, wb)?;
        let w_k = random_matrix(&mut r, point.dim, point.dim, wb)?;
        let x = padded_tokens(
            &mut r,
            point.tokens,
            point.dim,
            point.bits,
            point.sparsity,
            cfg,
        )?;
        Ok(Self { x, w_q, w_k })
    }
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub point: BenchPoint,
    pub scores: ScoreMatrix,
    pub report: CostReport,
    pub profile: SparsityProfile,
}

pub fn run_point(
    point: &BenchPoint,
    cfg: &MacroConfig,
    storage: FusedStorage,
    seed: u64,
    threads: usize,
) -> Result<PointResult> {
    let case = SyntheticCase::generate(point, cfg, seed)?;
    let weights = storage.apply(fuse(&case.w_q, &case.w_k)?)?;
    let (scores, report) = attention_scores_with_threads(&case.x, &weights, cfg, threads)?;
    Ok(PointResult {
        point: *point,
        scores,
        report,
        profile: SparsityProfile::measure(&case.x, cfg),
    })
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub tokens: usize,
    pub dim: usize,
    pub bits: u32,
    pub sparsity: f64,
    pub skip_mode: String,
    pub zero_plane_fraction: f64,
    pub total_ops: u64,
    pub cycles: u64,
    pub skipped_cycles: u64,
    pub predicted_cycles: f64,
    pub wordline_activations: u64,
    pub adder_ops: u64,
    pub energy_j: f64,
    pub latency_s: f64,
    pub efficiency_ops_per_j: f64,
    pub array_access_ratio: f64,
    pub total_access_ratio: f64,
}

impl BenchRow {
    pub const HEADER: &'static str = "tokens,dim,bits,sparsity,skip_mode,zero_plane_fraction,total_ops,cycles,skipped_cycles,predicted_cycles,wordline_activations,adder_ops,energy_j,latency_s,efficiency_ops_per_j,array_access_ratio,total_access_ratio";

    pub fn from_result(r: &PointResult, cfg: &MacroConfig) -> Self {
        let c = &r.report.counters;
        let access = r.report.access.as_ref();
        let predicted = SparsityProfile::uniform(
            r.point.tokens,
            r.point.dim,
            r.point.bits,
            r.profile.zero_plane_fraction(),
            r.profile.set_bit_density(),
            cfg,
        )
        .map(|p| p.estimate(cfg.skip_mode).cycles)
        .unwrap_or(f64::NAN);
        Self {
            tokens: r.point.tokens,
            dim: r.point.dim,
            bits: r.point.bits,
            sparsity: r.point.sparsity,
            skip_mode: cfg.skip_mode.to_string(),
            zero_plane_fraction: r.profile.zero_plane_fraction(),
            total_ops: r.report.total_ops,
            cycles: c.cycles,
            skipped_cycles: c.skipped_cycles,
            predicted_cycles: predicted,
            wordline_activations: c.wordline_activations,
            adder_ops: c.adder_ops,
            energy_j: r.report.energy_j,
            latency_s: r.report.latency_s,
            efficiency_ops_per_j: r.report.efficiency_ops_per_j,
            array_access_ratio: access.map_or(0.0, |a| a.array_access_ratio),
            total_access_ratio: access.map_or(0.0, |a| a.total_access_ratio),
        }
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{:e},{:e},{:e},{},{}",
            self.tokens,
            self.dim,
            self.bits,
            self.sparsity,
            self.skip_mode,
            self.zero_plane_fraction,
            self.total_ops,
            self.cycles,
            self.skipped_cycles,
            self.predicted_cycles,
            self.wordline_activations,
            self.adder_ops,
            self.energy_j,
            self.latency_s,
            self.efficiency_ops_per_j,
            self.array_access_ratio,
            self.total_access_ratio
        )
    }
}

/// Cartesian sweep, rows in `tokens × dims × bits × sparsities` order.
/// Points run one after another; each point parallelizes internally.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    tokens: &[usize],
    dims: &[usize],
    bits: &[u32],
    sparsities: &[f64],
    cfg: &MacroConfig,
    storage: FusedStorage,
    seed: u64,
    threads: usize,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in tokens {
        for &d in dims {
            for &k in bits {
                for &s in sparsities {
                    let point = BenchPoint {
                        tokens: n,
                        dim: d,
                        bits: k,
                        sparsity: s,
                    };
                    let r = run_point(&point, cfg, storage, seed, threads)?;
                    rows.push(BenchRow::from_result(&r, cfg));
                }
            }
        }
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BenchRow::HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SkipMode;

    #[test]
    fn set_bit_handles_sign_plane() {
        assert_eq!(set_bit(0, 3, 4), -8);
        assert_eq!(set_bit(5, 1, 4), 7);
        assert_eq!(set_bit(-1, 2, 4), -1);
    }

    #[test]
    fn padded_rows_and_dense_planes() {
        let cfg = MacroConfig::default().with_array(8, 8);
        let x = padded_tokens(&mut rng(1), 10, 20, 4, 0.3, &cfg).unwrap();
        let p = SparsityProfile::measure(&x, &cfg);
        assert_eq!(p.nonzero_tokens, 7.0);
        assert!((p.zero_plane_fraction() - 0.3).abs() < 1e-12);
        assert!(x.row_iter().skip(7).all(|r| r.iter().all(|&v| v == 0)));
    }

    #[test]
    fn generation_is_seeded() {
        let pt = BenchPoint {
            tokens: 5,
            dim: 9,
            bits: 8,
            sparsity: 0.2,
        };
        let cfg = MacroConfig::default();
        let a = SyntheticCase::generate(&pt, &cfg, 42).unwrap();
        let b = SyntheticCase::generate(&pt, &cfg, 42).unwrap();
        let c = SyntheticCase::generate(&pt, &cfg, 43).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.w_q, b.w_q);
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn predicted_cycles_match_padded_runs() {
        for mode in [SkipMode::Plane, SkipMode::Element, SkipMode::None] {
            let cfg = MacroConfig::default().with_skip_mode(mode);
            let rows = sweep(
                &[10],
                &[70],
                &[4],
                &[0.0, 0.6],
                &cfg,
                FusedStorage::Exact,
                3,
                0,
            )
            .unwrap();
            for r in &rows {
                assert_eq!(r.predicted_cycles, r.cycles as f64, "{mode}");
            }
            if mode != SkipMode::None {
                let ratio = rows[1].cycles as f64 / rows[0].cycles as f64;
                assert!((ratio - 0.16).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn storage_parsing() {
        assert_eq!(
            "exact".parse::<FusedStorage>().unwrap(),
            FusedStorage::Exact
        );
        assert_eq!(
            "int8".parse::<FusedStorage>().unwrap(),
            FusedStorage::Requantized(8)
        );
        assert!("int1".parse::<FusedStorage>().is_err());
        assert!("float".parse::<FusedStorage>().is_err());
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let rows = sweep(
            &[],
            &[8],
            &[8],
            &[0.0],
            &MacroConfig::default(),
            FusedStorage::Exact,
            0,
            0,
        )
        .unwrap();
        assert_eq!(rows_to_csv(&rows), format!("{}\n", BenchRow::HEADER));
    }
}
