//! Prices event counters into operations, time, energy and efficiency,
//! predicts the same counters analytically from sparsity statistics, and
//! scales power and area between process nodes.
//!
//! Energy follows "total operations × energy per operation", optionally
//! refined with per-event prices. One operation is one addition or one
//! multiplication: a gated weight accumulation is a multiply and an add
//! (2 ops), a near-memory shift-add is 1 op.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::config::{MacroConfig, SkipMode};
use crate::error::{CimError, Result};
use crate::fixedpoint::FixedPointMatrix;
use crate::oracle::{baseline_trace, proposed_trace, AccessTrace, COUNTING_MODEL};

/// Published throughput of the reference macro, ops/s.
pub const REFERENCE_THROUGHPUT_OPS: f64 = 42.27e9;
/// Published energy efficiency of the reference macro, ops/J.
pub const REFERENCE_EFFICIENCY_OPS_PER_J: f64 = 34.09e12;
/// Published power and area of the reference macro at 65 nm.
pub const REFERENCE_POWER_W: f64 = 1.24e-3;
pub const REFERENCE_AREA_MM2: f64 = 0.35;
/// Published 28 nm figures. The power figure does not follow from the
/// scaling formula applied to the published inputs (0.342 mW).
pub const REFERENCE_SCALED_POWER_MW: f64 = 0.26;
pub const REFERENCE_SCALED_AREA_MM2: f64 = 0.064;
/// Published memory-access and energy reductions over a conventional
/// CIM baseline; their counting rules are unknown.
pub const REFERENCE_ACCESS_RATIO: f64 = 6.9;
pub const REFERENCE_ENERGY_RATIO: f64 = 4.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyCoefficients {
    /// J per operation.
    pub e_op: f64,
    pub e_wordline: f64,
    pub e_bitline_read: f64,
    pub e_adder: f64,
    /// J per input-buffer bit read.
    pub e_buffer_access: f64,
}

impl Default for EnergyCoefficients {
    fn default() -> Self {
        Self {
            e_op: 29.33e-15,
            e_wordline: 0.0,
            e_bitline_read: 0.0,
            e_adder: 0.0,
            e_buffer_access: 0.0,
        }
    }
}

impl EnergyCoefficients {
    fn all(&self) -> [f64; 5] {
        [
            self.e_op,
            self.e_wordline,
            self.e_bitline_read,
            self.e_adder,
            self.e_buffer_access,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.all();
        if all.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(CimError::Config(
                "energy coefficients must be finite and non-negative".into(),
            ));
        }
        if all.iter().all(|&c| c == 0.0) {
            return Err(CimError::Config(
                "at least one energy coefficient must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Every event counted during a simulated run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageCounters {
    pub cycles: u64,
    pub skipped_cycles: u64,
    pub wordline_activations: u64,
    pub bitline_reads: u64,
    pub adder_ops: u64,
    pub near_memory_ops: u64,
    pub buffer_read_bits: u64,
    pub weight_bit_writes: u64,
}

impl UsageCounters {
    pub fn total_ops(&self) -> u64 {
        2 * self.adder_ops + self.near_memory_ops
    }

    pub fn totals(&self) -> EventTotals {
        EventTotals {
            cycles: self.cycles as f64,
            skipped_cycles: self.skipped_cycles as f64,
            wordline_activations: self.wordline_activations as f64,
            bitline_reads: self.bitline_reads as f64,
            adder_ops: self.adder_ops as f64,
            near_memory_ops: self.near_memory_ops as f64,
            buffer_read_bits: self.buffer_read_bits as f64,
        }
    }
}

/// Priceable event totals; fractional when predicted from aggregate rates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EventTotals {
    pub cycles: f64,
    pub skipped_cycles: f64,
    pub wordline_activations: f64,
    pub bitline_reads: f64,
    pub adder_ops: f64,
    pub near_memory_ops: f64,
    pub buffer_read_bits: f64,
}

impl EventTotals {
    pub fn total_ops(&self) -> f64 {
        2.0 * self.adder_ops + self.near_memory_ops
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            cycles: self.cycles * f,
            skipped_cycles: self.skipped_cycles * f,
            wordline_activations: self.wordline_activations * f,
            bitline_reads: self.bitline_reads * f,
            adder_ops: self.adder_ops * f,
            near_memory_ops: self.near_memory_ops * f,
            buffer_read_bits: self.buffer_read_bits * f,
        }
    }
}

/// Derived time, energy and efficiency figures.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Pricing {
    pub total_ops: f64,
    pub latency_s: f64,
    pub energy_j: f64,
    pub power_w: f64,
    pub throughput_ops_per_s: f64,
    pub efficiency_ops_per_j: f64,
    pub ops_per_cycle: f64,
    pub skip_fraction: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

impl Pricing {
    pub fn from_totals(t: &EventTotals, coeff: &EnergyCoefficients, clock_hz: f64) -> Self {
        let total_ops = t.total_ops();
        let energy_j = total_ops * coeff.e_op
            + t.wordline_activations * coeff.e_wordline
            + t.bitline_reads * coeff.e_bitline_read
            + t.adder_ops * coeff.e_adder
            + t.buffer_read_bits * coeff.e_buffer_access;
        let latency_s = t.cycles / clock_hz;
        Self {
            total_ops,
            latency_s,
            energy_j,
            power_w: ratio(energy_j, latency_s),
            throughput_ops_per_s: ratio(total_ops, latency_s),
            efficiency_ops_per_j: ratio(total_ops, energy_j),
            ops_per_cycle: ratio(total_ops, t.cycles),
            skip_fraction: ratio(t.skipped_cycles, t.cycles + t.skipped_cycles),
        }
    }
}

/// Proposed-vs-baseline memory traffic and energy for one inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessComparison {
    pub proposed: AccessTrace,
    pub baseline: AccessTrace,
    /// Baseline over proposed array traffic, in bits.
    pub array_access_ratio: f64,
    /// Baseline over proposed traffic including output writes, in bits.
    pub total_access_ratio: f64,
    pub proposed_energy_j: f64,
    /// `2·macs·e_op` plus every baseline traffic bit at `e_buffer_access`.
    pub baseline_energy_j: f64,
    pub energy_ratio: f64,
    pub reference_access_ratio: f64,
    pub reference_energy_ratio: f64,
    pub counting_model: String,
}

impl AccessComparison {
    pub fn build(
        tokens: usize,
        dim: usize,
        input_bits: u32,
        stored_weight_bits: u32,
        baseline_weight_bits: u32,
        coeff: &EnergyCoefficients,
        proposed_energy_j: f64,
    ) -> Self {
        let proposed = proposed_trace(tokens, dim, input_bits, stored_weight_bits);
        let baseline = baseline_trace(tokens, dim, input_bits, baseline_weight_bits);
        let baseline_energy_j = 2.0 * baseline.macs as f64 * coeff.e_op
            + baseline.total_traffic().bits as f64 * coeff.e_buffer_access;
        Self {
            array_access_ratio: ratio(
                baseline.array_traffic().bits as f64,
                proposed.array_traffic().bits as f64,
            ),
            total_access_ratio: ratio(
                baseline.total_traffic().bits as f64,
                proposed.total_traffic().bits as f64,
            ),
            proposed_energy_j,
            baseline_energy_j,
            energy_ratio: ratio(baseline_energy_j, proposed_energy_j),
            reference_access_ratio: REFERENCE_ACCESS_RATIO,
            reference_energy_ratio: REFERENCE_ENERGY_RATIO,
            counting_model: COUNTING_MODEL.to_string(),
            proposed,
            baseline,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub counters: UsageCounters,
    pub total_ops: u64,
    pub latency_s: f64,
    pub energy_j: f64,
    pub power_w: f64,
    pub throughput_ops_per_s: f64,
    pub efficiency_ops_per_j: f64,
    pub ops_per_cycle: f64,
    pub skip_fraction: f64,
    pub access: Option<AccessComparison>,
}

pub fn price(counters: &UsageCounters, coeff: &EnergyCoefficients, clock_hz: f64) -> CostReport {
    let p = Pricing::from_totals(&counters.totals(), coeff, clock_hz);
    CostReport {
        counters: *counters,
        total_ops: counters.total_ops(),
        latency_s: p.latency_s,
        energy_j: p.energy_j,
        power_w: p.power_w,
        throughput_ops_per_s: p.throughput_ops_per_s,
        efficiency_ops_per_j: p.efficiency_ops_per_j,
        ops_per_cycle: p.ops_per_cycle,
        skip_fraction: p.skip_fraction,
        access: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeScalingParams {
    pub from_nm: f64,
    pub to_nm: f64,
    pub from_v: f64,
    pub to_v: f64,
    pub from_hz: f64,
    pub to_hz: f64,
}

impl NodeScalingParams {
    pub fn new(
        from_nm: f64,
        to_nm: f64,
        from_v: f64,
        to_v: f64,
        from_hz: f64,
        to_hz: f64,
    ) -> Result<Self> {
        let p = Self {
            from_nm,
            to_nm,
            from_v,
            to_v,
            from_hz,
            to_hz,
        };
        if [from_nm, to_nm, from_v, to_v, from_hz, to_hz]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
        {
            Ok(p)
        } else {
            Err(CimError::Config(
                "node scaling parameters must be positive".into(),
            ))
        }
    }

    /// 65 nm / 1.0 V to 28 nm / 0.8 V at an unchanged 100 MHz.
    pub fn reference() -> Self {
        Self {
            from_nm: 65.0,
            to_nm: 28.0,
            from_v: 1.0,
            to_v: 0.8,
            from_hz: 100e6,
            to_hz: 100e6,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            from_nm: self.to_nm,
            to_nm: self.from_nm,
            from_v: self.to_v,
            to_v: self.from_v,
            from_hz: self.to_hz,
            to_hz: self.from_hz,
        }
    }
}

/// `P · (L_to/L_from) · (V_to/V_from)² · (f_to/f_from)`.
pub fn scale_power(power_w: f64, p: &NodeScalingParams) -> f64 {
    let v = p.to_v / p.from_v;
    power_w * (p.to_nm / p.from_nm) * v * v * (p.to_hz / p.from_hz)
}

/// `A · (L_to/L_from)²`.
pub fn scale_area(area: f64, p: &NodeScalingParams) -> f64 {
    let l = p.to_nm / p.from_nm;
    area * l * l
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStats {
    pub width: usize,
    /// (token, plane) pairs with at least one set bit in this block.
    pub nonzero_planes: f64,
    pub set_bits: f64,
}

/// Bit-level occupancy of a token matrix as the banks see it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityProfile {
    pub tokens: usize,
    pub bits: u32,
    /// Tokens with any set bit.
    pub nonzero_tokens: f64,
    pub row_blocks: Vec<BlockStats>,
    pub col_blocks: Vec<BlockStats>,
}

fn block_ranges(dim: usize, edge: usize) -> Vec<Range<usize>> {
    (0..dim)
        .step_by(edge)
        .map(|s| s..(s + edge).min(dim))
        .collect()
}

fn measure_blocks(x: &FixedPointMatrix, blocks: &[Range<usize>]) -> Vec<BlockStats> {
    blocks
        .iter()
        .map(|b| {
            let (mut planes, mut set) = (0u64, 0u64);
            for row in x.row_iter() {
                for k in 0..x.bits() {
                    let pop = row[b.clone()]
                        .iter()
                        .filter(|&&v| (v as u32 >> k) & 1 == 1)
                        .count() as u64;
                    planes += (pop > 0) as u64;
                    set += pop;
                }
            }
            BlockStats {
                width: b.len(),
                nonzero_planes: planes as f64,
                set_bits: set as f64,
            }
        })
        .collect()
}

impl SparsityProfile {
    /// Exact statistics of `x` under the bank tiling of `cfg`.
    pub fn measure(x: &FixedPointMatrix, cfg: &MacroConfig) -> Self {
        Self {
            tokens: x.rows(),
            bits: x.bits(),
            nonzero_tokens: x.row_iter().filter(|r| r.iter().any(|&v| v != 0)).count() as f64,
            row_blocks: measure_blocks(x, &block_ranges(x.cols(), cfg.array.rows)),
            col_blocks: measure_blocks(x, &block_ranges(x.cols(), cfg.array.cols)),
        }
    }

    /// Aggregate model: a fraction `zero_plane_fraction` of token bit planes
    /// is all-zero, concentrated in padded tokens, and the remaining planes
    /// have `set_bit_density` of their bits set.
    pub fn uniform(
        tokens: usize,
        dim: usize,
        bits: u32,
        zero_plane_fraction: f64,
        set_bit_density: f64,
        cfg: &MacroConfig,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&zero_plane_fraction) {
            return Err(CimError::Sparsity(zero_plane_fraction));
        }
        if !(0.0..=1.0).contains(&set_bit_density) {
            return Err(CimError::Sparsity(set_bit_density));
        }
        let live = 1.0 - zero_plane_fraction;
        let stats = |edge: usize| {
            block_ranges(dim, edge)
                .into_iter()
                .map(|b| {
                    let planes = live * tokens as f64 * bits as f64;
                    BlockStats {
                        width: b.len(),
                        nonzero_planes: planes,
                        set_bits: planes * set_bit_density * b.len() as f64,
                    }
                })
                .collect()
        };
        Ok(Self {
            tokens,
            bits,
            nonzero_tokens: live * tokens as f64,
            row_blocks: stats(cfg.array.rows),
            col_blocks: stats(cfg.array.cols),
        })
    }

    /// Fraction of (token, plane, row block) planes that are all zero.
    pub fn zero_plane_fraction(&self) -> f64 {
        let total = (self.tokens * self.bits as usize * self.row_blocks.len()) as f64;
        let live: f64 = self.row_blocks.iter().map(|b| b.nonzero_planes).sum();
        1.0 - ratio(live, total)
    }

    /// Set bits per bit position inside non-zero planes.
    pub fn set_bit_density(&self) -> f64 {
        let set: f64 = self.row_blocks.iter().map(|b| b.set_bits).sum();
        let cells: f64 = self
            .row_blocks
            .iter()
            .map(|b| b.nonzero_planes * b.width as f64)
            .sum();
        ratio(set, cells)
    }

    /// Event totals the simulator would count for one `X·W·Xᵀ` pass.
    pub fn estimate(&self, mode: SkipMode) -> EventTotals {
        let all_pairs = (self.tokens * self.tokens) as f64 * (self.bits * self.bits) as f64;
        let mut t = EventTotals::default();
        for r in &self.row_blocks {
            for c in &self.col_blocks {
                let (rows, cols) = (r.width as f64, c.width as f64);
                let executed = match mode {
                    SkipMode::None => all_pairs,
                    _ => r.nonzero_planes * c.nonzero_planes,
                };
                t.cycles += executed;
                t.skipped_cycles += all_pairs - executed;
                t.buffer_read_bits += executed * (rows + cols);
                t.near_memory_ops += executed;
                match mode {
                    SkipMode::None | SkipMode::Plane => {
                        t.wordline_activations += executed * rows;
                        t.bitline_reads += executed * cols;
                        t.adder_ops += executed * rows * cols;
                    }
                    SkipMode::Element => {
                        t.wordline_activations += r.set_bits * c.nonzero_planes;
                        t.bitline_reads += r.nonzero_planes * c.set_bits;
                        t.adder_ops += r.set_bits * c.set_bits;
                    }
                }
            }
        }
        let combining = match mode {
            SkipMode::None => (self.tokens * self.tokens) as f64,
            _ => self.nonzero_tokens * self.nonzero_tokens,
        };
        t.near_memory_ops += 3.0 * combining;
        t
    }
}

/// An attention-score workload: `layers × heads` independent `N×d` passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub name: String,
    pub tokens: usize,
    pub dim: usize,
    pub heads: usize,
    pub layers: usize,
    /// Fraction of token bit planes that are all zero.
    pub sparsity: f64,
    /// Set-bit density inside non-zero planes.
    #[serde(default = "default_density")]
    pub set_bit_density: f64,
}

fn default_density() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadEstimate {
    pub name: String,
    pub totals: EventTotals,
    pub pricing: Pricing,
}

/// Predicts counters and energy for each workload from its shape and
/// sparsity, without simulating.
pub fn estimate_workload_energy(
    workloads: &[Workload],
    cfg: &MacroConfig,
) -> Result<Vec<WorkloadEstimate>> {
    cfg.validate()?;
    workloads
        .iter()
        .map(|w| {
            if w.tokens == 0 || w.dim == 0 || w.heads == 0 || w.layers == 0 {
                return Err(CimError::Config(format!(
                    "workload '{}' needs positive tokens, dim, heads and layers",
                    w.name
                )));
            }
            let profile = SparsityProfile::uniform(
                w.tokens,
                w.dim,
                cfg.input_bits,
                w.sparsity,
                w.set_bit_density,
                cfg,
            )?;
            let totals = profile
                .estimate(cfg.skip_mode)
                .scaled((w.heads * w.layers) as f64);
            Ok(WorkloadEstimate {
                name: w.name.clone(),
                pricing: Pricing::from_totals(&totals, &cfg.energy, cfg.clock_hz),
                totals,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{FusedWeights, WeightMode};
    use crate::near_memory::attention_scores;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn energy_is_ops_times_e_op() {
        let c = UsageCounters {
            adder_ops: 500_000_000,
            cycles: 1,
            ..Default::default()
        };
        let r = price(&c, &EnergyCoefficients::default(), 100e6);
        assert_eq!(r.total_ops, 1_000_000_000);
        assert!(close(r.energy_j, 2.933e-5, 1e-12));
    }

    #[test]
    fn zero_counters_price_to_zero() {
        let r = price(
            &UsageCounters::default(),
            &EnergyCoefficients::default(),
            100e6,
        );
        assert_eq!(r.energy_j, 0.0);
        assert_eq!(r.latency_s, 0.0);
        assert_eq!(r.power_w, 0.0);
        assert_eq!(r.efficiency_ops_per_j, 0.0);
    }

    #[test]
    fn reference_operating_point() {
        // 422.7 ops per cycle at 100 MHz is 42.27 GOPS
        let c = UsageCounters {
            adder_ops: 21_135,
            cycles: 100,
            ..Default::default()
        };
        let r = price(&c, &EnergyCoefficients::default(), 100e6);
        assert!(close(
            r.throughput_ops_per_s,
            REFERENCE_THROUGHPUT_OPS,
            1e-12
        ));
        assert!(close(
            r.efficiency_ops_per_j,
            REFERENCE_EFFICIENCY_OPS_PER_J,
            1e-3
        ));
        assert!(close(r.power_w, REFERENCE_POWER_W, 1e-2));
        assert!(close(
            r.efficiency_ops_per_j * r.power_w,
            r.throughput_ops_per_s,
            1e-12
        ));
    }

    #[test]
    fn fine_grained_prices_add_up() {
        let c = UsageCounters {
            cycles: 10,
            wordline_activations: 3,
            bitline_reads: 5,
            adder_ops: 7,
            near_memory_ops: 2,
            buffer_read_bits: 11,
            ..Default::default()
        };
        let coeff = EnergyCoefficients {
            e_op: 1.0,
            e_wordline: 10.0,
            e_bitline_read: 100.0,
            e_adder: 1000.0,
            e_buffer_access: 10000.0,
        };
        let r = price(&c, &coeff, 1.0);
        assert_eq!(r.energy_j, 16.0 + 30.0 + 500.0 + 7000.0 + 110000.0);
    }

    #[test]
    fn coefficient_validation() {
        assert!(EnergyCoefficients::default().validate().is_ok());
        let zero = EnergyCoefficients {
            e_op: 0.0,
            ..Default::default()
        };
        assert!(zero.validate().is_err());
        let neg = EnergyCoefficients {
            e_adder: -1.0,
            ..Default::default()
        };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn power_scaling() {
        let id = NodeScalingParams::new(65.0, 65.0, 1.0, 1.0, 1e8, 1e8).unwrap();
        assert_eq!(scale_power(1.24e-3, &id), 1.24e-3);
        let p = scale_power(1.24e-3, &NodeScalingParams::reference());
        // 1.24 · 28/65 · 0.64 = 0.341858...
        assert!(close(p, 1.24e-3 * 28.0 / 65.0 * 0.64, 1e-12));
        assert!((p * 1e3 - 0.342).abs() < 5e-4);
        assert_eq!(scale_power(0.0, &NodeScalingParams::reference()), 0.0);
        assert!(NodeScalingParams::new(0.0, 28.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn area_scaling() {
        let a = scale_area(0.35, &NodeScalingParams::reference());
        assert!((a - 0.0649).abs() < 1e-4);
        let id = NodeScalingParams::new(28.0, 28.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(scale_area(0.35, &id), 0.35);
        let up = NodeScalingParams::new(65.0, 130.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(scale_area(1.0, &up), 4.0);
        let p = NodeScalingParams::reference();
        assert!(close(
            scale_area(scale_area(0.35, &p), &p.inverse()),
            0.35,
            1e-12
        ));
    }

    fn one_layer(sparsity: f64) -> Workload {
        Workload {
            name: "t".into(),
            tokens: 16,
            dim: 64,
            heads: 1,
            layers: 1,
            sparsity,
            set_bit_density: 0.5,
        }
    }

    #[test]
    fn full_sparsity_costs_nothing() {
        let est = estimate_workload_energy(&[one_layer(1.0)], &MacroConfig::default()).unwrap();
        assert_eq!(est[0].pricing.energy_j, 0.0);
        assert_eq!(est[0].totals.cycles, 0.0);
    }

    #[test]
    fn layers_scale_linearly() {
        let cfg = MacroConfig::default();
        let one = estimate_workload_energy(&[one_layer(0.3)], &cfg).unwrap();
        let mut two = one_layer(0.3);
        two.layers = 2;
        let two = estimate_workload_energy(&[two], &cfg).unwrap();
        assert_eq!(two[0].pricing.energy_j, 2.0 * one[0].pricing.energy_j);
    }

    #[test]
    fn workload_validation() {
        let cfg = MacroConfig::default();
        assert!(matches!(
            estimate_workload_energy(&[one_layer(1.5)], &cfg),
            Err(CimError::Sparsity(_))
        ));
        let mut w = one_layer(0.0);
        w.heads = 0;
        assert!(estimate_workload_energy(&[w], &cfg).is_err());
    }

    #[test]
    fn scalar_workload_matches_live_run() {
        // x = -1 sets all 8 planes: no zero planes, full density
        let cfg = MacroConfig::default();
        let w = Workload {
            name: "scalar".into(),
            tokens: 1,
            dim: 1,
            heads: 1,
            layers: 1,
            sparsity: 0.0,
            set_bit_density: 1.0,
        };
        let est = &estimate_workload_energy(&[w], &cfg).unwrap()[0];
        let x = FixedPointMatrix::new(1, 1, 8, vec![-1]).unwrap();
        let fw = FusedWeights::new(1, WeightMode::Exact, vec![5]).unwrap();
        let (_, live) = attention_scores(&x, &fw, &cfg).unwrap();
        assert_eq!(est.totals, live.counters.totals());
        assert_eq!(est.pricing.total_ops, live.total_ops as f64);
    }

    #[test]
    fn measured_profile_predicts_counters_exactly() {
        let x = FixedPointMatrix::new(3, 5, 4, vec![0, 0, 0, 0, 0, 1, -8, 3, 0, 2, 7, 0, 0, -1, 4])
            .unwrap();
        let fw = FusedWeights::new(5, WeightMode::Exact, (0..25).collect()).unwrap();
        for mode in [SkipMode::None, SkipMode::Plane, SkipMode::Element] {
            for (r, c) in [(64, 64), (2, 3), (5, 1)] {
                let cfg = MacroConfig::default().with_skip_mode(mode).with_array(r, c);
                let (_, live) = attention_scores(&x, &fw, &cfg).unwrap();
                let est = SparsityProfile::measure(&x, &cfg).estimate(mode);
                assert_eq!(est, live.counters.totals(), "{mode} {r}x{c}");
            }
        }
    }

    #[test]
    fn profile_aggregates() {
        let x = FixedPointMatrix::new(2, 2, 2, vec![0, 0, 1, -1]).unwrap();
        let p = SparsityProfile::measure(&x, &MacroConfig::default());
        // planes: token 0 both zero, token 1 both non-zero
        assert_eq!(p.zero_plane_fraction(), 0.5);
        // token 1: plane 0 has bits {1,1}, plane 1 has {0,1}
        assert_eq!(p.set_bit_density(), 3.0 / 4.0);
        assert_eq!(p.nonzero_tokens, 1.0);
    }
}
