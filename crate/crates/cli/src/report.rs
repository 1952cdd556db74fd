//! JSON documents emitted by the CLI. Keys are always written sorted.

use serde::Serialize;
use serde_json::{Map, Value};

use cimsim::cost_model::{
    CostReport, NodeScalingParams, SparsityProfile, REFERENCE_ACCESS_RATIO, REFERENCE_ENERGY_RATIO,
};
use cimsim::oracle::{baseline_trace, proposed_trace, AccessTrace, COUNTING_MODEL};
use cimsim::{FixedPointMatrix, FusedWeights, MacroConfig, ScoreMatrix};

pub const SCORE_REPORT_SCHEMA: &str = "cimsim/score-report/1";

fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sort_keys(v));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Pretty JSON with recursively sorted keys and a trailing newline.
pub fn canonical_json<T: Serialize>(v: &T) -> serde_json::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(&sort_keys(serde_json::to_value(v)?))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Serialize)]
pub struct SkipStats {
    pub skip_mode: String,
    pub cycles: u64,
    pub skipped_cycles: u64,
    pub skip_fraction: f64,
    pub zero_plane_fraction: f64,
    pub set_bit_density: f64,
}

#[derive(Serialize)]
pub struct ScoreReport {
    pub schema: &'static str,
    pub tokens: usize,
    pub dim: usize,
    pub input_bits: u32,
    pub weight_mode: String,
    pub weight_bits: u32,
    pub weight_scale: f64,
    pub config: MacroConfig,
    pub cost: CostReport,
    pub skip: SkipStats,
}

impl ScoreReport {
    pub fn build(
        cfg: &MacroConfig,
        x: &FixedPointMatrix,
        w: &FusedWeights,
        weight_mode: String,
        cost: &CostReport,
        profile: &SparsityProfile,
    ) -> Self {
        Self {
            schema: SCORE_REPORT_SCHEMA,
            tokens: x.rows(),
            dim: x.cols(),
            input_bits: x.bits(),
            weight_mode,
            weight_bits: w.value_bits(),
            weight_scale: w.scale(),
            config: cfg.clone(),
            cost: cost.clone(),
            skip: SkipStats {
                skip_mode: cfg.skip_mode.to_string(),
                cycles: cost.counters.cycles,
                skipped_cycles: cost.counters.skipped_cycles,
                skip_fraction: cost.skip_fraction,
                zero_plane_fraction: profile.zero_plane_fraction(),
                set_bit_density: profile.set_bit_density(),
            },
        }
    }
}

#[derive(Serialize)]
pub struct AccessReport {
    pub tokens: usize,
    pub dim: usize,
    pub input_bits: u32,
    pub weight_bits: u32,
    pub proposed: AccessTrace,
    pub baseline: AccessTrace,
    pub array_access_ratio: f64,
    pub total_access_ratio: f64,
    pub reference_access_ratio: f64,
    pub reference_energy_ratio: f64,
    pub counting_model: &'static str,
}

impl AccessReport {
    pub fn build(tokens: usize, dim: usize, input_bits: u32, weight_bits: u32) -> Self {
        let proposed = proposed_trace(tokens, dim, input_bits, weight_bits);
        let baseline = baseline_trace(tokens, dim, input_bits, weight_bits);
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        Self {
            tokens,
            dim,
            input_bits,
            weight_bits,
            array_access_ratio: ratio(baseline.array_traffic().bits, proposed.array_traffic().bits),
            total_access_ratio: ratio(baseline.total_traffic().bits, proposed.total_traffic().bits),
            reference_access_ratio: REFERENCE_ACCESS_RATIO,
            reference_energy_ratio: REFERENCE_ENERGY_RATIO,
            counting_model: COUNTING_MODEL,
            proposed,
            baseline,
        }
    }
}

#[derive(Serialize)]
pub struct ScaleReport {
    pub params: NodeScalingParams,
    pub power_mw: f64,
    pub area_mm2: f64,
    pub scaled_power_mw: f64,
    pub scaled_area_mm2: f64,
    pub reference_scaled_power_mw: f64,
    pub reference_scaled_area_mm2: f64,
    pub note: String,
}

#[derive(Serialize)]
pub struct ScoreMatrixJson {
    pub n: usize,
    pub scale: f64,
    pub values: Vec<Vec<i64>>,
}

impl ScoreMatrixJson {
    pub fn of(s: &ScoreMatrix) -> Self {
        Self {
            n: s.n(),
            scale: s.scale(),
            values: s
                .values()
                .chunks(s.n().max(1))
                .map(<[i64]>::to_vec)
                .collect(),
        }
    }
}
