//! Functional simulator and cost model of a weight-stationary digital
//! compute-in-memory macro that computes attention scores
//! `S = X · W_QK · Xᵀ` with fused query/key weights.
//!
//! Token elements are fed bit-serially; each array cycle multiplies one
//! bit plane of `X_i` and one of `X_j` against the stationary weights by
//! wordline gating alone, and a near-memory stage shifts and combines the
//! sign/magnitude groups into the exact integer score.

pub mod cim_bank;
pub mod config;
pub mod cost_model;
pub mod error;
pub mod fixedpoint;
pub mod fusion;
pub mod io;
pub mod near_memory;
pub mod oracle;
pub mod parallel;
pub mod synthetic;

pub use cim_bank::{BankCounters, BankState, WeightTile};
pub use config::{MacroConfig, SkipMode};
pub use cost_model::{
    estimate_workload_energy, price, scale_area, scale_power, CostReport, EnergyCoefficients,
    NodeScalingParams, SparsityProfile, UsageCounters, Workload,
};
pub use error::{CimError, Result};
pub use fixedpoint::{bit_slice, extract_plane, quantize, BitPlane, FixedPointMatrix};
pub use fusion::{fuse, FusedWeights, WeightMode};
pub use near_memory::{
    attention_scores, attention_scores_with_threads, combine_groups, GroupAccumulators,
    MacroEngine, ScoreMatrix,
};
pub use oracle::{baseline_trace, oracle_scores, proposed_trace, AccessTrace};
