//! `cimsim`: command-line driver for the CIM attention-score simulator.
//!
//! Exit codes: 0 success, 1 internal error, 2 bad input.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cimsim::cost_model::{
    scale_area, scale_power, NodeScalingParams, REFERENCE_SCALED_AREA_MM2,
    REFERENCE_SCALED_POWER_MW,
};
use cimsim::io;
use cimsim::synthetic::{self, BenchPoint, FusedStorage, SyntheticCase};
use cimsim::{
    attention_scores_with_threads, estimate_workload_energy, fuse, CimError, FixedPointMatrix,
    FusedWeights, MacroConfig, SkipMode, SparsityProfile, Workload,
};

use report::{AccessReport, ScaleReport, ScoreReport};

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn user(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    /// Reading an input the user named is a user error even when it is IO.
    fn input(path: &Path, err: CimError) -> Self {
        Self::user(format!("{}: {err}", path.display()))
    }
}

impl From<CimError> for CliError {
    fn from(e: CimError) -> Self {
        if e.is_user_error() {
            Self::user(e.to_string())
        } else {
            Self::internal(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "cimsim",
    version,
    about = "Weight-stationary CIM attention-score simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse W_Q and W_K into one stationary weight matrix
    Fuse(FuseArgs),
    /// Compute attention scores on the macro and write a cost report
    Score(ScoreArgs),
    /// Sweep synthetic workloads and write one CSV row per point
    Bench(BenchArgs),
    /// Compare proposed and baseline memory traffic for one shape
    Trace(TraceArgs),
    /// Scale power and area between process nodes
    Scale(ScaleArgs),
    /// Predict workload energy analytically from shapes and sparsity
    Estimate(EstimateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SkipArg {
    None,
    Plane,
    Element,
}

impl From<SkipArg> for SkipMode {
    fn from(s: SkipArg) -> Self {
        match s {
            SkipArg::None => SkipMode::None,
            SkipArg::Plane => SkipMode::Plane,
            SkipArg::Element => SkipMode::Element,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Bin,
    Json,
}

#[derive(Args)]
struct MacroArgs {
    /// Macro configuration file (sectioned key = value)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    skip_mode: Option<SkipArg>,
}

impl MacroArgs {
    fn load(&self) -> CliResult<MacroConfig> {
        let mut cfg = match &self.config {
            Some(p) => MacroConfig::load(p).map_err(|e| CliError::input(p, e))?,
            None => MacroConfig::default(),
        };
        if let Some(m) = self.skip_mode {
            cfg.skip_mode = m.into();
        }
        Ok(cfg)
    }
}

fn parse_storage(s: &str) -> CliResult<FusedStorage> {
    s.parse().map_err(CliError::from)
}

#[derive(Args)]
struct FuseArgs {
    #[arg(long)]
    wq: PathBuf,
    #[arg(long)]
    wk: PathBuf,
    /// Element width of CSV inputs
    #[arg(long, default_value_t = 8)]
    bits: u32,
    /// exact, or intN to requantize to N bits
    #[arg(long, default_value = "exact")]
    weight_mode: String,
    /// Output matrix (.csv or binary); a .meta sidecar is written next to it
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Token matrix (.csv or binary); synthetic tokens are used when absent
    #[arg(long)]
    x: Option<PathBuf>,
    /// Fused weights from `cimsim fuse`; synthetic weights when absent
    #[arg(long)]
    fused: Option<PathBuf>,
    #[command(flatten)]
    macro_args: MacroArgs,
    /// Weight storage for synthetic weights: exact or intN
    #[arg(long, default_value = "exact")]
    weight_mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Synthetic shape: tokens
    #[arg(long, default_value_t = 16)]
    tokens: usize,
    /// Synthetic shape: token dimension
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// Synthetic padded-token fraction
    #[arg(long, default_value_t = 0.0)]
    sparsity: f64,
    /// Token element width (CSV input and synthetic data); defaults to the config
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// JSON report path (default: <out>.report.json)
    #[arg(long)]
    report: Option<PathBuf>,
}

/// List flags are comma-separated; a flag given with no values yields an
/// empty sweep.
#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "8,16,32")]
    tokens: Vec<usize>,
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "64")]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "8")]
    bits: Vec<u32>,
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "0,0.6")]
    sparsity: Vec<f64>,
    #[command(flatten)]
    macro_args: MacroArgs,
    #[arg(long, default_value = "exact")]
    weight_mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    tokens: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 8)]
    bits: u32,
    #[arg(long, default_value_t = 8)]
    weight_bits: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScaleArgs {
    #[arg(long, default_value_t = 1.24)]
    power_mw: f64,
    #[arg(long, default_value_t = 0.35)]
    area_mm2: f64,
    #[arg(long, default_value_t = 65.0)]
    from_nm: f64,
    #[arg(long, default_value_t = 28.0)]
    to_nm: f64,
    #[arg(long, default_value_t = 1.0)]
    from_v: f64,
    #[arg(long, default_value_t = 0.8)]
    to_v: f64,
    #[arg(long, default_value_t = 100.0)]
    from_mhz: f64,
    #[arg(long, default_value_t = 100.0)]
    to_mhz: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// File with [[workload]] tables (name, tokens, dim, heads, layers, sparsity)
    #[arg(long)]
    workloads: PathBuf,
    #[command(flatten)]
    macro_args: MacroArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Worker threads from `CIMSIM_THREADS` (0 or unset = all cores).
fn threads_from_env() -> CliResult<usize> {
    match std::env::var("CIMSIM_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::user(format!("CIMSIM_THREADS='{v}' is not a number"))),
        _ => Ok(0),
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| CliError::internal(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::internal(e.to_string()))
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> CliResult<Vec<u8>> {
    report::canonical_json(v).map_err(|e| CliError::internal(e.to_string()))
}

fn cmd_fuse(a: FuseArgs) -> CliResult<()> {
    let storage = parse_storage(&a.weight_mode)?;
    let w_q = io::read_matrix(&a.wq, a.bits).map_err(|e| CliError::input(&a.wq, e))?;
    let w_k = io::read_matrix(&a.wk, a.bits).map_err(|e| CliError::input(&a.wk, e))?;
    let fused = storage.apply(fuse(&w_q, &w_k)?)?;
    io::write_fused(&a.out, &fused).map_err(|e| CliError::internal(e.to_string()))?;
    let (lo, hi) = fused
        .values()
        .iter()
        .fold((i64::MAX, i64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    println!(
        "fused {d}x{d} weights: range [{lo}, {hi}], {bits} bits, scale {scale}",
        d = fused.dim(),
        bits = fused.value_bits(),
        scale = fused.scale()
    );
    Ok(())
}

fn score_inputs(
    a: &ScoreArgs,
    cfg: &MacroConfig,
) -> CliResult<(FixedPointMatrix, FusedWeights, String)> {
    let bits = a.bits.unwrap_or(cfg.input_bits);
    let storage = parse_storage(&a.weight_mode)?;
    let point = BenchPoint {
        tokens: a.tokens,
        dim: a.dim,
        bits,
        sparsity: a.sparsity,
    };
    let synthetic = if a.x.is_none() || a.fused.is_none() {
        Some(SyntheticCase::generate(&point, cfg, a.seed)?)
    } else {
        None
    };
    let x = match (&a.x, &synthetic) {
        (Some(p), _) => io::read_matrix(p, bits).map_err(|e| CliError::input(p, e))?,
        (None, Some(s)) => s.x.clone(),
        (None, None) => unreachable!(),
    };
    let (weights, mode) = match (&a.fused, &synthetic) {
        (Some(p), _) => {
            let w = io::read_fused(p).map_err(|e| CliError::input(p, e))?;
            let mode = io::FusedMeta::of(&w).mode;
            (w, mode)
        }
        (None, Some(s)) => (storage.apply(fuse(&s.w_q, &s.w_k)?)?, a.weight_mode.clone()),
        (None, None) => unreachable!(),
    };
    Ok((x, weights, mode))
}

fn cmd_score(a: ScoreArgs) -> CliResult<()> {
    let cfg = a.macro_args.load()?;
    let threads = threads_from_env()?;
    let (x, weights, mode) = score_inputs(&a, &cfg)?;
    let (scores, cost) = attention_scores_with_threads(&x, &weights, &cfg, threads)?;
    let profile = SparsityProfile::measure(&x, &cfg);

    let payload = match a.format {
        Format::Csv => io::scores_to_csv(&scores).into_bytes(),
        Format::Bin => io::scores_to_bin(&scores),
        Format::Json => to_json(&report::ScoreMatrixJson::of(&scores))?,
    };
    write_output(Some(&a.out), &payload)?;

    let report = ScoreReport::build(&cfg, &x, &weights, mode, &cost, &profile);
    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut s = a.out.clone().into_os_string();
        s.push(".report.json");
        PathBuf::from(s)
    });
    write_output(Some(&report_path), &to_json(&report)?)?;
    println!(
        "scored {n}x{n}: {ops} ops, {cycles} cycles ({skipped} skipped), {e:.4e} J",
        n = scores.n(),
        ops = cost.total_ops,
        cycles = cost.counters.cycles,
        skipped = cost.counters.skipped_cycles,
        e = cost.energy_j
    );
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> CliResult<()> {
    let cfg = a.macro_args.load()?;
    let storage = parse_storage(&a.weight_mode)?;
    let threads = threads_from_env()?;
    let rows = synthetic::sweep(
        &a.tokens,
        &a.dims,
        &a.bits,
        &a.sparsity,
        &cfg,
        storage,
        a.seed,
        threads,
    )?;
    write_output(a.out.as_deref(), synthetic::rows_to_csv(&rows).as_bytes())
}

fn cmd_trace(a: TraceArgs) -> CliResult<()> {
    if a.dim == 0 {
        return Err(CliError::user("--dim must be positive"));
    }
    cimsim::fixedpoint::check_bits(a.bits)?;
    cimsim::fixedpoint::check_bits(a.weight_bits)?;
    let r = AccessReport::build(a.tokens, a.dim, a.bits, a.weight_bits);
    write_output(a.out.as_deref(), &to_json(&r)?)
}

fn cmd_scale(a: ScaleArgs) -> CliResult<()> {
    let p = NodeScalingParams::new(
        a.from_nm,
        a.to_nm,
        a.from_v,
        a.to_v,
        a.from_mhz * 1e6,
        a.to_mhz * 1e6,
    )?;
    if !(a.power_mw >= 0.0 && a.area_mm2 >= 0.0) {
        return Err(CliError::user("power and area must be non-negative"));
    }
    let r = ScaleReport {
        params: p,
        power_mw: a.power_mw,
        area_mm2: a.area_mm2,
        scaled_power_mw: scale_power(a.power_mw * 1e-3, &p) * 1e3,
        scaled_area_mm2: scale_area(a.area_mm2, &p),
        reference_scaled_power_mw: REFERENCE_SCALED_POWER_MW,
        reference_scaled_area_mm2: REFERENCE_SCALED_AREA_MM2,
        note: "reference_* are published 28 nm figures for the 65 nm reference macro; \
               the published power figure does not follow from the scaling formula"
            .into(),
    };
    write_output(a.out.as_deref(), &to_json(&r)?)
}

#[derive(serde::Deserialize)]
struct WorkloadFile {
    workload: Vec<Workload>,
}

fn cmd_estimate(a: EstimateArgs) -> CliResult<()> {
    let cfg = a.macro_args.load()?;
    let text = std::fs::read_to_string(&a.workloads)
        .map_err(|e| CliError::input(&a.workloads, e.into()))?;
    let file: WorkloadFile = toml::from_str(&text)
        .map_err(|e| CliError::user(format!("{}: {}", a.workloads.display(), e.message())))?;
    let est = estimate_workload_energy(&file.workload, &cfg)?;
    write_output(a.out.as_deref(), &to_json(&est)?)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fuse(a) => cmd_fuse(a),
        Command::Score(a) => cmd_score(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Scale(a) => cmd_scale(a),
        Command::Estimate(a) => cmd_estimate(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
