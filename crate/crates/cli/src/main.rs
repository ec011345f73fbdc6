//! `isingqpe`: resource estimates, figure data and simulator checks for
//! phase estimation of the transverse-field Ising model.
//!
//! Exit codes: 0 success, 1 I/O, 2 invalid input, 3 configuration,
//! 4 capacity, 5 infeasible (beyond level 3), 6 verification failed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use isingqpe::ft::{PaperConstants, SENSITIVITY_SERIES};
use isingqpe::pe::PeMode;
use isingqpe::report::{self, EstimateMode, PipelineConfig, VerifyInput, DEFAULT_FIT_RANGE};
use isingqpe::trotter::calibrate_k0;
use isingqpe::{Error, Instance};

/// Directory holding `paper_constants.json`, overriding the built-in copy.
const GOLDEN_DIR_ENV: &str = "ISINGQPE_GOLDEN_DIR";

#[derive(Parser)]
#[command(name = "isingqpe", version, about = "Phase-estimation resource model for the transverse-field Ising model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline for one instance; writes a JSON run report.
    Estimate(EstimateArgs),
    /// Cycles, level and wall-clock for M = 1..=M_max as CSV.
    Sweep(SweepArgs),
    /// Improvement series for tp, p0 and pth as CSV.
    Sensitivity(SensitivityArgs),
    /// Simulated phase estimation checked against exact diagonalization.
    Verify(VerifyArgs),
    /// Machine capacity lines and application placements in KQ space as CSV.
    KqSpace(KqSpaceArgs),
    /// Measures k0 on small chains and writes the Trotter plan as JSON.
    Calibrate(CalibrateArgs),
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON configuration file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `paper` (golden k0 and rotation length) or `calibrated`.
    #[arg(long)]
    mode: Option<EstimateMode>,
    /// `table` (printed failure rates) or `threshold` (recomputed).
    #[arg(long)]
    failure_mode: Option<isingqpe::ft::FailureMode>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    pth: Option<f64>,
    /// Physical operation time in seconds.
    #[arg(long)]
    tp: Option<f64>,
    #[arg(long)]
    t_cycle_cost: Option<u64>,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    #[arg(long, default_value_t = 1)]
    dim: u8,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    m: u32,
    #[command(flatten)]
    config: ConfigArgs,
    /// Recorded in the report's provenance.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 20)]
    m_max: u32,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SensitivityArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 18)]
    m: u32,
    #[arg(long, default_value_t = 10)]
    iterations: u32,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    m: u32,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    #[arg(long, default_value_t = 200)]
    shots: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `exactU`, `trotterExactRz` or `fullyCompiled`.
    #[arg(long, default_value = "exactU")]
    pe_mode: PeMode,
    /// `ground` or `orthogonal`.
    #[arg(long, default_value = "ground")]
    input: VerifyInput,
    /// Shot log CSV path; the JSON summary always goes to standard output.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct KqSpaceArgs {
    /// Machine sizes, named by the factoring problem (bits) each is built for.
    #[arg(long, value_delimiter = ',', default_value = "8,128,512,1024")]
    budgets: Vec<u64>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    m: u32,
    /// Chain lengths used in the fit.
    #[arg(long, value_delimiter = ',')]
    range: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Core(Error),
    Csv(csv::Error),
    VerifyFailed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Csv(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) => match e {
                Error::Io(_) => 1,
                Error::Validation(_) | Error::Parse { .. } => 2,
                Error::Config(_) | Error::Json(_) | Error::BaseNetTooCoarse { .. } => 3,
                Error::Capacity { .. } => 4,
                Error::Infeasible { .. } => 5,
            },
            Failure::Csv(_) => 1,
            Failure::VerifyFailed(_) => 6,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Csv(e) => e.to_string(),
            Failure::VerifyFailed(m) => m.clone(),
        }
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Built-in defaults, then the golden directory, then the config file, then flags.
fn load_config(args: &ConfigArgs) -> Result<PipelineConfig, Failure> {
    let mut config = PipelineConfig::default();
    if let Some(dir) = std::env::var_os(GOLDEN_DIR_ENV) {
        config.paper_constants = PaperConstants::load(Path::new(&dir))?;
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        let overlay: Value = serde_json::from_str(&text).map_err(Error::Json)?;
        let mut merged = serde_json::to_value(&config).map_err(Error::Json)?;
        merge(&mut merged, overlay);
        config = serde_json::from_value(merged).map_err(Error::Json)?;
    }
    if let Some(m) = args.mode {
        config.mode = m;
    }
    if let Some(m) = args.failure_mode {
        config.failure_mode = m;
    }
    if let Some(v) = args.p0 {
        config.qla.p0 = v;
    }
    if let Some(v) = args.pth {
        config.qla.pth = v;
    }
    if let Some(v) = args.tp {
        config.qla.tp = v;
    }
    if let Some(v) = args.t_cycle_cost {
        config.qla.t_cycle_cost = v;
    }
    config.validate()?;
    Ok(config)
}

fn instance(args: &InstanceArgs, m: u32) -> Result<Instance, Failure> {
    Ok(Instance::new(args.n, m)?
        .with_field(args.g)?
        .with_coupling(args.j)?
        .with_dimension(args.dim)?)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: serde::Serialize>(value: &T, out: &Option<PathBuf>) -> Result<(), Failure> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(Error::Json)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_estimate(a: EstimateArgs) -> Result<(), Failure> {
    let config = load_config(&a.config)?;
    let inst = instance(&a.instance, a.m)?;
    let r = report::run_estimate(&inst, &config, a.seed)?;
    write_json(&r, &a.out)
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let config = load_config(&a.config)?;
    let inst = instance(&a.instance, 1)?;
    let rows = report::sweep(&inst, a.m_max, &config)?;
    let mut w = csv::Writer::from_writer(sink(&a.out)?);
    w.write_record(["M (bits)", "K (cycles)", "level", "wall_clock (days)", "k0 (steps)", "SR (cycles)"])?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            r.k.to_string(),
            r.level.to_string(),
            format!("{:.6e}", r.days),
            r.k0.to_string(),
            r.sr_cycles.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sensitivity(a: SensitivityArgs) -> Result<(), Failure> {
    let config = load_config(&a.config)?;
    let inst = instance(&a.instance, a.m)?;
    let points = report::sensitivity(&inst, a.iterations, &config)?;
    debug_assert_eq!(points.len(), SENSITIVITY_SERIES.len() * (a.iterations as usize + 1));
    let mut w = csv::Writer::from_writer(sink(&a.out)?);
    w.write_record([
        "series",
        "iteration",
        "p0 (probability)",
        "pth (probability)",
        "tp (s)",
        "level",
        "wall_clock (days)",
    ])?;
    for p in points {
        w.write_record([
            p.series,
            p.iteration.to_string(),
            format!("{:.6e}", p.p0),
            format!("{:.6e}", p.pth),
            format!("{:.6e}", p.tp),
            opt(p.level),
            p.wall_clock_days.map(|d| format!("{d:.6e}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let inst = Instance::new(a.n, a.m)?.with_field(a.g)?.with_coupling(a.j)?;
    let (records, summary) = report::verify(&inst, a.pe_mode, a.input, a.shots, a.seed)?;
    if let Some(path) = &a.log {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["shot", "seed", "bits", "phi (turns)", "energy (J)", "abs_error (J)"])?;
        for (i, r) in records.iter().enumerate() {
            w.write_record([
                i.to_string(),
                r.seed.to_string(),
                r.bits.clone(),
                format!("{:.12}", r.phi),
                format!("{:.12}", r.energy),
                format!("{:.12}", r.abs_error),
            ])?;
        }
        w.flush()?;
    }
    write_json(&summary, &None)?;
    if summary.passed {
        Ok(())
    } else {
        Err(Failure::VerifyFailed(format!(
            "ground-bin hit rate {:.3} is below {}",
            summary.success_fraction,
            report::VERIFY_SUCCESS_FLOOR
        )))
    }
}

fn cmd_kq_space(a: KqSpaceArgs) -> Result<(), Failure> {
    let config = load_config(&a.config)?;
    let space = report::kq_space(&a.budgets, &config)?;
    let mut w = csv::Writer::from_writer(sink(&a.out)?);
    w.write_record([
        "kind",
        "application",
        "budget (bits)",
        "budget (physical qubits)",
        "level",
        "N (spins)",
        "M (bits)",
        "decimal_digits",
        "factor (bits)",
        "Q (logical qubits)",
        "KQ (cycles x qubits)",
        "required_level",
    ])?;
    for c in &space.capacities {
        w.write_record([
            "capacity".to_string(),
            String::new(),
            c.budget_bits.to_string(),
            c.physical_qubits.to_string(),
            c.level.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            c.q_available.to_string(),
            format!("{:.6e}", c.kq_capacity),
            String::new(),
        ])?;
    }
    for p in &space.placements {
        let required = p.required_level.map_or_else(|| "beyond-model".to_string(), |l| l.to_string());
        for &(budget, level) in &p.placements {
            let physical = space
                .capacities
                .iter()
                .find(|c| c.budget_bits == budget)
                .map_or(0, |c| c.physical_qubits);
            w.write_record([
                "placement".to_string(),
                p.application.clone(),
                budget.to_string(),
                physical.to_string(),
                level.map_or_else(|| "none".to_string(), |l| l.to_string()),
                opt(p.n),
                opt(p.m),
                opt(p.decimal_digits),
                opt(p.factor_bits),
                p.q.to_string(),
                format!("{:.6e}", p.kq),
                required.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_calibrate(a: CalibrateArgs) -> Result<(), Failure> {
    let range = a.range.unwrap_or_else(|| DEFAULT_FIT_RANGE.to_vec());
    let plan = calibrate_k0(a.m, &range, a.g, a.j)?;
    write_json(&plan, &a.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Sensitivity(a) => cmd_sensitivity(a),
        Command::Verify(a) => cmd_verify(a),
        Command::KqSpace(a) => cmd_kq_space(a),
        Command::Calibrate(a) => cmd_calibrate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("isingqpe: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
