//! End-to-end pipeline runs and the structured report they produce.
//!
//! Everything here is deterministic: identical inputs, configuration and seed
//! give byte-identical serialized output.

use std::str::FromStr;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ft::{
    self, big_decimal, estimate, factoring_resources, placement_level, qla_budget, FactoringConstants,
    FactoringVariant, FailureMode, PaperConstants, QlaParams, ResourceEstimate, MAX_LEVEL,
};
use crate::pe::{energy_resolution, PeConfig, PeMode, PhaseEstimator, ShotRecord};
use crate::sk::{compute_sr, AngleLength, SkCompiler};
use crate::state::StateVector;
use crate::tim::{build_hamiltonian, Spectrum, TimInstance};
use crate::trotter::{calibrate_k0, TrotterPlan};

pub const REPORT_SCHEMA: &str = "isingqpe.run_report.v1";

/// Chains used to fit `k0` when none are configured.
pub const DEFAULT_FIT_RANGE: [usize; 5] = [4, 5, 6, 7, 8];

/// Where `k0` and the rotation length come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EstimateMode {
    /// Golden `k0` and rotation-length power law.
    PaperConstants,
    /// Measured `k0` and compiled rotation words.
    Calibrated,
}

impl FromStr for EstimateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paperConstants" => Ok(EstimateMode::PaperConstants),
            "calibrated" => Ok(EstimateMode::Calibrated),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected paper or calibrated)"
            ))),
        }
    }
}

impl FromStr for FailureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paperConstants" | "table" => Ok(FailureMode::PaperConstants),
            "threshold" | "thresholdFormula" => Ok(FailureMode::ThresholdFormula),
            other => Err(Error::Config(format!(
                "unknown failure mode `{other}` (expected table or threshold)"
            ))),
        }
    }
}

/// Effective configuration, echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: EstimateMode,
    pub failure_mode: FailureMode,
    pub qla: QlaParams,
    pub paper_constants: PaperConstants,
    pub calibration_range: Vec<usize>,
    pub factoring: FactoringConstants,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: EstimateMode::PaperConstants,
            failure_mode: FailureMode::PaperConstants,
            qla: QlaParams::default(),
            paper_constants: PaperConstants::builtin(),
            calibration_range: DEFAULT_FIT_RANGE.to_vec(),
            factoring: FactoringConstants::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: PipelineConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.qla.validate()?;
        if self.calibration_range.is_empty() {
            return Err(Error::Config("calibrationRange must not be empty".into()));
        }
        if self.paper_constants.k0 == 0 {
            return Err(Error::Config("paperConstants.k0 must be positive".into()));
        }
        Ok(())
    }
}

/// Trotter inputs actually used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrotterSection {
    pub source: EstimateMode,
    pub k0: u64,
    /// Calibration record, present in calibrated mode.
    pub plan: Option<TrotterPlan>,
}

/// Rotation-compilation inputs actually used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SkSection {
    pub source: EstimateMode,
    /// Longest rotation in cycles (`T` gates weighted).
    pub sr_cycles: u64,
    /// Longest rotation in gates, when compiled.
    pub sr_gates: Option<usize>,
    pub epsilon_target: Option<f64>,
    pub max_order: Option<usize>,
    pub per_angle: Vec<AngleLength>,
}

/// `k0` and rotation length for an instance under `config`.
pub fn resource_inputs(
    inst: &TimInstance<f64>,
    config: &PipelineConfig,
) -> Result<(TrotterSection, SkSection)> {
    match config.mode {
        EstimateMode::PaperConstants => {
            let c = &config.paper_constants;
            Ok((
                TrotterSection {
                    source: config.mode,
                    k0: c.k0,
                    plan: None,
                },
                SkSection {
                    source: config.mode,
                    sr_cycles: c.sr(inst.m),
                    sr_gates: None,
                    epsilon_target: None,
                    max_order: None,
                    per_angle: Vec::new(),
                },
            ))
        }
        EstimateMode::Calibrated => {
            // Lattices reuse the chain calibration along one side.
            let plan = calibrate_k0(inst.m, &config.calibration_range, inst.g, inst.j)?.for_chain(inst.n);
            let sr = compute_sr(&SkCompiler::standard(), &plan, inst)?;
            Ok((
                TrotterSection {
                    source: config.mode,
                    k0: plan.k0,
                    plan: Some(plan),
                },
                SkSection {
                    source: config.mode,
                    sr_cycles: sr.sr_cycles(config.qla.t_cycle_cost),
                    sr_gates: Some(sr.sr),
                    epsilon_target: Some(sr.epsilon_target),
                    max_order: Some(sr.max_order),
                    per_angle: sr.per_angle,
                },
            ))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InstanceEcho {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub g: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub dimension: u8,
    pub sites: usize,
    pub tau: f64,
}

impl From<&TimInstance<f64>> for InstanceEcho {
    fn from(i: &TimInstance<f64>) -> Self {
        InstanceEcho {
            n: i.n,
            m: i.m,
            g: i.g,
            j: i.j,
            dimension: i.dimension,
            sites: i.sites(),
            tau: i.tau(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    /// SHA-256 of the serialized instance and effective configuration.
    pub config_hash: String,
    pub mode: EstimateMode,
    pub failure_mode: FailureMode,
    pub seed: Option<u64>,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub schema: String,
    pub instance: InstanceEcho,
    pub config: PipelineConfig,
    pub trotter: TrotterSection,
    pub sk: SkSection,
    pub resources: ResourceEstimate,
    /// Physical qubits count computational ions only; interconnect is excluded.
    pub physical_qubits_note: String,
    pub provenance: Provenance,
}

/// Hex SHA-256 of the instance and configuration as serialized JSON.
pub fn config_hash(instance: &InstanceEcho, config: &PipelineConfig) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(instance).expect("instance serializes"));
    h.update(b"\n");
    h.update(serde_json::to_vec(config).expect("config serializes"));
    hex::encode(h.finalize())
}

/// Full pipeline for one instance.
pub fn run_estimate(
    inst: &TimInstance<f64>,
    config: &PipelineConfig,
    seed: Option<u64>,
) -> Result<RunReport> {
    config.validate()?;
    let (trotter, sk) = resource_inputs(inst, config)?;
    let resources = estimate(inst, trotter.k0, sk.sr_cycles, &config.qla, config.failure_mode)?;
    let instance = InstanceEcho::from(inst);
    Ok(RunReport {
        schema: REPORT_SCHEMA.to_string(),
        provenance: Provenance {
            config_hash: config_hash(&instance, config),
            mode: config.mode,
            failure_mode: config.failure_mode,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        instance,
        config: config.clone(),
        trotter,
        sk,
        resources,
        physical_qubits_note: "computational ions (lower bound)".to_string(),
    })
}

/// One row of the precision sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "K", with = "big_decimal")]
    pub k: BigUint,
    pub level: u8,
    pub days: f64,
    pub k0: u64,
    /// Rotation length charged at the selected level (1 at level 0).
    pub sr_cycles: u64,
}

/// Estimates for `M = 1..=m_max`, computed concurrently, returned in order.
pub fn sweep(
    base: &TimInstance<f64>,
    m_max: u32,
    config: &PipelineConfig,
) -> Result<Vec<SweepRow>> {
    if m_max == 0 {
        return Err(Error::invalid("sweep needs M_max >= 1"));
    }
    (1..=m_max)
        .into_par_iter()
        .map(|m| {
            let inst = base.with_precision(m)?;
            let r = run_estimate(&inst, config, None)?;
            Ok(SweepRow {
                m,
                k: r.resources.k,
                level: r.resources.level,
                days: r.resources.wall_clock_days,
                k0: r.trotter.k0,
                sr_cycles: r.resources.sr,
            })
        })
        .collect()
}

/// Sensitivity series for one instance.
pub fn sensitivity(
    inst: &TimInstance<f64>,
    iterations: u32,
    config: &PipelineConfig,
) -> Result<Vec<ft::SensitivityPoint>> {
    let (trotter, sk) = resource_inputs(inst, config)?;
    ft::sensitivity_sweep(inst, trotter.k0, sk.sr_cycles, &config.qla, iterations)
}

/// Capacity of one machine at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CapacityLine {
    pub budget_bits: u64,
    pub physical_qubits: u64,
    pub level: u8,
    pub q_available: u64,
    pub kq_capacity: f64,
}

/// An application's resource point and where it fits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Placement {
    pub application: String,
    pub n: Option<usize>,
    pub m: Option<u32>,
    pub decimal_digits: Option<u32>,
    pub factor_bits: Option<u64>,
    pub q: u64,
    pub kq: f64,
    /// Lowest level whose failure rate covers KQ; `None` means beyond level 3.
    pub required_level: Option<u8>,
    /// Lowest fitting level per budget, in budget order.
    pub placements: Vec<(u64, Option<u8>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KqSpace {
    pub capacities: Vec<CapacityLine>,
    pub placements: Vec<Placement>,
}

pub const KQ_TIM_SIZES: [usize; 3] = [50, 100, 150];
pub const KQ_TIM_PRECISIONS: [u32; 5] = [5, 10, 15, 20, 25];
pub const KQ_FACTOR_BITS: [u64; 6] = [8, 32, 128, 256, 512, 1024];

fn required_level(kq: f64, config: &PipelineConfig) -> Result<Option<u8>> {
    match ft::select_level(kq, &config.qla, config.failure_mode) {
        Ok(l) => Ok(Some(l)),
        Err(Error::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Capacity lines for each budget and placements for the chain and both
/// factoring circuits.
pub fn kq_space(budgets: &[u64], config: &PipelineConfig) -> Result<KqSpace> {
    config.validate()?;
    let p = &config.qla;
    let physical: Vec<u64> = budgets
        .iter()
        .map(|&b| qla_budget(b, &config.factoring, p))
        .collect::<Result<_>>()?;
    let mut capacities = Vec::new();
    for (&bits, &phys) in budgets.iter().zip(&physical) {
        for level in 0..=MAX_LEVEL {
            capacities.push(CapacityLine {
                budget_bits: bits,
                physical_qubits: phys,
                level,
                q_available: ft::logical_qubits_available(phys, level, p),
                kq_capacity: ft::kq_capacity(level, p, config.failure_mode)?,
            });
        }
    }
    let place = |k: &BigUint, q: u64| -> Result<Vec<(u64, Option<u8>)>> {
        budgets
            .iter()
            .zip(&physical)
            .map(|(&b, &phys)| Ok((b, placement_level(k, q, phys, p, config.failure_mode)?)))
            .collect()
    };
    let tim_jobs: Vec<(usize, u32)> = KQ_TIM_SIZES
        .iter()
        .flat_map(|&n| KQ_TIM_PRECISIONS.iter().map(move |&m| (n, m)))
        .collect();
    let mut placements: Vec<Placement> = tim_jobs
        .par_iter()
        .map(|&(n, m)| {
            let inst = TimInstance::new(n, m)?;
            let (trotter, sk) = resource_inputs(&inst, config)?;
            // Beyond level 3 the estimate fails; place the level-3 layout.
            let (k, q) = match estimate(&inst, trotter.k0, sk.sr_cycles, p, config.failure_mode) {
                Ok(e) => (e.k, e.q),
                Err(Error::Infeasible { .. }) => (
                    ft::compute_k_nd(m, trotter.k0, sk.sr_cycles, inst.dimension),
                    ft::qubit_count(&inst, MAX_LEVEL, p)?.q,
                ),
                Err(e) => return Err(e),
            };
            let kq = (&k * q).to_string().parse::<f64>().unwrap_or(f64::INFINITY);
            Ok(Placement {
                application: "tim".into(),
                n: Some(n),
                m: Some(m),
                decimal_digits: Some(ft::decimal_digits(m)),
                factor_bits: None,
                q,
                kq,
                required_level: required_level(kq, config)?,
                placements: place(&k, q)?,
            })
        })
        .collect::<Result<_>>()?;
    for variant in [FactoringVariant::Beauregard, FactoringVariant::Qcla] {
        for bits in KQ_FACTOR_BITS {
            let f = factoring_resources(bits, variant, &config.factoring)?;
            let kq = f.kq_f64();
            placements.push(Placement {
                application: match variant {
                    FactoringVariant::Beauregard => "beauregard".into(),
                    FactoringVariant::Qcla => "qcla".into(),
                },
                n: None,
                m: None,
                decimal_digits: None,
                factor_bits: Some(bits),
                q: f.q,
                kq,
                required_level: required_level(kq, config)?,
                placements: place(&f.k, f.q)?,
            });
        }
    }
    Ok(KqSpace {
        capacities,
        placements,
    })
}

/// Which eigenstate feeds the phase-estimation check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum VerifyInput {
    Ground,
    /// Lowest eigenstate outside the ground space.
    Orthogonal,
}

impl FromStr for VerifyInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ground" => Ok(VerifyInput::Ground),
            "orthogonal" | "excited" => Ok(VerifyInput::Orthogonal),
            other => Err(Error::Config(format!(
                "unknown input `{other}` (expected ground or orthogonal)"
            ))),
        }
    }
}

/// Ground-bin hit rate required of a verification run.
pub const VERIFY_SUCCESS_FLOOR: f64 = 0.40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifySummary {
    pub shots: usize,
    pub ground_energy: f64,
    /// Tolerance `2π / (τ 2^M)` on `|E - E_g|`.
    pub bin_width: f64,
    pub success_fraction: f64,
    pub max_abs_error: f64,
    pub passed: bool,
}

/// Simulated phase estimation against the dense oracle. Shot `i` uses seed
/// `seed + i`.
pub fn verify(
    inst: &TimInstance<f64>,
    mode: PeMode,
    input: VerifyInput,
    shots: usize,
    seed: u64,
) -> Result<(Vec<ShotRecord>, VerifySummary)> {
    if shots == 0 {
        return Err(Error::invalid("verification needs at least one shot"));
    }
    let estimator = PhaseEstimator::new(inst, &PeConfig::new(mode))?;
    let spectrum = Spectrum::of(&build_hamiltonian(inst)?)?;
    let e0 = spectrum.values[0];
    let tol = crate::tim::degeneracy_tolerance(e0);
    let column = match input {
        VerifyInput::Ground => 0,
        VerifyInput::Orthogonal => spectrum.ground_multiplicity(tol),
    };
    if column >= spectrum.values.len() {
        return Err(Error::invalid("the spectrum has no state outside the ground space"));
    }
    let state = StateVector::from_dvector(&spectrum.vectors.column(column).into_owned())?;
    let seeds: Vec<u64> = (0..shots as u64).map(|i| seed.wrapping_add(i)).collect();
    let estimates = estimator.run_shots(&state, &seeds)?;
    let records: Vec<ShotRecord> = seeds
        .iter()
        .zip(&estimates)
        .map(|(&s, e)| ShotRecord::new(s, e, e0))
        .collect();
    let bin_width = 2.0 * energy_resolution(inst.tau(), inst.m);
    let hits = records.iter().filter(|r| r.abs_error <= bin_width).count();
    let success_fraction = hits as f64 / shots as f64;
    let max_abs_error = records.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    Ok((
        records,
        VerifySummary {
            shots,
            ground_energy: e0,
            bin_width,
            success_fraction,
            max_abs_error,
            passed: success_fraction >= VERIFY_SUCCESS_FLOOR,
        },
    ))
}
