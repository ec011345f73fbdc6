//! Fault-tolerance resource model for a tiled, concatenated-code machine.
//!
//! Cycle counts are exact integers ([`BigUint`]): at large precision they
//! leave the 64-bit range long before the model stops being interesting.
//!
//! Level selection follows the KQ rule: a computation of `K` cycles on `Q`
//! logical qubits succeeds with probability about `1/e` when every logical
//! gate fails with probability at most `1/KQ`.

use std::path::Path;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tim::TimInstance;

/// Highest concatenation level in the model.
pub const MAX_LEVEL: u8 = 3;
pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const SECONDS_PER_YEAR: f64 = 365.25 * SECONDS_PER_DAY;

pub const BUILTIN_PAPER_CONSTANTS: &str = include_str!("../golden/paper_constants.json");
pub const PAPER_CONSTANTS_FILE: &str = "paper_constants.json";

/// Serde helpers writing wide integers as decimal strings.
pub mod big_decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10)
            .ok_or_else(|| serde::de::Error::custom(format!("not a decimal integer: {s}")))
    }
}

/// Where the per-level logical failure probabilities come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FailureMode {
    /// The printed level-1..3 table.
    PaperConstants,
    /// `p_L = pth (p_eff/pth)^(2^L)`, recomputed from `p0` and `pth`.
    ThresholdFormula,
}

/// Machine and code parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct QlaParams {
    /// Physical gate failure probability.
    pub p0: f64,
    /// Threshold failure probability.
    pub pth: f64,
    /// Physical operation time in seconds.
    pub tp: f64,
    /// Logical gate failure at levels 1, 2, 3.
    pub level_gate_failure: [f64; 3],
    /// Physical qubits (data plus ancilla) per logical qubit, per level.
    pub qubits_per_level: u64,
    /// Logical cycle time at levels 0..=3 in units of `tp`.
    pub cycle_multipliers: [f64; 4],
    /// Cycles charged for one `T` or `T†`.
    pub t_cycle_cost: u64,
    pub movement_steps: u32,
    /// Relative error added per movement step in the threshold formula.
    pub move_error_weight: f64,
}

impl Default for QlaParams {
    fn default() -> Self {
        let p0 = 1e-7;
        let pth = 3.1e-6;
        let level1 = 3.2e-10;
        let movement_steps = 10;
        QlaParams {
            p0,
            pth,
            tp: 10e-6,
            level_gate_failure: [level1, 3.5e-14, 3.6e-21],
            qubits_per_level: 21,
            // 1.6 ms and 0.26 s at 10 µs; level 3 extends the 1→2 ratio.
            cycle_multipliers: [1.0, 160.0, 26_000.0, 26_000.0 * 162.5],
            t_cycle_cost: 5,
            movement_steps,
            move_error_weight: fitted_move_weight(p0, pth, level1, movement_steps),
        }
    }
}

/// Movement weight for which the threshold formula's level 1 equals `level1`.
pub fn fitted_move_weight(p0: f64, pth: f64, level1: f64, movement_steps: u32) -> f64 {
    let p_eff = (level1 * pth).sqrt();
    (p_eff / p0 - 1.0) / f64::from(movement_steps.max(1))
}

impl QlaParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("p0", self.p0)?;
        positive("pth", self.pth)?;
        positive("tp", self.tp)?;
        if self.p0 >= 1.0 || self.pth >= 1.0 {
            return Err(Error::Config("probabilities must be below 1".into()));
        }
        for v in self.level_gate_failure {
            positive("levelGateFailure entry", v)?;
        }
        if !self.level_gate_failure.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::Config(
                "levelGateFailure must decrease strictly with level".into(),
            ));
        }
        if !self.cycle_multipliers.windows(2).all(|w| w[1] > w[0]) || self.cycle_multipliers[0] <= 0.0 {
            return Err(Error::Config(
                "cycleMultipliers must be positive and increase strictly with level".into(),
            ));
        }
        if self.qubits_per_level < 2 {
            return Err(Error::Config("qubitsPerLevel must be at least 2".into()));
        }
        if self.t_cycle_cost == 0 {
            return Err(Error::Config("tCycleCost must be at least 1".into()));
        }
        if self.effective_error() <= 0.0 {
            return Err(Error::Config(
                "movement weight makes the effective error non-positive".into(),
            ));
        }
        Ok(())
    }

    /// `p0 (1 + movementSteps · moveErrorWeight)`.
    pub fn effective_error(&self) -> f64 {
        self.p0 * (1.0 + f64::from(self.movement_steps) * self.move_error_weight)
    }

    /// Seconds per logical cycle at `level`.
    pub fn cycle_time(&self, level: u8) -> f64 {
        self.tp * self.cycle_multipliers[usize::from(level.min(MAX_LEVEL))]
    }

    /// Physical qubits in one tile (two logical qubits) at `level`.
    pub fn qubits_per_tile(&self, level: u8) -> u64 {
        2 * self.qubits_per_level.pow(u32::from(level))
    }

    /// Reads a JSON config; absent fields keep their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let p: QlaParams = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }
}

/// Logical gate failure probability at `level` (level 0 is the physical `p0`).
pub fn level_failure(level: u8, params: &QlaParams, mode: FailureMode) -> Result<f64> {
    if level > MAX_LEVEL {
        return Err(Error::invalid(format!(
            "level {level} outside the modelled range 0..={MAX_LEVEL}"
        )));
    }
    if level == 0 {
        return Ok(params.p0);
    }
    Ok(match mode {
        FailureMode::PaperConstants => params.level_gate_failure[usize::from(level) - 1],
        FailureMode::ThresholdFormula => {
            let ratio = params.effective_error() / params.pth;
            params.pth * ratio.powi(1 << level)
        }
    })
}

/// Largest KQ a level supports, `1 / p_L`.
pub fn kq_capacity(level: u8, params: &QlaParams, mode: FailureMode) -> Result<f64> {
    Ok(1.0 / level_failure(level, params, mode)?)
}

/// Smallest level whose capacity covers `kq`.
pub fn select_level(kq: f64, params: &QlaParams, mode: FailureMode) -> Result<u8> {
    select_level_from(kq, 0, params, mode)
}

fn select_level_from(kq: f64, lowest: u8, params: &QlaParams, mode: FailureMode) -> Result<u8> {
    if !(kq > 0.0) {
        return Err(Error::invalid("KQ must be positive"));
    }
    for level in lowest..=MAX_LEVEL {
        if kq * level_failure(level, params, mode)? <= 1.0 {
            return Ok(level);
        }
    }
    Err(Error::Infeasible {
        kq,
        capacity: kq_capacity(MAX_LEVEL, params, mode)?,
    })
}

/// Cycles of the whole phase-estimation circuit in `dimension` spatial
/// dimensions: `(2^M - 1) k0 ((3+6d) S_R + 4+7d) + M (4 S_R + 4)`.
///
/// Per Trotter step a controlled field layer costs `3 S_R + 4` cycles and
/// each bond direction a controlled coupling layer of `6 S_R + 7`; every
/// exponent adds a closing field half-step and one feedback rotation. For a
/// chain this is the per-exponent sum of `2^m k0 (9 S_R + 11) + 4 S_R + 4`.
pub fn compute_k_nd(m: u32, k0: u64, sr: u64, dimension: u8) -> BigUint {
    let sr = BigUint::from(sr);
    let d = u64::from(dimension);
    let per_step = &sr * (3 + 6 * d) + (4 + 7 * d);
    let geometric = (BigUint::one() << m as usize) - 1u32;
    geometric * k0 * per_step + (sr * 4u32 + 4u32) * m
}

/// Cycle count of the one-dimensional circuit.
pub fn compute_k(m: u32, k0: u64, sr: u64) -> BigUint {
    compute_k_nd(m, k0, sr, 1)
}

/// Logical qubits, tiles and physical qubits of an instance at a level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QubitCount {
    pub q: u64,
    pub tiles: u64,
    pub physical_qubits: u64,
}

/// Cat-state ancillas: a chain needs `N - 1`; a lattice sweeps rows in
/// parallel and needs `N^(d-1) / 2`.
fn cat_ancillas(n: u64, dimension: u8) -> u64 {
    if dimension <= 1 {
        n.saturating_sub(1)
    } else {
        n.pow(u32::from(dimension) - 1).div_ceil(2)
    }
}

pub fn qubit_count<T: crate::Real>(inst: &TimInstance<T>, level: u8, params: &QlaParams) -> Result<QubitCount> {
    if level > MAX_LEVEL {
        return Err(Error::invalid(format!("level {level} outside 0..={MAX_LEVEL}")));
    }
    let n = inst.n as u64;
    let sites = inst.sites() as u64;
    // data + cat + output
    let bare = sites + cat_ancillas(n, inst.dimension) + 1;
    if level == 0 {
        return Ok(QubitCount {
            q: bare,
            tiles: bare,
            physical_qubits: bare,
        });
    }
    // Encoded layouts add two T-ancilla tiles per data qubit, which is what
    // brings a chain to 4N tiles.
    let tiles = bare + 2 * sites;
    let physical_qubits = tiles
        .checked_mul(params.qubits_per_tile(level))
        .ok_or(Error::Capacity {
            what: "physical qubit count",
            requested: usize::MAX,
            limit: u64::MAX as usize,
        })?;
    Ok(QubitCount {
        q: tiles,
        tiles,
        physical_qubits,
    })
}

/// Outcome of the level-selection fixed point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResourceEstimate {
    #[serde(rename = "K", with = "big_decimal")]
    pub k: BigUint,
    #[serde(rename = "Q")]
    pub q: u64,
    #[serde(rename = "KQ", with = "big_decimal")]
    pub kq: BigUint,
    pub level: u8,
    pub tiles: u64,
    pub physical_qubits: u64,
    pub wall_clock_seconds: f64,
    pub wall_clock_days: f64,
    /// Rotation word length in cycles charged at this level (1 at level 0).
    #[serde(rename = "SR")]
    pub sr: u64,
    pub k0: u64,
    pub dimension: u8,
    pub failure_mode: FailureMode,
    /// Rounds of the level fixed point.
    pub iterations: u32,
}

impl ResourceEstimate {
    pub fn kq_f64(&self) -> f64 {
        self.kq.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn wall_clock_years(&self) -> f64 {
        self.wall_clock_seconds / SECONDS_PER_YEAR
    }
}

/// Level, cycles and qubits for an instance.
///
/// Start at level 0 (rotations run natively, `S_R = 1`, `Q = 2N`); if the
/// resulting KQ needs encoding, switch to the compiled rotation length and
/// encoded layout and reselect, repeating until the level is stable.
pub fn estimate(
    inst: &TimInstance<f64>,
    k0: u64,
    sr_cycles: u64,
    params: &QlaParams,
    mode: FailureMode,
) -> Result<ResourceEstimate> {
    inst.validate()?;
    params.validate()?;
    if k0 == 0 || sr_cycles == 0 {
        return Err(Error::invalid("k0 and S_R must be positive"));
    }
    let mut level = 0u8;
    for iteration in 1..=4u32 {
        let sr = if level == 0 { 1 } else { sr_cycles };
        let k = compute_k_nd(inst.m, k0, sr, inst.dimension);
        let qc = qubit_count(inst, level, params)?;
        let kq = &k * qc.q;
        let kq_f = kq.to_f64().unwrap_or(f64::INFINITY);
        // Encoding never lowers the level needed: once above 0, stay above.
        let next = select_level_from(kq_f, level.min(1), params, mode)?;
        if next == level {
            let seconds = k.to_f64().unwrap_or(f64::INFINITY) * params.cycle_time(level);
            return Ok(ResourceEstimate {
                k,
                q: qc.q,
                kq,
                level,
                tiles: qc.tiles,
                physical_qubits: qc.physical_qubits,
                wall_clock_seconds: seconds,
                wall_clock_days: seconds / SECONDS_PER_DAY,
                sr,
                k0,
                dimension: inst.dimension,
                failure_mode: mode,
                iterations: iteration,
            });
        }
        level = next;
    }
    Err(Error::Config(
        "level selection did not settle within 4 rounds".into(),
    ))
}

/// Ratio of a lattice estimate's cycles to the chain estimate on one row.
pub fn dimensional_k_ratio(m: u32, k0: u64, sr: u64, dimension: u8) -> f64 {
    let a = compute_k_nd(m, k0, sr, dimension).to_f64().unwrap_or(f64::NAN);
    let b = compute_k(m, k0, sr).to_f64().unwrap_or(f64::NAN);
    a / b
}

/// Golden-constant inputs: `k0` for the 100-spin chain and a power law for
/// the rotation length in cycles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PaperConstants {
    pub k0: u64,
    pub sr_coefficient: f64,
    pub sr_exponent: f64,
    #[serde(default)]
    pub note: String,
}

impl PaperConstants {
    pub fn builtin() -> Self {
        serde_json::from_str(BUILTIN_PAPER_CONSTANTS).expect("built-in constants parse")
    }

    /// Reads `paper_constants.json` from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(PAPER_CONSTANTS_FILE))?;
        let c: PaperConstants = serde_json::from_str(&text)?;
        if c.k0 == 0 || !(c.sr_coefficient > 0.0) || !c.sr_exponent.is_finite() {
            return Err(Error::Config("paper constants out of range".into()));
        }
        Ok(c)
    }

    /// `round(c · M^e)`, at least 1.
    pub fn sr(&self, m: u32) -> u64 {
        (self.sr_coefficient * f64::from(m).powf(self.sr_exponent))
            .round()
            .max(1.0) as u64
    }
}

/// One point of a sensitivity series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SensitivityPoint {
    pub series: String,
    pub iteration: u32,
    pub p0: f64,
    pub pth: f64,
    pub tp: f64,
    pub level: Option<u8>,
    pub wall_clock_days: Option<f64>,
}

pub const SENSITIVITY_SERIES: [&str; 4] = ["tp", "p0", "pth", "all"];

/// Improves `tp`, `p0`, `pth` (alone and together) by 2× per iteration and
/// re-estimates with threshold-formula failure rates. Iteration 0 is the
/// baseline. Points whose KQ exceeds level 3 have no level.
pub fn sensitivity_sweep(
    inst: &TimInstance<f64>,
    k0: u64,
    sr_cycles: u64,
    params: &QlaParams,
    iterations: u32,
) -> Result<Vec<SensitivityPoint>> {
    let jobs: Vec<(&str, u32)> = SENSITIVITY_SERIES
        .iter()
        .flat_map(|&s| (0..=iterations).map(move |i| (s, i)))
        .collect();
    jobs.par_iter()
        .map(|&(series, i)| {
            let f = (f64::from(i)).exp2();
            let mut p = params.clone();
            match series {
                "tp" => p.tp /= f,
                "p0" => p.p0 /= f,
                "pth" => p.pth *= f,
                _ => {
                    p.tp /= f;
                    p.p0 /= f;
                    p.pth *= f;
                }
            }
            let (level, days) = match estimate(inst, k0, sr_cycles, &p, FailureMode::ThresholdFormula) {
                Ok(e) => (Some(e.level), Some(e.wall_clock_days)),
                Err(Error::Infeasible { .. }) => (None, None),
                Err(e) => return Err(e),
            };
            Ok(SensitivityPoint {
                series: series.to_string(),
                iteration: i,
                p0: p.p0,
                pth: p.pth,
                tp: p.tp,
                level,
                wall_clock_days: days,
            })
        })
        .collect()
}

/// Constants of the factoring comparison, which the source model leaves open.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct FactoringConstants {
    /// Carry-lookahead circuit: `Q = qcla_qubits · n²`.
    pub qcla_qubits: f64,
    /// Carry-lookahead circuit: `K = qcla_cycles · n · log2(n)²`.
    pub qcla_cycles: f64,
    /// One-control circuit: cycles of one controlled multiplier, per `n²`
    /// rotation layers, each charged a compiled rotation length.
    pub beauregard_base: f64,
    /// Rotation length power law used for the one-control circuit's
    /// `2n`-bit precision.
    pub sr_coefficient: f64,
    pub sr_exponent: f64,
}

impl Default for FactoringConstants {
    fn default() -> Self {
        FactoringConstants {
            qcla_qubits: 10.0,
            qcla_cycles: 10.0,
            beauregard_base: 1.0,
            sr_coefficient: 0.11,
            sr_exponent: 3.97,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FactoringVariant {
    Beauregard,
    Qcla,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FactoringModel {
    pub variant: FactoringVariant,
    pub bits: u64,
    #[serde(rename = "Q")]
    pub q: u64,
    #[serde(rename = "K", with = "big_decimal")]
    pub k: BigUint,
}

impl FactoringModel {
    pub fn kq_f64(&self) -> f64 {
        (&self.k * self.q).to_f64().unwrap_or(f64::INFINITY)
    }
}

pub fn factoring_resources(
    bits: u64,
    variant: FactoringVariant,
    c: &FactoringConstants,
) -> Result<FactoringModel> {
    if bits < 2 {
        return Err(Error::invalid("factoring needs at least 2 bits"));
    }
    let n = bits as f64;
    let (q, k) = match variant {
        FactoringVariant::Qcla => {
            let q = (c.qcla_qubits * n * n).ceil() as u64;
            let k = (c.qcla_cycles * n * n.log2().powi(2)).ceil();
            (q, BigUint::from(k as u128))
        }
        FactoringVariant::Beauregard => {
            // 2n + 3 qubits; M = 2n exponents, U(2^m) costing 2m times U.
            let m = 2 * bits;
            let sr = (c.sr_coefficient * (m as f64).powf(c.sr_exponent)).round().max(1.0);
            let per_u = BigUint::from((c.beauregard_base * n * n * sr).ceil() as u128);
            let weights: u64 = (0..m).map(|e| 2 * e.max(1)).sum();
            (2 * bits + 3, per_u * weights)
        }
    };
    Ok(FactoringModel {
        variant,
        bits,
        q,
        k,
    })
}

/// Physical qubits of a QLA-`bits` machine: the carry-lookahead factoring
/// circuit for `bits` at level 2.
pub fn qla_budget(bits: u64, c: &FactoringConstants, params: &QlaParams) -> Result<u64> {
    let qcla = factoring_resources(bits, FactoringVariant::Qcla, c)?;
    Ok(qcla.q.div_ceil(2) * params.qubits_per_tile(2))
}

/// Logical qubits a budget holds when everything is encoded at `level`.
pub fn logical_qubits_available(budget: u64, level: u8, params: &QlaParams) -> u64 {
    budget / params.qubits_per_tile(level) * 2
}

/// Whether `(K, Q)` runs at `level` on `budget` physical qubits.
pub fn kq_feasible(k: &BigUint, q: u64, level: u8, budget: u64, params: &QlaParams, mode: FailureMode) -> Result<bool> {
    let kq = (k * q).to_f64().unwrap_or(f64::INFINITY);
    Ok(q <= logical_qubits_available(budget, level, params)
        && kq * level_failure(level, params, mode)? <= 1.0)
}

/// Lowest level at which `(K, Q)` fits `budget`; `None` beyond level 3.
pub fn placement_level(k: &BigUint, q: u64, budget: u64, params: &QlaParams, mode: FailureMode) -> Result<Option<u8>> {
    for level in 0..=MAX_LEVEL {
        if kq_feasible(k, q, level, budget, params, mode)? {
            return Ok(Some(level));
        }
    }
    Ok(None)
}

/// Decimal digits carried by `m` bits.
pub fn decimal_digits(m: u32) -> u32 {
    (f64::from(m) * std::f64::consts::LOG10_2).floor() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, m: u32) -> TimInstance<f64> {
        TimInstance::new(n, m).unwrap()
    }

    #[test]
    fn defaults_are_consistent() {
        let p = QlaParams::default();
        p.validate().unwrap();
        assert!((p.cycle_time(1) - 1.6e-3).abs() < 1e-12);
        assert!((p.cycle_time(2) - 0.26).abs() < 1e-12);
        assert!((p.cycle_time(3) - 42.25).abs() < 1e-9);
        let l1 = level_failure(1, &p, FailureMode::ThresholdFormula).unwrap();
        assert!((l1 / 3.2e-10 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn failure_table() {
        let p = QlaParams::default();
        assert_eq!(level_failure(0, &p, FailureMode::PaperConstants).unwrap(), 1e-7);
        assert_eq!(level_failure(2, &p, FailureMode::PaperConstants).unwrap(), 3.5e-14);
        let l2 = level_failure(2, &p, FailureMode::ThresholdFormula).unwrap();
        assert!((l2 - 3.2e-10f64.powi(2) / 3.1e-6).abs() < 1e-18);
        assert!(level_failure(4, &p, FailureMode::PaperConstants).is_err());
    }

    #[test]
    fn level_selection() {
        let p = QlaParams::default();
        let m = FailureMode::PaperConstants;
        assert_eq!(select_level(1e6, &p, m).unwrap(), 0);
        assert_eq!(select_level(1e10, &p, m).unwrap(), 2);
        assert!(matches!(select_level(1e21, &p, m), Err(Error::Infeasible { .. })));
        assert!(select_level(0.0, &p, m).is_err());
    }

    #[test]
    fn small_k_values() {
        assert_eq!(compute_k(1, 1, 1), BigUint::from(28u32));
        assert_eq!(compute_k(2, 1, 1), BigUint::from(76u32));
        // 3 · (2^7 - 1) · (9·11 + 11) + 7 · (4·11 + 4)
        assert_eq!(compute_k(7, 3, 11), BigUint::from(3u32 * 127 * 110 + 7 * 48));
    }

    #[test]
    fn tile_accounting() {
        let p = QlaParams::default();
        let q0 = qubit_count(&chain(100, 8), 0, &p).unwrap();
        assert_eq!(q0.q, 200);
        let q2 = qubit_count(&chain(100, 8), 2, &p).unwrap();
        assert_eq!(q2.tiles, 400);
        assert_eq!(q2.physical_qubits, 400 * 2 * 441);
        assert_eq!(p.qubits_per_tile(2) / 2, 441);
    }

    #[test]
    fn fixed_point_levels() {
        let p = QlaParams::default();
        let c = PaperConstants::builtin();
        let e8 = estimate(&chain(100, 8), c.k0, c.sr(8), &p, FailureMode::PaperConstants).unwrap();
        assert_eq!(e8.level, 0);
        assert_eq!(e8.sr, 1);
        let e9 = estimate(&chain(100, 9), c.k0, c.sr(9), &p, FailureMode::PaperConstants).unwrap();
        assert_eq!(e9.level, 2);
        assert!(e9.iterations <= 4);
    }

    #[test]
    fn factoring_shapes() {
        let c = FactoringConstants::default();
        let b = factoring_resources(1024, FactoringVariant::Beauregard, &c).unwrap();
        assert_eq!(b.q, 2051);
        assert!(factoring_resources(1, FactoringVariant::Qcla, &c).is_err());
        assert_eq!(
            [5, 10, 15, 20, 25].map(decimal_digits),
            [1, 3, 4, 6, 7]
        );
    }

    #[test]
    fn json_config_overrides() {
        let p = QlaParams::from_json(r#"{"p0": 2e-7, "tCycleCost": 4}"#).unwrap();
        assert_eq!(p.p0, 2e-7);
        assert_eq!(p.t_cycle_cost, 4);
        assert_eq!(p.pth, 3.1e-6);
        assert!(QlaParams::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(QlaParams::from_json(r#"{"levelGateFailure": [1e-9, 1e-8, 1e-20]}"#).is_err());
    }

    #[test]
    fn wide_integers_serialize_as_strings() {
        let p = QlaParams::default();
        let e = estimate(&chain(100, 9), 5, 700, &p, FailureMode::PaperConstants).unwrap();
        let v = serde_json::to_value(&e).unwrap();
        assert!(v["K"].is_string());
        let back: ResourceEstimate = serde_json::from_value(v).unwrap();
        assert_eq!(back, e);
    }
}
