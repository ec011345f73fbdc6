//! Statevector simulation of the one-control-qubit phase-estimation loop.
//!
//! Step `j = 1..M` prepares the recycled control in `|+>`, applies the
//! controlled evolution for `2^(M-j) τ`, applies the feedback rotation built
//! from the bits already measured, closes with `H` and measures. The first
//! step yields the least significant bit.
//!
//! Phase convention: with `U = exp(-iHτ)` an eigenstate of energy `E` kicks
//! `exp(-2πi·2^m φ)` onto the control, where `φ = Eτ/2π mod 1`. A negative
//! ground energy therefore reads out as `φ` just below 1, and the feedback
//! angle that strips the known low bits is positive.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, FusedCircuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sk::{feedback_angle, sk_epsilon, SkCompiler};
use crate::state::{hadamard, StateVector};
use crate::tim::{build_hamiltonian, ground_state_from, GroundState, Spectrum, TimInstance};
use crate::trotter::{build_controlled_u, calibrate_k0, TrotterPlan, ORACLE_MAX_N};

/// Largest chain simulated in the exact and Trotterized modes.
pub const PE_MAX_N: usize = 8;
/// Largest chain simulated with every rotation compiled to gate words.
pub const PE_COMPILED_MAX_N: usize = 3;
/// Allowed drift of the state norm between measurements.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PeMode {
    /// Controlled `exp(-iH 2^m τ)` from the dense eigendecomposition.
    ExactU,
    /// Controlled Trotter circuits with exact `Rz` rotations.
    TrotterExactRz,
    /// Trotter circuits and feedback rotations compiled to `{H, T, S}` words.
    FullyCompiled,
}

impl std::str::FromStr for PeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exactU" | "exact" => Ok(PeMode::ExactU),
            "trotterExactRz" | "trotter" => Ok(PeMode::TrotterExactRz),
            "fullyCompiled" | "compiled" => Ok(PeMode::FullyCompiled),
            other => Err(Error::invalid(format!("unknown simulation mode `{other}`"))),
        }
    }
}

/// Simulation settings beyond the instance itself.
#[derive(Clone, Debug)]
pub struct PeConfig {
    pub mode: PeMode,
    /// Apply the semiclassical feedback rotations (on by default).
    pub feedback: bool,
    /// Trotter plan; calibrated on the instance's own chain when absent.
    pub plan: Option<TrotterPlan>,
    /// Per-rotation accuracy in compiled mode; `2^-M / k0` when absent.
    pub sk_epsilon: Option<f64>,
    pub compiler: Option<SkCompiler>,
}

impl PeConfig {
    pub fn new(mode: PeMode) -> Self {
        PeConfig {
            mode,
            feedback: true,
            plan: None,
            sk_epsilon: None,
            compiler: None,
        }
    }

    pub fn without_feedback(mut self) -> Self {
        self.feedback = false;
        self
    }

    pub fn with_plan(mut self, plan: TrotterPlan) -> Self {
        self.plan = Some(plan);
        self
    }

    pub fn with_sk_epsilon(mut self, eps: f64) -> Self {
        self.sk_epsilon = Some(eps);
        self
    }

    pub fn with_compiler(mut self, compiler: SkCompiler) -> Self {
        self.compiler = Some(compiler);
        self
    }
}

/// Outcome of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseEstimate {
    /// `x_1 … x_M`, most significant first.
    pub bits: Vec<u8>,
    /// `0.x_1 … x_M`.
    pub phi: f64,
    pub energy: f64,
    /// Squared overlap of the input with the ground space, when known.
    pub success_probability: Option<f64>,
}

impl PhaseEstimate {
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }
}

/// Binary fraction `0.b_1 b_2 …` of bits given most significant first.
pub fn bits_to_phi(bits: &[u8]) -> f64 {
    bits.iter()
        .enumerate()
        .map(|(i, &b)| f64::from(b) * (-(i as f64 + 1.0)).exp2())
        .sum()
}

/// `E = 2πφ/τ` on the branch `φ ≤ 1/2`, else `2π(φ-1)/τ`.
pub fn reconstruct_energy(phi: f64, tau: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::invalid(format!("phase {phi} outside [0, 1)")));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    let wrapped = if phi <= 0.5 { phi } else { phi - 1.0 };
    Ok(std::f64::consts::TAU * wrapped / tau)
}

/// Probability that phase estimation lands on the ground state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbability {
    pub probability: f64,
    /// The ground space has more than one state; `probability` is the
    /// projection onto all of it.
    pub degenerate: bool,
}

pub fn success_probability<T: Real>(
    input: &StateVector<T>,
    inst: &TimInstance<T>,
) -> Result<SuccessProbability> {
    let h = build_hamiltonian(inst)?;
    if input.qubits() != h.qubits() {
        return Err(Error::invalid(format!(
            "{}-qubit input for a {}-spin instance",
            input.qubits(),
            h.qubits()
        )));
    }
    let gs = ground_state_from(&Spectrum::of(&h)?);
    Ok(SuccessProbability {
        probability: gs.overlap(&input.to_dvector()).as_f64(),
        degenerate: gs.degenerate,
    })
}

enum Evolution<T: Real> {
    /// `exp(-iH 2^m τ)` indexed by `m`.
    Dense(Vec<DMatrix<Complex<T>>>),
    /// Controlled circuits indexed by `m`, single-qubit runs fused.
    Circuits(Vec<FusedCircuit<T>>),
}

/// A phase-estimation experiment prepared once and run for many seeds.
pub struct PhaseEstimator<T: Real> {
    m: u32,
    tau: f64,
    data_qubits: usize,
    width: usize,
    feedback: bool,
    evolution: Evolution<T>,
    /// Feedback rotation words keyed by the bit pattern of `β`, when compiled.
    feedback_words: Option<FeedbackWords>,
    ground: Option<GroundState<T>>,
    plan: Option<TrotterPlan>,
}

struct FeedbackWords {
    compiler: SkCompiler,
    epsilon: f64,
    cache: Mutex<HashMap<u64, Vec<GateKind>>>,
}

impl FeedbackWords {
    fn word(&self, beta: f64) -> Result<Vec<GateKind>> {
        let key = beta.to_bits();
        if let Some(w) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(w.clone());
        }
        let w = self.compiler.compile_rz(beta, self.epsilon)?.word.to_gate_kinds();
        self.cache.lock().expect("cache lock").insert(key, w.clone());
        Ok(w)
    }
}

impl<T: Real> PhaseEstimator<T> {
    pub fn new(inst: &TimInstance<T>, config: &PeConfig) -> Result<Self> {
        inst.validate()?;
        let cap = if config.mode == PeMode::FullyCompiled {
            PE_COMPILED_MAX_N
        } else {
            PE_MAX_N
        };
        if inst.sites() > cap {
            return Err(Error::Capacity {
                what: "phase-estimation chain length",
                requested: inst.sites(),
                limit: cap,
            });
        }
        let h = build_hamiltonian(inst)?;
        let spectrum = Spectrum::of(&h)?;
        let ground = Some(ground_state_from(&spectrum));
        let tau = inst.tau().as_f64();
        let n = inst.sites();
        if config.mode == PeMode::ExactU {
            let mut est = Self::from_spectrum(&spectrum, tau, inst.m, config.feedback)?;
            est.ground = ground;
            return Ok(est);
        }
        let f = inst.to_f64();
        let plan = match &config.plan {
            Some(p) => p.for_chain(n),
            None => calibrate_k0(f.m, &[n.clamp(2, ORACLE_MAX_N)], f.g, f.j)?.for_chain(n),
        };
        let mut circuits = (0..inst.m)
            .map(|m| build_controlled_u(m, &plan, &f))
            .collect::<Result<Vec<_>>>()?;
        let mut feedback_words = None;
        if config.mode == PeMode::FullyCompiled {
            let compiler = config.compiler.clone().unwrap_or_else(SkCompiler::standard);
            let epsilon = config
                .sk_epsilon
                .unwrap_or_else(|| sk_epsilon(inst.m, plan.k0));
            let mut cache: HashMap<u64, Vec<GateKind>> = HashMap::new();
            let mut compile = |angle: f64| -> Result<Vec<GateKind>> {
                if let Some(w) = cache.get(&angle.to_bits()) {
                    return Ok(w.clone());
                }
                let w = compiler.compile_rz(angle, epsilon)?.word.to_gate_kinds();
                cache.insert(angle.to_bits(), w.clone());
                Ok(w)
            };
            circuits = circuits
                .iter()
                .map(|c| c.substitute_rz(&mut compile))
                .collect::<Result<_>>()?;
            feedback_words = Some(FeedbackWords {
                compiler,
                epsilon,
                cache: Mutex::new(HashMap::new()),
            });
        }
        Ok(PhaseEstimator {
            m: inst.m,
            tau,
            data_qubits: n,
            width: circuits[0].qubits(),
            feedback: config.feedback,
            evolution: Evolution::Circuits(
                circuits.iter().map(Circuit::fuse).collect::<Result<_>>()?,
            ),
            feedback_words,
            ground,
            plan: Some(plan),
        })
    }

    /// Exact-evolution estimator for an arbitrary Hermitian operator, given
    /// by its spectrum, with time unit `tau`.
    pub fn from_spectrum(spectrum: &Spectrum<T>, tau: f64, m: u32, feedback: bool) -> Result<Self> {
        if m == 0 || m > 30 {
            return Err(Error::invalid("precision M must lie in 1..=30"));
        }
        if !(tau > 0.0) {
            return Err(Error::invalid("tau must be positive"));
        }
        let dim = spectrum.values.len();
        let data_qubits = dim.trailing_zeros() as usize;
        let unitaries = (0..m)
            .map(|e| spectrum.unitary(T::lit(tau * (e as f64).exp2())))
            .collect();
        Ok(PhaseEstimator {
            m,
            tau,
            data_qubits,
            width: data_qubits + 1,
            feedback,
            evolution: Evolution::Dense(unitaries),
            feedback_words: None,
            ground: None,
            plan: None,
        })
    }

    pub fn precision(&self) -> u32 {
        self.m
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Total simulated qubits (control, spins and cat ancillas).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn plan(&self) -> Option<&TrotterPlan> {
        self.plan.as_ref()
    }

    pub fn ground_energy(&self) -> Option<f64> {
        self.ground.as_ref().map(|g| g.energy.as_f64())
    }

    /// One run on `input` (a state of the spins alone).
    pub fn run(&self, input: &StateVector<T>, seed: u64) -> Result<PhaseEstimate> {
        if input.qubits() != self.data_qubits {
            return Err(Error::invalid(format!(
                "{}-qubit input for {} spins",
                input.qubits(),
                self.data_qubits
            )));
        }
        input.ensure_normalized(T::lit(NORM_TOLERANCE.max(T::tolerance().as_f64())))?;
        let ancillas = self.width - 1 - self.data_qubits;
        let mut state = StateVector::zero(1)
            .kron(input)
            .kron(&StateVector::zero(ancillas));
        let h = hadamard::<T>();
        // Bits in the order produced: x_M first.
        let mut produced: Vec<u8> = Vec::with_capacity(self.m as usize);
        for j in 1..=self.m as usize {
            let exponent = self.m as usize - j;
            state.apply_single(0, &h)?;
            self.controlled_evolution(&mut state, exponent)?;
            if self.feedback {
                let beta = feedback_angle(j, &produced)?;
                self.apply_feedback(&mut state, beta)?;
            }
            state.apply_single(0, &h)?;
            let drift = (state.norm_sqr().as_f64() - 1.0).abs();
            if drift > NORM_TOLERANCE.max(T::tolerance().as_f64()) {
                return Err(Error::invalid(format!(
                    "state norm drifted by {drift:.3e} at step {j}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let bit = state.measure(0, rng.random())?;
            if bit == 1 {
                state.apply_x(0)?;
            }
            produced.push(bit);
        }
        let bits: Vec<u8> = produced.iter().rev().copied().collect();
        let phi = bits_to_phi(&bits);
        Ok(PhaseEstimate {
            energy: reconstruct_energy(phi, self.tau)?,
            phi,
            bits,
            success_probability: self
                .ground
                .as_ref()
                .map(|g| g.overlap(&input.to_dvector()).as_f64()),
        })
    }

    /// Independent runs, one per seed, in parallel.
    pub fn run_shots(&self, input: &StateVector<T>, seeds: &[u64]) -> Result<Vec<PhaseEstimate>>
    where
        T: Send + Sync,
    {
        seeds.par_iter().map(|&s| self.run(input, s)).collect()
    }

    fn controlled_evolution(&self, state: &mut StateVector<T>, exponent: usize) -> Result<()> {
        match &self.evolution {
            Evolution::Dense(us) => {
                let dim = 1usize << self.data_qubits;
                let amps = state.amplitudes_mut();
                let upper = DVector::from_column_slice(&amps[dim..2 * dim]);
                let evolved = &us[exponent] * upper;
                amps[dim..2 * dim].copy_from_slice(evolved.as_slice());
                Ok(())
            }
            Evolution::Circuits(cs) => cs[exponent].apply(state),
        }
    }

    fn apply_feedback(&self, state: &mut StateVector<T>, beta: f64) -> Result<()> {
        if beta == 0.0 {
            return Ok(());
        }
        match &self.feedback_words {
            None => state.apply_rz(0, T::lit(beta)),
            Some(fw) => {
                let mut c = Circuit::new(self.width);
                for kind in fw.word(beta)? {
                    c.push(Gate::single(kind, 0))?;
                }
                c.apply_unitary(state)
            }
        }
    }
}

/// Builds an estimator for `inst` and runs it once.
pub fn run_phase_estimation<T: Real>(
    inst: &TimInstance<T>,
    mode: PeMode,
    input: &StateVector<T>,
    seed: u64,
) -> Result<PhaseEstimate> {
    PhaseEstimator::new(inst, &PeConfig::new(mode))?.run(input, seed)
}

/// Empirical distribution of bit strings.
pub fn bit_distribution(estimates: &[PhaseEstimate]) -> BTreeMap<String, f64> {
    let mut d = BTreeMap::new();
    let w = 1.0 / estimates.len().max(1) as f64;
    for e in estimates {
        *d.entry(e.bit_string()).or_insert(0.0) += w;
    }
    d
}

/// Total-variation distance between two distributions over bit strings.
pub fn total_variation(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

/// One line of the shot log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub seed: u64,
    pub bits: String,
    pub phi: f64,
    pub energy: f64,
    /// `|E - E_g|` against the dense oracle.
    pub abs_error: f64,
}

impl ShotRecord {
    pub fn new(seed: u64, estimate: &PhaseEstimate, exact_energy: f64) -> Self {
        ShotRecord {
            seed,
            bits: estimate.bit_string(),
            phi: estimate.phi,
            energy: estimate.energy,
            abs_error: (estimate.energy - exact_energy).abs(),
        }
    }
}

/// Half-width `π / (τ 2^M)` of one phase bin in energy units.
pub fn energy_resolution(tau: f64, m: u32) -> f64 {
    std::f64::consts::PI / (tau * (m as f64).exp2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tim::DenseOperator;

    fn toy(energies: &[f64]) -> Spectrum<f64> {
        let d = energies.len();
        let m = DMatrix::from_fn(d, d, |r, c| {
            Complex::new(if r == c { energies[r] } else { 0.0 }, 0.0)
        });
        Spectrum::of(&DenseOperator::new(m).unwrap()).unwrap()
    }

    #[test]
    fn dyadic_phase_is_exact() {
        // φ = Eτ/2π = 5/8 with τ = 1
        let e = std::f64::consts::TAU * 5.0 / 8.0;
        let est = PhaseEstimator::from_spectrum(&toy(&[e, 0.3]), 1.0, 3, true).unwrap();
        let input = StateVector::<f64>::basis(1, 0);
        for seed in 0..20 {
            let r = est.run(&input, seed).unwrap();
            assert_eq!(r.bit_string(), "101");
            assert_eq!(r.phi, 0.625);
        }
    }

    #[test]
    fn zero_phase_reads_zero() {
        let est = PhaseEstimator::from_spectrum(&toy(&[0.0, 1.0]), 1.0, 3, true).unwrap();
        let r = est.run(&StateVector::<f64>::basis(1, 0), 7).unwrap();
        assert_eq!(r.bit_string(), "000");
        assert_eq!(r.energy, 0.0);
    }

    #[test]
    fn feedback_off_loses_certainty() {
        let e = std::f64::consts::TAU * 5.0 / 8.0;
        let est = PhaseEstimator::from_spectrum(&toy(&[e, 0.3]), 1.0, 3, false).unwrap();
        let input = StateVector::<f64>::basis(1, 0);
        let shots: Vec<_> = (0..400).map(|s| est.run(&input, s).unwrap()).collect();
        let p = bit_distribution(&shots).get("101").copied().unwrap_or(0.0);
        // Unassisted, x_2 is a fair coin and x_1 = 1 comes out with
        // probability sin²(5π/8), so 101 shows up about 43% of the time.
        let expected = 0.5 * (5.0 * std::f64::consts::PI / 8.0).sin().powi(2);
        assert!((p - expected).abs() < 0.08, "p(101) = {p}, expected {expected}");
    }

    #[test]
    fn energy_unwrap() {
        assert_eq!(reconstruct_energy(0.0, 1.0).unwrap(), 0.0);
        assert!((reconstruct_energy(0.25, 1.0).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let e = reconstruct_energy(0.9822, 0.05).unwrap();
        assert!((e - std::f64::consts::TAU * -0.0178 / 0.05).abs() < 1e-9);
        assert!(reconstruct_energy(1.0, 1.0).is_err());
        assert!(reconstruct_energy(-0.1, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let inst = TimInstance::<f64>::new(2, 4).unwrap();
        let est = PhaseEstimator::new(&inst, &PeConfig::new(PeMode::ExactU)).unwrap();
        let mut bad = StateVector::<f64>::basis(2, 0);
        bad.amplitudes_mut()[1] = Complex::new(1.0, 0.0);
        assert!(est.run(&bad, 0).is_err());
        assert!(est.run(&StateVector::basis(3, 0), 0).is_err());
        let big = TimInstance::<f64>::new(9, 4).unwrap();
        assert!(matches!(
            PhaseEstimator::new(&big, &PeConfig::new(PeMode::ExactU)),
            Err(Error::Capacity { .. })
        ));
        let four = TimInstance::<f64>::new(4, 4).unwrap();
        assert!(matches!(
            PhaseEstimator::new(&four, &PeConfig::new(PeMode::FullyCompiled)),
            Err(Error::Capacity { .. })
        ));
    }
}
