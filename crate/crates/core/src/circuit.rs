//! Gate-level intermediate representation over the fault-tolerant gate set.
//!
//! A [`Circuit`] is an ordered gate list on `qubits` wires plus a derived
//! ASAP layering. `Rz` is a pre-compilation placeholder: the Solovay-Kitaev
//! pass replaces it with `{H, T, S, ...}` words, after which the circuit is
//! *fault-tolerant final*.
//!
//! Classical feedback is modelled with numbered classical bits. A measurement
//! may write its outcome to a bit (`out=`), and any gate may be conditioned on
//! a bit being 1 (`cond=`). The bit values live in a [`ClassicalRegister`]
//! owned by whoever executes the circuit.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{cis, Real};
use crate::state::{hadamard, Mat2, StateVector};

/// Circuits larger than this are not expanded into dense unitaries.
pub const UNITARY_QUBIT_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    X,
    Z,
    H,
    T,
    S,
    Tdg,
    Sdg,
    Cnot,
    MeasureZ,
    /// `diag(e^{-i a/2}, e^{i a/2})`, to be compiled away.
    Rz(f64),
    PrepZero,
    /// Resets the wire and prepares `T|+>`, the magic-state ancilla of a
    /// fault-tolerant T gate.
    PrepTPlus,
}

impl GateKind {
    pub fn mnemonic(&self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::T => "T",
            GateKind::S => "S",
            GateKind::Tdg => "TDG",
            GateKind::Sdg => "SDG",
            GateKind::Cnot => "CNOT",
            GateKind::MeasureZ => "MEASZ",
            GateKind::Rz(_) => "RZ",
            GateKind::PrepZero => "PREP0",
            GateKind::PrepTPlus => "PREPT",
        }
    }

    pub fn arity(&self) -> usize {
        if matches!(self, GateKind::Cnot) {
            2
        } else {
            1
        }
    }

    pub fn is_t_like(&self) -> bool {
        matches!(self, GateKind::T | GateKind::Tdg)
    }

    /// True for gates with a fixed 2x2 unitary action.
    pub fn is_unitary(&self) -> bool {
        !matches!(
            self,
            GateKind::MeasureZ | GateKind::PrepZero | GateKind::PrepTPlus
        )
    }

    /// Single-qubit diagonal entries `(d0, d1)` for the diagonal gates.
    fn diagonal<T: Real>(&self) -> Option<(Complex<T>, Complex<T>)> {
        let one = Complex::new(T::one(), T::zero());
        let q = T::FRAC_PI_4();
        let h = T::FRAC_PI_2();
        match *self {
            GateKind::Z => Some((one, -one)),
            GateKind::T => Some((one, cis(q))),
            GateKind::Tdg => Some((one, cis(-q))),
            GateKind::S => Some((one, cis(h))),
            GateKind::Sdg => Some((one, cis(-h))),
            GateKind::Rz(a) => {
                let half = T::lit(a / 2.0);
                Some((cis(-half), cis(half)))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    /// Target, or control for CNOT.
    pub q0: usize,
    /// CNOT target.
    pub q1: Option<usize>,
    /// Classical bit that must read 1 for the gate to fire.
    pub condition: Option<usize>,
    /// Classical bit receiving a measurement outcome.
    pub output: Option<usize>,
}

impl Gate {
    pub fn single(kind: GateKind, q: usize) -> Self {
        Gate {
            kind,
            q0: q,
            q1: None,
            condition: None,
            output: None,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cnot,
            q0: control,
            q1: Some(target),
            condition: None,
            output: None,
        }
    }

    pub fn rz(q: usize, angle: f64) -> Self {
        Gate::single(GateKind::Rz(angle), q)
    }

    pub fn measure(q: usize, bit: usize) -> Self {
        Gate {
            output: Some(bit),
            ..Gate::single(GateKind::MeasureZ, q)
        }
    }

    pub fn when(mut self, bit: usize) -> Self {
        self.condition = Some(bit);
        self
    }

    pub fn wires(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.q0).chain(self.q1)
    }

    fn validate(&self, qubits: usize) -> Result<()> {
        let expected = self.kind.arity();
        let got = 1 + usize::from(self.q1.is_some());
        if expected != got {
            return Err(Error::invalid(format!(
                "{} takes {expected} qubit(s), got {got}",
                self.kind.mnemonic()
            )));
        }
        for q in self.wires() {
            if q >= qubits {
                return Err(Error::invalid(format!(
                    "{} acts on qubit {q} of a {qubits}-qubit circuit",
                    self.kind.mnemonic()
                )));
            }
        }
        if self.q1 == Some(self.q0) {
            return Err(Error::invalid("CNOT control and target coincide"));
        }
        if self.output.is_some() && self.kind != GateKind::MeasureZ {
            return Err(Error::invalid("only MEASZ may write a classical bit"));
        }
        if let GateKind::Rz(a) = self.kind {
            if !a.is_finite() {
                return Err(Error::invalid("Rz angle must be finite"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.mnemonic(), self.q0)?;
        if let Some(t) = self.q1 {
            write!(f, " {t}")?;
        }
        if let GateKind::Rz(a) = self.kind {
            // Debug formatting of f64 is shortest-round-trip.
            write!(f, " {a:?}")?;
        }
        if let Some(c) = self.condition {
            write!(f, " cond=c{c}")?;
        }
        if let Some(o) = self.output {
            write!(f, " out=c{o}")?;
        }
        Ok(())
    }
}

/// Per-kind totals of a circuit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GateCounts {
    pub x: usize,
    pub z: usize,
    pub h: usize,
    pub t: usize,
    pub s: usize,
    pub tdg: usize,
    pub sdg: usize,
    pub cnot: usize,
    pub measure: usize,
    pub rz: usize,
    pub prep_zero: usize,
    pub prep_t_plus: usize,
    /// ASAP layer count.
    pub depth: usize,
    /// `T` plus `Tdg`.
    pub t_count: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.x
            + self.z
            + self.h
            + self.t
            + self.s
            + self.tdg
            + self.sdg
            + self.cnot
            + self.measure
            + self.rz
            + self.prep_zero
            + self.prep_t_plus
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
    layers: Vec<Vec<usize>>,
}

impl Circuit {
    pub fn new(qubits: usize) -> Self {
        Circuit {
            qubits,
            gates: Vec::new(),
            layers: Vec::new(),
        }
    }

    /// Validates every gate against the wire count.
    pub fn from_gates(qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Circuit::new(qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Layers from the last [`Circuit::schedule`]; empty if unscheduled.
    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.qubits)?;
        self.gates.push(gate);
        self.layers.clear();
        Ok(())
    }

    /// Appends `other`, relabelling its wire `i` to `map[i]`.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<()> {
        if map.len() != other.qubits {
            return Err(Error::invalid("wire map length differs from circuit width"));
        }
        for g in &other.gates {
            let mut g = g.clone();
            g.q0 = map[g.q0];
            g.q1 = g.q1.map(|q| map[q]);
            self.push(g)?;
        }
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        let id: Vec<usize> = (0..other.qubits).collect();
        self.append_mapped(other, &id)
    }

    /// Gate list reversed with every gate inverted; unitary circuits only.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut out = Circuit::new(self.qubits);
        for g in self.gates.iter().rev() {
            let kind = match g.kind {
                GateKind::T => GateKind::Tdg,
                GateKind::Tdg => GateKind::T,
                GateKind::S => GateKind::Sdg,
                GateKind::Sdg => GateKind::S,
                GateKind::Rz(a) => GateKind::Rz(-a),
                k if k.is_unitary() => k,
                k => {
                    return Err(Error::invalid(format!(
                        "{} has no inverse",
                        k.mnemonic()
                    )))
                }
            };
            out.push(Gate { kind, ..g.clone() })?;
        }
        Ok(out)
    }

    /// Greedy earliest-layer schedule: gates are taken in list order and
    /// placed in the first layer after every wire and every condition bit
    /// they depend on has settled.
    pub fn schedule(&self) -> Result<Circuit> {
        let mut c = self.clone();
        c.layers = c.layering(|_| 1).map(|(_, l)| l)?;
        Ok(c)
    }

    pub fn depth(&self) -> usize {
        if self.layers.is_empty() && !self.gates.is_empty() {
            self.layering(|_| 1).map(|(d, _)| d as usize).unwrap_or(0)
        } else {
            self.layers.len()
        }
    }

    /// Scheduled length when each gate occupies `cost(kind)` cycles.
    pub fn weighted_depth(&self, cost: impl Fn(&GateKind) -> u64) -> Result<u64> {
        self.layering(cost).map(|(d, _)| d)
    }

    /// Scheduled length when every `Rz` placeholder takes `sr` cycles and all
    /// other gates take one.
    pub fn depth_with_rz_cycles(&self, sr: u64) -> Result<u64> {
        self.weighted_depth(|k| if matches!(k, GateKind::Rz(_)) { sr } else { 1 })
    }

    fn layering(&self, cost: impl Fn(&GateKind) -> u64) -> Result<(u64, Vec<Vec<usize>>)> {
        let mut wire_free = vec![0u64; self.qubits];
        let mut bit_ready: std::collections::HashMap<usize, u64> = Default::default();
        let mut layers: Vec<Vec<usize>> = Vec::new();
        let mut end = 0u64;
        for (i, g) in self.gates.iter().enumerate() {
            g.validate(self.qubits)?;
            let mut start = g.wires().map(|q| wire_free[q]).max().unwrap_or(0);
            if let Some(c) = g.condition {
                start = start.max(bit_ready.get(&c).copied().unwrap_or(0));
            }
            let finish = start + cost(&g.kind).max(1);
            for q in g.wires() {
                wire_free[q] = finish;
            }
            if let Some(o) = g.output {
                bit_ready.insert(o, finish);
            }
            let slot = start as usize;
            if layers.len() <= slot {
                layers.resize(slot + 1, Vec::new());
            }
            layers[slot].push(i);
            end = end.max(finish);
        }
        layers.retain(|l| !l.is_empty());
        Ok((end, layers))
    }

    pub fn count_gates(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            match g.kind {
                GateKind::X => c.x += 1,
                GateKind::Z => c.z += 1,
                GateKind::H => c.h += 1,
                GateKind::T => c.t += 1,
                GateKind::S => c.s += 1,
                GateKind::Tdg => c.tdg += 1,
                GateKind::Sdg => c.sdg += 1,
                GateKind::Cnot => c.cnot += 1,
                GateKind::MeasureZ => c.measure += 1,
                GateKind::Rz(_) => c.rz += 1,
                GateKind::PrepZero => c.prep_zero += 1,
                GateKind::PrepTPlus => c.prep_t_plus += 1,
            }
        }
        c.t_count = c.t + c.tdg;
        c.depth = self.depth();
        c
    }

    /// No `Rz` placeholder remains.
    pub fn is_fault_tolerant_final(&self) -> bool {
        !self.gates.iter().any(|g| matches!(g.kind, GateKind::Rz(_)))
    }

    /// Distinct `Rz` angles, in first-appearance order.
    pub fn rz_angles(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for g in &self.gates {
            if let GateKind::Rz(a) = g.kind {
                if !out.iter().any(|&b| b == a) {
                    out.push(a);
                }
            }
        }
        out
    }

    /// Replaces each `Rz(a)` on wire `q` by the word `compile(a)` on `q`,
    /// keeping any classical condition on every emitted gate.
    pub fn substitute_rz(
        &self,
        mut compile: impl FnMut(f64) -> Result<Vec<GateKind>>,
    ) -> Result<Circuit> {
        let mut out = Circuit::new(self.qubits);
        for g in &self.gates {
            if let GateKind::Rz(a) = g.kind {
                for kind in compile(a)? {
                    if kind.arity() != 1 || !kind.is_unitary() {
                        return Err(Error::invalid(
                            "compiled rotation words must be single-qubit unitaries",
                        ));
                    }
                    out.push(Gate {
                        kind,
                        ..g.clone()
                    })?;
                }
            } else {
                out.push(g.clone())?;
            }
        }
        Ok(out)
    }

    /// Runs the circuit on `state`, drawing measurement outcomes from `rng`.
    pub fn execute<T: Real, R: Rng + ?Sized>(
        &self,
        state: &mut StateVector<T>,
        creg: &mut ClassicalRegister,
        rng: &mut R,
    ) -> Result<()> {
        if state.qubits() != self.qubits {
            return Err(Error::invalid(format!(
                "{}-qubit circuit applied to a {}-qubit state",
                self.qubits,
                state.qubits()
            )));
        }
        for g in &self.gates {
            if let Some(c) = g.condition {
                match creg.get(c) {
                    Some(1) => {}
                    Some(_) => continue,
                    None => {
                        return Err(Error::invalid(format!(
                            "condition reads bit c{c} before it is written"
                        )))
                    }
                }
            }
            match g.kind {
                GateKind::MeasureZ => {
                    let bit = state.measure(g.q0, rng.random())?;
                    if let Some(o) = g.output {
                        creg.set(o, bit);
                    }
                }
                GateKind::PrepZero | GateKind::PrepTPlus => {
                    if state.measure(g.q0, rng.random())? == 1 {
                        state.apply_x(g.q0)?;
                    }
                    if g.kind == GateKind::PrepTPlus {
                        state.apply_single(g.q0, &hadamard())?;
                        apply_unitary_gate(state, &Gate::single(GateKind::T, g.q0))?;
                    }
                }
                _ => apply_unitary_gate(state, g)?,
            }
        }
        Ok(())
    }

    /// Applies a measurement-free, unconditioned circuit.
    pub fn apply_unitary<T: Real>(&self, state: &mut StateVector<T>) -> Result<()> {
        if state.qubits() != self.qubits {
            return Err(Error::invalid("state width differs from circuit width"));
        }
        for g in &self.gates {
            if !g.kind.is_unitary() || g.condition.is_some() {
                return Err(Error::invalid(format!(
                    "{g} is not a unitary operation"
                )));
            }
            apply_unitary_gate(state, g)?;
        }
        Ok(())
    }

    /// Dense matrix of a unitary circuit.
    pub fn unitary<T: Real>(&self) -> Result<DMatrix<Complex<T>>> {
        if self.qubits > UNITARY_QUBIT_CAP {
            return Err(Error::Capacity {
                what: "dense circuit unitary qubit count",
                requested: self.qubits,
                limit: UNITARY_QUBIT_CAP,
            });
        }
        let dim = 1usize << self.qubits;
        let mut m = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
        for col in 0..dim {
            let mut s = StateVector::<T>::basis(self.qubits, col);
            self.apply_unitary(&mut s)?;
            for (row, a) in s.amplitudes().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        Ok(m)
    }

    /// Line-oriented text form: a `qubits n` header, then one gate per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.qubits);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Circuit> {
        text.parse()
    }
}

fn apply_unitary_gate<T: Real>(state: &mut StateVector<T>, g: &Gate) -> Result<()> {
    match g.kind {
        GateKind::X => state.apply_x(g.q0),
        GateKind::H => state.apply_single(g.q0, &hadamard()),
        GateKind::Cnot => state.apply_cnot(g.q0, g.q1.expect("validated CNOT")),
        k => {
            let (d0, d1) = k
                .diagonal()
                .ok_or_else(|| Error::invalid(format!("{} is not unitary", k.mnemonic())))?;
            state.apply_diagonal(g.q0, d0, d1)
        }
    }
}

/// 2×2 matrix of a single-qubit unitary gate.
fn single_matrix<T: Real>(kind: GateKind) -> Result<Mat2<T>> {
    let z = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    match kind {
        GateKind::X => Ok([[z, one], [one, z]]),
        GateKind::H => Ok(hadamard()),
        k => k
            .diagonal()
            .map(|(d0, d1)| [[d0, z], [z, d1]])
            .ok_or_else(|| Error::invalid(format!("{} is not a single-qubit unitary", k.mnemonic()))),
    }
}

fn mat2_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut r = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

#[derive(Clone, Debug)]
enum FusedOp<T: Real> {
    Single(usize, Mat2<T>),
    Cnot(usize, usize),
}

/// A unitary circuit in which every run of single-qubit gates on one wire
/// (uninterrupted by a CNOT touching that wire) is multiplied into a single
/// 2×2 matrix. Compiled rotation words of hundreds of gates then cost one
/// pass over the state.
#[derive(Clone, Debug)]
pub struct FusedCircuit<T: Real> {
    qubits: usize,
    ops: Vec<FusedOp<T>>,
}

impl<T: Real> FusedCircuit<T> {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn apply(&self, state: &mut StateVector<T>) -> Result<()> {
        if state.qubits() != self.qubits {
            return Err(Error::invalid("state width differs from circuit width"));
        }
        for op in &self.ops {
            match op {
                FusedOp::Single(q, m) => state.apply_single(*q, m)?,
                FusedOp::Cnot(c, t) => state.apply_cnot(*c, *t)?,
            }
        }
        Ok(())
    }
}

impl Circuit {
    /// Fused form of a measurement-free, unconditioned circuit.
    pub fn fuse<T: Real>(&self) -> Result<FusedCircuit<T>> {
        let mut pending: Vec<Option<Mat2<T>>> = vec![None; self.qubits];
        let mut ops = Vec::new();
        let flush = |q: usize, pending: &mut Vec<Option<Mat2<T>>>, ops: &mut Vec<FusedOp<T>>| {
            if let Some(m) = pending[q].take() {
                ops.push(FusedOp::Single(q, m));
            }
        };
        for g in &self.gates {
            if !g.kind.is_unitary() || g.condition.is_some() {
                return Err(Error::invalid(format!("{g} is not a unitary operation")));
            }
            if g.kind == GateKind::Cnot {
                let t = g.q1.expect("validated CNOT");
                flush(g.q0, &mut pending, &mut ops);
                flush(t, &mut pending, &mut ops);
                ops.push(FusedOp::Cnot(g.q0, t));
            } else {
                let m = single_matrix::<T>(g.kind)?;
                pending[g.q0] = Some(match &pending[g.q0] {
                    Some(p) => mat2_mul(&m, p),
                    None => m,
                });
            }
        }
        for q in 0..self.qubits {
            flush(q, &mut pending, &mut ops);
        }
        Ok(FusedCircuit {
            qubits: self.qubits,
            ops,
        })
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let mut tokens = line.split_whitespace();
            let head = tokens.next().expect("non-empty line");
            let Some(c) = circuit.as_mut() else {
                if head != "qubits" {
                    return Err(bad("expected `qubits <n>` header".into()));
                }
                let n = tokens
                    .next()
                    .ok_or_else(|| bad("missing qubit count".into()))?
                    .parse::<usize>()
                    .map_err(|e| bad(format!("qubit count: {e}")))?;
                circuit = Some(Circuit::new(n));
                continue;
            };
            let rest: Vec<&str> = tokens.collect();
            let gate = parse_gate(head, &rest).map_err(bad)?;
            c.push(gate).map_err(|e| bad(e.to_string()))?;
        }
        circuit.ok_or(Error::Parse {
            line: 1,
            message: "empty circuit text".into(),
        })
    }
}

fn parse_gate(head: &str, rest: &[&str]) -> std::result::Result<Gate, String> {
    let kind = match head {
        "X" => GateKind::X,
        "Z" => GateKind::Z,
        "H" => GateKind::H,
        "T" => GateKind::T,
        "S" => GateKind::S,
        "TDG" => GateKind::Tdg,
        "SDG" => GateKind::Sdg,
        "CNOT" => GateKind::Cnot,
        "MEASZ" => GateKind::MeasureZ,
        "RZ" => GateKind::Rz(0.0),
        "PREP0" => GateKind::PrepZero,
        "PREPT" => GateKind::PrepTPlus,
        other => return Err(format!("unknown gate `{other}`")),
    };
    let mut positional = Vec::new();
    let mut condition = None;
    let mut output = None;
    let bit = |v: &str| -> std::result::Result<usize, String> {
        v.strip_prefix('c')
            .ok_or_else(|| format!("bit name `{v}` must look like c<index>"))?
            .parse()
            .map_err(|e| format!("bit index in `{v}`: {e}"))
    };
    for tok in rest {
        if let Some(v) = tok.strip_prefix("cond=") {
            condition = Some(bit(v)?);
        } else if let Some(v) = tok.strip_prefix("out=") {
            output = Some(bit(v)?);
        } else {
            positional.push(*tok);
        }
    }
    let wires = kind.arity();
    let angles = usize::from(matches!(kind, GateKind::Rz(_)));
    if positional.len() != wires + angles {
        return Err(format!(
            "{head} expects {} positional field(s), found {}",
            wires + angles,
            positional.len()
        ));
    }
    let q = |s: &str| s.parse::<usize>().map_err(|e| format!("qubit `{s}`: {e}"));
    let q0 = q(positional[0])?;
    let q1 = if wires == 2 { Some(q(positional[1])?) } else { None };
    let kind = if angles == 1 {
        let a = positional[wires]
            .parse::<f64>()
            .map_err(|e| format!("angle `{}`: {e}", positional[wires]))?;
        GateKind::Rz(a)
    } else {
        kind
    };
    Ok(Gate {
        kind,
        q0,
        q1,
        condition,
        output,
    })
}

/// Classical bits written by measurements; unwritten bits read as `None`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassicalRegister {
    bits: Vec<Option<u8>>,
}

impl ClassicalRegister {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.bits.get(i).copied().flatten()
    }

    pub fn set(&mut self, i: usize, value: u8) {
        if self.bits.len() <= i {
            self.bits.resize(i + 1, None);
        }
        self.bits[i] = Some(value);
    }
}

/// Linear-chain cat-state preparation `root -> c1 -> c2 -> ...`.
///
/// The circuit has `n` wires; wire `root` is the chain head and the others
/// follow in increasing order. With the root holding `|+>` and the rest
/// `|0>`, the output is `(|0...0> + |1...1>)/sqrt(2)`.
pub fn build_cat_state(n: usize, root: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::invalid("cat state needs at least one qubit"));
    }
    if root >= n {
        return Err(Error::invalid(format!("root {root} outside {n} wires")));
    }
    let chain: Vec<usize> = std::iter::once(root)
        .chain((0..n).filter(|&q| q != root))
        .collect();
    let mut c = Circuit::new(n);
    for w in chain.windows(2) {
        c.push(Gate::cnot(w[0], w[1]))?;
    }
    Ok(c)
}
