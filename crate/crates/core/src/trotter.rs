//! Controlled Trotter circuits, Trotter-error measurement and `k0` calibration.
//!
//! With `H = H_X + H_ZZ`, the controlled evolution for exponent `m` is the
//! symmetric (Strang) product with `k = 2^m k0` steps of length
//! `θ = 2^m τ / k = τ / k0`:
//!
//! ```text
//! U_x(θ) [U_zz(2θ) U_x(2θ)]^(k-1) U_zz(2θ) U_x(θ)
//! ```
//!
//! where adjacent half-steps of the field term have been merged.
//!
//! Circuit layout on `2N` wires: wire 0 is the phase-estimation control and
//! doubles as the cat-state root, wires `1..=N` hold the spins, and wires
//! `N+1..2N-1` are the remaining cat ancillas. Spin `j` is driven by cat wire
//! [`Layout::cat`]`(j)`. The control is fanned out once at the start and
//! folded back once at the end, so every rotation layer acts on all spins in
//! parallel.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_cat_state, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::tim::TimInstance;

/// Largest chain handled by the matrix-free error oracle.
pub const ORACLE_MAX_N: usize = 10;

/// Wire assignment of the controlled-evolution circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
}

impl Layout {
    pub fn width(&self) -> usize {
        2 * self.n
    }

    pub fn control(&self) -> usize {
        0
    }

    pub fn data(&self, j: usize) -> usize {
        1 + j
    }

    pub fn cat(&self, j: usize) -> usize {
        if j == 0 {
            0
        } else {
            self.n + j
        }
    }

    /// Cat wires in chain order, starting from the control.
    fn cat_chain(&self) -> Vec<usize> {
        (0..self.n).map(|j| self.cat(j)).collect()
    }
}

fn fan(layout: Layout, c: &mut Circuit) -> Result<()> {
    let cat = build_cat_state(layout.n, 0)?;
    c.append_mapped(&cat, &layout.cat_chain())
}

fn unfan(layout: Layout, c: &mut Circuit) -> Result<()> {
    let cat = build_cat_state(layout.n, 0)?.inverse()?;
    c.append_mapped(&cat, &layout.cat_chain())
}

/// Controlled `Rx(φ)` on every spin, assuming the cat register is fanned out.
fn push_ux_body(layout: Layout, phi: f64, c: &mut Circuit) -> Result<()> {
    let n = layout.n;
    let h = |q| Gate::single(GateKind::H, q);
    for j in 0..n {
        c.push(h(layout.data(j)))?;
    }
    for j in 0..n {
        c.push(Gate::rz(layout.data(j), phi / 2.0))?;
    }
    for j in 0..n {
        c.push(Gate::cnot(layout.cat(j), layout.data(j)))?;
    }
    for j in 0..n {
        c.push(Gate::rz(layout.data(j), -phi / 2.0))?;
    }
    for j in 0..n {
        c.push(Gate::cnot(layout.cat(j), layout.data(j)))?;
    }
    for j in 0..n {
        c.push(h(layout.data(j)))?;
    }
    Ok(())
}

/// Controlled `exp(-i φ/2 Z_j Z_{j+1})` on every bond, even bonds first.
fn push_uzz_body(layout: Layout, phi: f64, c: &mut Circuit) -> Result<()> {
    let n = layout.n;
    for parity in [0, 1] {
        let bonds: Vec<usize> = (parity..n.saturating_sub(1)).step_by(2).collect();
        let (a, b) = (|j| layout.data(j), |j| layout.data(j + 1));
        for &j in &bonds {
            c.push(Gate::cnot(a(j), b(j)))?;
        }
        for &j in &bonds {
            c.push(Gate::rz(b(j), phi / 2.0))?;
        }
        for &j in &bonds {
            c.push(Gate::cnot(layout.cat(j + 1), b(j)))?;
        }
        for &j in &bonds {
            c.push(Gate::rz(b(j), -phi / 2.0))?;
        }
        for &j in &bonds {
            c.push(Gate::cnot(layout.cat(j + 1), b(j)))?;
        }
        for &j in &bonds {
            c.push(Gate::cnot(a(j), b(j)))?;
        }
    }
    Ok(())
}

/// Controlled `U_x(θ) = Π_j exp(-i θ/2 X_j)` on `n` spins, including the cat
/// fan-out and fan-in, on the [`Layout`] wires.
pub fn build_ux(theta: f64, n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::invalid("U_x needs at least one spin"));
    }
    let layout = Layout { n };
    let mut c = Circuit::new(layout.width());
    fan(layout, &mut c)?;
    push_ux_body(layout, theta, &mut c)?;
    unfan(layout, &mut c)?;
    Ok(c)
}

/// Controlled `U_zz(φ) = Π_j exp(-i φ/2 Z_j Z_{j+1})` over the open-chain
/// bonds. `U_zz(2θ)` is therefore `exp(-i θ Σ Z_j Z_{j+1})`.
pub fn build_uzz(two_theta: f64, n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::invalid("U_zz needs at least two spins"));
    }
    let layout = Layout { n };
    let mut c = Circuit::new(layout.width());
    fan(layout, &mut c)?;
    push_uzz_body(layout, two_theta, &mut c)?;
    unfan(layout, &mut c)?;
    Ok(c)
}

/// Uncontrolled-rotation bodies without cat handling, for depth accounting.
pub fn ux_body(theta: f64, n: usize) -> Result<Circuit> {
    let layout = Layout { n };
    let mut c = Circuit::new(layout.width());
    push_ux_body(layout, theta, &mut c)?;
    Ok(c)
}

pub fn uzz_body(two_theta: f64, n: usize) -> Result<Circuit> {
    let layout = Layout { n };
    let mut c = Circuit::new(layout.width());
    push_uzz_body(layout, two_theta, &mut c)?;
    Ok(c)
}

/// How `k0` was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum K0Rule {
    /// Injected directly (golden-constant mode).
    Fixed,
    /// `k0(N) = max(1, ceil(prefactor · N^fit_exponent))`.
    Calibrated { prefactor: f64 },
}

/// Result of Trotter calibration for a precision `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrotterPlan {
    pub k0: u64,
    pub fit_exponent: f64,
    /// Worst measured error at `m = 0` over the calibration chains.
    pub epsilon_t: f64,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "NFitRange")]
    pub n_fit_range: Vec<usize>,
    /// Smallest passing `k` for each chain of `n_fit_range`.
    pub measured_k0: Vec<u64>,
    pub rule: K0Rule,
}

impl TrotterPlan {
    pub fn fixed(k0: u64, m: u32) -> Result<Self> {
        if k0 == 0 {
            return Err(Error::invalid("k0 must be positive"));
        }
        if m == 0 {
            return Err(Error::invalid("M must be positive"));
        }
        Ok(TrotterPlan {
            k0,
            fit_exponent: -1.0,
            epsilon_t: 0.0,
            m,
            n_fit_range: Vec::new(),
            measured_k0: Vec::new(),
            rule: K0Rule::Fixed,
        })
    }

    /// `k0` for a chain of `n` spins under this plan's rule.
    pub fn k0_for(&self, n: usize) -> u64 {
        match self.rule {
            K0Rule::Fixed => self.k0,
            K0Rule::Calibrated { prefactor } => {
                if let Some(i) = self.n_fit_range.iter().position(|&x| x == n) {
                    return self.measured_k0[i];
                }
                let v = (prefactor * (n as f64).powf(self.fit_exponent)).ceil();
                if v.is_finite() && v >= 1.0 {
                    v as u64
                } else {
                    1
                }
            }
        }
    }

    /// Same calibration specialised to chain length `n`.
    pub fn for_chain(&self, n: usize) -> TrotterPlan {
        TrotterPlan {
            k0: self.k0_for(n),
            ..self.clone()
        }
    }

    /// Trotter steps at exponent `m`: `2^m k0`.
    pub fn steps(&self, m: u32) -> u64 {
        self.k0 << m
    }

    /// Step length `θ = τ / k0`, the same for every `m`.
    pub fn theta(&self, tau: f64) -> f64 {
        tau / self.k0 as f64
    }
}

/// Rotation angles `(field half-step, field full step, bond)` entering the
/// `Rz` placeholders, for step length `θ`.
pub fn rotation_angles(inst: &TimInstance<f64>, theta: f64) -> [f64; 3] {
    let (g, j) = (inst.g, inst.j);
    [-j * g * theta / 2.0, -j * g * theta, -j * theta]
}

/// Controlled `Ũ(2^m τ)` with exact `Rz` placeholders.
pub fn build_controlled_u(m: u32, plan: &TrotterPlan, inst: &TimInstance<f64>) -> Result<Circuit> {
    inst.validate()?;
    if m >= inst.m {
        return Err(Error::invalid(format!(
            "exponent m = {m} outside 0..{} for M = {}",
            inst.m, inst.m
        )));
    }
    if inst.dimension != 1 {
        return Err(Error::invalid("circuits are built for 1-D chains only"));
    }
    let layout = Layout { n: inst.n };
    let k = plan
        .k0
        .checked_shl(m)
        .filter(|k| k >> m == plan.k0)
        .ok_or_else(|| Error::invalid("Trotter step count overflows"))?;
    if k > 1 << 24 {
        return Err(Error::Capacity {
            what: "Trotter steps per circuit",
            requested: k as usize,
            limit: 1 << 24,
        });
    }
    let theta = plan.theta(inst.tau());
    let half_x = -2.0 * inst.j * inst.g * theta / 2.0;
    let full_x = 2.0 * half_x;
    let zz = -2.0 * inst.j * theta;
    let mut c = Circuit::new(layout.width());
    fan(layout, &mut c)?;
    push_ux_body(layout, half_x, &mut c)?;
    for step in 0..k {
        if inst.n >= 2 {
            push_uzz_body(layout, zz, &mut c)?;
        }
        let x = if step + 1 == k { half_x } else { full_x };
        push_ux_body(layout, x, &mut c)?;
    }
    unfan(layout, &mut c)?;
    Ok(c)
}

/// Blocks of a controlled circuit acting on control and spins with the cat
/// ancillas starting and ending in `|0>`: returns `(U|ctrl=0, U|ctrl=1,
/// leakage)` where leakage is the largest amplitude left on a non-zero
/// ancilla pattern.
pub fn controlled_blocks(
    u: &DMatrix<Complex<f64>>,
    n: usize,
) -> (DMatrix<Complex<f64>>, DMatrix<Complex<f64>>, f64) {
    let layout = Layout { n };
    let width = layout.width();
    let ds = 1usize << n;
    let index = |ctrl: usize, spins: usize| -> usize {
        // wire q owns bit width-1-q; spins occupy wires 1..=n
        let mut idx = ctrl << (width - 1);
        for j in 0..n {
            if spins & (1 << (n - 1 - j)) != 0 {
                idx |= 1 << (width - 1 - layout.data(j));
            }
        }
        idx
    };
    let mut blocks = [
        DMatrix::from_element(ds, ds, Complex::new(0.0, 0.0)),
        DMatrix::from_element(ds, ds, Complex::new(0.0, 0.0)),
    ];
    let mut same_control = vec![false; u.nrows()];
    let mut leakage: f64 = 0.0;
    for ctrl in 0..2 {
        same_control.fill(false);
        for row in 0..ds {
            same_control[index(ctrl, row)] = true;
        }
        for col in 0..ds {
            let ci = index(ctrl, col);
            for row in 0..ds {
                blocks[ctrl][(row, col)] = u[(index(ctrl, row), ci)];
            }
            // Summed directly: `1 - kept` would turn rounding into a
            // square-root-sized leak.
            let lost: f64 = (0..u.nrows())
                .filter(|&r| !same_control[r])
                .map(|r| u[(r, ci)].norm_sqr())
                .sum();
            leakage = leakage.max(lost.sqrt());
        }
    }
    let [b0, b1] = blocks;
    (b0, b1, leakage)
}

/// `min_α ‖a − e^{iα} b‖` in the spectral norm, for unitaries `a`, `b`.
///
/// The eigenphases `ω` of `b† a` determine the answer exactly: the best phase
/// sits in the middle of the shortest arc holding them all, and the distance is
/// `2 sin(arc/4)`. When the phases spread over more than a half circle the
/// spectral norm is instead minimised numerically over `α`.
pub fn projective_operator_distance(a: &DMatrix<Complex<f64>>, b: &DMatrix<Complex<f64>>) -> f64 {
    let w = b.adjoint() * a;
    let tr = w.trace();
    let align = if tr.norm() > 1e-12 {
        tr.conj() / tr.norm()
    } else {
        Complex::new(1.0, 0.0)
    };
    let w = w * align;
    let herm = |m: DMatrix<Complex<f64>>| m.symmetric_eigenvalues();
    let cos_part = (&w + w.adjoint()).unscale(2.0);
    let sin_part = (&w - w.adjoint()) * Complex::new(0.0, -0.5);
    let cmin = herm(cos_part).min();
    if cmin > 1e-3 {
        let s = herm(sin_part);
        let (lo, hi) = (s.min().clamp(-1.0, 1.0).asin(), s.max().clamp(-1.0, 1.0).asin());
        return 2.0 * ((hi - lo) / 4.0).sin();
    }
    let norm_at = |alpha: f64| {
        let p = Complex::from_polar(1.0, alpha);
        crate::tim::spectral_norm(&(a - b * (p * align.conj())))
    };
    let grid = 720;
    let (mut best_a, mut best) = (0.0, f64::INFINITY);
    for i in 0..grid {
        let alpha = std::f64::consts::TAU * i as f64 / grid as f64;
        let v = norm_at(alpha);
        if v < best {
            best = v;
            best_a = alpha;
        }
    }
    let step = std::f64::consts::TAU / grid as f64;
    let (mut lo, mut hi) = (best_a - step, best_a + step);
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if norm_at(m1) < norm_at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(norm_at((lo + hi) / 2.0))
}

/// Matrix-free actions of `exp(-iHt)` and the Strang product on a chain.
struct ChainOps {
    n: usize,
    field: f64,
    zz_diag: Vec<f64>,
    norm_bound: f64,
}

type CVec = Vec<Complex<f64>>;

impl ChainOps {
    fn new(inst: &TimInstance<f64>) -> Self {
        let n = inst.n;
        let dim = 1usize << n;
        let zz_diag = (0..dim)
            .map(|b: usize| {
                (0..n.saturating_sub(1))
                    .map(|q| {
                        let same = ((b >> (n - 1 - q)) & 1) == ((b >> (n - 2 - q)) & 1);
                        if same {
                            -inst.j
                        } else {
                            inst.j
                        }
                    })
                    .sum()
            })
            .collect();
        ChainOps {
            n,
            field: -inst.j * inst.g,
            zz_diag,
            norm_bound: inst.j * (inst.g * n as f64 + n.saturating_sub(1) as f64),
        }
    }

    fn apply_h(&self, v: &[Complex<f64>], out: &mut [Complex<f64>]) {
        for (b, o) in out.iter_mut().enumerate() {
            let mut acc = v[b] * self.zz_diag[b];
            let mut xs = Complex::new(0.0, 0.0);
            for q in 0..self.n {
                xs += v[b ^ (1 << q)];
            }
            acc += xs * self.field;
            *o = acc;
        }
    }

    /// `exp(-i H t) v` by a Taylor series on sub-steps with `‖H‖ dt ≤ 1/2`.
    fn exact(&self, v: &[Complex<f64>], t: f64) -> CVec {
        let steps = ((self.norm_bound * t.abs()) / 0.5).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let mut cur = v.to_vec();
        let mut term = vec![Complex::new(0.0, 0.0); v.len()];
        let mut next = term.clone();
        for _ in 0..steps {
            term.copy_from_slice(&cur);
            let mut acc = cur.clone();
            for order in 1..60 {
                self.apply_h(&term, &mut next);
                let f = Complex::new(0.0, -dt / order as f64);
                let mut size = 0.0f64;
                for (t_i, n_i) in term.iter_mut().zip(&next) {
                    *t_i = n_i * f;
                    size = size.max(t_i.norm_sqr());
                }
                for (a, t_i) in acc.iter_mut().zip(&term) {
                    *a += t_i;
                }
                if size < 1e-40 {
                    break;
                }
            }
            cur = acc;
        }
        cur
    }

    /// `exp(-i field_angle Σ X)`-style rotation: multiplies by
    /// `exp(-i c Σ_q X_q)` with `c = field · dt`.
    fn x_rotation(&self, v: &mut CVec, c: f64) {
        let (cs, sn) = (c.cos(), c.sin());
        let mi_sn = Complex::new(0.0, -sn);
        for q in 0..self.n {
            let mask = 1usize << q;
            for b in 0..v.len() {
                if b & mask == 0 {
                    let (a0, a1) = (v[b], v[b | mask]);
                    v[b] = a0 * cs + a1 * mi_sn;
                    v[b | mask] = a1 * cs + a0 * mi_sn;
                }
            }
        }
    }

    fn zz_phase(&self, v: &mut CVec, dt: f64) {
        for (a, e) in v.iter_mut().zip(&self.zz_diag) {
            *a *= Complex::from_polar(1.0, -e * dt);
        }
    }

    /// Strang product for total time `t` in `k` steps (or its adjoint).
    fn strang(&self, v: &[Complex<f64>], t: f64, k: u64, adjoint: bool) -> CVec {
        let dt = if adjoint { -t / k as f64 } else { t / k as f64 };
        let mut cur = v.to_vec();
        // The product is palindromic, so the adjoint is the same sequence
        // with negated time.
        self.x_rotation(&mut cur, self.field * dt / 2.0);
        for step in 0..k {
            self.zz_phase(&mut cur, dt);
            let c = if step + 1 == k { dt / 2.0 } else { dt };
            self.x_rotation(&mut cur, self.field * c);
        }
        cur
    }
}

fn dot(a: &[Complex<f64>], b: &[Complex<f64>]) -> Complex<f64> {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Extremal eigenvalues of a Hermitian operator by Lanczos with full
/// reorthogonalisation and a fixed pseudorandom start vector.
fn lanczos_extremes(dim: usize, apply: impl Fn(&[Complex<f64>]) -> CVec) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7107_7e12);
    let mut v: CVec = (0..dim)
        .map(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let nv = dot(&v, &v).re.sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let max_iter = dim.min(400);
    let mut basis: Vec<CVec> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last = (f64::NAN, f64::NAN);
    let mut stable = 0;
    loop {
        let cur = basis.last().expect("non-empty basis");
        let mut w = apply(cur);
        let alpha = dot(cur, &w).re;
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = dot(&w, &w).re.sqrt();
        let ritz = tridiagonal_extremes(&alphas, &betas);
        let scale = ritz.0.abs().max(ritz.1.abs()).max(1e-300);
        if (ritz.0 - last.0).abs() <= 1e-13 * scale && (ritz.1 - last.1).abs() <= 1e-13 * scale {
            stable += 1;
        } else {
            stable = 0;
        }
        last = ritz;
        if stable >= 3 || basis.len() >= max_iter || beta <= 1e-14 * scale.max(1e-30) {
            return ritz;
        }
        betas.push(beta);
        w.iter_mut().for_each(|x| *x /= beta);
        basis.push(w);
    }
}

fn tridiagonal_extremes(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let k = alphas.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let ev = t.symmetric_eigenvalues();
    (ev.min(), ev.max())
}

/// Projective spectral distance between `exp(-iHt)` and the `k`-step Strang
/// product with exact exponentials, computed without forming either matrix.
///
/// With `W = U† S`, the spread of the eigenphases of `W` fixes the
/// phase-minimised distance `2 sin((ω_max − ω_min)/4)`. The extreme phases
/// come from the extreme eigenvalues `sin ω` of `(W − W†)/2i`.
pub fn trotter_error(inst: &TimInstance<f64>, t: f64, k: u64) -> Result<f64> {
    inst.validate()?;
    if inst.n > ORACLE_MAX_N {
        return Err(Error::Capacity {
            what: "Trotter-error oracle chain length",
            requested: inst.n,
            limit: ORACLE_MAX_N,
        });
    }
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if inst.n == 1 || inst.g == 0.0 {
        return Ok(0.0);
    }
    let ops = ChainOps::new(inst);
    let dim = 1usize << inst.n;
    let w = |v: &[Complex<f64>]| ops.exact(&ops.strang(v, t, k, false), -t);
    let w_adj = |v: &[Complex<f64>]| ops.strang(&ops.exact(v, t), t, k, true);
    let (lo, hi) = lanczos_extremes(dim, |v| {
        let a = w(v);
        let b = w_adj(v);
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * Complex::new(0.0, -0.5))
            .collect()
    });
    if lo.abs() > 0.7 || hi.abs() > 0.7 {
        return Err(Error::invalid(format!(
            "Trotter product too far from the exact evolution for the phase measure \
             (sin ω range [{lo:.3}, {hi:.3}])"
        )));
    }
    let spread = hi.asin() - lo.asin();
    Ok(2.0 * (spread.max(0.0) / 4.0).sin())
}

/// Smallest `k` with `trotter_error(inst, t, k) < target`.
pub fn min_steps(inst: &TimInstance<f64>, t: f64, target: f64) -> Result<(u64, f64)> {
    if !(target > 0.0) {
        return Err(Error::invalid("error target must be positive"));
    }
    let e1 = trotter_error(inst, t, 1)?;
    if e1 < target {
        return Ok((1, e1));
    }
    // Second-order scaling gives a good first guess.
    let mut hi = ((e1 / target).sqrt().ceil() as u64).max(2);
    let mut e_hi = trotter_error(inst, t, hi)?;
    let mut lo = 1u64;
    while e_hi >= target {
        lo = hi;
        hi = hi.checked_mul(2).ok_or_else(|| Error::invalid("k overflow"))?;
        e_hi = trotter_error(inst, t, hi)?;
    }
    // Walk down from the guess while the error still passes.
    let guess_lo = ((hi as f64) * 0.8).floor() as u64;
    if guess_lo > lo && trotter_error(inst, t, guess_lo)? >= target {
        lo = guess_lo;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let e = trotter_error(inst, t, mid)?;
        if e < target {
            hi = mid;
            e_hi = e;
        } else {
            lo = mid;
        }
    }
    Ok((hi, e_hi))
}

/// Measures the smallest passing `k0` on each chain of `n_range` at `t = τ(N)`
/// and fits `log k0 = log a + b log N`.
pub fn calibrate_k0(m: u32, n_range: &[usize], g: f64, j: f64) -> Result<TrotterPlan> {
    if n_range.is_empty() {
        return Err(Error::invalid("calibration needs at least one chain length"));
    }
    if m == 0 || m > 40 {
        return Err(Error::invalid("calibration precision must lie in 1..=40"));
    }
    if let Some(&bad) = n_range.iter().find(|&&n| !(2..=ORACLE_MAX_N).contains(&n)) {
        return Err(Error::invalid(format!(
            "calibration chain length {bad} outside 2..={ORACLE_MAX_N}"
        )));
    }
    let target = (-(m as f64)).exp2();
    let results: Vec<(u64, f64)> = n_range
        .par_iter()
        .map(|&n| {
            let inst = TimInstance::new(n, m)?.with_field(g)?.with_coupling(j)?;
            min_steps(&inst, inst.tau(), target)
        })
        .collect::<Result<_>>()?;
    let measured_k0: Vec<u64> = results.iter().map(|r| r.0).collect();
    let epsilon_t = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let (prefactor, fit_exponent) = if n_range.len() >= 2 {
        let xs: Vec<f64> = n_range.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = measured_k0.iter().map(|&k| (k as f64).ln()).collect();
        let (a, b) = least_squares(&xs, &ys);
        (a.exp(), b)
    } else {
        (measured_k0[0] as f64 * n_range[0] as f64, -1.0)
    };
    Ok(TrotterPlan {
        k0: *measured_k0.iter().max().expect("non-empty"),
        fit_exponent,
        epsilon_t,
        m,
        n_fit_range: n_range.to_vec(),
        measured_k0,
        rule: K0Rule::Calibrated { prefactor },
    })
}

/// Unweighted least squares `y = a + b x`; returns `(a, b)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tim::{build_hamiltonian, hamiltonian_parts, Spectrum, DENSE_QUBIT_CAP};

    fn inst(n: usize, m: u32) -> TimInstance<f64> {
        TimInstance::new(n, m).unwrap()
    }

    fn pauli_sum_exp(n: usize, coeff: f64, zz: bool) -> DMatrix<Complex<f64>> {
        // exp(-i coeff Σ P) for P = X_j or Z_j Z_{j+1}
        let i = inst(n, 1);
        let (hx, hzz) = hamiltonian_parts(&i, DENSE_QUBIT_CAP).unwrap();
        // hx = -Σ X, hzz = -Σ ZZ at J = g = 1
        let op = if zz { hzz } else { hx };
        let spec = Spectrum::of(&op).unwrap();
        spec.unitary(-coeff)
    }

    #[test]
    fn layout_wires() {
        let l = Layout { n: 3 };
        assert_eq!(l.width(), 6);
        assert_eq!((l.cat(0), l.cat(1), l.cat(2)), (0, 4, 5));
        assert_eq!(l.data(2), 3);
    }

    #[test]
    fn ux_matches_exponential() {
        let theta = 0.3;
        let u = build_ux(theta, 2).unwrap().unitary::<f64>().unwrap();
        let (u0, u1, leak) = controlled_blocks(&u, 2);
        assert!(leak < 1e-10);
        let target = pauli_sum_exp(2, theta / 2.0, false);
        assert!(projective_operator_distance(&u1, &target) < 1e-10);
        assert!((u0 - DMatrix::identity(4, 4)).norm() < 1e-10);
    }

    #[test]
    fn uzz_matches_exponential() {
        let theta = 0.2;
        let u = build_uzz(2.0 * theta, 3).unwrap().unitary::<f64>().unwrap();
        let (u0, u1, leak) = controlled_blocks(&u, 3);
        assert!(leak < 1e-10);
        let target = pauli_sum_exp(3, theta, true);
        assert!(projective_operator_distance(&u1, &target) < 1e-10);
        assert!((u0 - DMatrix::identity(8, 8)).norm() < 1e-10);
        assert!(build_uzz(0.1, 1).is_err());
    }

    #[test]
    fn zero_angle_circuits_are_identity() {
        for c in [build_ux(0.0, 3).unwrap(), build_uzz(0.0, 3).unwrap()] {
            let u = c.unitary::<f64>().unwrap();
            assert!((u - DMatrix::identity(64, 64)).norm() < 1e-10);
        }
    }

    #[test]
    fn controlled_u_close_to_exact() {
        let i = inst(3, 4);
        let plan = TrotterPlan::fixed(1, 4).unwrap();
        let c = build_controlled_u(0, &plan, &i).unwrap();
        let (_, u1, _) = controlled_blocks(&c.unitary::<f64>().unwrap(), 3);
        let exact = Spectrum::of(&build_hamiltonian(&i).unwrap())
            .unwrap()
            .unitary(i.tau());
        assert!(projective_operator_distance(&u1, &exact) < 1.0 / 16.0);
        assert!(build_controlled_u(4, &plan, &i).is_err());
    }

    #[test]
    fn commuting_limit_has_no_error() {
        let i = inst(4, 3).with_field(0.0).unwrap();
        assert_eq!(trotter_error(&i, 0.3, 1).unwrap(), 0.0);
    }

    #[test]
    fn oracle_capacity() {
        let i = inst(11, 3);
        assert!(matches!(trotter_error(&i, 0.1, 1), Err(Error::Capacity { .. })));
    }

    #[test]
    fn matrix_free_error_matches_dense() {
        let i = inst(4, 3);
        let t = 0.37;
        let k = 2;
        let h = build_hamiltonian(&i).unwrap();
        let exact = Spectrum::of(&h).unwrap().unitary(t);
        let (hx, hzz) = hamiltonian_parts(&i, DENSE_QUBIT_CAP).unwrap();
        let a = Spectrum::of(&hx).unwrap().unitary(t / (2.0 * k as f64));
        let b = Spectrum::of(&hzz).unwrap().unitary(t / k as f64);
        let step = &a * &b * &a;
        let mut s = DMatrix::identity(16, 16);
        for _ in 0..k {
            s = &s * &step;
        }
        let dense = projective_operator_distance(&exact, &s);
        let free = trotter_error(&i, t, k).unwrap();
        assert!((dense - free).abs() < 1e-12 * dense.max(1.0), "{dense} vs {free}");
    }

    #[test]
    fn fixed_plan_rules() {
        let p = TrotterPlan::fixed(5, 10).unwrap();
        assert_eq!(p.steps(3), 40);
        assert_eq!(p.k0_for(1000), 5);
        assert!((p.theta(0.001) - 0.0002).abs() < 1e-18);
        assert!(TrotterPlan::fixed(0, 3).is_err());
    }

    #[test]
    fn calibration_input_validation() {
        assert!(calibrate_k0(8, &[], 1.0, 1.0).is_err());
        assert!(calibrate_k0(8, &[1, 2], 1.0, 1.0).is_err());
        assert!(calibrate_k0(8, &[2, 11], 1.0, 1.0).is_err());
    }

    #[test]
    fn least_squares_recovers_line() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [1.0, 3.0, 5.0];
        let (a, b) = least_squares(&xs, &ys);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }
}
