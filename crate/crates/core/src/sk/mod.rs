//! Solovay-Kitaev compilation of `Rz` rotations into `{H, T, S}` words.
//!
//! Order 0 is a nearest-neighbour lookup in a [`BaseNet`]. Each further order
//! writes the residual `Δ = U·U_{n-1}†` as a balanced group commutator
//! `V W V† W†` of two rotations by roughly `sqrt(|Δ|)`, approximates `V` and `W`
//! one order lower, and appends `V_{n-1} W_{n-1} V_{n-1}† W_{n-1}†`. The order
//! is raised until the requested accuracy is met.

pub mod kdtree;
pub mod net;
pub mod su2;
pub mod word;

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tim::TimInstance;
use crate::trotter::TrotterPlan;

pub use net::{BaseNet, DEFAULT_BASE_LENGTH};
pub use su2::{projective_distance, Quat};
pub use word::{SkGate, Word};

use su2::{cross, dot3, unit};

/// Default ceiling on the recursion order.
pub const DEFAULT_MAX_ORDER: usize = 10;

/// Order-0 error above which the recursion is not expected to contract.
/// Measured: a net whose lookups land around 0.06 stalls near 1e-7, while
/// 0.01 to 0.02 contracts cleanly down to the roundoff floor.
pub const CONVERGENCE_RADIUS: f64 = 0.05;

/// Below this error, further orders are limited by double-precision roundoff
/// in the long quaternion products rather than by the base net.
pub const PRECISION_FLOOR: f64 = 1e-11;

/// A compiled rotation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkSequence {
    pub word: Word,
    /// Projective distance between the word's product and the target.
    pub achieved_error: f64,
    pub recursion_order: usize,
}

impl SkSequence {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

/// Compiler bound to a frozen base net; cheap to clone and share across threads.
#[derive(Clone, Debug)]
pub struct SkCompiler {
    net: Arc<BaseNet>,
    max_order: usize,
}

impl SkCompiler {
    pub fn new(net: BaseNet) -> Self {
        SkCompiler {
            net: Arc::new(net),
            max_order: DEFAULT_MAX_ORDER,
        }
    }

    /// Compiler over the default net, built once per process and shared.
    pub fn standard() -> SkCompiler {
        static NET: OnceLock<Arc<BaseNet>> = OnceLock::new();
        let net = NET.get_or_init(|| {
            Arc::new(BaseNet::build(DEFAULT_BASE_LENGTH).expect("default base length is valid"))
        });
        SkCompiler {
            net: Arc::clone(net),
            max_order: DEFAULT_MAX_ORDER,
        }
    }

    pub fn with_base_length(base_length: usize) -> Result<Self> {
        Ok(Self::new(BaseNet::build(base_length)?))
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn net(&self) -> &BaseNet {
        &self.net
    }

    /// Word within `epsilon` of `Rz(angle)`, up to global phase.
    pub fn compile_rz(&self, angle: f64, epsilon: f64) -> Result<SkSequence> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if !angle.is_finite() {
            return Err(Error::invalid("rotation angle must be finite"));
        }
        let target = Quat::rz(angle);
        let k = angle / FRAC_PI_4;
        if (k - k.round()).abs() < 1e-12 {
            let word = Word(word::t_power_word(k.round().rem_euclid(8.0) as u8).to_vec());
            let achieved_error = word.quat().distance(&target);
            return Ok(SkSequence {
                word,
                achieved_error,
                recursion_order: 0,
            });
        }
        self.compile_su2(&target, epsilon)
    }

    pub fn compile_su2(&self, target: &Quat, epsilon: f64) -> Result<SkSequence> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        let (q0, w0, e0) = self.net.nearest(target);
        let mut best = (q0, w0);
        let mut err = e0;
        if err <= epsilon {
            return Ok(SkSequence {
                word: best.1,
                achieved_error: err,
                recursion_order: 0,
            });
        }
        if err > CONVERGENCE_RADIUS {
            return Err(self.too_coarse(err));
        }
        let mut stalls = 0;
        for order in 1..=self.max_order {
            let next = self.refine(target, &best, order);
            let word = next.1.simplify();
            let actual = word.quat().distance(target);
            if actual >= err * 0.9 {
                stalls += 1;
            } else {
                stalls = 0;
            }
            if actual < err {
                best = (next.0, word);
                err = actual;
            }
            if err <= epsilon {
                return Ok(SkSequence {
                    word: best.1,
                    achieved_error: err,
                    recursion_order: order,
                });
            }
            if stalls >= 2 {
                if err < PRECISION_FLOOR * 10.0 {
                    return Err(Error::Config(format!(
                        "Solovay-Kitaev stalled at {err:.3e}, the floating-point floor; \
                         {epsilon:.3e} is not reachable in double precision"
                    )));
                }
                return Err(self.too_coarse(e0));
            }
        }
        Err(Error::Config(format!(
            "Solovay-Kitaev did not reach {epsilon:.3e} within order {} (best {err:.3e})",
            self.max_order
        )))
    }

    fn too_coarse(&self, achieved: f64) -> Error {
        Error::BaseNetTooCoarse {
            base_length: self.net.base_length(),
            // Net spacing shrinks by about 2^(-1/6) per extra letter.
            required_length: self.net.base_length()
                + ((achieved / CONVERGENCE_RADIUS).log2() * 6.0).ceil().max(4.0) as usize,
            achieved,
            radius: CONVERGENCE_RADIUS,
        }
    }

    fn approx(&self, u: &Quat, order: usize) -> (Quat, Word) {
        if order == 0 {
            let (q, w, _) = self.net.nearest(u);
            return (q, w);
        }
        let prev = self.approx(u, order - 1);
        self.refine(u, &prev, order)
    }

    /// One Dawson-Nielsen step from an order-`order-1` approximation `prev`.
    fn refine(&self, u: &Quat, prev: &(Quat, Word), order: usize) -> (Quat, Word) {
        let delta = *u * prev.0.inverse();
        let (v, w) = balanced_commutator(&delta);
        let (vq, vw) = self.approx(&v, order - 1);
        let (wq, ww) = self.approx(&w, order - 1);
        let q = vq * wq * vq.inverse() * wq.inverse() * prev.0;
        let mut word = prev.1.clone();
        word.extend(&ww.inverse());
        word.extend(&vw.inverse());
        word.extend(&ww);
        word.extend(&vw);
        (q, word)
    }

    /// Compiles the semiclassical Fourier feedback `diag(1, e^{iβ})` of step
    /// `j` (1-based), where `measured` holds the bits of steps `1..j` in the
    /// order they were produced (least significant first).
    pub fn compile_feedback_rotation(
        &self,
        j: usize,
        measured: &[u8],
        epsilon: f64,
    ) -> Result<SkSequence> {
        let beta = feedback_angle(j, measured)?;
        self.compile_rz(beta, epsilon)
    }
}

/// `β = 2π Σ_{i<j-1} measured[i] / 2^{j-i}`, reduced to `(-π, π]`.
pub fn feedback_angle(j: usize, measured: &[u8]) -> Result<f64> {
    if j == 0 {
        return Err(Error::invalid("step index starts at 1"));
    }
    if measured.len() + 1 < j {
        return Err(Error::invalid(format!(
            "step {j} needs {} earlier bits, only {} available",
            j - 1,
            measured.len()
        )));
    }
    let mut frac = 0.0;
    for (i, &b) in measured.iter().take(j - 1).enumerate() {
        if b > 1 {
            return Err(Error::invalid("measured bits must be 0 or 1"));
        }
        frac += f64::from(b) * (-((j - i) as f64)).exp2();
    }
    let beta = TAU * frac;
    Ok(if beta > PI { beta - TAU } else { beta })
}

/// `V`, `W` with `V W V† W† = Δ`, each a rotation by `φ` where
/// `sin(φ/2) = sqrt(sin(θ/4))` for `Δ` a rotation by `θ`.
fn balanced_commutator(delta: &Quat) -> (Quat, Quat) {
    let d = if delta.w < 0.0 { -*delta } else { *delta };
    let theta = d.angle();
    let Some(axis) = unit(d.vector()) else {
        return (Quat::IDENTITY, Quat::IDENTITY);
    };
    let phi = 2.0 * (theta / 4.0).sin().sqrt().min(1.0).asin();
    let v = Quat::rx(phi);
    let w = Quat::ry(phi);
    let comm = v * w * v.inverse() * w.inverse();
    let comm = if comm.w < 0.0 { -comm } else { comm };
    let Some(c_axis) = unit(comm.vector()) else {
        return (Quat::IDENTITY, Quat::IDENTITY);
    };
    let s = align(c_axis, axis);
    (s * v * s.inverse(), s * w * s.inverse())
}

/// Rotation taking unit vector `from` onto unit vector `to`.
fn align(from: [f64; 3], to: [f64; 3]) -> Quat {
    let c = dot3(from, to).clamp(-1.0, 1.0);
    match unit(cross(from, to)) {
        Some(axis) if c > -1.0 + 1e-15 => Quat::rotation(axis, c.acos()),
        _ if c > 0.0 => Quat::IDENTITY,
        _ => {
            // Antiparallel: any perpendicular axis works.
            let trial = if from[0].abs() < 0.9 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 1.0, 0.0]
            };
            let axis = unit(cross(from, trial)).expect("non-parallel trial axis");
            Quat::rotation(axis, PI)
        }
    }
}

/// Compiled length of one data-path angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AngleLength {
    pub angle: f64,
    pub length: usize,
    pub t_count: usize,
    pub order: usize,
    pub error: f64,
}

/// Longest compiled rotation among the data-path angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SrStatistic {
    /// Gate count of the longest word.
    #[serde(rename = "SR")]
    pub sr: usize,
    pub per_angle: Vec<AngleLength>,
    pub epsilon_target: f64,
    pub max_order: usize,
}

impl SrStatistic {
    /// Longest word in cycles when `T`-type gates cost `t_cost` cycles.
    pub fn sr_cycles(&self, t_cost: u64) -> u64 {
        self.per_angle
            .iter()
            .map(|a| (a.length - a.t_count) as u64 + t_cost * a.t_count as u64)
            .max()
            .unwrap_or(1)
            .max(1)
    }
}

/// `ε_sk = 2^{-M} / k0`, the per-rotation budget shared by every exponent.
pub fn sk_epsilon(m: u32, k0: u64) -> f64 {
    (-(m as f64)).exp2() / k0 as f64
}

/// Distinct positive rotation magnitudes on the data path for step length `θ`:
/// `{Jθ, Jθ/2, Jθ/4, Jgθ, Jgθ/2}`.
pub fn data_path_angles(inst: &TimInstance<f64>, theta: f64) -> Vec<f64> {
    let (j, g) = (inst.j, inst.g);
    let mut out: Vec<f64> = Vec::new();
    for a in [j * theta, j * theta / 2.0, j * theta / 4.0, j * g * theta, j * g * theta / 2.0] {
        if a > 0.0 && !out.iter().any(|&b| (b - a).abs() <= 1e-15 * a) {
            out.push(a);
        }
    }
    out
}

/// Compiles every data-path angle at `ε_sk = 2^{-M}/k0` and records the longest.
pub fn compute_sr(
    compiler: &SkCompiler,
    plan: &TrotterPlan,
    inst: &TimInstance<f64>,
) -> Result<SrStatistic> {
    let theta = plan.theta(inst.tau());
    let eps = sk_epsilon(inst.m, plan.k0);
    let angles = data_path_angles(inst, theta);
    let per_angle: Vec<AngleLength> = angles
        .par_iter()
        .map(|&a| {
            let s = compiler.compile_rz(a, eps)?;
            Ok(AngleLength {
                angle: a,
                length: s.len(),
                t_count: s.word.t_count(),
                order: s.recursion_order,
                error: s.achieved_error,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SrStatistic {
        sr: per_angle.iter().map(|a| a.length).max().unwrap_or(0).max(1),
        max_order: per_angle.iter().map(|a| a.order).max().unwrap_or(0),
        per_angle,
        epsilon_target: eps,
    })
}
