//! SU(2) elements as unit quaternions.
//!
//! `(w, x, y, z)` stands for `w·I − i(x·X + y·Y + z·Z)`, so quaternion
//! multiplication is matrix multiplication and `q`, `−q` are the same gate up
//! to global phase. For unit quaternions, `min(|p − q|, |p + q|)` equals the
//! phase-minimised spectral distance of the corresponding 2×2 unitaries.

use std::ops::{Mul, Neg};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    /// `exp(−i angle/2 · n·σ)` for a unit axis `n`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Quat::new(c, s * axis[0], s * axis[1], s * axis[2])
    }

    pub fn rz(angle: f64) -> Self {
        Self::rotation([0.0, 0.0, 1.0], angle)
    }

    pub fn rx(angle: f64) -> Self {
        Self::rotation([1.0, 0.0, 0.0], angle)
    }

    pub fn ry(angle: f64) -> Self {
        Self::rotation([0.0, 1.0, 0.0], angle)
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn dot(&self, o: &Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Quat {
        let n = self.norm();
        Quat::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    /// Inverse of a unit quaternion.
    pub fn inverse(&self) -> Quat {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Representative with `w ≥ 0` (first non-zero component positive on ties).
    pub fn canonical(&self) -> Quat {
        for c in self.as_array() {
            if c.abs() > 1e-12 {
                return if c < 0.0 { -*self } else { *self };
            }
        }
        *self
    }

    /// Projective distance to `o`.
    pub fn distance(&self, o: &Quat) -> f64 {
        let d = |s: f64| {
            ((self.w - s * o.w).powi(2)
                + (self.x - s * o.x).powi(2)
                + (self.y - s * o.y).powi(2)
                + (self.z - s * o.z).powi(2))
            .sqrt()
        };
        d(1.0).min(d(-1.0))
    }

    /// Rotation angle in `[0, π]` of the projective class. `atan2` keeps
    /// full relative precision for tiny angles, where `acos(w)` rounds to 0.
    pub fn angle(&self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        2.0 * v.atan2(self.w.abs())
    }

    /// Dense 2×2 matrix.
    pub fn to_matrix(&self) -> [[Complex64; 2]; 2] {
        let c = Complex64::new;
        [
            [c(self.w, -self.z), c(-self.y, -self.x)],
            [c(self.y, -self.x), c(self.w, self.z)],
        ]
    }

    /// Projects a 2×2 unitary onto SU(2) and reads off the quaternion.
    pub fn from_matrix(u: &[[Complex64; 2]; 2]) -> Result<Quat> {
        check_unitary(u)?;
        let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
        let r = det.sqrt();
        let m = |a: Complex64| a / r;
        let (a, b, c, d) = (m(u[0][0]), m(u[0][1]), m(u[1][0]), m(u[1][1]));
        let i = Complex64::i();
        let w = (a + d) / 2.0;
        let z = i * (a - d) / 2.0;
        let x = i * (b + c) / 2.0;
        let y = (c - b) / 2.0;
        Ok(Quat::new(w.re, x.re, y.re, z.re).normalized())
    }

    /// Rotates a 3-vector by this element's SO(3) image.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let p = Quat::new(0.0, v[0], v[1], v[2]);
        let r = *self * p * self.inverse();
        [r.x, r.y, r.z]
    }
}

fn check_unitary(u: &[[Complex64; 2]; 2]) -> Result<()> {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                s += u[k][i].conj() * u[k][j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    if worst > 1e-9 {
        return Err(Error::invalid(format!(
            "matrix is not unitary (defect {worst:.3e})"
        )));
    }
    Ok(())
}

impl Mul for Quat {
    type Output = Quat;

    fn mul(self, o: Quat) -> Quat {
        Quat::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + o.w * self.x + self.y * o.z - self.z * o.y,
            self.w * o.y + o.w * self.y + self.z * o.x - self.x * o.z,
            self.w * o.z + o.w * self.z + self.x * o.y - self.y * o.x,
        )
    }
}

impl Neg for Quat {
    type Output = Quat;

    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Phase-minimised spectral distance between two 2×2 unitaries.
pub fn projective_distance(u: &[[Complex64; 2]; 2], v: &[[Complex64; 2]; 2]) -> Result<f64> {
    Ok(Quat::from_matrix(u)?.distance(&Quat::from_matrix(v)?))
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn unit(a: [f64; 3]) -> Option<[f64; 3]> {
    let n = dot3(a, a).sqrt();
    (n > 1e-300).then(|| [a[0] / n, a[1] / n, a[2] / n])
}
