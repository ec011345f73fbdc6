//! Scalar abstraction for the dense numerics.
//!
//! Everything that touches amplitudes or matrix entries is written against
//! [`Real`], so the simulator and the exact-diagonalization oracle run in
//! either `f32` or `f64`. Only `f64` is accurate enough for the calibration
//! tolerances; `f32` is useful for quick smoke runs.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable by the dense linear algebra (f32 or f64).
pub trait Real: RealField + Copy + FloatConst + FromPrimitive + ToPrimitive {
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance for "numerically equal" comparisons at this precision.
    fn tolerance() -> Self {
        Self::default_epsilon() * Self::lit(1.0e3)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Unit-modulus complex number `exp(i theta)`.
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}
