//! Dense statevector over `n` qubits.
//!
//! Qubit `q` is tensor factor `q` counted from the left, so it owns bit
//! `n - 1 - q` of the basis index. The Hamiltonian builder, the circuit
//! simulator and the phase-estimation runner all share this ordering.

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

pub type Mat2<T> = [[Complex<T>; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    qubits: usize,
    amps: Vec<Complex<T>>,
}

/// Basis-index mask of qubit `q` in an `n`-qubit register.
#[inline]
pub fn qubit_mask(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

impl<T: Real> StateVector<T> {
    /// `|0...0>` on `qubits` qubits.
    pub fn zero(qubits: usize) -> Self {
        Self::basis(qubits, 0)
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << qubits];
        amps[index] = Complex::new(T::one(), T::zero());
        StateVector { qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        Ok(StateVector {
            qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn from_dvector(v: &DVector<Complex<T>>) -> Result<Self> {
        Self::from_amplitudes(v.iter().copied().collect())
    }

    pub fn to_dvector(&self) -> DVector<Complex<T>> {
        DVector::from_column_slice(&self.amps)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if n <= T::zero() {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        let inv = T::one() / n;
        for a in &mut self.amps {
            *a = a.scale(inv);
        }
        Ok(())
    }

    /// Checks unit norm within `tol`.
    pub fn ensure_normalized(&self, tol: T) -> Result<()> {
        let dev = (self.norm_sqr() - T::one()).abs();
        if dev > tol {
            return Err(Error::invalid(format!(
                "state is not normalized (|norm^2 - 1| = {:.3e})",
                dev.as_f64()
            )));
        }
        Ok(())
    }

    /// Tensor product `self ⊗ other` (self occupies the leftmost qubits).
    pub fn kron(&self, other: &StateVector<T>) -> StateVector<T> {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(*a * *b);
            }
        }
        StateVector {
            qubits: self.qubits + other.qubits,
            amps,
        }
    }

    pub fn inner(&self, other: &StateVector<T>) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * *b
            })
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.qubits {
            return Err(Error::invalid(format!(
                "qubit {q} out of range for a {}-qubit register",
                self.qubits
            )));
        }
        Ok(())
    }

    pub fn apply_single(&mut self, q: usize, u: &Mat2<T>) -> Result<()> {
        self.check_qubit(q)?;
        let mask = qubit_mask(self.qubits, q);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | mask];
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[i | mask] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Diagonal single-qubit gate `diag(d0, d1)`.
    pub fn apply_diagonal(&mut self, q: usize, d0: Complex<T>, d1: Complex<T>) -> Result<()> {
        self.check_qubit(q)?;
        let mask = qubit_mask(self.qubits, q);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a = if i & mask == 0 { *a * d0 } else { *a * d1 };
        }
        Ok(())
    }

    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let mask = qubit_mask(self.qubits, q);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                self.amps.swap(i, i | mask);
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::invalid("CNOT control and target coincide"));
        }
        let cm = qubit_mask(self.qubits, control);
        let tm = qubit_mask(self.qubits, target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
        Ok(())
    }

    /// `Rz(angle) = diag(e^{-i angle/2}, e^{i angle/2})`.
    pub fn apply_rz(&mut self, q: usize, angle: T) -> Result<()> {
        let half = angle / T::lit(2.0);
        self.apply_diagonal(q, cis(-half), cis(half))
    }

    /// Probability of reading 1 on qubit `q`.
    pub fn prob_one(&self, q: usize) -> Result<T> {
        self.check_qubit(q)?;
        let mask = qubit_mask(self.qubits, q);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr()))
    }

    /// Projects qubit `q` onto `bit` and renormalizes.
    pub fn collapse(&mut self, q: usize, bit: u8) -> Result<()> {
        self.check_qubit(q)?;
        let mask = qubit_mask(self.qubits, q);
        let keep_one = bit != 0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & mask != 0) != keep_one {
                *a = Complex::new(T::zero(), T::zero());
            }
        }
        self.normalize()
    }

    /// Measures qubit `q` in the Z basis using the uniform draw `u ∈ [0,1)`.
    pub fn measure(&mut self, q: usize, u: f64) -> Result<u8> {
        let p1 = self.prob_one(q)?.as_f64();
        let bit = u8::from(u < p1);
        self.collapse(q, bit)?;
        Ok(bit)
    }
}

pub fn hadamard<T: Real>() -> Mat2<T> {
    let s = T::FRAC_1_SQRT_2();
    let z = T::zero();
    [
        [Complex::new(s, z), Complex::new(s, z)],
        [Complex::new(s, z), Complex::new(-s, z)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn qubit_zero_is_most_significant() {
        let mut s = StateVector::<f64>::zero(3);
        s.apply_x(0).unwrap();
        assert_eq!(s.amplitudes()[0b100].re, 1.0);
    }

    #[test]
    fn cnot_requires_distinct_qubits() {
        let mut s = StateVector::<f64>::zero(2);
        assert!(s.apply_cnot(1, 1).is_err());
        assert!(s.apply_cnot(0, 2).is_err());
    }

    #[test]
    fn bell_pair_measurement_collapses_both() {
        let mut s = StateVector::<f64>::zero(2);
        s.apply_single(0, &hadamard()).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_relative_eq!(s.prob_one(1).unwrap(), 0.5, epsilon = 1e-12);
        let bit = s.measure(0, 0.9).unwrap();
        assert_eq!(bit, 0);
        assert_relative_eq!(s.prob_one(1).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kron_orders_left_factor_first() {
        let one = StateVector::<f32>::basis(1, 1);
        let zero = StateVector::<f32>::zero(2);
        let s = one.kron(&zero);
        assert_eq!(s.qubits(), 3);
        assert_eq!(s.amplitudes()[0b100].re, 1.0);
    }

    #[test]
    fn non_power_of_two_rejected() {
        let amps = vec![Complex::new(1.0f64, 0.0); 3];
        assert!(StateVector::from_amplitudes(amps).is_err());
    }
}
