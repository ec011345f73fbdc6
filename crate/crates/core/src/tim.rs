//! Transverse-field Ising chain and its exact small-size solutions.
//!
//! `H = -J (g Σ_j X_j + Σ_{j<N-1} Z_j Z_{j+1})` on an open chain, with the
//! evolution convention `U(t) = exp(-i H t)`. Dense matrices are only built up
//! to [`DENSE_QUBIT_CAP`] qubits; they serve as the ground-truth oracle for the
//! circuit constructions and the phase-estimation simulator.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cabs, cis, Real};
use crate::state::qubit_mask;

pub const DENSE_QUBIT_CAP: usize = 14;

/// Problem definition for one phase-estimation run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimInstance<T> {
    /// Spins per chain (side length when `dimension > 1`).
    pub n: usize,
    /// Field ratio Γ/J.
    pub g: T,
    /// Coupling energy unit.
    pub j: T,
    /// Bits of precision.
    pub m: u32,
    pub dimension: u8,
}

impl<T: Real> TimInstance<T> {
    /// Chain of `n` spins at the critical point `g = 1`, `J = 1`.
    pub fn new(n: usize, m: u32) -> Result<Self> {
        let inst = TimInstance {
            n,
            g: T::one(),
            j: T::one(),
            m,
            dimension: 1,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_field(mut self, g: T) -> Result<Self> {
        self.g = g;
        self.validate()?;
        Ok(self)
    }

    pub fn with_coupling(mut self, j: T) -> Result<Self> {
        self.j = j;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dimension(mut self, dimension: u8) -> Result<Self> {
        self.dimension = dimension;
        self.validate()?;
        Ok(self)
    }

    pub fn with_precision(mut self, m: u32) -> Result<Self> {
        self.m = m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::invalid("precision M must be at least 1"));
        }
        if !(self.g >= T::zero()) {
            return Err(Error::invalid("field ratio g must be non-negative"));
        }
        if !(self.j > T::zero()) {
            return Err(Error::invalid("coupling J must be positive"));
        }
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::invalid("dimension must be 1, 2 or 3"));
        }
        Ok(())
    }

    /// Number of spins on the lattice (`n^dimension`).
    pub fn sites(&self) -> usize {
        self.n.pow(u32::from(self.dimension))
    }

    /// Upper bound `N J (1 + g)` on the ground-energy magnitude.
    pub fn bound_energy(&self) -> T {
        T::lit(self.n as f64) * self.j * (T::one() + self.g)
    }

    /// Evolution time per phase-estimation unit, `1 / (10 J N)`.
    pub fn tau(&self) -> T {
        T::one() / (T::lit(10.0) * self.j * T::lit(self.n as f64))
    }

    pub fn to_f64(&self) -> TimInstance<f64> {
        TimInstance {
            n: self.n,
            g: self.g.as_f64(),
            j: self.j.as_f64(),
            m: self.m,
            dimension: self.dimension,
        }
    }
}

/// Complex square matrix on `2^n` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator<T: Real> {
    pub matrix: DMatrix<Complex<T>>,
}

impl<T: Real> DenseOperator<T> {
    pub fn new(matrix: DMatrix<Complex<T>>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || !r.is_power_of_two() {
            return Err(Error::invalid(format!(
                "operator must be 2^n x 2^n, got {r} x {c}"
            )));
        }
        Ok(DenseOperator { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        let m = &self.matrix;
        let mut worst = T::zero();
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let d = cabs(m[(i, j)] - m[(j, i)].conj());
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Spectral-norm deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> T {
        let prod = self.matrix.adjoint() * &self.matrix;
        let eye = DMatrix::<Complex<T>>::identity(self.dim(), self.dim());
        spectral_norm(&(prod - eye))
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn apply(&self, v: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        &self.matrix * v
    }

    fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == T::zero())
    }
}

pub fn spectral_norm<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.clone()
        .singular_values()
        .iter()
        .fold(T::zero(), |a, &b| if b > a { b } else { a })
}

fn capacity_check(qubits: usize, cap: usize) -> Result<()> {
    if qubits > cap {
        return Err(Error::Capacity {
            what: "dense operator qubit count",
            requested: qubits,
            limit: cap,
        });
    }
    Ok(())
}

/// Field part `-J g Σ X_j` and bond part `-J Σ Z_j Z_{j+1}` of the Hamiltonian.
pub fn hamiltonian_parts<T: Real>(
    inst: &TimInstance<T>,
    cap: usize,
) -> Result<(DenseOperator<T>, DenseOperator<T>)> {
    inst.validate()?;
    if inst.dimension != 1 {
        return Err(Error::invalid(
            "dense Hamiltonians are built for 1-D chains only",
        ));
    }
    let n = inst.n;
    capacity_check(n, cap)?;
    let dim = 1usize << n;
    let zero = Complex::new(T::zero(), T::zero());
    let mut hx = DMatrix::from_element(dim, dim, zero);
    let mut hzz = DMatrix::from_element(dim, dim, zero);
    let field = -inst.j * inst.g;
    for b in 0..dim {
        for q in 0..n {
            let flipped = b ^ qubit_mask(n, q);
            hx[(flipped, b)] += Complex::new(field, T::zero());
        }
        let mut diag = T::zero();
        for q in 0..n.saturating_sub(1) {
            let zq = b & qubit_mask(n, q) == 0;
            let zr = b & qubit_mask(n, q + 1) == 0;
            diag += if zq == zr { -inst.j } else { inst.j };
        }
        hzz[(b, b)] = Complex::new(diag, T::zero());
    }
    Ok((DenseOperator { matrix: hx }, DenseOperator { matrix: hzz }))
}

/// Dense Hamiltonian of the open chain.
pub fn build_hamiltonian<T: Real>(inst: &TimInstance<T>) -> Result<DenseOperator<T>> {
    build_hamiltonian_capped(inst, DENSE_QUBIT_CAP)
}

pub fn build_hamiltonian_capped<T: Real>(
    inst: &TimInstance<T>,
    cap: usize,
) -> Result<DenseOperator<T>> {
    let (hx, hzz) = hamiltonian_parts(inst, cap)?;
    Ok(DenseOperator {
        matrix: hx.matrix + hzz.matrix,
    })
}

/// Full eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn of(h: &DenseOperator<T>) -> Result<Self> {
        let scale = h
            .matrix
            .iter()
            .fold(T::one(), |a, z| if cabs(*z) > a { cabs(*z) } else { a });
        if !h.is_hermitian(T::tolerance() * scale) {
            return Err(Error::invalid(format!(
                "operator is not Hermitian (defect {:.3e})",
                h.hermiticity_defect().as_f64()
            )));
        }
        let (values, vectors) = if h.is_real() {
            let re = h.matrix.map(|z| z.re);
            let eig = re.symmetric_eigen();
            (
                eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
                eig.eigenvectors.map(|x| Complex::new(x, T::zero())),
            )
        } else {
            let eig = h.matrix.clone().symmetric_eigen();
            (
                eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
                eig.eigenvectors,
            )
        };
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite eigenvalues"));
        let sorted_values = order.iter().map(|&i| values[i]).collect();
        let sorted_vectors = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
            vectors[(r, order[c])]
        });
        Ok(Spectrum {
            values: sorted_values,
            vectors: sorted_vectors,
        })
    }

    /// Applies `exp(-i H t)` to `v`.
    pub fn evolve(&self, v: &DVector<Complex<T>>, t: T) -> DVector<Complex<T>> {
        let mut coeffs = self.vectors.adjoint() * v;
        for (c, &e) in coeffs.iter_mut().zip(&self.values) {
            *c *= cis(-e * t);
        }
        &self.vectors * coeffs
    }

    /// Dense `exp(-i H t)`.
    pub fn unitary(&self, t: T) -> DMatrix<Complex<T>> {
        let mut scaled = self.vectors.clone();
        for (c, &e) in self.values.iter().enumerate() {
            let phase = cis(-e * t);
            for r in 0..scaled.nrows() {
                scaled[(r, c)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Number of eigenvalues within `tol` of the lowest one.
    pub fn ground_multiplicity(&self, tol: T) -> usize {
        let e0 = self.values[0];
        self.values.iter().take_while(|&&e| e - e0 <= tol).count()
    }
}

/// Lowest eigenpair of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct GroundState<T: Real> {
    pub energy: T,
    /// Representative unit ground vector, phase-fixed so its largest
    /// component is real and positive.
    pub state: DVector<Complex<T>>,
    /// Orthonormal basis of the (near-)degenerate ground space.
    pub ground_space: DMatrix<Complex<T>>,
    pub degenerate: bool,
}

impl<T: Real> GroundState<T> {
    /// Squared norm of the projection of `v` onto the ground space.
    pub fn overlap(&self, v: &DVector<Complex<T>>) -> T {
        let proj = self.ground_space.adjoint() * v;
        proj.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
    }
}

/// Relative splitting below which two levels count as degenerate.
pub fn degeneracy_tolerance<T: Real>(energy: T) -> T {
    T::default_epsilon().sqrt() * (T::one() + energy.abs())
}

pub fn ground_state<T: Real>(h: &DenseOperator<T>) -> Result<GroundState<T>> {
    let spectrum = Spectrum::of(h)?;
    Ok(ground_state_from(&spectrum))
}

pub fn ground_state_from<T: Real>(spectrum: &Spectrum<T>) -> GroundState<T> {
    let energy = spectrum.values[0];
    let mult = spectrum.ground_multiplicity(degeneracy_tolerance(energy));
    let ground_space = spectrum.vectors.columns(0, mult).into_owned();
    let mut state: DVector<Complex<T>> = spectrum.vectors.column(0).into_owned();
    let (imax, _) = state
        .iter()
        .enumerate()
        .fold((0, T::zero()), |(bi, bv), (i, z)| {
            if cabs(*z) > bv {
                (i, cabs(*z))
            } else {
                (bi, bv)
            }
        });
    let pivot = state[imax];
    let phase = pivot.conj().unscale(cabs(pivot));
    state *= phase;
    let norm = state.norm();
    state.unscale_mut(norm);
    GroundState {
        energy,
        state,
        ground_space,
        degenerate: mult > 1,
    }
}

/// One record of the versioned ground-energy golden file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoldenEnergy {
    pub n: usize,
    pub g: f64,
    pub j: f64,
    pub energy: f64,
}

pub const GOLDEN_HEADER: &str = "# isingqpe golden ground energies v1";

/// The ground-energy table shipped with the crate.
pub const BUILTIN_GOLDEN_ENERGIES: &str = include_str!("../golden/tim_ground_energies.txt");

pub fn parse_golden(text: &str) -> Result<Vec<GoldenEnergy>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == GOLDEN_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{GOLDEN_HEADER}`"),
            })
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |message: String| Error::Parse {
            line: idx + 1,
            message,
        };
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s}: {e}")));
        out.push(GoldenEnergy {
            n: fields[0].parse().map_err(|e| bad(format!("N: {e}")))?,
            g: num(fields[1])?,
            j: num(fields[2])?,
            energy: num(fields[3])?,
        });
    }
    Ok(out)
}

pub fn format_golden(records: &[GoldenEnergy]) -> String {
    let mut s = String::new();
    writeln!(s, "{GOLDEN_HEADER}").unwrap();
    writeln!(s, "# columns: N g J E_g").unwrap();
    for r in records {
        writeln!(s, "{} {} {} {:.11e}", r.n, r.g, r.j, r.energy).unwrap();
    }
    s
}

pub fn read_golden(path: &Path) -> Result<Vec<GoldenEnergy>> {
    parse_golden(&std::fs::read_to_string(path)?)
}

/// Diagonalizes each chain in `sizes` and returns golden records.
pub fn golden_sweep(sizes: &[usize], g: f64, j: f64) -> Result<Vec<GoldenEnergy>> {
    sizes
        .iter()
        .map(|&n| {
            let inst = TimInstance::<f64>::new(n, 1)?
                .with_field(g)?
                .with_coupling(j)?;
            let gs = ground_state(&build_hamiltonian(&inst)?)?;
            Ok(GoldenEnergy {
                n,
                g,
                j,
                energy: gs.energy,
            })
        })
        .collect()
}
