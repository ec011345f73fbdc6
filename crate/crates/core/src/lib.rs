//! Compiler and resource estimator for phase estimation of the transverse-field
//! Ising chain on a concatenated-code quantum architecture.
//!
//! The pipeline runs in four stages:
//!
//! * [`tim`] builds the Hamiltonian and solves small chains exactly (the oracle).
//! * [`trotter`] and [`circuit`] lower the controlled evolution into a gate list,
//!   and [`sk`] compiles every rotation into `{H, T, S}` words.
//! * [`pe`] simulates the one-control-qubit phase-estimation loop end to end.
//! * [`ft`] turns cycle and qubit counts into an error-correction level,
//!   physical-qubit count and wall-clock time.
//!
//! Dense numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix `f64`, which the calibration tolerances need.

pub mod circuit;
pub mod error;
pub mod ft;
pub mod pe;
pub mod report;
pub mod scalar;
pub mod sk;
pub mod state;
pub mod tim;
pub mod trotter;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Instance = tim::TimInstance<f64>;
pub type StateVector64 = state::StateVector<f64>;
pub type Operator = tim::DenseOperator<f64>;
pub type GroundState64 = tim::GroundState<f64>;
pub type Spectrum64 = tim::Spectrum<f64>;
