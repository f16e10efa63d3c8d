//! Numerical simulator for the quantum adiabatic algorithm applied to
//! Diophantine equations.
//!
//! The algorithm starts in the coherent ground state of
//! `H_I = Σ (a†_i − α_i*)(a_i − α_i)`, interpolates linearly to the diagonal
//! problem Hamiltonian `H_P = D(a†_1 a_1, ..., a†_K a_K)²`, and declares the
//! Fock label measured with probability above one half to be the ground state
//! of `H_P`. This crate builds those operators on truncated Fock spaces with
//! abrupt or wrapped boundaries, integrates the evolution, and scans the
//! eigenpair matrix elements `⟨e(s)|H_P − H_I|f(s)⟩` whose non-vanishing the
//! identification criterion rests on.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the double-precision instantiation.

// `!(x > 0)` is deliberate throughout: NaN must fail every range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criterion;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod hamiltonian;
pub mod polynomial;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use evolution::{coherent_state, evolve, measure_probabilities, StateVector};
pub use fock::{BoundaryCondition, FockSpace, HermitianOperator};
pub use hamiltonian::{build_hi, build_hp, commutator_norm, interpolate, CoherentParams, Schedule};
pub use polynomial::DiophantinePolynomial;
pub use scalar::{Cplx, Real};
pub use spectral::{condition_scan, eigendecompose, partial_sum_probe, recurrence_residual, EigenSystem};

pub type C64 = num_complex::Complex64;
pub type Space = FockSpace<f64>;
pub type Boundary = BoundaryCondition<f64>;
pub type Operator = HermitianOperator<f64>;
pub type State = StateVector<f64>;
pub type Params = CoherentParams<f64>;
pub type Eigen = EigenSystem<f64>;
pub type ScanReport = spectral::ConditionScanReport<f64>;
