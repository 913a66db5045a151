//! Time-domain simulation of pulsed two-state quantum systems.
//!
//! The crate computes exact time-ordered evolution operators for kicked and
//! smoothly pulsed qubits, the no-time-ordering (NTO) approximation obtained by
//! exponentiating the time-averaged interaction, and the difference between the
//! two. All quantities are dimensionless with `hbar = 1`; unit conversion for
//! physical inputs lives in [`cli`].
//!
//! Module map:
//!
//! * [`su2`]: complex 2x2 algebra, Pauli matrices, SU(2) exponentials.
//! * [`pulses`]: pulse shapes, schedules, interaction-picture couplings and
//!   their time averages.
//! * [`propagators`]: closed-form kick propagators, NTO propagators and
//!   representation changes.
//! * [`ode`]: fixed-step RK4 integration of the two-state equations.
//! * [`perturbation`]: second-order Dyson terms and the commutator split.
//! * [`diagnostics`]: ordering-difference surfaces, qubit-map regimes and the
//!   Gaussian pulse-width / observation-time scans.
//! * [`cli`]: configuration, units and table serialization for the binary.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod ode;
pub mod perturbation;
pub mod propagators;
pub mod pulses;
pub mod quadrature;
pub mod su2;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use pulses::{Pulse, Representation, Schedule};
pub use su2::{Matrix2, PauliAxis, StateVector, UnitVector3};

/// Unitarity tolerance for propagators, `max |U^dagger U - I|`.
pub const TOL_UNITARY: f64 = 1e-10;
/// Normalization tolerance for states and unit vectors.
pub const TOL_NORM: f64 = 1e-10;
/// Absolute per-entry tolerance for single time integrals.
pub const TOL_QUAD: f64 = 1e-10;
/// Reported tolerance for nested (second-order) quadrature.
pub const TOL_QUAD2: f64 = 1e-8;
