// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quantum optimal control for closed-system state transfer.
//!
//! The crate models the controlled evolution of a density matrix under the
//! Liouville-von Neumann equation and searches for piecewise-constant control
//! pulses that maximize the Uhlmann-Jozsa fidelity to a target state. The
//! solver follows the first-order necessary conditions of the maximum
//! principle: a forward state pass, a backward costate pass seeded by the
//! fidelity gradient, and a pointwise maximization of the control Hamiltonian
//! function, iterated with a relaxed update until the controls stabilize.
//!
//! Modules:
//! - [`linalg`]: complex-matrix helpers (eigendecomposition, exponential, PSD
//!   square roots).
//! - [`quantum`]: states, Bloch coordinates, fidelity, and its gradient.
//! - [`dynamics`]: Euler and exact piecewise-exponential propagation of states
//!   and costates on a uniform grid over [0, 1].
//! - [`spin`]: the driven two-level instance (static z-field, rotating
//!   transverse control).
//! - [`pmp`]: the iterative forward-backward solver and its pieces.
//! - [`pure_state`]: the pure-state reference method (quadratic cost,
//!   Lagrangian optimality system) used for cross-validation.
//! - [`sampling`]: seeded random states for tests and robustness studies.

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod pmp;
pub mod pure_state;
pub mod quantum;
pub mod sampling;
pub mod spin;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use quantum::{DensityMatrix, PureState};
