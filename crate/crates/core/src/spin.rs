// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! The driven spin-1/2 instance: a static z-field plus a rotating transverse
//! control field parameterized by Rabi amplitude, carrier frequency, and
//! phase. Solver units fix the Larmor frequency scale (omega0 = 1 by
//! default) and the horizon to [0, 1].

use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::quantum::{DensityMatrix, PureState};

/// Physical parameters of the two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams {
    /// Larmor frequency omega0 = gyromag * B0 (rad/time).
    pub omega0: f64,
    /// Magnetic ratio of the spin particle; kept for unit conversion only,
    /// the dynamics depend on omega0 alone.
    pub gyromag: f64,
}

impl Default for SpinParams {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            gyromag: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// The standard 2x2 Pauli matrices.
pub fn pauli(axis: PauliAxis) -> CMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match axis {
        PauliAxis::X => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        PauliAxis::Y => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        PauliAxis::Z => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

/// Full Hamiltonian (hbar = 1):
/// `H = -1/2 [[omega0, u e^{i(omega t + phi)}], [u e^{-i(omega t + phi)}, -omega0]]`,
/// i.e. drift `-(omega0/2) sigma_z` plus the rotating transverse drive with
/// `gyromag B_x = u cos(omega t + phi)` and `gyromag B_y = -u sin(omega t + phi)`.
/// Eigenvalues are `+-(1/2) sqrt(omega0^2 + u^2)` independent of omega, phi, t.
pub fn spin_hamiltonian(u: f64, omega: f64, phi: f64, t: f64, params: &SpinParams) -> CMatrix {
    let theta = omega * t + phi;
    let off = Complex64::from_polar(-0.5 * u, theta);
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(-0.5 * params.omega0, 0.0),
            off,
            off.conj(),
            Complex64::new(0.5 * params.omega0, 0.0),
        ],
    )
}

/// Drift part `-(omega0/2) sigma_z`.
pub fn drift_hamiltonian(params: &SpinParams) -> CMatrix {
    spin_hamiltonian(0.0, 0.0, 0.0, 0.0, params)
}

/// The |0> to |1> transfer instance: `rho(0) = [[1,0],[0,0]]`,
/// `sigma = [[0,0],[0,1]]`.
pub fn transfer_problem() -> (DensityMatrix, DensityMatrix) {
    (
        DensityMatrix::from_pure(&PureState::basis(2, 0)),
        DensityMatrix::from_pure(&PureState::basis(2, 1)),
    )
}

/// [`ControlModel`](crate::pmp::ControlModel) adapter for the driven spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinModel {
    pub params: SpinParams,
}

impl SpinModel {
    pub fn new(params: SpinParams) -> Self {
        Self { params }
    }
}

impl crate::pmp::ControlModel for SpinModel {
    fn dim(&self) -> usize {
        2
    }

    fn hamiltonian(&self, u: f64, omega: f64, phi: f64, t: f64) -> CMatrix {
        spin_hamiltonian(u, omega, phi, t, &self.params)
    }
}
