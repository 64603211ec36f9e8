// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time propagation of states and costates under the Liouville-von Neumann
//! equation on a uniform grid over the fixed horizon [0, 1].
//!
//! Two steppers are provided: first-order Euler and the exact
//! piecewise-exponential unitary sandwich. The Hamiltonian is sampled at the
//! left endpoint of each subinterval, which makes the exponential stepper
//! exact for piecewise-constant controls. The costate obeys the same
//! equation of motion as the state and is integrated backward from its
//! terminal condition; the forward ordering that seeds the initial costate
//! from the formal solution is kept behind [`CostateScheme`] for comparison.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, commutator, eigh, CMatrix, HERMITIAN_TOL};

/// Uniform grid on [0, 1]: points t_k = k/N for k = 0..=N, step 1/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidConfig("grid needs at least one step".into()));
        }
        Ok(Self { n_steps })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.n_steps as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        k as f64 / self.n_steps as f64
    }

    /// Number of stored trajectory samples (N + 1).
    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }
}

/// Stepper choice for state and costate propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorKind {
    /// First-order `x + dt * rhs` update.
    Euler,
    /// Exact unitary sandwich `U x U^dagger` with `U = exp(-i H dt)`.
    Exponential,
}

/// Ordering of the costate pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostateScheme {
    /// Integrate the adjoint equation backward from the terminal condition.
    Backward,
    /// Map the terminal costate to t = 0 through the formal solution with a
    /// summed exponent, then sweep forward; reproduces the literal ordering
    /// this solver's published description uses.
    ForwardFromFormalSolution,
}

/// Right-hand side of the equation of motion: `-i [H, rho]` (hbar = 1).
pub fn liouville_rhs(h: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
    linalg::ensure_hermitian(h, HERMITIAN_TOL)?;
    let comm = commutator(h, rho)?;
    Ok(comm.map(|z| z * Complex64::new(0.0, -1.0)))
}

/// Euler update `x + dt * rhs`.
pub fn step_euler(x: &CMatrix, rhs: &CMatrix, dt: f64) -> CMatrix {
    x + rhs.map(|z| z * Complex64::new(dt, 0.0))
}

/// Unitary `exp(-i h dt)` for Hermitian `h`, built from the
/// eigendecomposition so it is unitary to machine precision.
pub fn unitary_step(h: &CMatrix, dt: f64) -> Result<CMatrix> {
    let (eigenvalues, vectors) = eigh(h)?;
    let dim = h.nrows();
    let mut phases = CMatrix::zeros(dim, dim);
    for (k, &w) in eigenvalues.iter().enumerate() {
        phases[(k, k)] = Complex64::from_polar(1.0, -w * dt);
    }
    Ok(&vectors * phases * vectors.adjoint())
}

/// One exact step `U rho U^dagger` with `U = exp(-i h dt)`; preserves trace,
/// Hermiticity, and the spectrum.
pub fn step_exponential(h: &CMatrix, rho: &CMatrix, dt: f64) -> Result<CMatrix> {
    linalg::ensure_same_dim(h, rho)?;
    let u = unitary_step(h, dt)?;
    Ok(&u * rho * u.adjoint())
}

fn check_finite(m: &CMatrix, stage: &str, step: usize) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::numerical(
            stage,
            format!("non-finite entries at step {step}"),
        ))
    }
}

/// Forward trajectory of the state: returns N + 1 matrices with the
/// Hamiltonian evaluated at the left endpoint of each subinterval.
pub fn propagate(
    hamiltonian: impl Fn(f64) -> CMatrix,
    rho0: &CMatrix,
    grid: TimeGrid,
    kind: PropagatorKind,
) -> Result<Vec<CMatrix>> {
    let mut trajectory = Vec::with_capacity(grid.n_points());
    trajectory.push(rho0.clone());
    for k in 0..grid.n_steps() {
        let h = hamiltonian(grid.point(k));
        let current = &trajectory[k];
        let next = match kind {
            PropagatorKind::Euler => step_euler(current, &liouville_rhs(&h, current)?, grid.dt()),
            PropagatorKind::Exponential => step_exponential(&h, current, grid.dt())?,
        };
        check_finite(&next, "propagate", k + 1)?;
        trajectory.push(next);
    }
    Ok(trajectory)
}

/// Costate trajectory with the backward scheme (see [`CostateScheme`]).
pub fn propagate_costate(
    hamiltonian: impl Fn(f64) -> CMatrix,
    pi_final: &CMatrix,
    grid: TimeGrid,
    kind: PropagatorKind,
) -> Result<Vec<CMatrix>> {
    propagate_costate_with(CostateScheme::Backward, hamiltonian, pi_final, grid, kind)
}

/// Costate trajectory under the selected ordering.
///
/// The adjoint variable satisfies the same equation of motion as the state,
/// so the backward scheme steps `pi_k = U_k^dagger pi_{k+1} U_k` (or the
/// matching Euler update) from the terminal condition. The forward scheme
/// first maps the terminal costate to t = 0 with
/// `W = exp(i dt sum_k H_k)` and then sweeps forward, overwriting the
/// terminal sample with its re-integrated value.
pub fn propagate_costate_with(
    scheme: CostateScheme,
    hamiltonian: impl Fn(f64) -> CMatrix,
    pi_final: &CMatrix,
    grid: TimeGrid,
    kind: PropagatorKind,
) -> Result<Vec<CMatrix>> {
    linalg::ensure_hermitian(pi_final, HERMITIAN_TOL)?;
    match scheme {
        CostateScheme::Backward => {
            let mut trajectory =
                vec![CMatrix::zeros(pi_final.nrows(), pi_final.ncols()); grid.n_points()];
            trajectory[grid.n_steps()] = pi_final.clone();
            for k in (0..grid.n_steps()).rev() {
                let h = hamiltonian(grid.point(k));
                let next = &trajectory[k + 1];
                let current = match kind {
                    PropagatorKind::Euler => {
                        step_euler(next, &liouville_rhs(&h, next)?, -grid.dt())
                    }
                    PropagatorKind::Exponential => step_exponential(&h, next, -grid.dt())?,
                };
                check_finite(&current, "propagate_costate", k)?;
                trajectory[k] = current;
            }
            Ok(trajectory)
        }
        CostateScheme::ForwardFromFormalSolution => {
            let dim = pi_final.nrows();
            let mut summed = CMatrix::zeros(dim, dim);
            for k in 0..grid.n_steps() {
                summed += hamiltonian(grid.point(k)).map(|z| z * Complex64::new(grid.dt(), 0.0));
            }
            let w = linalg::matrix_exp(&summed.map(|z| z * Complex64::new(0.0, 1.0)))?;
            let pi0 = &w * pi_final * w.adjoint();
            check_finite(&pi0, "propagate_costate", 0)?;

            let mut trajectory = Vec::with_capacity(grid.n_points());
            trajectory.push(pi0);
            for k in 0..grid.n_steps() {
                let h = hamiltonian(grid.point(k));
                let current = &trajectory[k];
                let next = match kind {
                    PropagatorKind::Euler => {
                        step_euler(current, &liouville_rhs(&h, current)?, grid.dt())
                    }
                    PropagatorKind::Exponential => step_exponential(&h, current, grid.dt())?,
                };
                check_finite(&next, "propagate_costate", k + 1)?;
                trajectory.push(next);
            }
            Ok(trajectory)
        }
    }
}

/// `tr(pi^dagger rho)`, the costate-state pairing conserved under joint
/// propagation with a shared Hamiltonian.
pub fn pairing(pi: &CMatrix, rho: &CMatrix) -> Complex64 {
    (pi.adjoint() * rho).trace()
}
