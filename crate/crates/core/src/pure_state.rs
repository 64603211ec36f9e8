// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pure-state reference method used to cross-validate the density-matrix
//! solver.
//!
//! The cost couples terminal distance to the target, quadratic control
//! effort, and optional per-level occupation penalties:
//! `J = 1/2 ||psi(T) - psi_f||^2 + (gamma/2) ||u||^2 + 1/2 sum_j alpha_j ||psi_j||^2`.
//! Its first-order optimality system is a forward Schrodinger equation, a
//! backward costate equation `p' = -i (H p - q)` with `q_j = alpha_j psi_j`
//! and `p(T) = -i (psi(T) - psi_f)`, and the pointwise control law
//! `u = (1/gamma) Re <p | H_c | psi>`. The solver sweeps the system with a
//! relaxed control update; the relaxation factor is halved whenever a
//! candidate step would increase the cost, so the recorded cost history is
//! non-increasing.

use num_complex::Complex64;

use crate::dynamics::{unitary_step, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, HERMITIAN_TOL};
use crate::quantum::PureState;

/// Adjoint variable of the pure-state optimality system. Costates are not
/// states: the norm is unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct PureCostate {
    pub amplitudes: CVector,
}

/// Weights of the quadratic cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CostWeights {
    /// Control-effort weight, strictly positive.
    pub gamma_reg: f64,
    /// Per-level occupation suppression weights, nonnegative.
    pub alpha: Vec<f64>,
}

impl CostWeights {
    pub fn new(gamma_reg: f64, alpha: Vec<f64>) -> Result<Self> {
        if !gamma_reg.is_finite() || gamma_reg <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gamma_reg must be positive, got {gamma_reg}"
            )));
        }
        if alpha.iter().any(|&a| a < 0.0 || !a.is_finite()) {
            return Err(Error::InvalidConfig(
                "alpha weights must be nonnegative".into(),
            ));
        }
        Ok(Self { gamma_reg, alpha })
    }

    /// Effort-only weights (no occupation penalty) for a given dimension.
    pub fn effort_only(gamma_reg: f64, dim: usize) -> Result<Self> {
        Self::new(gamma_reg, vec![0.0; dim])
    }
}

/// Pure-state transfer instance with one static control operator.
#[derive(Debug, Clone)]
pub struct PureTransferProblem {
    pub h_drift: CMatrix,
    pub h_control: CMatrix,
    pub psi0: PureState,
    pub psi_target: PureState,
}

impl PureTransferProblem {
    fn validate(&self) -> Result<usize> {
        let dim = linalg::ensure_same_dim(&self.h_drift, &self.h_control)?;
        linalg::ensure_hermitian(&self.h_drift, HERMITIAN_TOL)?;
        linalg::ensure_hermitian(&self.h_control, HERMITIAN_TOL)?;
        if self.psi0.dim() != dim || self.psi_target.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: self.psi0.dim(),
                right: dim,
            });
        }
        Ok(dim)
    }

    fn hamiltonian(&self, u: f64) -> CMatrix {
        &self.h_drift + self.h_control.map(|z| z * Complex64::new(u, 0.0))
    }
}

/// Initial pulse for the sweep. The quadratic cost landscape has large flat
/// regions (free evolution cannot move the phase-sensitive terminal term),
/// so transfer problems usually need a resonant-shaped starting pulse.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialPulse {
    Constant(f64),
    Samples(Vec<f64>),
}

/// Configuration of the fixed-point sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub n_steps: usize,
    /// Stop when the largest control change falls below this.
    pub eps_u: f64,
    pub max_iterations: usize,
    /// Initial relaxation factor in (0, 1].
    pub relaxation: f64,
    pub init: InitialPulse,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            n_steps: 100,
            eps_u: 1e-6,
            max_iterations: 500,
            relaxation: 0.5,
            init: InitialPulse::Constant(0.0),
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 2 {
            return Err(Error::InvalidConfig("n_steps must be at least 2".into()));
        }
        if !self.eps_u.is_finite() || self.eps_u <= 0.0 {
            return Err(Error::InvalidConfig("eps_u must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be positive".into(),
            ));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "relaxation must lie in (0, 1], got {}",
                self.relaxation
            )));
        }
        match &self.init {
            InitialPulse::Constant(u) => {
                if !u.is_finite() {
                    return Err(Error::NonFinite);
                }
            }
            InitialPulse::Samples(u) => {
                if u.len() != self.n_steps {
                    return Err(Error::InvalidConfig(format!(
                        "initial pulse has {} samples, grid expects {}",
                        u.len(),
                        self.n_steps
                    )));
                }
                if u.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite);
                }
            }
        }
        Ok(())
    }

    fn initial_pulse(&self) -> Vec<f64> {
        match &self.init {
            InitialPulse::Constant(u) => vec![*u; self.n_steps],
            InitialPulse::Samples(u) => u.clone(),
        }
    }
}

/// Output of [`solve_pure`].
#[derive(Debug, Clone)]
pub struct PureSolveResult {
    pub control: Vec<f64>,
    pub final_state: PureState,
    /// Cost of every accepted iterate, non-increasing.
    pub cost_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// How many times the relaxation factor was halved to keep the cost
    /// from increasing.
    pub relaxation_halvings: usize,
}

impl PureSolveResult {
    /// `|<psi_f | psi(T)>|^2`, the transfer fidelity of the final state.
    pub fn transfer_fidelity(&self, psi_target: &PureState) -> f64 {
        self.final_state
            .amplitudes()
            .dotc(psi_target.amplitudes())
            .norm_sqr()
    }
}

/// Schrodinger right-hand side `-i H psi` (hbar = 1).
pub fn schrodinger_rhs(h: &CMatrix, psi: &CVector) -> Result<CVector> {
    linalg::ensure_square(h)?;
    if h.nrows() != psi.len() {
        return Err(Error::DimensionMismatch {
            left: h.nrows(),
            right: psi.len(),
        });
    }
    Ok((h * psi).map(|z| z * Complex64::new(0.0, -1.0)))
}

/// Quadratic cost with L2 terms approximated by the left-endpoint rectangle
/// rule on the grid.
pub fn cost_functional(
    psi_trajectory: &[CVector],
    control: &[f64],
    psi_target: &PureState,
    weights: &CostWeights,
    grid: TimeGrid,
) -> Result<f64> {
    if psi_trajectory.len() != grid.n_points() || control.len() != grid.n_steps() {
        return Err(Error::InvalidConfig(format!(
            "trajectory/control lengths {}/{} inconsistent with grid of {} steps",
            psi_trajectory.len(),
            control.len(),
            grid.n_steps()
        )));
    }
    let dim = psi_target.dim();
    if psi_trajectory.iter().any(|psi| psi.len() != dim) {
        return Err(Error::DimensionMismatch {
            left: psi_trajectory[0].len(),
            right: dim,
        });
    }
    if weights.alpha.len() != dim {
        return Err(Error::InvalidConfig(format!(
            "alpha has {} entries for dimension {dim}",
            weights.alpha.len()
        )));
    }
    let dt = grid.dt();
    let terminal = 0.5 * (&psi_trajectory[grid.n_steps()] - psi_target.amplitudes()).norm_squared();
    let effort: f64 = 0.5 * weights.gamma_reg * control.iter().map(|&u| u * u).sum::<f64>() * dt;
    let mut occupation = 0.0;
    for psi in psi_trajectory.iter().take(grid.n_steps()) {
        for (j, &alpha_j) in weights.alpha.iter().enumerate() {
            occupation += 0.5 * alpha_j * psi[j].norm_sqr() * dt;
        }
    }
    Ok(terminal + effort + occupation)
}

/// Resonant cosine pulse `u_k = amplitude * cos(omega t_k + phi)` sampled at
/// the left grid endpoints; the physics-informed starting guess for
/// transfer problems driven through a single static coupling operator.
pub fn resonant_pulse(amplitude: f64, omega: f64, phi: f64, n_steps: usize) -> Vec<f64> {
    (0..n_steps)
        .map(|k| amplitude * (omega * k as f64 / n_steps as f64 + phi).cos())
        .collect()
}

/// Pointwise control law of the optimality system. For a complex control the
/// two real-part components combine into `conj(<p | H_c | psi>) / gamma`;
/// the real-control solver uses the real part.
pub fn control_law(p: &CVector, psi: &CVector, h_control: &CMatrix, gamma_reg: f64) -> Complex64 {
    let overlap = p.dotc(&(h_control * psi));
    overlap.conj() / Complex64::new(gamma_reg, 0.0)
}

/// Forward Schrodinger trajectory under piecewise-constant control, using
/// the exact per-interval unitary so the norm is conserved.
pub fn forward_trajectory(
    problem: &PureTransferProblem,
    control: &[f64],
    grid: TimeGrid,
) -> Result<Vec<CVector>> {
    if control.len() != grid.n_steps() {
        return Err(Error::InvalidConfig(format!(
            "{} control samples for grid of {} steps",
            control.len(),
            grid.n_steps()
        )));
    }
    let mut trajectory = Vec::with_capacity(grid.n_points());
    trajectory.push(problem.psi0.amplitudes().clone());
    for (k, &u) in control.iter().enumerate() {
        let step = unitary_step(&problem.hamiltonian(u), grid.dt())? * &trajectory[k];
        debug_assert!(
            (step.norm() - 1.0).abs() < 1e-10,
            "unitary step lost normalization"
        );
        trajectory.push(step);
    }
    Ok(trajectory)
}

/// Backward costate trajectory: `p(T) = -i (psi(T) - psi_f)` and
/// `p' = -i (H p - q)` with `q_j = alpha_j psi_j`, integrated with the exact
/// unitary for the Hamiltonian part and a rectangle rule for the source.
pub fn backward_trajectory(
    problem: &PureTransferProblem,
    weights: &CostWeights,
    psi_trajectory: &[CVector],
    control: &[f64],
    grid: TimeGrid,
) -> Result<Vec<PureCostate>> {
    let n = grid.n_steps();
    let dim = problem.psi0.dim();
    let terminal = (&psi_trajectory[n] - problem.psi_target.amplitudes())
        .map(|z| z * Complex64::new(0.0, -1.0));
    let mut costates = vec![
        PureCostate {
            amplitudes: CVector::zeros(dim)
        };
        grid.n_points()
    ];
    costates[n] = PureCostate {
        amplitudes: terminal,
    };
    for k in (0..n).rev() {
        let u_back = unitary_step(&problem.hamiltonian(control[k]), -grid.dt())?;
        let mut p = u_back * &costates[k + 1].amplitudes;
        // Source q at the left endpoint; enters as p' = -i H p + i q.
        for (j, &alpha_j) in weights.alpha.iter().enumerate() {
            p[j] -= Complex64::new(0.0, grid.dt() * alpha_j) * psi_trajectory[k][j];
        }
        costates[k] = PureCostate { amplitudes: p };
    }
    Ok(costates)
}

/// Fixed-point sweep on the optimality system.
pub fn solve_pure(
    problem: &PureTransferProblem,
    weights: &CostWeights,
    config: &BaselineConfig,
) -> Result<PureSolveResult> {
    let dim = problem.validate()?;
    config.validate()?;
    if weights.alpha.len() != dim {
        return Err(Error::InvalidConfig(format!(
            "alpha has {} entries for dimension {dim}",
            weights.alpha.len()
        )));
    }
    let grid = TimeGrid::new(config.n_steps)?;
    let mut control = config.initial_pulse();
    let mut psi_trajectory = forward_trajectory(problem, &control, grid)?;
    let mut cost = cost_functional(
        &psi_trajectory,
        &control,
        &problem.psi_target,
        weights,
        grid,
    )?;
    let mut cost_history = vec![cost];
    let mut eta = config.relaxation;
    let mut halvings = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    while iterations < config.max_iterations {
        let costates = backward_trajectory(problem, weights, &psi_trajectory, &control, grid)?;
        let desired: Vec<f64> = (0..grid.n_steps())
            .map(|k| {
                control_law(
                    &costates[k].amplitudes,
                    &psi_trajectory[k],
                    &problem.h_control,
                    weights.gamma_reg,
                )
                .re
            })
            .collect();

        // Accept the relaxed step only if it does not increase the cost;
        // the update direction is a descent direction, so halving eta
        // always terminates. Accepted steps let eta recover toward its
        // configured value, which keeps the sweep moving when the control
        // law's 1/gamma gain forces small steps early on.
        let (candidate, candidate_trajectory, candidate_cost) = loop {
            let candidate: Vec<f64> = control
                .iter()
                .zip(&desired)
                .map(|(&old, &new)| (1.0 - eta) * old + eta * new)
                .collect();
            let trajectory = forward_trajectory(problem, &candidate, grid)?;
            let candidate_cost =
                cost_functional(&trajectory, &candidate, &problem.psi_target, weights, grid)?;
            if candidate_cost <= cost + 1e-12 || eta <= 1e-14 {
                break (candidate, trajectory, candidate_cost);
            }
            eta *= 0.5;
            halvings += 1;
        };
        eta = (1.25 * eta).min(config.relaxation);

        let delta = control
            .iter()
            .zip(&candidate)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        control = candidate;
        psi_trajectory = candidate_trajectory;
        cost = candidate_cost;
        cost_history.push(cost);
        iterations += 1;
        if delta < config.eps_u {
            converged = true;
            break;
        }
    }

    let final_state = PureState::new(psi_trajectory[grid.n_steps()].clone())?;
    Ok(PureSolveResult {
        control,
        final_state,
        cost_history,
        iterations,
        converged,
        relaxation_halvings: halvings,
    })
}
