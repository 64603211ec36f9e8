// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Iterative forward-backward solver for the fidelity-maximizing state
//! transfer problem.
//!
//! Each iteration propagates the state forward, seeds the costate with the
//! fidelity gradient at the final time and integrates it backward, then
//! updates the controls by maximizing the control Hamiltonian function
//! `H_k(u, omega, phi) = tr(pi_k^dagger (-i)[H(u, omega, phi, t_k), rho_k])`
//! pointwise in k for the Rabi samples and globally for the carrier
//! frequency and phase. Updates are relaxed, and the relaxation factor is
//! halved whenever an iteration fails to improve on the best fidelity seen;
//! the pointwise argmax of a Hamiltonian that is linear in the control is a
//! bang-bang value, and a fixed relaxation factor locks the sweep into a
//! two-cycle around interior optima instead of converging onto them.
//!
//! The loop stops when the control, frequency, and phase updates all fall
//! below their tolerances, or at the iteration cap; either way the
//! best-fidelity iterate seen is returned.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    pairing, propagate, propagate_costate_with, step_exponential, CostateScheme, PropagatorKind,
    TimeGrid,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HERMITIAN_TOL};
use crate::quantum::{fidelity_gradient, fidelity_gradient_raw, fidelity_raw, DensityMatrix};

/// Time-dependent Hamiltonian family parameterized by one Rabi amplitude, a
/// carrier frequency, and a phase.
pub trait ControlModel {
    fn dim(&self) -> usize;

    /// Hamiltonian at time `t` for control value `u` and carrier `(omega, phi)`.
    fn hamiltonian(&self, u: f64, omega: f64, phi: f64, t: f64) -> CMatrix;

    /// Derivative of the Hamiltonian with respect to the control amplitude.
    /// The default assumes the model is affine in `u`.
    fn control_coupling(&self, omega: f64, phi: f64, t: f64) -> CMatrix {
        self.hamiltonian(1.0, omega, phi, t) - self.hamiltonian(0.0, omega, phi, t)
    }
}

/// Piecewise-constant control: one Rabi sample per subinterval plus a global
/// carrier frequency and phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    pub u: Vec<f64>,
    pub omega: f64,
    pub phi: f64,
}

impl ControlField {
    pub fn constant(u: f64, n_steps: usize, omega: f64, phi: f64) -> Self {
        Self {
            u: vec![u; n_steps],
            omega,
            phi,
        }
    }

    pub fn validate(&self, bounds: (f64, f64)) -> Result<()> {
        if !self.omega.is_finite() || !self.phi.is_finite() {
            return Err(Error::NonFinite);
        }
        for &u in &self.u {
            if !u.is_finite() {
                return Err(Error::NonFinite);
            }
            if u < bounds.0 - 1e-12 || u > bounds.1 + 1e-12 {
                return Err(Error::OutOfRange {
                    name: "u",
                    value: u,
                    min: bounds.0,
                    max: bounds.1,
                });
            }
        }
        Ok(())
    }

    /// Left-endpoint sample index of the subinterval containing `t`.
    fn interval_index(&self, t: f64) -> usize {
        let n = self.u.len();
        ((t * n as f64).round() as usize).min(n.saturating_sub(1))
    }

    /// Hamiltonian map t -> H(u(t), omega, phi, t) for the propagators.
    pub fn hamiltonian_map<'a, M: ControlModel>(
        &'a self,
        model: &'a M,
    ) -> impl Fn(f64) -> CMatrix + 'a {
        move |t| self.hamiltonian_at(model, t)
    }

    fn hamiltonian_at<M: ControlModel>(&self, model: &M, t: f64) -> CMatrix {
        model.hamiltonian(self.u[self.interval_index(t)], self.omega, self.phi, t)
    }
}

/// Initial guess for the control iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialControl {
    /// Constant Rabi amplitude with the given carrier.
    Constant { u: f64, omega: f64, phi: f64 },
    /// Explicit per-interval samples.
    Samples { u: Vec<f64>, omega: f64, phi: f64 },
    /// Seeded uniform samples inside the control bounds.
    Random { seed: u64, omega: f64, phi: f64 },
}

/// Solver configuration: grid size, control bounds, stopping tolerances,
/// relaxation, propagator choice, and search resolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub n_steps: usize,
    pub u_bounds: (f64, f64),
    pub eps_u: f64,
    pub eps_omega: f64,
    pub eps_phi: f64,
    pub max_iterations: usize,
    /// Relaxation factor eta in (0, 1] blending the previous control with the
    /// pointwise argmax.
    pub relaxation: f64,
    /// Lower bound for the adaptively halved relaxation factor.
    pub relaxation_floor: f64,
    pub propagator: PropagatorKind,
    pub costate_scheme: CostateScheme,
    /// Coarse-search resolution for the per-step control maximization.
    pub grid_points_u: usize,
    /// Half-width of the carrier-frequency search window around the current
    /// iterate.
    pub omega_window: f64,
    pub omega_grid_points: usize,
    /// Half-width of the phase search window around the current iterate.
    pub phi_window: f64,
    pub phi_grid_points: usize,
    /// Width at which golden-section refinement stops.
    pub refine_tol: f64,
    pub init: InitialControl,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_steps: 100,
            u_bounds: (0.0, 2.0 * std::f64::consts::PI),
            eps_u: 1e-4,
            eps_omega: 1e-4,
            eps_phi: 1e-4,
            max_iterations: 500,
            relaxation: 0.3,
            relaxation_floor: 1e-6,
            propagator: PropagatorKind::Exponential,
            costate_scheme: CostateScheme::Backward,
            grid_points_u: 64,
            omega_window: 0.5,
            omega_grid_points: 33,
            phi_window: std::f64::consts::PI,
            phi_grid_points: 33,
            refine_tol: 1e-8,
            init: InitialControl::Constant {
                u: 1.0,
                omega: 1.0,
                phi: 0.0,
            },
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 2 {
            return Err(Error::InvalidConfig("n_steps must be at least 2".into()));
        }
        let (u_min, u_max) = self.u_bounds;
        if !u_min.is_finite() || !u_max.is_finite() || u_min >= u_max {
            return Err(Error::InvalidConfig(format!(
                "u_bounds requires u_min < u_max, got [{}, {}]",
                self.u_bounds.0, self.u_bounds.1
            )));
        }
        for (name, value) in [
            ("eps_u", self.eps_u),
            ("eps_omega", self.eps_omega),
            ("eps_phi", self.eps_phi),
            ("omega_window", self.omega_window),
            ("phi_window", self.phi_window),
            ("refine_tol", self.refine_tol),
            ("relaxation_floor", self.relaxation_floor),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {value}"
                )));
            }
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
        if self.grid_points_u < 2 || self.omega_grid_points < 2 || self.phi_grid_points < 2 {
            return Err(Error::InvalidConfig(
                "coarse search grids need at least 2 points".into(),
            ));
        }
        Ok(())
    }

    /// Materialize the configured initial guess, clamped into the bounds.
    pub fn initial_control(&self) -> Result<ControlField> {
        let clamp = |x: f64| x.clamp(self.u_bounds.0, self.u_bounds.1);
        let field = match &self.init {
            InitialControl::Constant { u, omega, phi } => {
                ControlField::constant(clamp(*u), self.n_steps, *omega, *phi)
            }
            InitialControl::Samples { u, omega, phi } => {
                if u.len() != self.n_steps {
                    return Err(Error::InvalidConfig(format!(
                        "initial control has {} samples, grid expects {}",
                        u.len(),
                        self.n_steps
                    )));
                }
                ControlField {
                    u: u.iter().map(|&x| clamp(x)).collect(),
                    omega: *omega,
                    phi: *phi,
                }
            }
            InitialControl::Random { seed, omega, phi } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let u = (0..self.n_steps)
                    .map(|_| rng.random_range(self.u_bounds.0..self.u_bounds.1))
                    .collect();
                ControlField {
                    u,
                    omega: *omega,
                    phi: *phi,
                }
            }
        };
        field.validate(self.u_bounds)?;
        Ok(field)
    }
}

/// A state-transfer instance: model plus initial and target states.
#[derive(Debug, Clone)]
pub struct TransferProblem<M> {
    pub model: M,
    pub rho0: DensityMatrix,
    pub sigma: DensityMatrix,
}

/// Everything recorded along the returned (best) iterate.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub grid: TimeGrid,
    pub states: Vec<CMatrix>,
    pub costates: Vec<CMatrix>,
    pub controls: ControlField,
    /// Control Hamiltonian function values per subinterval.
    pub hamiltonian_values: Vec<f64>,
    /// Fidelity of every evaluated iterate, in iteration order.
    pub fidelity_history: Vec<f64>,
}

/// Per-iteration progress of the solve loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    /// Fidelity of the iterate evaluated at this iteration.
    pub fidelity: f64,
    /// Largest control-sample change applied by the update.
    pub max_delta_u: f64,
    /// Carrier frequency after the update.
    pub omega: f64,
    /// Carrier phase after the update.
    pub phi: f64,
}

/// Solver output: the best-fidelity control seen, its trajectory, and how
/// the loop exited.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub control: ControlField,
    pub trajectory: TrajectoryRecord,
    pub final_fidelity: f64,
    pub iterations: usize,
    /// True when the stopping test passed; false when the iteration cap hit.
    pub converged: bool,
    /// One entry per loop iteration, in order.
    pub iteration_log: Vec<IterationStats>,
}

/// tr(a b) without forming the product matrix.
fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            sum += a[(i, j)] * b[(j, i)];
        }
    }
    sum
}

/// Weight matrix `K = -i [rho, pi]` such that the control Hamiltonian
/// function is `tr(K H)`; Hermitian for Hermitian pi, rho.
fn hamiltonian_weight(pi: &CMatrix, rho: &CMatrix) -> CMatrix {
    (rho * pi - pi * rho).map(|z| z * Complex64::new(0.0, -1.0))
}

/// The control Hamiltonian function `tr(pi^dagger (-i)[h, rho])`.
///
/// Real for Hermitian pi and rho; an imaginary residue above 1e-8 is
/// reported as a numerical failure.
pub fn pontryagin_hamiltonian(pi: &CMatrix, rho: &CMatrix, h: &CMatrix) -> Result<f64> {
    linalg::ensure_same_dim(pi, rho)?;
    linalg::ensure_same_dim(pi, h)?;
    linalg::ensure_hermitian(pi, HERMITIAN_TOL)?;
    linalg::ensure_hermitian(rho, HERMITIAN_TOL)?;
    let value = trace_of_product(&hamiltonian_weight(pi, rho), h);
    if value.im.abs() > 1e-8 {
        return Err(Error::numerical(
            "pontryagin_hamiltonian",
            format!("imaginary residue {:.3e}", value.im),
        ));
    }
    Ok(value.re)
}

/// Terminal costate: the fidelity gradient at the final state.
pub fn terminal_costate(rho_final: &DensityMatrix, sigma: &DensityMatrix) -> Result<CMatrix> {
    fidelity_gradient(rho_final, sigma)
}

/// Deterministic golden-section maximization on [a, b] down to width `tol`.
/// Ties prefer the left (smaller) side.
fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if b - a <= tol {
        return 0.5 * (a + b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Coarse grid scan followed by golden-section refinement. The scan keeps
/// the first (smallest) argument on ties, and the refined point replaces it
/// only when strictly better, so flat objectives resolve to the smallest
/// candidate.
fn argmax_1d(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize, tol: f64) -> f64 {
    let cell = (hi - lo) / (points - 1) as f64;
    let mut best_x = lo;
    let mut best_f = f(lo);
    for i in 1..points {
        let x = lo + cell * i as f64;
        let fx = f(x);
        if fx > best_f {
            best_f = fx;
            best_x = x;
        }
    }
    let refined = golden_max(f, (best_x - cell).max(lo), (best_x + cell).min(hi), tol);
    if f(refined) > best_f {
        refined
    } else {
        best_x
    }
}

/// Step 5 pointwise update: the admissible control value maximizing the
/// control Hamiltonian function at one grid point, by coarse search plus
/// golden-section refinement. Ties resolve toward the smallest value.
pub fn maximize_step_hamiltonian<M: ControlModel>(
    model: &M,
    pi_k: &CMatrix,
    rho_k: &CMatrix,
    t_k: f64,
    omega: f64,
    phi: f64,
    config: &SolverConfig,
) -> Result<f64> {
    linalg::ensure_hermitian(pi_k, HERMITIAN_TOL)?;
    linalg::ensure_hermitian(rho_k, HERMITIAN_TOL)?;
    let weight = hamiltonian_weight(pi_k, rho_k);
    let objective = |u: f64| trace_of_product(&weight, &model.hamiltonian(u, omega, phi, t_k)).re;
    Ok(argmax_1d(
        &objective,
        config.u_bounds.0,
        config.u_bounds.1,
        config.grid_points_u,
        config.refine_tol,
    ))
}

/// Step 5 global update: the carrier frequency and phase maximizing the
/// summed control Hamiltonian function over the recorded trajectories, by a
/// coarse 2-D scan around the current values followed by alternating
/// golden-section refinement. Flat objectives resolve to the scan origin
/// (the lower corner of the search window).
pub fn update_global_parameters<M: ControlModel>(
    model: &M,
    record: &TrajectoryRecord,
    config: &SolverConfig,
) -> Result<(f64, f64)> {
    global_argmax(
        model,
        &record.states,
        &record.costates,
        &record.controls,
        record.grid,
        config,
    )
}

fn global_argmax<M: ControlModel>(
    model: &M,
    states: &[CMatrix],
    costates: &[CMatrix],
    control: &ControlField,
    grid: TimeGrid,
    config: &SolverConfig,
) -> Result<(f64, f64)> {
    let n = grid.n_steps();
    let weights: Vec<CMatrix> = (0..n)
        .map(|k| hamiltonian_weight(&costates[k], &states[k]))
        .collect();
    let objective = |omega: f64, phi: f64| -> f64 {
        let mut total = 0.0;
        for (k, weight) in weights.iter().enumerate() {
            let h = model.hamiltonian(control.u[k], omega, phi, grid.point(k));
            total += trace_of_product(weight, &h).re;
        }
        total
    };

    let omega_lo = control.omega - config.omega_window;
    let omega_hi = control.omega + config.omega_window;
    let phi_lo = control.phi - config.phi_window;
    let phi_hi = control.phi + config.phi_window;
    let omega_cell = (omega_hi - omega_lo) / (config.omega_grid_points - 1) as f64;
    let phi_cell = (phi_hi - phi_lo) / (config.phi_grid_points - 1) as f64;

    let mut best = (omega_lo, phi_lo);
    let mut best_f = objective(omega_lo, phi_lo);
    for i in 0..config.omega_grid_points {
        let omega = omega_lo + omega_cell * i as f64;
        for j in 0..config.phi_grid_points {
            let phi = phi_lo + phi_cell * j as f64;
            let value = objective(omega, phi);
            if value > best_f {
                best_f = value;
                best = (omega, phi);
            }
        }
    }

    // Alternating 1-D refinements inside the best cell's neighborhood.
    let (mut omega_best, mut phi_best) = best;
    for _ in 0..3 {
        let f_omega = |omega: f64| objective(omega, phi_best);
        omega_best = argmax_1d(
            &f_omega,
            (omega_best - omega_cell).max(omega_lo),
            (omega_best + omega_cell).min(omega_hi),
            5,
            config.refine_tol,
        );
        let f_phi = |phi: f64| objective(omega_best, phi);
        phi_best = argmax_1d(
            &f_phi,
            (phi_best - phi_cell).max(phi_lo),
            (phi_best + phi_cell).min(phi_hi),
            5,
            config.refine_tol,
        );
    }

    // Never return a point worse than the current iterate.
    if objective(control.omega, control.phi) > objective(omega_best, phi_best) {
        return Ok((control.omega, control.phi));
    }
    Ok((omega_best, phi_best))
}

/// One forward-backward sweep: states, costates, and the iterate's fidelity.
fn sweep<M: ControlModel>(
    problem: &TransferProblem<M>,
    control: &ControlField,
    grid: TimeGrid,
    config: &SolverConfig,
) -> Result<(Vec<CMatrix>, Vec<CMatrix>, f64)> {
    let map = control.hamiltonian_map(&problem.model);
    let states = propagate(&map, problem.rho0.matrix(), grid, config.propagator)?;
    let rho_final = &states[grid.n_steps()];
    let fid = fidelity_raw(rho_final, problem.sigma.matrix())?;
    let pi_final = fidelity_gradient_raw(rho_final, problem.sigma.matrix())?;
    let costates = propagate_costate_with(
        config.costate_scheme,
        &map,
        &pi_final,
        grid,
        config.propagator,
    )?;
    if config.propagator == PropagatorKind::Exponential
        && config.costate_scheme == CostateScheme::Backward
    {
        let drift = (pairing(&costates[0], &states[0])
            - pairing(&costates[grid.n_steps()], &states[grid.n_steps()]))
        .norm();
        debug_assert!(drift < 1e-8, "costate-state pairing drifted by {drift:.3e}");
    }
    Ok((states, costates, fid))
}

/// Adjoint-based and finite-difference derivatives of the final fidelity
/// with respect to one control sample.
///
/// The adjoint value is `dH_k/du * dt` with the derivative of the control
/// Hamiltonian function evaluated on the state and costate advanced to the
/// midpoint of the subinterval; the left-endpoint evaluation carries an
/// O(dt) bias that the midpoint removes. The finite-difference value
/// re-propagates the trajectory with the sample perturbed by +-1e-6.
pub fn control_gradient_check<M: ControlModel>(
    problem: &TransferProblem<M>,
    control: &ControlField,
    k: usize,
    config: &SolverConfig,
) -> Result<(f64, f64)> {
    let grid = TimeGrid::new(control.u.len())?;
    if k >= grid.n_steps() {
        return Err(Error::InvalidConfig(format!(
            "step index {k} out of range for {} samples",
            grid.n_steps()
        )));
    }
    let (states, costates, _) = sweep(problem, control, grid, config)?;

    let t_k = grid.point(k);
    let h_k = problem
        .model
        .hamiltonian(control.u[k], control.omega, control.phi, t_k);
    let half = 0.5 * grid.dt();
    let (rho_mid, pi_mid) = match config.propagator {
        PropagatorKind::Exponential => (
            step_exponential(&h_k, &states[k], half)?,
            step_exponential(&h_k, &costates[k + 1], -half)?,
        ),
        PropagatorKind::Euler => {
            let rho_rhs = crate::dynamics::liouville_rhs(&h_k, &states[k])?;
            let pi_rhs = crate::dynamics::liouville_rhs(&h_k, &costates[k + 1])?;
            (
                crate::dynamics::step_euler(&states[k], &rho_rhs, half),
                crate::dynamics::step_euler(&costates[k + 1], &pi_rhs, -half),
            )
        }
    };
    let coupling = problem
        .model
        .control_coupling(control.omega, control.phi, t_k);
    let slope = trace_of_product(&hamiltonian_weight(&pi_mid, &rho_mid), &coupling);
    if slope.im.abs() > 1e-8 {
        return Err(Error::numerical(
            "control_gradient_check",
            format!("imaginary residue {:.3e}", slope.im),
        ));
    }
    let adjoint = slope.re * grid.dt();

    let fd_step = 1e-6;
    let evaluate = |delta: f64| -> Result<f64> {
        let mut perturbed = control.clone();
        perturbed.u[k] += delta;
        let map = perturbed.hamiltonian_map(&problem.model);
        let states = propagate(&map, problem.rho0.matrix(), grid, config.propagator)?;
        fidelity_raw(&states[grid.n_steps()], problem.sigma.matrix())
    };
    let finite_difference = (evaluate(fd_step)? - evaluate(-fd_step)?) / (2.0 * fd_step);

    Ok((adjoint, finite_difference))
}

/// Run the full iterative scheme on a transfer problem.
pub fn solve<M: ControlModel>(
    problem: &TransferProblem<M>,
    config: &SolverConfig,
) -> Result<SolveResult> {
    config.validate()?;
    let dim = problem.model.dim();
    if problem.rho0.dim() != dim || problem.sigma.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: problem.rho0.dim(),
            right: dim,
        });
    }
    let grid = TimeGrid::new(config.n_steps)?;
    let mut control = config.initial_control()?;
    let mut eta = config.relaxation;
    let mut fidelity_history: Vec<f64> = Vec::new();
    let mut iteration_log: Vec<IterationStats> = Vec::new();
    let mut best: Option<(f64, ControlField)> = None;
    let mut converged = false;
    let mut iterations = 0usize;

    for _ in 0..config.max_iterations {
        let (states, costates, fid) = sweep(problem, &control, grid, config)
            .map_err(|e| solve_stage_error(e, iterations, "sweep"))?;
        fidelity_history.push(fid);
        let improved = best.as_ref().is_none_or(|(best_fid, _)| fid > *best_fid);
        if improved {
            best = Some((fid, control.clone()));
        } else {
            eta = (0.5 * eta).max(config.relaxation_floor);
        }

        let mut u_star = Vec::with_capacity(grid.n_steps());
        for k in 0..grid.n_steps() {
            let candidate = maximize_step_hamiltonian(
                &problem.model,
                &costates[k],
                &states[k],
                grid.point(k),
                control.omega,
                control.phi,
                config,
            )
            .map_err(|e| solve_stage_error(e, iterations, "maximize_step_hamiltonian"))?;
            // Maximization soundness: the returned value can never score
            // below the current control sample.
            let weight = hamiltonian_weight(&costates[k], &states[k]);
            let score = |u: f64| {
                trace_of_product(
                    &weight,
                    &problem
                        .model
                        .hamiltonian(u, control.omega, control.phi, grid.point(k)),
                )
                .re
            };
            let best_u = if score(control.u[k]) > score(candidate) {
                control.u[k]
            } else {
                candidate
            };
            debug_assert!(score(best_u) + 1e-12 >= score(control.u[k]));
            u_star.push(best_u);
        }

        let (omega_star, phi_star) =
            global_argmax(&problem.model, &states, &costates, &control, grid, config)
                .map_err(|e| solve_stage_error(e, iterations, "update_global_parameters"))?;

        let blend = |old: f64, new: f64| (1.0 - eta) * old + eta * new;
        let next = ControlField {
            u: control
                .u
                .iter()
                .zip(&u_star)
                .map(|(&old, &new)| blend(old, new).clamp(config.u_bounds.0, config.u_bounds.1))
                .collect(),
            omega: blend(control.omega, omega_star),
            phi: blend(control.phi, phi_star),
        };

        let delta_u = control
            .u
            .iter()
            .zip(&next.u)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let delta_omega = (control.omega - next.omega).abs();
        let delta_phi = (control.phi - next.phi).abs();

        control = next;
        iterations += 1;
        iteration_log.push(IterationStats {
            fidelity: fid,
            max_delta_u: delta_u,
            omega: control.omega,
            phi: control.phi,
        });
        if delta_u < config.eps_u && delta_omega < config.eps_omega && delta_phi < config.eps_phi {
            converged = true;
            break;
        }
    }

    // The last accepted control has not been scored inside the loop.
    let (_, _, last_fid) = sweep(problem, &control, grid, config)
        .map_err(|e| solve_stage_error(e, iterations, "final sweep"))?;
    fidelity_history.push(last_fid);
    if best
        .as_ref()
        .is_none_or(|(best_fid, _)| last_fid > *best_fid)
    {
        best = Some((last_fid, control.clone()));
    }

    let (best_fid, best_control) = best.expect("at least one iterate was evaluated");
    let (states, costates, final_fidelity) = sweep(problem, &best_control, grid, config)?;
    debug_assert!((final_fidelity - best_fid).abs() < 1e-12);

    let mut hamiltonian_values = Vec::with_capacity(grid.n_steps());
    for k in 0..grid.n_steps() {
        let h = problem.model.hamiltonian(
            best_control.u[k],
            best_control.omega,
            best_control.phi,
            grid.point(k),
        );
        hamiltonian_values.push(pontryagin_hamiltonian(&costates[k], &states[k], &h)?);
    }

    Ok(SolveResult {
        control: best_control.clone(),
        trajectory: TrajectoryRecord {
            grid,
            states,
            costates,
            controls: best_control,
            hamiltonian_values,
            fidelity_history,
        },
        final_fidelity,
        iterations,
        converged,
        iteration_log,
    })
}

fn solve_stage_error(e: Error, iteration: usize, stage: &str) -> Error {
    match e {
        Error::Numerical {
            stage: inner,
            detail,
        } => Error::numerical(
            format!("solve iteration {iteration}, {stage} ({inner})"),
            detail,
        ),
        other => other,
    }
}
