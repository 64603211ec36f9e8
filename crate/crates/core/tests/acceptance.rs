// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one pass/fail line per criterion, run sequentially so
//! the per-criterion runtime bounds are measured without contention.
//!
//! Run with `cargo test -p qoc-core --test acceptance -- --nocapture` to see
//! the per-criterion report.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qoc_core::dynamics::{
    pairing, propagate, propagate_costate_with, CostateScheme, PropagatorKind, TimeGrid,
};
use qoc_core::linalg::CMatrix;
use qoc_core::pmp::{
    control_gradient_check, pontryagin_hamiltonian, solve, terminal_costate, ControlField,
    ControlModel, InitialControl, SolverConfig, TransferProblem,
};
use qoc_core::pure_state::{
    solve_pure, BaselineConfig, CostWeights, InitialPulse, PureTransferProblem,
};
use qoc_core::quantum::{fidelity, fidelity_gradient_raw, fidelity_raw, DensityMatrix, PureState};
use qoc_core::sampling::{random_density_matrix, random_pure_state, random_unitary};
use qoc_core::spin::{pauli, transfer_problem, PauliAxis, SpinModel, SpinParams};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn spin_problem() -> TransferProblem<SpinModel> {
    let (rho0, sigma) = transfer_problem();
    TransferProblem {
        model: SpinModel::new(SpinParams::default()),
        rho0,
        sigma,
    }
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Result<String, String>,
}

/// Criterion 1: Fidelity property suite: 200 random pairs at dims 2 and 4; symmetry,
/// range, pure-state reduction, and unitary invariance within 1e-9.
fn fidelity_properties() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for dim in [2usize, 4] {
        for i in 0..200 {
            let rho = random_density_matrix(&mut rng, dim);
            let sigma = random_density_matrix(&mut rng, dim);

            let f_rs = fidelity(&rho, &sigma).map_err(|e| e.to_string())?;
            let f_sr = fidelity(&sigma, &rho).map_err(|e| e.to_string())?;
            let sym = (f_rs - f_sr).abs();
            if sym > 1e-9 {
                return Err(format!(
                    "symmetry violation {sym:.2e} (dim {dim}, pair {i})"
                ));
            }
            if !(0.0..=1.0 + 1e-12).contains(&f_rs) {
                return Err(format!("range violation F = {f_rs} (dim {dim}, pair {i})"));
            }
            let f_self = fidelity(&rho, &rho).map_err(|e| e.to_string())?;
            if f_self < 1.0 - 1e-9 {
                return Err(format!(
                    "self-fidelity {f_self} below 1 (dim {dim}, pair {i})"
                ));
            }

            let pure = DensityMatrix::from_pure(&random_pure_state(&mut rng, dim));
            let f_pure = fidelity(&rho, &pure).map_err(|e| e.to_string())?;
            let overlap = (rho.matrix() * pure.matrix()).trace().re;
            let reduction = (f_pure - overlap).abs();
            if reduction > 1e-9 {
                return Err(format!(
                    "pure-state reduction violation {reduction:.2e} (dim {dim}, pair {i})"
                ));
            }

            let u = random_unitary(&mut rng, dim);
            let rho_u = &u * rho.matrix() * u.adjoint();
            let sigma_u = &u * sigma.matrix() * u.adjoint();
            let f_u = fidelity_raw(&rho_u, &sigma_u).map_err(|e| e.to_string())?;
            let invariance = (f_u - f_rs).abs();
            if invariance > 1e-9 {
                return Err(format!(
                    "unitary-invariance violation {invariance:.2e} (dim {dim}, pair {i})"
                ));
            }
            worst = worst.max(sym).max(reduction).max(invariance);
        }
    }
    Ok(format!("400 pairs, worst property residual {worst:.2e}"))
}

/// Central-difference reconstruction of the Hermitian fidelity gradient,
/// independent of the closed-form path under test.
fn gradient_oracle(rho: &CMatrix, sigma: &CMatrix, step: f64) -> CMatrix {
    let dim = rho.nrows();
    let mut grad = CMatrix::zeros(dim, dim);
    let df = |direction: &CMatrix| -> f64 {
        let plus = rho + direction.map(|z| z * c(step, 0.0));
        let minus = rho - direction.map(|z| z * c(step, 0.0));
        (fidelity_raw(&plus, sigma).unwrap() - fidelity_raw(&minus, sigma).unwrap()) / (2.0 * step)
    };
    for i in 0..dim {
        let mut dir = CMatrix::zeros(dim, dim);
        dir[(i, i)] = c(1.0, 0.0);
        grad[(i, i)] = c(df(&dir), 0.0);
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut real_dir = CMatrix::zeros(dim, dim);
            real_dir[(i, j)] = c(1.0, 0.0);
            real_dir[(j, i)] = c(1.0, 0.0);
            let re = df(&real_dir) / 2.0;
            let mut imag_dir = CMatrix::zeros(dim, dim);
            imag_dir[(i, j)] = c(0.0, 1.0);
            imag_dir[(j, i)] = c(0.0, -1.0);
            let im = df(&imag_dir) / 2.0;
            grad[(i, j)] = c(re, im);
            grad[(j, i)] = c(re, -im);
        }
    }
    grad
}

/// Criterion 2: Terminal costate vs central finite differences on 50 random qubit
/// pairs with pure and mixed targets; relative error at most 1e-5.
fn gradient_oracle_agreement() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let rho = random_density_matrix(&mut rng, 2);
        let sigma = if i % 2 == 0 {
            random_density_matrix(&mut rng, 2)
        } else {
            DensityMatrix::from_pure(&random_pure_state(&mut rng, 2))
        };
        let grad = terminal_costate(&rho, &sigma).map_err(|e| e.to_string())?;
        let oracle = gradient_oracle(rho.matrix(), sigma.matrix(), 1e-6);
        let rel = (&grad - &oracle).norm() / oracle.norm();
        if rel > 1e-5 {
            return Err(format!("pair {i}: relative gradient error {rel:.2e}"));
        }
        worst = worst.max(rel);
    }
    Ok(format!("50 pairs, worst relative error {worst:.2e}"))
}

/// Criterion 3: Dynamics invariants on the resonant spin problem at N = 1000 with the
/// exponential propagator: trace, Hermiticity, purity, pairing.
fn dynamics_invariants() -> Result<String, String> {
    let problem = spin_problem();
    let grid = TimeGrid::new(1000).map_err(|e| e.to_string())?;
    let control = ControlField::constant(std::f64::consts::PI, 1000, 1.0, 0.0);
    let map = control.hamiltonian_map(&problem.model);
    let states = propagate(
        &map,
        problem.rho0.matrix(),
        grid,
        PropagatorKind::Exponential,
    )
    .map_err(|e| e.to_string())?;
    let pi_final =
        fidelity_gradient_raw(&states[1000], problem.sigma.matrix()).map_err(|e| e.to_string())?;
    let costates = propagate_costate_with(
        CostateScheme::Backward,
        &map,
        &pi_final,
        grid,
        PropagatorKind::Exponential,
    )
    .map_err(|e| e.to_string())?;

    let reference_pairing = pairing(&costates[0], &states[0]);
    let mut worst_trace: f64 = 0.0;
    let mut worst_herm: f64 = 0.0;
    let mut worst_purity: f64 = 0.0;
    let mut worst_pairing: f64 = 0.0;
    for k in 0..=1000 {
        let rho = &states[k];
        worst_trace = worst_trace.max((rho.trace().re - 1.0).abs().max(rho.trace().im.abs()));
        worst_herm = worst_herm.max((rho - rho.adjoint()).norm());
        worst_purity = worst_purity.max(((rho * rho).trace().re - 1.0).abs());
        worst_pairing = worst_pairing.max((pairing(&costates[k], rho) - reference_pairing).norm());
    }
    if worst_trace > 1e-12 {
        return Err(format!("trace drift {worst_trace:.2e}"));
    }
    if worst_herm > 1e-12 {
        return Err(format!("Hermiticity drift {worst_herm:.2e}"));
    }
    if worst_purity > 1e-10 {
        return Err(format!("purity drift {worst_purity:.2e}"));
    }
    if worst_pairing > 1e-8 {
        return Err(format!("pairing drift {worst_pairing:.2e}"));
    }
    Ok(format!(
        "trace {worst_trace:.1e}, herm {worst_herm:.1e}, purity {worst_purity:.1e}, pairing {worst_pairing:.1e}"
    ))
}

/// Criterion 4: First-order convergence: the Euler final-state error against the
/// exponential propagator halves as N doubles; ratios within [1.7, 2.3].
fn euler_convergence_order() -> Result<String, String> {
    let problem = spin_problem();
    let mut errors = Vec::new();
    for n in [100usize, 200, 400, 800] {
        let grid = TimeGrid::new(n).map_err(|e| e.to_string())?;
        let control = ControlField::constant(std::f64::consts::PI, n, 1.0, 0.0);
        let map = control.hamiltonian_map(&problem.model);
        let euler = propagate(&map, problem.rho0.matrix(), grid, PropagatorKind::Euler)
            .map_err(|e| e.to_string())?;
        let exact = propagate(
            &map,
            problem.rho0.matrix(),
            grid,
            PropagatorKind::Exponential,
        )
        .map_err(|e| e.to_string())?;
        errors.push((&euler[n] - &exact[n]).norm());
    }
    let mut ratios = Vec::new();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        if !(1.7..=2.3).contains(&ratio) {
            return Err(format!("error ratio {ratio:.3} outside [1.7, 2.3]"));
        }
        ratios.push(format!("{ratio:.3}"));
    }
    Ok(format!("ratios [{}]", ratios.join(", ")))
}

/// Criterion 5: Rabi oracle: constant resonant pulses give the analytic transfer
/// probabilities sin^2(area / 2).
fn rabi_oracle() -> Result<String, String> {
    let problem = spin_problem();
    let grid = TimeGrid::new(1000).map_err(|e| e.to_string())?;
    let run = |amp: f64| -> Result<f64, String> {
        let control = ControlField::constant(amp, 1000, 1.0, 0.0);
        let map = control.hamiltonian_map(&problem.model);
        let states = propagate(
            &map,
            problem.rho0.matrix(),
            grid,
            PropagatorKind::Exponential,
        )
        .map_err(|e| e.to_string())?;
        fidelity_raw(&states[1000], problem.sigma.matrix()).map_err(|e| e.to_string())
    };
    let full = run(std::f64::consts::PI)?;
    if full < 0.999 {
        return Err(format!("area-pi transfer fidelity {full:.6} below 0.999"));
    }
    let half = run(std::f64::consts::FRAC_PI_2)?;
    if (half - 0.5).abs() > 0.01 {
        return Err(format!(
            "area-pi/2 transfer fidelity {half:.6} not 0.5 +- 0.01"
        ));
    }
    Ok(format!("F(pi) = {full:.6}, F(pi/2) = {half:.4}"))
}

fn end_to_end_config() -> SolverConfig {
    SolverConfig {
        n_steps: 100,
        u_bounds: (0.0, 2.0 * std::f64::consts::PI),
        max_iterations: 200,
        init: InitialControl::Constant {
            u: 1.0,
            omega: 1.0,
            phi: 0.0,
        },
        ..SolverConfig::default()
    }
}

/// Criterion 6: End-to-end solve of the transfer problem reaches fidelity 0.999 within
/// 200 iterations, and the run is bit-identical when repeated.
fn end_to_end_solve() -> Result<String, String> {
    let problem = spin_problem();
    let config = end_to_end_config();
    let first = solve(&problem, &config).map_err(|e| e.to_string())?;
    if first.final_fidelity < 0.999 {
        return Err(format!(
            "final fidelity {:.6} below 0.999 after {} iterations",
            first.final_fidelity, first.iterations
        ));
    }
    let second = solve(&problem, &config).map_err(|e| e.to_string())?;
    if first.final_fidelity.to_bits() != second.final_fidelity.to_bits()
        || first.control.omega.to_bits() != second.control.omega.to_bits()
        || first.control.phi.to_bits() != second.control.phi.to_bits()
        || first.control.u.len() != second.control.u.len()
        || first
            .control
            .u
            .iter()
            .zip(&second.control.u)
            .any(|(a, b)| a.to_bits() != b.to_bits())
    {
        return Err("repeated run is not bit-identical".into());
    }
    Ok(format!(
        "F = {:.7} after {} iterations (converged = {}), reruns bit-identical",
        first.final_fidelity, first.iterations, first.converged
    ))
}

/// Criterion 7: Detuned initialization: the solver recovers the resonance within one
/// coarse search cell and still reaches fidelity 0.99.
fn detuning_recovery() -> Result<String, String> {
    let problem = spin_problem();
    let config = SolverConfig {
        max_iterations: 500,
        init: InitialControl::Constant {
            u: 1.0,
            omega: 1.2,
            phi: 0.0,
        },
        ..end_to_end_config()
    };
    let result = solve(&problem, &config).map_err(|e| e.to_string())?;
    let cell = 2.0 * config.omega_window / (config.omega_grid_points - 1) as f64;
    let offset = (result.control.omega - 1.0).abs();
    if offset > cell {
        return Err(format!(
            "recovered omega {:.6} is {offset:.4} from resonance (> one cell {cell:.4})",
            result.control.omega
        ));
    }
    if result.final_fidelity < 0.99 {
        return Err(format!("fidelity {:.6} below 0.99", result.final_fidelity));
    }
    Ok(format!(
        "omega* = {:.6} ({offset:.2e} from resonance, cell {cell:.3}), F = {:.6}",
        result.control.omega, result.final_fidelity
    ))
}

/// Criterion 8: The pure-state reference method and the density-matrix solver agree on
/// the final transfer fidelity within 5e-3.
fn cross_solver_consistency() -> Result<String, String> {
    let problem = spin_problem();
    let pmp_result = solve(&problem, &end_to_end_config()).map_err(|e| e.to_string())?;

    // Same physical transfer for the pure-state method. The norm-distance
    // cost is phase-sensitive, so the target ket carries the quadrature
    // phase that sigma_x-generated rotations deliver.
    let target = PureState::new(nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(0.0, -1.0)]))
        .map_err(|e| e.to_string())?;
    let baseline_problem = PureTransferProblem {
        h_drift: pauli(PauliAxis::Z).map(|z| z * c(-0.5, 0.0)),
        h_control: pauli(PauliAxis::X),
        psi0: PureState::basis(2, 0),
        psi_target: target.clone(),
    };
    let weights = CostWeights::effort_only(1e-3, 2).map_err(|e| e.to_string())?;
    let config = BaselineConfig {
        n_steps: 100,
        max_iterations: 2000,
        eps_u: 1e-7,
        relaxation: 0.5,
        init: InitialPulse::Constant(1.0),
    };
    let baseline = solve_pure(&baseline_problem, &weights, &config).map_err(|e| e.to_string())?;
    let baseline_fidelity = baseline.transfer_fidelity(&target);

    let gap = (pmp_result.final_fidelity - baseline_fidelity).abs();
    if gap > 5e-3 {
        return Err(format!(
            "fidelity gap {gap:.2e} (pmp {:.6} vs baseline {baseline_fidelity:.6})",
            pmp_result.final_fidelity
        ));
    }
    Ok(format!(
        "pmp {:.6} vs baseline {baseline_fidelity:.6}, gap {gap:.2e}",
        pmp_result.final_fidelity
    ))
}

/// Criterion 9: Adjoint-based and finite-difference control derivatives agree to
/// relative 1e-3 at 10 random grid indices of a random control.
fn adjoint_gradient_agreement() -> Result<String, String> {
    let problem = spin_problem();
    let config = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let u: Vec<f64> = (0..100)
        .map(|_| rng.random_range(0.0..2.0 * std::f64::consts::PI))
        .collect();
    let control = ControlField {
        u,
        omega: rng.random_range(0.5..1.5),
        phi: rng.random_range(-1.0..1.0),
    };
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let k = rng.random_range(0..100);
        let (adjoint, fd) =
            control_gradient_check(&problem, &control, k, &config).map_err(|e| e.to_string())?;
        let rel = (adjoint - fd).abs() / fd.abs().max(1e-12);
        if rel > 1e-3 {
            return Err(format!(
                "index {k}: adjoint {adjoint:.6e} vs fd {fd:.6e} (rel {rel:.2e})"
            ));
        }
        worst = worst.max(rel);
    }
    Ok(format!(
        "10 indices, worst relative disagreement {worst:.2e}"
    ))
}

/// Criterion 10: The literal forward adjoint ordering (terminal costate mapped to t=0
/// through the formal solution, then re-integrated forward) agrees with
/// backward integration at N = 50 on a static-Hamiltonian instance; the
/// summed exponent it uses is exact there, so the 1e-3 bound isolates the
/// ordering itself.
fn costate_scheme_compatibility() -> Result<String, String> {
    let problem = spin_problem();
    let grid = TimeGrid::new(50).map_err(|e| e.to_string())?;
    // omega = 0 freezes the carrier: H is time-independent.
    let control = ControlField::constant(1.0, 50, 0.0, 0.0);
    let map = control.hamiltonian_map(&problem.model);
    let states = propagate(
        &map,
        problem.rho0.matrix(),
        grid,
        PropagatorKind::Exponential,
    )
    .map_err(|e| e.to_string())?;
    let pi_final =
        fidelity_gradient_raw(&states[50], problem.sigma.matrix()).map_err(|e| e.to_string())?;
    let backward = propagate_costate_with(
        CostateScheme::Backward,
        &map,
        &pi_final,
        grid,
        PropagatorKind::Exponential,
    )
    .map_err(|e| e.to_string())?;
    let forward = propagate_costate_with(
        CostateScheme::ForwardFromFormalSolution,
        &map,
        &pi_final,
        grid,
        PropagatorKind::Exponential,
    )
    .map_err(|e| e.to_string())?;

    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let h = problem
            .model
            .hamiltonian(control.u[k], control.omega, control.phi, grid.point(k));
        let h_back =
            pontryagin_hamiltonian(&backward[k], &states[k], &h).map_err(|e| e.to_string())?;
        let h_fwd =
            pontryagin_hamiltonian(&forward[k], &states[k], &h).map_err(|e| e.to_string())?;
        worst = worst.max((h_back - h_fwd).abs());
    }
    if worst > 1e-3 {
        return Err(format!("control Hamiltonian values differ by {worst:.2e}"));
    }
    Ok(format!("worst control-Hamiltonian difference {worst:.2e}"))
}

#[test]
fn acceptance_criteria() {
    let criteria = [
        Criterion {
            name: "fidelity property suite",
            budget: Duration::from_secs(5),
            run: fidelity_properties,
        },
        Criterion {
            name: "terminal-costate gradient oracle",
            budget: Duration::from_secs(5),
            run: gradient_oracle_agreement,
        },
        Criterion {
            name: "dynamics invariants",
            budget: Duration::from_secs(2),
            run: dynamics_invariants,
        },
        Criterion {
            name: "Euler convergence order",
            budget: Duration::from_secs(5),
            run: euler_convergence_order,
        },
        Criterion {
            name: "Rabi transfer oracle",
            budget: Duration::from_secs(2),
            run: rabi_oracle,
        },
        Criterion {
            name: "end-to-end solve",
            budget: Duration::from_secs(60),
            run: end_to_end_solve,
        },
        Criterion {
            name: "detuning recovery",
            budget: Duration::from_secs(120),
            run: detuning_recovery,
        },
        Criterion {
            name: "cross-solver consistency",
            budget: Duration::from_secs(120),
            run: cross_solver_consistency,
        },
        Criterion {
            name: "adjoint gradient agreement",
            budget: Duration::from_secs(10),
            run: adjoint_gradient_agreement,
        },
        Criterion {
            name: "costate ordering compatibility",
            budget: Duration::from_secs(5),
            run: costate_scheme_compatibility,
        },
    ];

    let mut failures = Vec::new();
    for (index, criterion) in criteria.iter().enumerate() {
        let number = index + 1;
        let start = Instant::now();
        let outcome = (criterion.run)();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) if elapsed <= criterion.budget => {
                println!(
                    "criterion {number:2} ({}): PASS [{elapsed:.2?}] {detail}",
                    criterion.name
                );
            }
            Ok(detail) => {
                println!(
                    "criterion {number:2} ({}): FAIL [overran {:?} budget: {elapsed:.2?}] {detail}",
                    criterion.name, criterion.budget
                );
                failures.push(format!(
                    "criterion {number} ({}) overran its {:?} budget ({elapsed:.2?})",
                    criterion.name, criterion.budget
                ));
            }
            Err(reason) => {
                println!(
                    "criterion {number:2} ({}): FAIL [{elapsed:.2?}] {reason}",
                    criterion.name
                );
                failures.push(format!("criterion {number} ({}): {reason}", criterion.name));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "acceptance criteria failed:\n{}",
        failures.join("\n")
    );
}
