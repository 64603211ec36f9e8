// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! `qoc`: command-line front end for the state-transfer solvers.
//!
//! Subcommands: `solve` runs the configured solver(s) and writes run
//! artifacts, `fidelity` evaluates the overlap of two density matrices, and
//! `propagate` integrates the configured initial control without
//! optimizing. Exit codes: 0 success, 1 configuration error, 2 numerical
//! failure.

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use qoc_core::dynamics::{propagate, TimeGrid};
use qoc_core::error::Error as CoreError;
use qoc_core::linalg::CVector;
use qoc_core::pmp::{solve, TransferProblem};
use qoc_core::pure_state::{forward_trajectory, solve_pure, PureTransferProblem};
use qoc_core::quantum::{fidelity, fidelity_raw, DensityMatrix, PureState};
use qoc_core::spin::{pauli, PauliAxis, SpinModel};

use config::{parse_matrix_argument, ProblemKind, RunConfig, SolverKind};
use output::{
    baseline_convergence_csv, baseline_trajectory_csv, convergence_csv, trajectory_csv,
    BaselineSummary, PmpSummary, Summary,
};

#[derive(Parser)]
#[command(name = "qoc", version, about = "Quantum state-transfer control solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured transfer problem and write run artifacts.
    Solve {
        /// One or more TOML run configurations.
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output directory (with several configs, one subdirectory each).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run up to this many configs in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the fidelity of two density matrices given as JSON literals.
    Fidelity {
        /// First matrix, e.g. `[[1,0],[0,0]]` (entries scalar or `[re,im]`).
        a: String,
        /// Second matrix.
        b: String,
    },
    /// Integrate the configured initial control and print the outcome.
    Propagate { config: PathBuf },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

/// Core errors raised while a solver is running are numerical failures;
/// everything caught before that point is a configuration problem.
fn solver_error(stage: &str, e: CoreError) -> CliError {
    CliError::Numerical(format!("{stage}: {e}"))
}

fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve {
            configs,
            out,
            seed,
            jobs,
        } => run_solve(&configs, out.as_deref(), seed, jobs),
        Command::Fidelity { a, b } => run_fidelity(&a, &b),
        Command::Propagate { config } => run_propagate(&config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run_fidelity(a: &str, b: &str) -> Result<(), CliError> {
    let ma = parse_matrix_argument(a).map_err(|e| config_error(format!("first matrix: {e}")))?;
    let mb = parse_matrix_argument(b).map_err(|e| config_error(format!("second matrix: {e}")))?;
    let rho = DensityMatrix::new(ma).map_err(|e| config_error(format!("first matrix: {e}")))?;
    let sigma = DensityMatrix::new(mb).map_err(|e| config_error(format!("second matrix: {e}")))?;
    let value = fidelity(&rho, &sigma).map_err(|e| solver_error("fidelity", e))?;
    println!("{value}");
    Ok(())
}

fn load_config(path: &Path, seed_override: Option<u64>) -> Result<RunConfig, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let mut config = RunConfig::from_toml(&text)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    Ok(config)
}

fn spin_model(config: &RunConfig) -> SpinModel {
    SpinModel::new(config.spin_params())
}

fn validated_problem(config: &RunConfig) -> Result<TransferProblem<SpinModel>, CliError> {
    let (rho0, sigma) = config.states().map_err(config_error)?;
    if rho0.dim() != 2 {
        return Err(config_error(format!(
            "the driven-spin model is two-level; custom matrices of dimension {} are not solvable",
            rho0.dim()
        )));
    }
    Ok(TransferProblem {
        model: spin_model(config),
        rho0,
        sigma,
    })
}

fn baseline_problem(config: &RunConfig) -> Result<PureTransferProblem, CliError> {
    if config.problem != ProblemKind::SpinTransfer {
        return Err(config_error(
            "solver = \"pure-baseline\" requires problem = \"spin-transfer\" (the reference method works on state vectors)",
        ));
    }
    let omega0 = config.spin.omega0;
    let target_phase = config.baseline.target_phase;
    let target = PureState::new(CVector::from_vec(vec![
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, target_phase),
    ]))
    .map_err(config_error)?;
    Ok(PureTransferProblem {
        h_drift: pauli(PauliAxis::Z).map(|z| z * Complex64::new(-0.5 * omega0, 0.0)),
        h_control: pauli(PauliAxis::X),
        psi0: PureState::basis(2, 0),
        psi_target: target,
    })
}

fn run_propagate(path: &Path) -> Result<(), CliError> {
    let config = load_config(path, None)?;
    let solver_config = config.solver_config();
    solver_config.validate().map_err(config_error)?;
    let problem = validated_problem(&config)?;

    let control = solver_config.initial_control().map_err(config_error)?;
    let grid = TimeGrid::new(solver_config.n_steps).map_err(config_error)?;
    let map = control.hamiltonian_map(&problem.model);
    let states = propagate(&map, problem.rho0.matrix(), grid, solver_config.propagator)
        .map_err(|e| solver_error("propagate", e))?;
    let final_state = &states[grid.n_steps()];
    let value = fidelity_raw(final_state, problem.sigma.matrix())
        .map_err(|e| solver_error("fidelity", e))?;

    println!("steps: {}", grid.n_steps());
    println!("final fidelity to target: {value}");
    for k in 0..final_state.nrows() {
        println!("population |{k}>: {}", final_state[(k, k)].re);
    }
    Ok(())
}

struct RunArtifacts {
    directory: PathBuf,
    report: String,
}

fn run_solve(
    configs: &[PathBuf],
    out: Option<&Path>,
    seed: Option<u64>,
    jobs: usize,
) -> Result<(), CliError> {
    if jobs == 0 {
        return Err(config_error("--jobs must be at least 1"));
    }
    let multiple = configs.len() > 1;
    let runs: Vec<(usize, &PathBuf)> = configs.iter().enumerate().collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<RunArtifacts, CliError>)>> =
        Mutex::new(Vec::with_capacity(runs.len()));

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(runs.len()) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= runs.len() {
                    break;
                }
                let (order, path) = runs[index];
                let outcome = run_single_config(path, out, seed, multiple);
                results.lock().unwrap().push((order, outcome));
            });
        }
    });

    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(order, _)| *order);

    let mut first_error: Option<CliError> = None;
    for (order, outcome) in results {
        match outcome {
            Ok(artifacts) => {
                println!("{}: {}", artifacts.directory.display(), artifacts.report);
            }
            Err(e) => {
                eprintln!("error ({}): {}", configs[order].display(), e.message());
                let replace = matches!(
                    (&first_error, &e),
                    (None, _) | (Some(CliError::Config(_)), CliError::Numerical(_))
                );
                if replace {
                    first_error = Some(e);
                }
            }
        }
    }
    match first_error {
        Some(e) => Err(CliError::Config(format!(
            "{} (see messages above)",
            match e {
                CliError::Config(_) => "configuration errors occurred",
                CliError::Numerical(_) => return Err(e),
            }
        ))),
        None => Ok(()),
    }
}

fn output_directory(
    path: &Path,
    out: Option<&Path>,
    config: &RunConfig,
    multiple: bool,
) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    match (out, multiple) {
        (Some(dir), false) => dir.to_path_buf(),
        (Some(dir), true) => dir.join(stem),
        (None, _) => config
            .out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{stem}-out"))),
    }
}

fn run_single_config(
    path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    multiple: bool,
) -> Result<RunArtifacts, CliError> {
    let mut config = load_config(path, seed)?;
    let directory = output_directory(path, out, &config, multiple);
    config.out_dir = Some(directory.clone());

    // Validate everything before any solver runs.
    let solver_config = config.solver_config();
    solver_config.validate().map_err(config_error)?;
    let run_pmp = matches!(config.solver, SolverKind::Pmp | SolverKind::Both);
    let run_baseline = matches!(config.solver, SolverKind::PureBaseline | SolverKind::Both);
    let pmp_problem = run_pmp.then(|| validated_problem(&config)).transpose()?;
    let baseline_setup = if run_baseline {
        let problem = baseline_problem(&config)?;
        let baseline_config = config.baseline_config();
        baseline_config.validate().map_err(config_error)?;
        let weights = qoc_core::pure_state::CostWeights::new(
            config.baseline.gamma_reg,
            if config.baseline.alpha.is_empty() {
                vec![0.0; 2]
            } else {
                config.baseline.alpha.clone()
            },
        )
        .map_err(config_error)?;
        Some((problem, baseline_config, weights))
    } else {
        None
    };

    let started = Instant::now();
    let mut pmp_summary = None;
    let mut pmp_result = None;
    if let Some(problem) = &pmp_problem {
        let result = solve(problem, &solver_config).map_err(|e| solver_error("solve", e))?;
        pmp_summary = Some(PmpSummary {
            final_fidelity: result.final_fidelity,
            iterations: result.iterations,
            converged: result.converged,
            omega: result.control.omega,
            phi: result.control.phi,
        });
        pmp_result = Some(result);
    }

    let mut baseline_summary = None;
    let mut baseline_files = None;
    if let Some((problem, baseline_config, weights)) = &baseline_setup {
        let result = solve_pure(problem, weights, baseline_config)
            .map_err(|e| solver_error("solve_pure", e))?;
        let grid =
            TimeGrid::new(baseline_config.n_steps).map_err(|e| solver_error("solve_pure", e))?;
        let trajectory = forward_trajectory(problem, &result.control, grid)
            .map_err(|e| solver_error("solve_pure", e))?;
        baseline_summary = Some(BaselineSummary {
            final_cost: *result.cost_history.last().expect("non-empty cost history"),
            transfer_fidelity: result.transfer_fidelity(&problem.psi_target),
            iterations: result.iterations,
            converged: result.converged,
            relaxation_halvings: result.relaxation_halvings,
        });
        baseline_files = Some((
            baseline_trajectory_csv(&trajectory, &result.control, grid),
            baseline_convergence_csv(&result),
        ));
    }
    let wall_time_seconds = started.elapsed().as_secs_f64();

    let report = describe(&pmp_summary, &baseline_summary);
    let summary = Summary {
        seed: config.seed,
        wall_time_seconds,
        config,
        pmp: pmp_summary,
        baseline: baseline_summary,
    };

    fs::create_dir_all(&directory)
        .map_err(|e| config_error(format!("cannot create {}: {e}", directory.display())))?;
    let write = |name: &str, contents: &str| -> Result<(), CliError> {
        fs::write(directory.join(name), contents)
            .map_err(|e| config_error(format!("cannot write {name}: {e}")))
    };
    write("summary.json", &summary.to_json().map_err(config_error)?)?;
    if let Some(result) = &pmp_result {
        write("trajectory.csv", &trajectory_csv(result))?;
        write("convergence.csv", &convergence_csv(result))?;
    }
    if let Some((trajectory, convergence)) = &baseline_files {
        write("baseline_trajectory.csv", trajectory)?;
        write("baseline_convergence.csv", convergence)?;
    }

    Ok(RunArtifacts { directory, report })
}

fn describe(pmp: &Option<PmpSummary>, baseline: &Option<BaselineSummary>) -> String {
    let mut parts = Vec::new();
    if let Some(p) = pmp {
        parts.push(format!(
            "pmp fidelity {:.6} ({} iterations, {})",
            p.final_fidelity,
            p.iterations,
            if p.converged {
                "converged"
            } else {
                "iteration cap"
            }
        ));
    }
    if let Some(b) = baseline {
        parts.push(format!(
            "baseline fidelity {:.6} (cost {:.3e}, {} iterations)",
            b.transfer_fidelity, b.final_cost, b.iterations
        ));
    }
    parts.join("; ")
}
