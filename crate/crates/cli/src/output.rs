// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run artifacts: a JSON summary plus comma-separated trajectory and
//! convergence tables. Floats are written with Rust's shortest round-trip
//! formatting, so identical runs produce identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use qoc_core::dynamics::TimeGrid;
use qoc_core::linalg::{CMatrix, CVector};
use qoc_core::pmp::SolveResult;
use qoc_core::pure_state::PureSolveResult;

use crate::config::RunConfig;

/// Per-run record written to `summary.json`.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmp: Option<PmpSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSummary>,
}

#[derive(Debug, Serialize)]
pub struct PmpSummary {
    pub final_fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub omega: f64,
    pub phi: f64,
}

#[derive(Debug, Serialize)]
pub struct BaselineSummary {
    pub final_cost: f64,
    pub transfer_fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub relaxation_halvings: usize,
}

impl Summary {
    pub fn to_json(&self) -> Result<String, String> {
        serde_json::to_string_pretty(self).map_err(|e| format!("summary serialization: {e}"))
    }
}

fn push_float(line: &mut String, value: f64) {
    let _ = write!(line, ",{value}");
}

/// Trajectory table: one row per grid point with the time, the control
/// sample of the subinterval starting there, the density-matrix entries in
/// row-major order as re/im pairs, and the control Hamiltonian function
/// value. Interval-indexed columns are empty on the terminal row.
pub fn trajectory_csv(result: &SolveResult) -> String {
    let record = &result.trajectory;
    let dim = record.states[0].nrows();
    let mut out = String::from("t,u");
    for i in 0..dim {
        for j in 0..dim {
            let _ = write!(out, ",rho_{i}{j}_re,rho_{i}{j}_im");
        }
    }
    out.push_str(",pontryagin_h\n");

    let n = record.grid.n_steps();
    for k in 0..=n {
        let mut line = format!("{}", record.grid.point(k));
        if k < n {
            push_float(&mut line, record.controls.u[k]);
        } else {
            line.push(',');
        }
        let rho: &CMatrix = &record.states[k];
        for i in 0..dim {
            for j in 0..dim {
                push_float(&mut line, rho[(i, j)].re);
                push_float(&mut line, rho[(i, j)].im);
            }
        }
        if k < n {
            push_float(&mut line, record.hamiltonian_values[k]);
        } else {
            line.push(',');
        }
        line.push('\n');
        out.push_str(&line);
    }
    out
}

/// Convergence table: one row per solve iteration.
pub fn convergence_csv(result: &SolveResult) -> String {
    let mut out = String::from("iteration,fidelity,max_control_delta,omega,phi\n");
    for (j, stats) in result.iteration_log.iter().enumerate() {
        let mut line = format!("{j}");
        push_float(&mut line, stats.fidelity);
        push_float(&mut line, stats.max_delta_u);
        push_float(&mut line, stats.omega);
        push_float(&mut line, stats.phi);
        line.push('\n');
        out.push_str(&line);
    }
    out
}

/// Pure-state trajectory table: time, control, and amplitude components.
pub fn baseline_trajectory_csv(trajectory: &[CVector], control: &[f64], grid: TimeGrid) -> String {
    let dim = trajectory[0].len();
    let mut out = String::from("t,u");
    for j in 0..dim {
        let _ = write!(out, ",psi_{j}_re,psi_{j}_im");
    }
    out.push('\n');
    for (k, psi) in trajectory.iter().enumerate() {
        let mut line = format!("{}", grid.point(k));
        if k < grid.n_steps() {
            push_float(&mut line, control[k]);
        } else {
            line.push(',');
        }
        for j in 0..dim {
            push_float(&mut line, psi[j].re);
            push_float(&mut line, psi[j].im);
        }
        line.push('\n');
        out.push_str(&line);
    }
    out
}

/// Pure-state convergence table: accepted cost per iteration.
pub fn baseline_convergence_csv(result: &PureSolveResult) -> String {
    let mut out = String::from("iteration,cost\n");
    for (j, cost) in result.cost_history.iter().enumerate() {
        let mut line = format!("{j}");
        push_float(&mut line, *cost);
        line.push('\n');
        out.push_str(&line);
    }
    out
}
