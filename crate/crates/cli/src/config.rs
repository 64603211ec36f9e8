// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a single TOML file with explicit keys for every
//! solver setting. Defaults are materialized at parse time and the
//! effective configuration is echoed into the run summary, so nothing is
//! silent.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qoc_core::dynamics::{CostateScheme, PropagatorKind};
use qoc_core::linalg::CMatrix;
use qoc_core::pmp::{InitialControl, SolverConfig};
use qoc_core::pure_state::{BaselineConfig, InitialPulse};
use qoc_core::quantum::DensityMatrix;
use qoc_core::spin::SpinParams;

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub spin: SpinSection,
    #[serde(default)]
    pub solver_config: SolverSection,
    #[serde(default)]
    pub baseline: BaselineSection,
    #[serde(default)]
    pub custom: Option<CustomSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    SpinTransfer,
    CustomMatrices,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    Pmp,
    PureBaseline,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSection {
    #[serde(default = "one")]
    pub omega0: f64,
    #[serde(default = "one")]
    pub gyromag: f64,
}

impl Default for SpinSection {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            gyromag: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default)]
    pub u_min: f64,
    #[serde(default = "two_pi")]
    pub u_max: f64,
    #[serde(default = "default_eps")]
    pub eps_u: f64,
    #[serde(default = "default_eps")]
    pub eps_omega: f64,
    #[serde(default = "default_eps")]
    pub eps_phi: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_relaxation")]
    pub relaxation: f64,
    #[serde(default = "default_relaxation_floor")]
    pub relaxation_floor: f64,
    #[serde(default)]
    pub propagator: PropagatorChoice,
    #[serde(default)]
    pub costate_scheme: CostateChoice,
    #[serde(default = "default_grid_points_u")]
    pub grid_points_u: usize,
    #[serde(default = "default_omega_window")]
    pub omega_window: f64,
    #[serde(default = "default_angle_points")]
    pub omega_grid_points: usize,
    #[serde(default = "pi")]
    pub phi_window: f64,
    #[serde(default = "default_angle_points")]
    pub phi_grid_points: usize,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
    #[serde(default)]
    pub init: InitSection,
}

impl Default for SolverSection {
    fn default() -> Self {
        toml::from_str("").expect("empty solver section deserializes from defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PropagatorChoice {
    Euler,
    #[default]
    Exponential,
}

impl From<PropagatorChoice> for PropagatorKind {
    fn from(choice: PropagatorChoice) -> Self {
        match choice {
            PropagatorChoice::Euler => PropagatorKind::Euler,
            PropagatorChoice::Exponential => PropagatorKind::Exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CostateChoice {
    #[default]
    Backward,
    /// Compatibility ordering: terminal costate mapped to t = 0 through the
    /// formal solution, then re-integrated forward.
    ForwardFormal,
}

impl From<CostateChoice> for CostateScheme {
    fn from(choice: CostateChoice) -> Self {
        match choice {
            CostateChoice::Backward => CostateScheme::Backward,
            CostateChoice::ForwardFormal => CostateScheme::ForwardFromFormalSolution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct InitSection {
    #[serde(default)]
    pub kind: InitKind,
    #[serde(default = "one")]
    pub u: f64,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub phi: f64,
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            kind: InitKind::Constant,
            u: 1.0,
            omega: 1.0,
            phi: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    #[default]
    Constant,
    /// Uniform samples inside the control bounds, drawn from the run seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    #[serde(default = "default_gamma")]
    pub gamma_reg: f64,
    /// Per-level occupation weights; empty means all zeros.
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_baseline_eps")]
    pub eps_u: f64,
    #[serde(default = "default_baseline_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_baseline_relaxation")]
    pub relaxation: f64,
    #[serde(default = "one")]
    pub init_u: f64,
    /// Phase of the target ket. The quadratic terminal cost is sensitive to
    /// the (physically meaningless) global phase of the target; -pi/2 is the
    /// arrival phase the transverse drive can actually reach.
    #[serde(default = "default_target_phase")]
    pub target_phase: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        toml::from_str("").expect("empty baseline section deserializes from defaults")
    }
}

/// Explicit initial and target density matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    pub rho0: MatrixLiteral,
    pub sigma: MatrixLiteral,
}

/// Complex scalar written as a plain number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEntry {
    pub re: f64,
    pub im: f64,
}

impl Serialize for ComplexEntry {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.re, self.im].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexEntry {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
        }
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Real(re) => ComplexEntry { re, im: 0.0 },
            Repr::Pair([re, im]) => ComplexEntry { re, im },
        })
    }
}

/// Row-major matrix literal: an array of rows, entries scalar or `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixLiteral(pub Vec<Vec<ComplexEntry>>);

impl MatrixLiteral {
    pub fn to_matrix(&self) -> Result<CMatrix, String> {
        let rows = self.0.len();
        if rows == 0 {
            return Err("matrix literal is empty".into());
        }
        let cols = self.0[0].len();
        if self.0.iter().any(|row| row.len() != cols) {
            return Err("matrix literal has ragged rows".into());
        }
        if rows != cols {
            return Err(format!("matrix literal is {rows}x{cols}, expected square"));
        }
        let mut m = CMatrix::zeros(rows, cols);
        for (i, row) in self.0.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(entry.re, entry.im);
            }
        }
        Ok(m)
    }
}

fn one() -> f64 {
    1.0
}

fn pi() -> f64 {
    PI
}

fn two_pi() -> f64 {
    2.0 * PI
}

fn default_n_steps() -> usize {
    100
}

fn default_eps() -> f64 {
    1e-4
}

fn default_max_iterations() -> usize {
    500
}

fn default_relaxation() -> f64 {
    0.3
}

fn default_relaxation_floor() -> f64 {
    1e-6
}

fn default_grid_points_u() -> usize {
    64
}

fn default_omega_window() -> f64 {
    0.5
}

fn default_angle_points() -> usize {
    33
}

fn default_refine_tol() -> f64 {
    1e-8
}

fn default_gamma() -> f64 {
    1e-3
}

fn default_baseline_eps() -> f64 {
    1e-6
}

fn default_baseline_iterations() -> usize {
    2000
}

fn default_baseline_relaxation() -> f64 {
    0.5
}

fn default_target_phase() -> f64 {
    -PI / 2.0
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config parse error: {e}"))
    }

    pub fn spin_params(&self) -> SpinParams {
        SpinParams {
            omega0: self.spin.omega0,
            gyromag: self.spin.gyromag,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver_config;
        SolverConfig {
            n_steps: s.n_steps,
            u_bounds: (s.u_min, s.u_max),
            eps_u: s.eps_u,
            eps_omega: s.eps_omega,
            eps_phi: s.eps_phi,
            max_iterations: s.max_iterations,
            relaxation: s.relaxation,
            relaxation_floor: s.relaxation_floor,
            propagator: s.propagator.into(),
            costate_scheme: s.costate_scheme.into(),
            grid_points_u: s.grid_points_u,
            omega_window: s.omega_window,
            omega_grid_points: s.omega_grid_points,
            phi_window: s.phi_window,
            phi_grid_points: s.phi_grid_points,
            refine_tol: s.refine_tol,
            init: match s.init.kind {
                InitKind::Constant => InitialControl::Constant {
                    u: s.init.u,
                    omega: s.init.omega,
                    phi: s.init.phi,
                },
                InitKind::Random => InitialControl::Random {
                    seed: self.seed,
                    omega: s.init.omega,
                    phi: s.init.phi,
                },
            },
        }
    }

    pub fn baseline_config(&self) -> BaselineConfig {
        let b = &self.baseline;
        BaselineConfig {
            n_steps: b.n_steps,
            eps_u: b.eps_u,
            max_iterations: b.max_iterations,
            relaxation: b.relaxation,
            init: InitialPulse::Constant(b.init_u),
        }
    }

    /// The (rho0, sigma) pair of the configured problem.
    pub fn states(&self) -> Result<(DensityMatrix, DensityMatrix), String> {
        match self.problem {
            ProblemKind::SpinTransfer => Ok(qoc_core::spin::transfer_problem()),
            ProblemKind::CustomMatrices => {
                let custom = self
                    .custom
                    .as_ref()
                    .ok_or("problem = \"custom-matrices\" requires a [custom] section")?;
                let rho0 = DensityMatrix::new(
                    custom
                        .rho0
                        .to_matrix()
                        .map_err(|e| format!("custom.rho0: {e}"))?,
                )
                .map_err(|e| format!("custom.rho0: {e}"))?;
                let sigma = DensityMatrix::new(
                    custom
                        .sigma
                        .to_matrix()
                        .map_err(|e| format!("custom.sigma: {e}"))?,
                )
                .map_err(|e| format!("custom.sigma: {e}"))?;
                if rho0.dim() != sigma.dim() {
                    return Err(format!(
                        "custom matrices have mismatched dimensions {} vs {}",
                        rho0.dim(),
                        sigma.dim()
                    ));
                }
                Ok((rho0, sigma))
            }
        }
    }
}

/// Parse an inline matrix argument (JSON syntax, entries scalar or
/// `[re, im]`).
pub fn parse_matrix_argument(text: &str) -> Result<CMatrix, String> {
    let literal: MatrixLiteral =
        serde_json::from_str(text).map_err(|e| format!("matrix literal parse error: {e}"))?;
    literal.to_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = RunConfig::from_toml("problem = \"spin-transfer\"").unwrap();
        assert_eq!(config.problem, ProblemKind::SpinTransfer);
        assert_eq!(config.solver, SolverKind::Pmp);
        assert_eq!(config.solver_config.n_steps, 100);
        assert_eq!(config.solver_config.u_max, 2.0 * PI);
        assert_eq!(config.baseline.gamma_reg, 1e-3);
        config.solver_config().validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml("problem = \"spin-transfer\"\ntypo_key = 1").unwrap_err();
        assert!(err.contains("typo_key"), "{err}");
    }

    #[test]
    fn matrix_literals_accept_real_and_complex_entries() {
        let real = parse_matrix_argument("[[1, 0], [0, 0]]").unwrap();
        assert_eq!(real[(0, 0)], Complex64::new(1.0, 0.0));

        let complex =
            parse_matrix_argument("[[[0.5, 0], [0, -0.5]], [[0, 0.5], [0.5, 0]]]").unwrap();
        assert_eq!(complex[(0, 1)], Complex64::new(0.0, -0.5));
        assert_eq!(complex[(1, 0)], Complex64::new(0.0, 0.5));
    }

    #[test]
    fn matrix_literals_reject_ragged_and_nonsquare() {
        assert!(parse_matrix_argument("[[1, 0], [0]]").is_err());
        assert!(parse_matrix_argument("[[1, 0, 0], [0, 1, 0]]").is_err());
    }

    #[test]
    fn custom_problem_round_trips_through_json() {
        let text = r#"
problem = "custom-matrices"
seed = 7

[custom]
rho0 = [[1, 0], [0, 0]]
sigma = [[[0.5, 0], [0, -0.5]], [[0, 0.5], [0.5, 0]]]
"#;
        let config = RunConfig::from_toml(text).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let reparsed: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, reparsed);
        let (rho0, sigma) = config.states().unwrap();
        assert_eq!(rho0.dim(), 2);
        assert_eq!(sigma.dim(), 2);
    }

    #[test]
    fn invalid_custom_matrix_names_the_field() {
        let text = r#"
problem = "custom-matrices"

[custom]
rho0 = [[0.7, 0], [0, 0.7]]
sigma = [[1, 0], [0, 0]]
"#;
        let config = RunConfig::from_toml(text).unwrap();
        let err = config.states().unwrap_err();
        assert!(err.contains("rho0"), "{err}");
        assert!(err.contains("trace"), "{err}");
    }
}
