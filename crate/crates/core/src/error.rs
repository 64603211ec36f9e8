// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error types shared by every module of the crate.

use thiserror::Error;

/// Errors produced by quantum-state construction, propagation, and solving.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("not Hermitian: asymmetry {asymmetry:.3e} exceeds {tol:.1e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("trace must be 1, got {trace:.12}")]
    InvalidTrace { trace: f64 },

    #[error("state norm must be 1, got {norm:.12}")]
    InvalidNorm { norm: f64 },

    #[error("purity tr(rho^2) = {purity:.12} exceeds 1")]
    InvalidPurity { purity: f64 },

    #[error("{name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("ensemble weights must be nonnegative and sum to 1, got sum {sum:.12}")]
    InvalidWeights { sum: f64 },

    #[error("Bloch vector norm {norm:.12} exceeds 1")]
    BlochNormExceeded { norm: f64 },

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure in {stage}: {detail}")]
    Numerical { stage: String, detail: String },
}

impl Error {
    pub(crate) fn numerical(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Numerical {
            stage: stage.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
