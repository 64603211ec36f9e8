// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex-matrix helpers: validation, commutators, Hermitian
//! eigendecomposition, matrix exponential, and PSD square roots.
//!
//! Everything here operates on small dense matrices (qubit-scale dimensions);
//! the eigendecomposition is backed by [`nalgebra::SymmetricEigen`], which
//! handles complex Hermitian input.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// General carrier for states, costates, Hamiltonians, and propagators.
pub type CMatrix = DMatrix<Complex64>;
/// Complex column vector (pure-state amplitudes).
pub type CVector = DVector<Complex64>;

/// Hermiticity tolerance used when an operation requires Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues above this (negative) floor are treated as round-off zeros.
pub const PSD_EIGENVALUE_FLOOR: f64 = -1e-10;

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Frobenius norm of `m - m^dagger`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_same_dim(a: &CMatrix, b: &CMatrix) -> Result<usize> {
    let da = ensure_square(a)?;
    let db = ensure_square(b)?;
    if da != db {
        return Err(Error::DimensionMismatch {
            left: da,
            right: db,
        });
    }
    Ok(da)
}

pub fn ensure_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    let asymmetry = hermiticity_error(m);
    if asymmetry > tol {
        return Err(Error::NotHermitian { asymmetry, tol });
    }
    Ok(())
}

/// Commutator `[a, b] = ab - ba`. The trace of the result vanishes in exact
/// arithmetic.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    ensure_same_dim(a, b)?;
    Ok(a * b - b * a)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order together with the matching unitary
/// eigenvector matrix (eigenvectors in columns), so `m = v diag(w) v^dagger`.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let dim = ensure_square(m)?;
    ensure_finite(m)?;
    ensure_hermitian(m, HERMITIAN_TOL)?;
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok((eigenvalues, vectors))
}

/// Matrix exponential by scaling-and-squaring with a Taylor series.
///
/// For skew-Hermitian input the result is unitary. Intended for small dense
/// matrices; convergence of the scaled series is unconditional.
pub fn matrix_exp(a: &CMatrix) -> Result<CMatrix> {
    let dim = ensure_square(a)?;
    ensure_finite(a)?;
    let norm = a.norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.map(|z| z / 2f64.powi(squarings as i32));

    let mut result = identity(dim);
    let mut term = identity(dim);
    for k in 1..200 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
        if term.norm() < 1e-300 || term.norm() < f64::EPSILON * result.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

fn clip_psd_eigenvalue(value: f64) -> Result<f64> {
    if value < PSD_EIGENVALUE_FLOOR {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: value,
        });
    }
    Ok(value.max(0.0))
}

/// Principal square root of a Hermitian PSD matrix via eigendecomposition.
///
/// Negative eigenvalues above the round-off floor are clipped to zero;
/// anything below it is rejected.
pub fn sqrt_psd(a: &CMatrix) -> Result<CMatrix> {
    let dim = ensure_square(a)?;
    let (eigenvalues, vectors) = eigh(a)?;
    let mut diag = CMatrix::zeros(dim, dim);
    for (k, &w) in eigenvalues.iter().enumerate() {
        diag[(k, k)] = Complex64::new(clip_psd_eigenvalue(w)?.sqrt(), 0.0);
    }
    Ok(&vectors * diag * vectors.adjoint())
}

/// Closed-form square root of a 2x2 Hermitian PSD matrix.
///
/// `sqrt(a) = (a + sqrt(det a) I) / sqrt(tr a + 2 sqrt(det a))`, the finite
/// Cayley-Hamilton expansion of the square-root series in dimension 2. Kept
/// as a secondary route and cross-checked against [`sqrt_psd`].
pub fn sqrt_psd_qubit(a: &CMatrix) -> Result<CMatrix> {
    let dim = ensure_square(a)?;
    if dim != 2 {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: 2,
        });
    }
    ensure_hermitian(a, HERMITIAN_TOL)?;
    let det = clip_psd_eigenvalue(a.determinant().re)?;
    let trace = a.trace().re;
    let s = det.sqrt();
    let denom = trace + 2.0 * s;
    if denom <= 0.0 {
        // Hermitian PSD with tr + 2 sqrt(det) = 0 only for the zero matrix.
        return Ok(CMatrix::zeros(2, 2));
    }
    let shifted = a + identity(2).map(|z| z * Complex64::new(s, 0.0));
    Ok(shifted / Complex64::new(denom.sqrt(), 0.0))
}
