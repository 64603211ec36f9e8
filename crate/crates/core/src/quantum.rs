// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quantum state types and scalar functionals: pure states, density
//! matrices, Bloch coordinates, the Uhlmann-Jozsa fidelity, and its
//! gradient with respect to the evolving state.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, ensure_hermitian, ensure_same_dim, ensure_square, identity, CMatrix, CVector,
};

/// Hermiticity tolerance for density-matrix validation.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
/// Unit-trace tolerance for density-matrix validation.
pub const DENSITY_TRACE_TOL: f64 = 1e-12;
/// Allowed purity overshoot above 1 from round-off.
pub const DENSITY_PURITY_TOL: f64 = 1e-10;
/// Unit-norm tolerance for pure-state amplitudes.
pub const PURE_NORM_TOL: f64 = 1e-12;
/// Allowed Bloch-vector norm overshoot above 1.
pub const BLOCH_NORM_TOL: f64 = 1e-12;

/// A normalized pure state |psi>.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Validates unit norm within [`PURE_NORM_TOL`].
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidConfig("empty state vector".into()));
        }
        if !amplitudes
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidNorm { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state |k> in the given dimension.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Rank-one projector |psi><psi|.
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Qubit from Bloch-sphere angles: cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
pub fn qubit_from_angles(theta: f64, phi: f64) -> Result<PureState> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            min: 0.0,
            max: std::f64::consts::PI,
        });
    }
    if !(0.0..=2.0 * std::f64::consts::PI).contains(&phi) {
        return Err(Error::OutOfRange {
            name: "phi",
            value: phi,
            min: 0.0,
            max: 2.0 * std::f64::consts::PI,
        });
    }
    let half = theta / 2.0;
    let amplitudes = CVector::from_vec(vec![
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), phi),
    ]);
    PureState::new(amplitudes)
}

/// A validated density operator: Hermitian, unit trace, positive
/// semidefinite, purity at most 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        linalg::ensure_finite(&matrix)?;
        ensure_hermitian(&matrix, DENSITY_HERMITIAN_TOL)?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DENSITY_TRACE_TOL || trace.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidTrace { trace: trace.re });
        }
        let (eigenvalues, _) = linalg::eigh(&matrix)?;
        let min_eigenvalue = eigenvalues[0];
        if min_eigenvalue < linalg::PSD_EIGENVALUE_FLOOR {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
        }
        let purity = (&matrix * &matrix).trace().re;
        if purity > 1.0 + DENSITY_PURITY_TOL {
            return Err(Error::InvalidPurity { purity });
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            matrix: state.projector(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// tr(rho^2); equals 1 for pure states, below 1 for mixed states.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Whether the state is pure within round-off (purity deficit below tol).
    pub fn is_pure(&self, tol: f64) -> bool {
        (1.0 - self.purity()).abs() <= tol
    }
}

/// Mixture rho = sum_j p_j |psi_j><psi_j| of pure states.
pub fn density_from_ensemble(weights: &[f64], states: &[PureState]) -> Result<DensityMatrix> {
    if weights.len() != states.len() || states.is_empty() {
        return Err(Error::InvalidConfig(
            "ensemble weights and states must have equal nonzero length".into(),
        ));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidWeights {
            sum: weights.iter().sum(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights { sum });
    }
    let dim = states[0].dim();
    for s in states {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: s.dim(),
            });
        }
    }
    let mut matrix = CMatrix::zeros(dim, dim);
    for (w, s) in weights.iter().zip(states) {
        matrix += s.projector().map(|z| z * Complex64::new(*w, 0.0));
    }
    DensityMatrix::new(matrix)
}

/// Real Bloch coordinates of a qubit state, rho = (I + r . sigma) / 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm > 1.0 + BLOCH_NORM_TOL {
            return Err(Error::BlochNormExceeded { norm });
        }
        Ok(Self { x, y, z })
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Bloch coordinates of a qubit density matrix: r_i = tr(rho sigma_i).
pub fn to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 2,
        });
    }
    let m = rho.matrix();
    let x = 2.0 * m[(0, 1)].re;
    let y = -2.0 * m[(0, 1)].im;
    let z = m[(0, 0)].re - m[(1, 1)].re;
    BlochVector::new(x, y, z)
}

/// Qubit density matrix from Bloch coordinates: (I + r . sigma) / 2.
pub fn from_bloch(r: &BlochVector) -> Result<DensityMatrix> {
    let half = 0.5;
    let matrix = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(half * (1.0 + r.z), 0.0),
            Complex64::new(half * r.x, -half * r.y),
            Complex64::new(half * r.x, half * r.y),
            Complex64::new(half * (1.0 - r.z), 0.0),
        ],
    );
    DensityMatrix::new(matrix)
}

/// Fidelity of two Hermitian PSD matrices, without unit-trace validation.
///
/// Computes `(sum_i sqrt(lambda_i))^2` over the eigenvalues of
/// `sqrt(a) b sqrt(a)`; these equal the eigenvalues of `a b` by similarity.
/// Used directly by gradient oracles, which evaluate the functional on
/// trace-perturbed states.
pub fn fidelity_raw(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    ensure_same_dim(a, b)?;
    let sa = linalg::sqrt_psd(a)?;
    let inner = &sa * b * &sa;
    // Round-off can leave tiny asymmetry in the congruence product.
    let inner = (&inner + inner.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
    let (eigenvalues, _) = linalg::eigh(&inner)?;
    let largest = eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    // For rank-deficient products (pure states) the zero eigenvalues come
    // back as round-off noise; sqrt would amplify that noise into a
    // non-smooth O(1e-8) contribution, so anything far below the dominant
    // eigenvalue is treated as an exact zero.
    let noise_floor = 1e-13 * largest;
    let mut root_sum = 0.0;
    for &w in &eigenvalues {
        if w < linalg::PSD_EIGENVALUE_FLOOR {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: w });
        }
        if w > noise_floor {
            root_sum += w.sqrt();
        }
    }
    Ok(root_sum * root_sum)
}

/// Uhlmann-Jozsa fidelity `F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
///
/// Symmetric in its arguments, lies in [0, 1], equals `tr(rho sigma)` when
/// either state is pure, and is invariant under joint unitary conjugation.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    fidelity_raw(rho.matrix(), sigma.matrix())
}

/// Purity threshold below which a target is treated as genuinely mixed.
const PURE_TARGET_TOL: f64 = 1e-10;

/// Gradient of the fidelity with respect to the evolving state, defined by
/// `F(rho + d) ~ F(rho) + tr(G d)` for Hermitian perturbations `d`.
///
/// For a pure target the fidelity is `tr(rho sigma)`, linear in rho, and the
/// gradient is `sigma` at any dimension. For a mixed qubit target the 2x2
/// closed form `F = tr(rho sigma) + 2 sqrt(det rho det sigma)` gives
/// `G = sigma + sqrt(det sigma / det rho) (tr(rho) I - rho)`. Mixed targets
/// above dimension 2 are rejected explicitly.
pub fn fidelity_gradient(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<CMatrix> {
    fidelity_gradient_raw(rho.matrix(), sigma.matrix())
}

/// [`fidelity_gradient`] on raw Hermitian PSD matrices (no trace check); the
/// solver applies it to propagated states that may carry integrator error.
pub fn fidelity_gradient_raw(rho: &CMatrix, sigma: &CMatrix) -> Result<CMatrix> {
    let dim = ensure_same_dim(rho, sigma)?;
    ensure_hermitian(rho, linalg::HERMITIAN_TOL)?;
    ensure_hermitian(sigma, linalg::HERMITIAN_TOL)?;

    let sigma_trace = sigma.trace().re;
    let sigma_purity = (sigma * sigma).trace().re;
    // Pure iff tr(sigma^2) = (tr sigma)^2 for a rank-one PSD matrix.
    if (sigma_purity - sigma_trace * sigma_trace).abs() <= PURE_TARGET_TOL {
        return Ok(sigma.clone());
    }

    if dim != 2 {
        return Err(Error::Unsupported(format!(
            "fidelity gradient for a mixed target is only available in dimension 2, got {dim}"
        )));
    }

    let det_rho = rho.determinant().re;
    let det_sigma = sigma.determinant().re.max(0.0);
    if det_rho <= 0.0 {
        return Err(Error::numerical(
            "fidelity_gradient",
            format!("state determinant {det_rho:.3e} is not positive; gradient of sqrt(det) is singular"),
        ));
    }
    let factor = (det_sigma / det_rho).sqrt();
    let adjugate = identity(2).map(|z| z * rho.trace()) - rho;
    Ok(sigma + adjugate.map(|z| z * Complex64::new(factor, 0.0)))
}
