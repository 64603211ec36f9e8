// Copyright 2026 QOC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random quantum objects for tests and robustness studies.
//!
//! Pure states are normalized complex Gaussian vectors; density matrices mix
//! `dim` such states with uniform simplex weights; unitaries come from
//! Gram-Schmidt on a Gaussian matrix. All sampling is deterministic given the
//! caller's RNG.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, CVector};
use crate::quantum::{density_from_ensemble, DensityMatrix, PureState};

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-like random pure state: normalized complex Gaussian vector.
pub fn random_pure_state(rng: &mut impl Rng, dim: usize) -> PureState {
    loop {
        let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return PureState::new(v / Complex64::new(norm, 0.0))
                .expect("normalized Gaussian vector is a valid state");
        }
    }
}

/// Uniform weights on the probability simplex (normalized exponentials).
fn simplex_weights(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k)
        .map(|_| -(rng.random::<f64>().max(f64::MIN_POSITIVE)).ln())
        .collect();
    let sum: f64 = w.iter().sum();
    for x in &mut w {
        *x /= sum;
    }
    // Compensate round-off so the weights sum to 1 exactly enough for
    // ensemble validation.
    let drift: f64 = 1.0 - w.iter().sum::<f64>();
    w[0] += drift;
    w
}

/// Random mixed state: `dim` random pure states with simplex weights.
pub fn random_density_matrix(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    let weights = simplex_weights(rng, dim);
    let states: Vec<PureState> = (0..dim).map(|_| random_pure_state(rng, dim)).collect();
    density_from_ensemble(&weights, &states).expect("sampled ensemble is valid")
}

/// Random unitary via Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let mut q = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    for j in 0..dim {
        for i in 0..j {
            let prev = q.column(i).clone_owned();
            let overlap = prev.dotc(&q.column(j).clone_owned());
            let projected = prev * overlap;
            let mut col = q.column_mut(j);
            col -= projected;
        }
        let norm = q.column(j).norm();
        let mut col = q.column_mut(j);
        col /= Complex64::new(norm, 0.0);
    }
    q
}
