//! Gershgorin disc analysis, GDPA scalars and first-eigenpair solvers.
//!
//! The central fact used throughout the crate: for a generalized Laplacian `M`
//! of a connected balanced signed graph with first eigenvector `v` (no zero
//! entries), the similarity transform `B = S M S^-1` with `S = diag(1/v_i)`
//! puts every Gershgorin disc left-end of `B` exactly at `lambda_min(M)`.
//! The disc left-ends of `B` can be evaluated directly from `M` and `s`, so
//! `B` is never formed.

mod gdpa;
mod gershgorin;
mod jacobi;
mod lobpcg;

use serde::{Deserialize, Serialize};

pub use gdpa::{
    alignment_deviation, epsilon_shift, gdpa_scalars, positive_counterpart,
    spectral_radius_certificate, GdpaScalars, DEGENERACY_FLOOR,
};
pub use gershgorin::{gershgorin, scaled_gershgorin, GershgorinReport};
pub use jacobi::{jacobi_eigen, SymmetricEigen};
pub use lobpcg::{lobpcg_first, Lobpcg, DEFAULT_SEED};

/// An eigenvalue with its unit eigenvector.
///
/// Vectors are normalized to unit 2-norm and signed so that the first
/// component with magnitude above [`SIGN_EPS`] is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Entries at or below this magnitude are skipped when fixing the sign of a
/// unit eigenvector.
pub const SIGN_EPS: f64 = 1e-12;

pub(crate) fn apply_sign_convention(v: &mut [f64]) {
    if let Some(&first) = v.iter().find(|x| x.abs() > SIGN_EPS) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub(crate) fn normalize(v: &mut [f64]) -> f64 {
    let n = crate::matrix::norm2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

impl EigenPair {
    /// `||M v - lambda v||_2`.
    pub fn residual(&self, m: &crate::MetricMatrix) -> f64 {
        let mv = m.mul_vec(&self.vector);
        mv.iter()
            .zip(&self.vector)
            .map(|(a, b)| (a - self.value * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}
