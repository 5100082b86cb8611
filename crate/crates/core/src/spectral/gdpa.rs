use serde::{Deserialize, Serialize};

use super::{jacobi_eigen, scaled_gershgorin, EigenPair};
use crate::error::{Error, Result};
use crate::graph::{Color, Coloring};
use crate::matrix::MetricMatrix;

/// Relative magnitude below which an eigenvector entry counts as zero:
/// `|v_i| < DEGENERACY_FLOOR * ||v||_inf`.
pub const DEGENERACY_FLOOR: f64 = 1e-8;

/// Similarity scalars `s_i` (the diagonal of `S` in `S M S^-1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GdpaScalars(Vec<f64>);

impl GdpaScalars {
    pub fn new(s: Vec<f64>) -> Result<Self> {
        if let Some(index) = s.iter().position(|&x| x == 0.0) {
            return Err(Error::ZeroScalar { index });
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "GDPA scalars".into(),
            });
        }
        Ok(GdpaScalars(s))
    }

    pub fn ones(k: usize) -> Self {
        GdpaScalars(vec![1.0; k])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|s_i / s_j|`, the factor multiplying `|M_ij|` in row `i` of the scaled discs.
    #[inline]
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        (self.0[i] / self.0[j]).abs()
    }
}

/// Checks that `v` has no (relatively) zero entries and that its signs follow
/// the coloring: one sign on blue nodes, the other on red nodes.
pub(crate) fn validate_first_vector(v: &[f64], coloring: &Coloring) -> Result<()> {
    let inf = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let floor = DEGENERACY_FLOOR * inf;
    for (index, x) in v.iter().enumerate() {
        if !(x.abs() >= floor) || *x == 0.0 {
            return Err(Error::DegenerateEigenvector {
                index,
                magnitude: x.abs(),
            });
        }
    }
    let reference = v[0].signum() * if coloring.color(0) == Color::Blue { 1.0 } else { -1.0 };
    for (node, x) in v.iter().enumerate() {
        let expected = if coloring.color(node) == Color::Blue {
            reference
        } else {
            -reference
        };
        if x.signum() != expected {
            return Err(Error::SignPatternViolation { node });
        }
    }
    Ok(())
}

/// `s_i = 1 / v_i` from the first eigenpair of a connected balanced-graph
/// Laplacian, after checking `v` is nondegenerate and sign-consistent with
/// `coloring`.
pub fn gdpa_scalars(m: &MetricMatrix, coloring: &Coloring, eig: &EigenPair) -> Result<GdpaScalars> {
    let k = m.dim();
    if eig.vector.len() != k || coloring.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: if eig.vector.len() != k {
                eig.vector.len()
            } else {
                coloring.len()
            },
        });
    }
    validate_first_vector(&eig.vector, coloring)?;
    GdpaScalars::new(eig.vector.iter().map(|x| 1.0 / x).collect())
}

/// Largest distance between a scaled disc left-end and `lambda`.
pub fn alignment_deviation(m: &MetricMatrix, s: &GdpaScalars, lambda: f64) -> f64 {
    scaled_gershgorin(m, s)
        .left_ends()
        .iter()
        .map(|l| (l - lambda).abs())
        .fold(0.0, f64::max)
}

/// `J M J` with `J = diag(+1 blue, -1 red)`: the positive-edge graph whose
/// Laplacian has the same spectrum and whose eigenvectors differ only by the
/// sign flips on red nodes.
pub fn positive_counterpart(m: &MetricMatrix, coloring: &Coloring) -> MetricMatrix {
    let k = m.dim();
    let sign = |i: usize| if coloring.color(i) == Color::Blue { 1.0 } else { -1.0 };
    let mut out = MetricMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            out.set(i, j, sign(i) * sign(j) * m.get(i, j));
        }
    }
    out
}

/// Diagonal shift making every degree of the positive counterpart strictly
/// positive: `max(0, max_i(-sum_j w'_ij - u'_i)) + 1`.
///
/// For a generalized Laplacian the degree `sum_j w_ij + u_i` is just `M_ii`.
pub fn epsilon_shift(m_positive: &MetricMatrix) -> f64 {
    let worst = (0..m_positive.dim())
        .map(|i| -m_positive.get(i, i))
        .fold(f64::NEG_INFINITY, f64::max);
    worst.max(0.0) + 1.0
}

/// Spectral radius of `A = D^-1 (W_g + lambda_min I)` for a positive-graph
/// Laplacian `M = D - W_g`. Equals one whenever the first eigenvector is
/// positive.
///
/// Computed by power iteration on `(A + I) / 2`, which is primitive for an
/// irreducible nonnegative `A`, with Collatz-Wielandt bounds as the stopping
/// test.
pub fn spectral_radius_certificate(m: &MetricMatrix) -> Result<f64> {
    let k = m.dim();
    for i in 0..k {
        let d = m.get(i, i);
        if !(d > 0.0) {
            return Err(Error::NonPositiveDegree { node: i, degree: d });
        }
    }
    let lambda = jacobi_eigen(m).min();
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..k)
            .map(|i| {
                let row = m.row(i);
                let mut acc = lambda * x[i];
                for j in 0..k {
                    if j != i {
                        acc -= row[j] * x[j];
                    }
                }
                0.5 * (acc / row[i] + x[i])
            })
            .collect()
    };
    let mut x = vec![1.0; k];
    let mut estimate = f64::NAN;
    for _ in 0..100_000 {
        let y = apply(&x);
        let (lo, hi) = x
            .iter()
            .zip(&y)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| b / a)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r), hi.max(r))
            });
        estimate = 0.5 * (lo + hi);
        let norm = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if hi - lo <= 1e-13 * hi.abs().max(1.0) || norm == 0.0 {
            break;
        }
        x = y.into_iter().map(|v| v / norm).collect();
    }
    Ok(2.0 * estimate - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{lobpcg_first, scaled_gershgorin};

    fn eq4() -> MetricMatrix {
        MetricMatrix::from_rows(&[
            vec![2.0, -2.0, -1.0],
            vec![-2.0, 5.0, -2.0],
            vec![-1.0, -2.0, 4.0],
        ])
        .unwrap()
    }

    #[test]
    fn eq4_scalars_have_reported_ratios() {
        let m = eq4();
        let eig = jacobi_eigen(&m).smallest();
        let s = gdpa_scalars(&m, &Coloring::all_blue(3), &eig).unwrap();
        assert!(s.values().iter().all(|&x| x > 0.0));
        // reciprocals of the scalars are the unit eigenvector (0.7511, 0.4886, 0.4440)
        for (si, vi) in s.values().iter().zip([0.7511, 0.4886, 0.4440]) {
            assert!((1.0 / si - vi).abs() / vi < 1e-3);
        }
        assert!(alignment_deviation(&m, &s, eig.value) < 1e-12);
    }

    #[test]
    fn identity_is_degenerate() {
        let m = MetricMatrix::identity(3);
        let eig = lobpcg_first(&m, Some(&[1.0, 0.0, 0.0]), 1e-4, 10).unwrap().pair;
        assert!(matches!(
            gdpa_scalars(&m, &Coloring::all_blue(3), &eig),
            Err(Error::DegenerateEigenvector { index: 1, .. })
        ));
    }

    #[test]
    fn negative_edge_pair() {
        // w = -1, u = 2|w|: M = [[1, 1], [1, 1]]
        let m = MetricMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let eig = jacobi_eigen(&m).smallest();
        let coloring = Coloring(vec![Color::Blue, Color::Red]);
        let s = gdpa_scalars(&m, &coloring, &eig).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert!((s.values()[0] - r2).abs() < 1e-12);
        assert!((s.values()[1] + r2).abs() < 1e-12);
        // same vector against an all-blue coloring is a sign violation
        assert!(matches!(
            gdpa_scalars(&m, &Coloring::all_blue(2), &eig),
            Err(Error::SignPatternViolation { node: 1 })
        ));
    }

    #[test]
    fn zero_scalar_rejected() {
        assert!(matches!(
            GdpaScalars::new(vec![1.0, 0.0]),
            Err(Error::ZeroScalar { index: 1 })
        ));
    }

    #[test]
    fn scaling_vector_leaves_left_ends() {
        let m = eq4();
        let eig = jacobi_eigen(&m).smallest();
        let s1 = gdpa_scalars(&m, &Coloring::all_blue(3), &eig).unwrap();
        let s2 = GdpaScalars::new(s1.values().iter().map(|x| x / -3.5).collect()).unwrap();
        let a = scaled_gershgorin(&m, &s1).left_ends();
        let b = scaled_gershgorin(&m, &s2).left_ends();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon_shift(&MetricMatrix::from_diagonal(&[-3.0])), 4.0);
        let positive_degrees = MetricMatrix::from_diagonal(&[0.5, 2.0]);
        assert_eq!(epsilon_shift(&positive_degrees), 1.0);
        // degrees of eq4 are its diagonal (2, 5, 4): all positive, margin only
        assert_eq!(epsilon_shift(&eq4()), 1.0);
    }

    #[test]
    fn radius_of_identity_and_chain() {
        assert!((spectral_radius_certificate(&MetricMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-12);
        let chain = MetricMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!((spectral_radius_certificate(&chain).unwrap() - 1.0).abs() < 1e-12);
        assert!(spectral_radius_certificate(&MetricMatrix::from_diagonal(&[1.0, 0.0])).is_err());
    }
}
