use super::{apply_sign_convention, EigenPair};
use crate::matrix::MetricMatrix;

/// Full eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` belongs to `values[k]`; orthonormal.
    pub vectors: Vec<Vec<f64>>,
}

impl SymmetricEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn smallest(&self) -> EigenPair {
        EigenPair {
            value: self.values[0],
            vector: self.vectors[0].clone(),
        }
    }

    /// `V diag(f(lambda)) V^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> MetricMatrix {
        let k = self.values.len();
        let mut out = vec![0.0; k * k];
        for (lam, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..k {
                let wi = w * v[i];
                for j in 0..k {
                    out[i * k + j] += wi * v[j];
                }
            }
        }
        MetricMatrix::symmetrized(k, &out)
    }

    pub fn reconstruct(&self) -> MetricMatrix {
        self.reconstruct_with(|x| x)
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
pub fn jacobi_eigen(m: &MetricMatrix) -> SymmetricEigen {
    let k = m.dim();
    let mut a = m.as_row_major().to_vec();
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..k)
            .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
            .map(|(i, j)| a[i * k + j] * a[i * k + j])
            .sum();
        if off == 0.0 || off <= 1e-30 * total {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[p * k + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * k + p];
                let aqq = a[q * k + q];
                // below rounding of both diagonal entries: drop it
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * k + q] = 0.0;
                    a[q * k + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for r in 0..k {
                    let arp = a[r * k + p];
                    let arq = a[r * k + q];
                    a[r * k + p] = c * arp - s * arq;
                    a[r * k + q] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[p * k + r];
                    let aqr = a[q * k + r];
                    a[p * k + r] = c * apr - s * aqr;
                    a[q * k + r] = s * apr + c * aqr;
                }
                a[p * k + q] = 0.0;
                a[q * k + p] = 0.0;
                for r in 0..k {
                    let vrp = v[r * k + p];
                    let vrq = v[r * k + q];
                    v[r * k + p] = c * vrp - s * vrq;
                    v[r * k + q] = s * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| a[x * k + x].total_cmp(&a[y * k + y]).then(x.cmp(&y)));
    let values = order.iter().map(|&i| a[i * k + i]).collect();
    let vectors = order
        .iter()
        .map(|&c| {
            let mut col: Vec<f64> = (0..k).map(|r| v[r * k + c]).collect();
            apply_sign_convention(&mut col);
            col
        })
        .collect();
    SymmetricEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input_sorted() {
        let e = jacobi_eigen(&MetricMatrix::from_diagonal(&[3.0, 1.0, 2.0]));
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.vectors[0], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn swap_matrix() {
        let m = MetricMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = jacobi_eigen(&m);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[0][0] - h).abs() < 1e-14 && (e.vectors[0][1] + h).abs() < 1e-14);
    }

    #[test]
    fn eq4_smallest() {
        let m = MetricMatrix::from_rows(&[
            vec![2.0, -2.0, -1.0],
            vec![-2.0, 5.0, -2.0],
            vec![-1.0, -2.0, 4.0],
        ])
        .unwrap();
        let e = jacobi_eigen(&m);
        assert!((e.min() - 0.1078).abs() < 1e-3);
        assert!(e.reconstruct().frobenius_distance(&m) <= 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn empty_and_scalar() {
        assert!(jacobi_eigen(&MetricMatrix::zeros(0)).values.is_empty());
        let e = jacobi_eigen(&MetricMatrix::from_diagonal(&[-4.0]));
        assert_eq!(e.values, vec![-4.0]);
        assert_eq!(e.vectors, vec![vec![1.0]]);
    }
}
