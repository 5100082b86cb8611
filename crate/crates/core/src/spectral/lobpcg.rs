//! Single-vector LOBPCG for the smallest eigenpair.
//!
//! Each step runs Rayleigh-Ritz on `span{x, r, p}` where `r` is the current
//! residual and `p` the previous search direction. No preconditioner.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::{apply_sign_convention, jacobi_eigen, normalize, EigenPair};
use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, MetricMatrix};

/// Seed of the fallback start vector used when no warm start is given.
pub const DEFAULT_SEED: u64 = 0x5eed_0f1a_7e00;

/// Converged eigenpair plus the number of iterations it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Lobpcg {
    pub pair: EigenPair,
    pub iterations: usize,
    pub residual: f64,
}

fn fallback_start(k: usize) -> Vec<f64> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(DEFAULT_SEED);
    // strictly positive entries in [0.5, 1.5)
    (0..k)
        .map(|_| 0.5 + (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
        .collect()
}

/// Orthonormalizes `cands` against `basis` (twice-repeated Gram-Schmidt) and
/// appends the survivors. Directions that lose almost all of their norm are
/// dropped.
fn extend_basis(basis: &mut Vec<Vec<f64>>, cands: impl IntoIterator<Item = Vec<f64>>) {
    for mut c in cands {
        let original = norm2(&c);
        if original == 0.0 || !original.is_finite() {
            continue;
        }
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = dot(b, &c);
                c.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let n = norm2(&c);
        if n > 1e-10 * original {
            c.iter_mut().for_each(|x| *x /= n);
            basis.push(c);
        }
    }
}

/// Smallest eigenpair of `m` to residual `||M x - lambda x|| <= tol * ||M||_F`.
///
/// `warm` seeds the iteration when supplied (it is normalized internally);
/// otherwise a fixed pseudo-random positive vector is used, so results are
/// deterministic either way. On running out of iterations the best iterate is
/// returned inside [`Error::NoConvergence`].
pub fn lobpcg_first(
    m: &MetricMatrix,
    warm: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<Lobpcg> {
    let k = m.dim();
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("lobpcg tolerance {tol}")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let mut x = match warm {
        Some(w) if w.len() == k && norm2(w) > 0.0 && w.iter().all(|v| v.is_finite()) => {
            w.to_vec()
        }
        Some(w) if w.len() != k => {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: w.len(),
            })
        }
        _ => fallback_start(k),
    };
    normalize(&mut x);

    let threshold = tol * m.frobenius_norm();
    let mut mx = m.mul_vec(&x);
    let mut lambda = dot(&x, &mx);
    let mut p: Option<Vec<f64>> = None;

    for it in 1..=max_iter {
        let r: Vec<f64> = mx.iter().zip(&x).map(|(a, b)| a - lambda * b).collect();
        let res_norm = norm2(&r);
        if res_norm <= threshold {
            apply_sign_convention(&mut x);
            return Ok(Lobpcg {
                pair: EigenPair {
                    value: lambda,
                    vector: x,
                },
                iterations: it,
                residual: res_norm,
            });
        }

        let mut basis = vec![x.clone()];
        extend_basis(&mut basis, std::iter::once(r).chain(p.take()));
        if basis.len() == 1 {
            // residual collapsed into span{x}; x is an eigenvector to rounding
            break;
        }
        let images: Vec<Vec<f64>> = basis.iter().map(|b| m.mul_vec(b)).collect();
        let n = basis.len();
        let mut gram = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let v = dot(&basis[a], &images[b]);
                gram[a * n + b] = v;
                gram[b * n + a] = v;
            }
        }
        let small = jacobi_eigen(&MetricMatrix::symmetrized(n, &gram));
        let c = &small.vectors[0];

        let mut new_x = vec![0.0; k];
        let mut new_mx = vec![0.0; k];
        let mut new_p = vec![0.0; k];
        for (idx, coef) in c.iter().enumerate() {
            for i in 0..k {
                new_x[i] += coef * basis[idx][i];
                new_mx[i] += coef * images[idx][i];
                if idx > 0 {
                    new_p[i] += coef * basis[idx][i];
                }
            }
        }
        let nx = norm2(&new_x);
        new_x.iter_mut().for_each(|v| *v /= nx);
        new_mx.iter_mut().for_each(|v| *v /= nx);
        x = new_x;
        mx = new_mx;
        lambda = dot(&x, &mx);
        p = Some(new_p);
    }

    // recompute from scratch so the reported residual is honest
    let mx_exact = m.mul_vec(&x);
    lambda = dot(&x, &mx_exact);
    let exact_res = mx_exact
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt();
    apply_sign_convention(&mut x);
    let best = EigenPair {
        value: lambda,
        vector: x,
    };
    if exact_res <= threshold {
        return Ok(Lobpcg {
            pair: best,
            iterations: max_iter,
            residual: exact_res,
        });
    }
    Err(Error::NoConvergence {
        max_iter,
        residual: exact_res,
        best: Box::new(best),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_converges_immediately() {
        let m = MetricMatrix::identity(6);
        for warm in [None, Some(&[0.1, 2.0, -3.0, 0.0, 1.0, 5.0][..])] {
            let out = lobpcg_first(&m, warm, 1e-4, 200).unwrap();
            assert_eq!(out.iterations, 1);
            assert!((out.pair.value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eq4_value() {
        let m = MetricMatrix::from_rows(&[
            vec![2.0, -2.0, -1.0],
            vec![-2.0, 5.0, -2.0],
            vec![-1.0, -2.0, 4.0],
        ])
        .unwrap();
        let out = lobpcg_first(&m, None, 1e-10, 200).unwrap();
        assert!((out.pair.value - 0.1078).abs() < 1e-3);
        assert!(out.pair.vector.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn exhausted_iterations_report_best() {
        let m = MetricMatrix::from_diagonal(&[1.0, 1.0 + 1e-9, 50.0, 100.0]);
        match lobpcg_first(&m, Some(&[1.0, 1.0, 1.0, 1.0]), 1e-300, 1) {
            Err(Error::NoConvergence { best, max_iter, .. }) => {
                assert_eq!(max_iter, 1);
                assert_eq!(best.vector.len(), 4);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = MetricMatrix::identity(2);
        assert!(lobpcg_first(&m, None, 0.0, 10).is_err());
        assert!(lobpcg_first(&m, Some(&[1.0]), 1e-4, 10).is_err());
    }
}
