//! Dense symmetric matrix used as the optimization variable.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Dense symmetric `K x K` matrix read as a generalized graph Laplacian.
///
/// Storage is full row-major; every write goes to both `(i, j)` and `(j, i)`
/// so the two triangles are always bit-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl MetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        MetricMatrix {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * m.dim + i] = d;
        }
        m
    }

    /// Builds a matrix from rows, rejecting anything that is not square and
    /// exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, Error> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rows.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0),
            });
        }
        Self::from_row_major(dim, rows.concat())
    }

    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self, Error> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if a.to_bits() != b.to_bits() && a != b {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("matrix entry ({}, {})", pos / dim.max(1), pos % dim.max(1)),
            });
        }
        Ok(MetricMatrix { dim, entries })
    }

    /// Symmetrizes an arbitrary square buffer as `(A + A^T) / 2`.
    pub fn symmetrized(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = entries[i * dim + i];
            for j in (i + 1)..dim {
                let v = 0.5 * (entries[i * dim + j] + entries[j * dim + i]);
                m.entries[i * dim + j] = v;
                m.entries[j * dim + i] = v;
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Writes `v` to both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    /// `x^T M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            acc += x[i] * dot(self.row(i), x);
        }
        acc
    }

    /// Principal submatrix on the given (sorted) index set.
    pub fn submatrix(&self, idx: &[usize]) -> MetricMatrix {
        let n = idx.len();
        let mut out = Self::zeros(n);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.entries[a * n + b] = self.get(i, j);
            }
        }
        out
    }

    /// `self + alpha * other`, entrywise.
    pub fn add_scaled(&self, alpha: f64, other: &MetricMatrix) -> MetricMatrix {
        assert_eq!(self.dim, other.dim);
        MetricMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.entries.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn frobenius_distance(&self, other: &MetricMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == 0.0))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_writes_both_triangles() {
        let mut m = MetricMatrix::zeros(3);
        m.set(0, 2, -1.5);
        assert_eq!(m.get(2, 0).to_bits(), m.get(0, 2).to_bits());
    }

    #[test]
    fn rejects_asymmetric_rows() {
        let err = MetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { row: 0, col: 1 }));
    }

    #[test]
    fn quad_form_matches_mul_vec() {
        let m = MetricMatrix::from_rows(&[
            vec![2.0, -2.0, -1.0],
            vec![-2.0, 5.0, -2.0],
            vec![-1.0, -2.0, 4.0],
        ])
        .unwrap();
        let x = [0.3, -1.0, 2.0];
        assert!((m.quad_form(&x) - dot(&x, &m.mul_vec(&x))).abs() < 1e-12);
        assert_eq!(m.trace(), 11.0);
    }
}
