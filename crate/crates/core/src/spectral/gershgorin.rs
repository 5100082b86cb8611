use serde::{Deserialize, Serialize};

use super::GdpaScalars;
use crate::matrix::MetricMatrix;

/// Per-row disc centers and radii with the implied eigenvalue lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GershgorinReport {
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
    pub lower_bound: f64,
}

impl GershgorinReport {
    fn from_parts(centers: Vec<f64>, radii: Vec<f64>) -> Self {
        let lower_bound = centers
            .iter()
            .zip(&radii)
            .map(|(c, r)| c - r)
            .fold(f64::INFINITY, f64::min);
        GershgorinReport {
            centers,
            radii,
            lower_bound,
        }
    }

    pub fn left_ends(&self) -> Vec<f64> {
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| c - r)
            .collect()
    }
}

pub fn gershgorin(m: &MetricMatrix) -> GershgorinReport {
    let k = m.dim();
    let centers = m.diagonal();
    let radii = (0..k)
        .map(|i| {
            m.row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.abs())
                .sum()
        })
        .collect();
    GershgorinReport::from_parts(centers, radii)
}

/// Disc report of `S M S^-1` evaluated from `M` directly:
/// `radius_i = |s_i| * sum_{j != i} |M_ij| / |s_j|`.
pub fn scaled_gershgorin(m: &MetricMatrix, s: &GdpaScalars) -> GershgorinReport {
    let k = m.dim();
    assert_eq!(s.len(), k, "scalar count must match matrix dimension");
    let inv: Vec<f64> = s.values().iter().map(|x| 1.0 / x.abs()).collect();
    let radii = (0..k)
        .map(|i| {
            let row = m.row(i);
            let acc: f64 = (0..k)
                .filter(|&j| j != i)
                .map(|j| row[j].abs() * inv[j])
                .sum();
            s.values()[i].abs() * acc
        })
        .collect();
    GershgorinReport::from_parts(m.diagonal(), radii)
}
