//! Projected gradient descent on the PSD cone, the reference scheme SGML is
//! compared against.

use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::MetricMatrix;
use crate::objectives::{EntrySelector, Objective, ObjectiveKind};
use crate::optimizer::{init_metric, PhaseTimings, Termination};
use crate::spectral::jacobi_eigen;

/// Smallest step before the search gives up.
pub const MIN_STEP: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdConeParams {
    /// Initial step; `None` means `0.1 / N`.
    pub step0: Option<f64>,
    pub grow: f64,
    pub shrink: f64,
    /// Eigenvalue floor of the projection.
    pub eig_floor: f64,
    /// `None` means the feature count.
    pub trace_budget: Option<f64>,
    pub main_tol: f64,
    pub max_main_iter: usize,
    pub seed: u64,
}

impl Default for PdConeParams {
    fn default() -> Self {
        PdConeParams {
            step0: None,
            grow: 1.01,
            shrink: 0.5,
            eig_floor: 0.0,
            trace_budget: None,
            main_tol: 1e-5,
            max_main_iter: 1000,
            seed: 0,
        }
    }
}

impl PdConeParams {
    fn validate(&self, n: usize, k: usize) -> Result<(f64, f64)> {
        let step = self.step0.unwrap_or(0.1 / n.max(1) as f64);
        let budget = self.trace_budget.unwrap_or(k as f64);
        if !(step > 0.0) || !(budget > 0.0) || !(self.main_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step {step}, budget {budget} and tolerance {} must be positive",
                self.main_tol
            )));
        }
        if !(self.grow >= 1.0) || !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "grow {} must be >= 1 and shrink {} in (0, 1)",
                self.grow, self.shrink
            )));
        }
        Ok((step, budget))
    }
}

#[derive(Debug, Clone)]
pub struct PdConeResult {
    pub m: MetricMatrix,
    pub objective: f64,
    pub loss: f64,
    /// Loss of every accepted iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub lambda_min: f64,
    pub trace: f64,
    pub timings: PhaseTimings,
    pub termination: Termination,
}

/// Nearest matrix (Frobenius norm) with every eigenvalue at least `floor`.
pub fn project_pd(m: &MetricMatrix, floor: f64) -> MetricMatrix {
    jacobi_eigen(m).reconstruct_with(|lam| lam.max(floor))
}

fn full_gradient(objective: &Objective, delta: &[f64]) -> MetricMatrix {
    let k = objective.dim();
    let pg = objective.pair_gradient(delta);
    let g = objective.matrix_gradient(&pg.values, EntrySelector::All);
    let mut out = MetricMatrix::zeros(k);
    for ((i, j), v) in EntrySelector::All.entries(k).into_iter().zip(g) {
        // the shared variable of M_ij and M_ji carries twice the entry gradient
        out.set(i, j, if i == j { v } else { 0.5 * v });
    }
    out
}

/// Learns a metric for `kind` on `data` by projected gradient descent.
pub fn pdcone_pg(data: &Dataset, kind: ObjectiveKind, params: &PdConeParams) -> Result<PdConeResult> {
    let objective = Objective::new(kind, data, params.seed)?;
    pdcone_with_objective(data, &objective, params)
}

/// Projected gradient descent on a prepared objective.
///
/// A step is accepted when it lowers the loss, after which the step grows;
/// otherwise it shrinks. Each candidate is projected onto the cone and then
/// rescaled into the trace budget when needed.
pub fn pdcone_with_objective(
    data: &Dataset,
    objective: &Objective,
    params: &PdConeParams,
) -> Result<PdConeResult> {
    let start = Instant::now();
    let (mut step, budget) = params.validate(data.len(), data.dim())?;
    let mut timings = PhaseTimings::default();

    let (m0, _) = init_metric(data, budget)?;
    let t = Instant::now();
    let mut m = fit_budget(project_pd(&m0, params.eig_floor), budget);
    timings.eigen += t.elapsed();
    let mut delta = objective.distances(&m);
    let mut loss = objective.loss_from(&delta);
    let mut trace = vec![loss];
    let mut iterations = 0;
    let mut termination = Termination::IterationLimit;

    let t = Instant::now();
    let mut grad = full_gradient(objective, &delta);
    timings.gradient += t.elapsed();

    while iterations < params.max_main_iter {
        if grad.frobenius_norm() == 0.0 {
            termination = Termination::Converged;
            break;
        }
        iterations += 1;
        let t = Instant::now();
        let candidate = fit_budget(project_pd(&m.add_scaled(-step, &grad), params.eig_floor), budget);
        timings.eigen += t.elapsed();

        let t = Instant::now();
        let cand_delta = objective.distances(&candidate);
        let cand_loss = objective.loss_from(&cand_delta);
        if cand_loss < loss {
            let before = loss;
            m = candidate;
            delta = cand_delta;
            loss = cand_loss;
            trace.push(loss);
            step *= params.grow;
            grad = full_gradient(objective, &delta);
            timings.gradient += t.elapsed();
            if (before - loss).abs() <= params.main_tol * loss.abs().max(1.0) {
                termination = Termination::Converged;
                break;
            }
        } else {
            timings.gradient += t.elapsed();
            step *= params.shrink;
            if step < MIN_STEP {
                termination = Termination::Converged;
                break;
            }
        }
    }
    timings.total = start.elapsed();
    let lambda_min = jacobi_eigen(&m).min();
    info!(
        "pdcone {}: loss {loss} after {iterations} iterations ({termination:?})",
        objective.kind()
    );
    Ok(PdConeResult {
        objective: objective.kind().sense() * loss,
        loss,
        objective_trace: trace,
        iterations,
        lambda_min,
        trace: m.trace(),
        m,
        timings,
        termination,
    })
}

fn fit_budget(mut m: MetricMatrix, budget: f64) -> MetricMatrix {
    let tr = m.trace();
    if tr > budget {
        m.scale(budget / tr);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &MetricMatrix, b: &[Vec<f64>], tol: f64) -> bool {
        a.to_rows()
            .iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn psd_input_is_fixed() {
        let m = MetricMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert!(close(&project_pd(&m, 0.0), &m.to_rows(), 1e-10));
    }

    #[test]
    fn negative_diagonal_clamped() {
        let m = MetricMatrix::from_diagonal(&[-1.0, 2.0]);
        assert!(close(&project_pd(&m, 0.0), &[vec![0.0, 0.0], vec![0.0, 2.0]], 1e-12));
    }

    #[test]
    fn swap_matrix_projection() {
        let m = MetricMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(close(&project_pd(&m, 0.0), &[vec![0.5, 0.5], vec![0.5, 0.5]], 1e-12));
    }

    #[test]
    fn projection_is_idempotent() {
        let m = MetricMatrix::from_rows(&[
            vec![1.0, 2.0, 0.5],
            vec![2.0, -1.0, 0.3],
            vec![0.5, 0.3, 0.2],
        ])
        .unwrap();
        let p = project_pd(&m, 0.0);
        assert!(close(&project_pd(&p, 0.0), &p.to_rows(), 1e-10));
    }

    #[test]
    fn budget_rescale() {
        let m = fit_budget(MetricMatrix::from_diagonal(&[2.0, 2.0]), 2.0);
        assert_eq!(m.diagonal(), vec![1.0, 1.0]);
    }
}
