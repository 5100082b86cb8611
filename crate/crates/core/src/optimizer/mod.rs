//! Signed-graph metric learning: Frank-Wolfe over generalized Laplacians of
//! balanced signed graphs, with the PD-cone constraint replaced by linear
//! Gershgorin-disc rows built from GDPA scalars.

mod constraints;
mod fw;
mod init;
mod line_search;
mod scalars;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use constraints::{
    assemble_diag_constraints, assemble_full_constraints, assemble_offdiag_constraints,
    fw_direction, row_margins, BlockLp, FreeEdge,
};
pub use fw::{
    bcd_pass, full_matrix_pass, optimize_diagonal, sgml, sgml_with_log, BlockOutcome, PassOutcome,
};
pub use init::{init_metric, init_positive_metric};
pub use line_search::nr_step_size;
pub use scalars::{refresh_scalars, ComponentEigen, RefreshOutcome};

use crate::error::{Error, Result};
use crate::graph::Coloring;
use crate::matrix::MetricMatrix;
use crate::objectives::Objective;
use crate::spectral::GdpaScalars;

/// Slack allowed below the disc margin when accepting new scalars.
pub const SCALAR_ACCEPT_SLACK: f64 = 5e-10;

/// How the per-iteration linear programs are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpBackend {
    /// Every block LP reduces to a single-budget knapsack.
    #[default]
    ClosedForm,
    /// Dense simplex on the assembled program.
    Simplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgmlParams {
    /// Trace budget `C`; `None` means the feature count.
    pub trace_budget: Option<f64>,
    /// Lower bound `rho` on every disc left-end.
    pub disc_margin: f64,
    pub main_tol: f64,
    pub max_main_iter: usize,
    pub sub_tol: f64,
    pub max_sub_iter: usize,
    pub lobpcg_tol: f64,
    pub lobpcg_max_iter: usize,
    pub nr_tol: f64,
    pub seed: u64,
    /// When false, every edge is kept positive and only the blue hypothesis
    /// is tried.
    pub allow_negative_edges: bool,
    /// Keep a copy of every accepted iterate.
    pub record_iterates: bool,
    pub lp_backend: LpBackend,
}

impl Default for SgmlParams {
    fn default() -> Self {
        SgmlParams {
            trace_budget: None,
            disc_margin: 0.0,
            main_tol: 1e-5,
            max_main_iter: 1000,
            sub_tol: 1e-3,
            max_sub_iter: 1000,
            lobpcg_tol: 1e-4,
            lobpcg_max_iter: 200,
            nr_tol: 0.5,
            seed: 0,
            allow_negative_edges: true,
            record_iterates: false,
            lp_backend: LpBackend::ClosedForm,
        }
    }
}

impl SgmlParams {
    pub fn budget(&self, k: usize) -> f64 {
        self.trace_budget.unwrap_or(k as f64)
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        let c = self.budget(k);
        let positive = [
            ("trace budget", c),
            ("main tolerance", self.main_tol),
            ("sub tolerance", self.sub_tol),
            ("LOBPCG tolerance", self.lobpcg_tol),
            ("Newton-Raphson tolerance", self.nr_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.disc_margin >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "disc margin must be nonnegative, got {}",
                self.disc_margin
            )));
        }
        // the tree start has disc left-ends of at least C / K^2
        if k > 0 && self.disc_margin >= c / (k * k) as f64 {
            return Err(Error::InvalidParameter(format!(
                "disc margin {} leaves no room under budget {c} for {k} features",
                self.disc_margin
            )));
        }
        Ok(())
    }
}

/// Wall time spent per phase of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub eigen: Duration,
    pub lp: Duration,
    pub gradient: Duration,
    pub total: Duration,
}

impl PhaseTimings {
    pub fn add(&mut self, other: &PhaseTimings) {
        self.eigen += other.eigen;
        self.lp += other.lp;
        self.gradient += other.gradient;
        self.total += other.total;
    }

    pub fn eigen_fraction(&self) -> f64 {
        let t = self.total.as_secs_f64();
        if t > 0.0 {
            self.eigen.as_secs_f64() / t
        } else {
            0.0
        }
    }
}

/// Snapshot of an accepted iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub m: MetricMatrix,
    pub coloring: Coloring,
    pub scalars: GdpaScalars,
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    IterationLimit,
    /// A degenerate first eigenvector stopped the final phase early; the
    /// result is the last valid iterate.
    DegenerateAbort,
}

/// Work counters and recordings that accumulate across a run, including the
/// discarded hypothesis of every node step.
#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub timings: PhaseTimings,
    pub iterates: Vec<Iterate>,
    pub degenerate_events: usize,
    pub singular_points: usize,
    pub fw_steps: usize,
    pub eigen_solves: usize,
    /// Eigen solves whose scalars failed the disc check and were kept from
    /// the previous iterate.
    pub scalar_rejections: usize,
}

/// The optimizer's current iterate and everything derived from it.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub m: MetricMatrix,
    pub coloring: Coloring,
    pub scalars: GdpaScalars,
    /// First eigenpair of every connected component.
    pub eig: Vec<ComponentEigen>,
    pub loss: f64,
    pub objective_trace: Vec<f64>,
    pub fw_iter: usize,
    pub main_iter: usize,
    delta: Vec<f64>,
    warm: Vec<f64>,
}

impl OptimizerState {
    /// Starts from `m` with unit scalars, then tries GDPA scalars.
    pub fn new(
        m: MetricMatrix,
        coloring: Coloring,
        objective: &Objective,
        params: &SgmlParams,
        log: &mut RunLog,
    ) -> Result<Self> {
        let k = m.dim();
        if coloring.len() != k || objective.dim() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: if coloring.len() != k {
                    coloring.len()
                } else {
                    objective.dim()
                },
            });
        }
        if !coloring.certifies(&m) {
            return Err(Error::InvalidParameter(
                "coloring does not certify the starting matrix".into(),
            ));
        }
        let delta = objective.distances(&m);
        let loss = objective.loss_from(&delta);
        let mut state = OptimizerState {
            m,
            coloring,
            scalars: GdpaScalars::ones(k),
            eig: Vec::new(),
            loss,
            objective_trace: vec![loss],
            fw_iter: 0,
            main_iter: 0,
            delta,
            warm: Vec::new(),
        };
        let start = crate::spectral::scaled_gershgorin(&state.m, &state.scalars).lower_bound;
        if start < params.disc_margin - SCALAR_ACCEPT_SLACK {
            return Err(Error::InvalidParameter(format!(
                "starting matrix has disc lower bound {start} below the margin {}",
                params.disc_margin
            )));
        }
        state.refresh(params, log);
        state.record(params, log);
        Ok(state)
    }

    /// Cached pair distances of the current iterate.
    pub fn distances(&self) -> &[f64] {
        &self.delta
    }

    /// Smallest first eigenvalue over the components.
    pub fn lambda_min(&self) -> f64 {
        self.eig
            .iter()
            .map(|e| e.value)
            .fold(f64::INFINITY, f64::min)
    }

    /// Lowest scaled disc left-end under the current scalars.
    pub fn disc_lower_bound(&self) -> f64 {
        crate::spectral::scaled_gershgorin(&self.m, &self.scalars).lower_bound
    }

    pub(crate) fn refresh(&mut self, params: &SgmlParams, log: &mut RunLog) -> bool {
        let start = std::time::Instant::now();
        let out = refresh_scalars(
            &self.m,
            &self.coloring,
            &self.scalars,
            &self.warm,
            params,
        );
        log.timings.eigen += start.elapsed();
        log.eigen_solves += out.solves;
        log.scalar_rejections += out.rejected;
        self.scalars = out.scalars;
        self.warm = out.warm;
        self.eig = out.components;
        if out.degenerate {
            log.degenerate_events += 1;
        }
        !out.degenerate
    }

    pub(crate) fn record(&self, params: &SgmlParams, log: &mut RunLog) {
        if params.record_iterates {
            log.iterates.push(Iterate {
                m: self.m.clone(),
                coloring: self.coloring.clone(),
                scalars: self.scalars.clone(),
                loss: self.loss,
            });
        }
    }
}

/// Result of a full optimization run.
#[derive(Debug, Clone)]
pub struct SgmlResult {
    pub m: MetricMatrix,
    pub coloring: Coloring,
    pub scalars: GdpaScalars,
    /// Objective in its natural sense (DEML is the maximized value).
    pub objective: f64,
    pub loss: f64,
    pub lambda_min: f64,
    pub trace: f64,
    pub objective_trace: Vec<f64>,
    pub main_iterations: usize,
    pub termination: Termination,
    pub log: RunLog,
}
