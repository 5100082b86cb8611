use std::time::Instant;

use log::{debug, info, warn};

use super::constraints::{
    assemble_diag_constraints, assemble_full_constraints, assemble_offdiag_constraints, BlockLp,
};
use super::init::{init_metric, init_positive_metric};
use super::line_search::{central_difference, nr_step_size};
use super::{OptimizerState, RunLog, SgmlParams, SgmlResult, Termination};
use crate::data::Dataset;
use crate::error::Result;
use crate::graph::Color;
use crate::objectives::{EntrySelector, Objective, ObjectiveKind};

const CURVATURE_STEP: f64 = 1e-6;

/// How a Frank-Wolfe loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockOutcome {
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
}

/// How a sweep over all nodes ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassOutcome {
    pub colors_changed: bool,
    pub degenerate: bool,
    pub loss_before: f64,
    pub loss_after: f64,
}

fn small_change(before: f64, after: f64, tol: f64) -> bool {
    (before - after).abs() <= tol * after.abs().max(1.0)
}

fn block_lp(state: &OptimizerState, selector: EntrySelector, params: &SgmlParams) -> Result<BlockLp> {
    let budget = params.budget(state.m.dim());
    let rho = params.disc_margin;
    match selector {
        EntrySelector::Diagonal => assemble_diag_constraints(&state.m, &state.scalars, rho, budget),
        EntrySelector::Column(node) => assemble_offdiag_constraints(
            &state.m,
            &state.scalars,
            &state.coloring,
            node,
            state.coloring.color(node),
            rho,
            budget,
        ),
        EntrySelector::All => {
            assemble_full_constraints(&state.m, &state.scalars, &state.coloring, rho, budget)
        }
    }
}

/// Frank-Wolfe on one block until the relative decrease drops to `tol`, a
/// zero step is taken, or `max_iter` steps.
fn run_block(
    state: &mut OptimizerState,
    objective: &Objective,
    params: &SgmlParams,
    log: &mut RunLog,
    selector: EntrySelector,
    tol: f64,
    max_iter: usize,
    record: bool,
) -> Result<BlockOutcome> {
    let mut out = BlockOutcome {
        iterations: 0,
        converged: false,
        degenerate: false,
    };
    while out.iterations < max_iter {
        let t = Instant::now();
        let pg = objective.pair_gradient(&state.delta);
        log.singular_points += pg.singular_points;
        let grad = objective.matrix_gradient(&pg.values, selector);
        log.timings.gradient += t.elapsed();

        let t = Instant::now();
        let lp = block_lp(state, selector, params)?;
        let x = lp.solve(&grad, params.lp_backend)?;
        let dir = lp.direction(&x, &state.m);
        log.timings.lp += t.elapsed();
        if dir.is_empty() {
            out.converged = true;
            break;
        }

        let t = Instant::now();
        let e = objective.sparse_distances(&dir);
        let delta = &state.delta;
        let along = |g: f64| -> Vec<f64> { delta.iter().zip(&e).map(|(d, x)| d + g * x).collect() };
        let q = |g: f64| objective.loss_from(&along(g));
        let dq = |g: f64| {
            let pg = objective.pair_gradient(&along(g));
            pg.values.iter().zip(&e).map(|(a, b)| a * b).sum::<f64>()
        };
        let d2q = |g: f64| central_difference(&dq, g, CURVATURE_STEP);
        let gamma = nr_step_size(q, dq, d2q, params.nr_tol);
        log.timings.gradient += t.elapsed();
        if gamma == 0.0 {
            out.converged = true;
            break;
        }

        for (i, j, d) in dir {
            let v = state.m.get(i, j) + gamma * d;
            // keep fixed-sign entries from crossing zero by rounding
            let v = if i != j && (v > 0.0) != (x_sign(&state.coloring, i, j) > 0.0) && v != 0.0 {
                0.0
            } else {
                v
            };
            state.m.set(i, j, v);
        }
        state.delta.iter_mut().zip(&e).for_each(|(d, x)| *d += gamma * x);
        let before = state.loss;
        state.loss = objective.loss_from(&state.delta);
        state.fw_iter += 1;
        log.fw_steps += 1;
        out.iterations += 1;
        if record {
            state.objective_trace.push(state.loss);
        }

        if !state.refresh(params, log) {
            warn!("degenerate first eigenvector; stopping this block");
            out.degenerate = true;
            break;
        }
        if record {
            state.record(params, log);
        }
        if small_change(before, state.loss, tol) {
            out.converged = true;
            break;
        }
    }
    Ok(out)
}

fn x_sign(coloring: &crate::graph::Coloring, i: usize, j: usize) -> f64 {
    if coloring.same(i, j) {
        -1.0
    } else {
        1.0
    }
}

/// Frank-Wolfe over the diagonal with off-diagonals frozen.
pub fn optimize_diagonal(
    state: &mut OptimizerState,
    objective: &Objective,
    params: &SgmlParams,
    log: &mut RunLog,
) -> Result<BlockOutcome> {
    run_block(
        state,
        objective,
        params,
        log,
        EntrySelector::Diagonal,
        params.sub_tol,
        params.max_sub_iter,
        true,
    )
}

fn hypothesis_run(
    state: &OptimizerState,
    objective: &Objective,
    params: &SgmlParams,
    log: &mut RunLog,
    node: usize,
    color: Color,
) -> Result<(OptimizerState, BlockOutcome)> {
    let mut st = state.clone();
    st.coloring.set(node, color);
    let k = st.m.dim();
    let mut zeroed = false;
    for i in (0..k).filter(|&i| i != node) {
        let v = st.m.get(i, node);
        if v != 0.0 && (v > 0.0) != (x_sign(&st.coloring, i, node) > 0.0) {
            st.m.set(i, node, 0.0);
            zeroed = true;
        }
    }
    if zeroed {
        st.delta = objective.distances(&st.m);
        st.loss = objective.loss_from(&st.delta);
    }
    let out = run_block(
        &mut st,
        objective,
        params,
        log,
        EntrySelector::Column(node),
        params.sub_tol,
        params.max_sub_iter,
        false,
    )?;
    Ok((st, out))
}

/// One sweep of block-coordinate descent over the node columns.
///
/// Each node is optimized twice from the same state, once as blue and once
/// as red; the lower loss wins and ties keep blue. Entries of the column that
/// contradict a hypothesis start at zero.
pub fn bcd_pass(
    state: &mut OptimizerState,
    objective: &Objective,
    params: &SgmlParams,
    log: &mut RunLog,
) -> Result<PassOutcome> {
    let k = state.m.dim();
    let before_colors = state.coloring.clone();
    let loss_before = state.loss;
    let mut degenerate = false;
    for node in 0..k {
        let (blue, blue_out) = hypothesis_run(state, objective, params, log, node, Color::Blue)?;
        let mut winner = blue;
        degenerate |= blue_out.degenerate;
        if params.allow_negative_edges {
            let (red, red_out) = hypothesis_run(state, objective, params, log, node, Color::Red)?;
            let tie = small_change(winner.loss, red.loss, 1e-12);
            if red.loss < winner.loss && !tie {
                winner = red;
                degenerate |= red_out.degenerate;
            }
        }
        if winner.loss > state.loss {
            debug!("node {node}: both hypotheses worse than the current state");
            continue;
        }
        *state = winner;
        state.objective_trace.push(state.loss);
        state.record(params, log);
    }
    Ok(PassOutcome {
        colors_changed: state.coloring != before_colors,
        degenerate,
        loss_before,
        loss_after: state.loss,
    })
}

/// Frank-Wolfe over every entry with the node colors frozen.
pub fn full_matrix_pass(
    state: &mut OptimizerState,
    objective: &Objective,
    params: &SgmlParams,
    log: &mut RunLog,
) -> Result<BlockOutcome> {
    state.delta = objective.distances(&state.m);
    state.loss = objective.loss_from(&state.delta);
    run_block(
        state,
        objective,
        params,
        log,
        EntrySelector::All,
        params.main_tol,
        params.max_main_iter,
        true,
    )
}

/// Learns a metric for `kind` on `data`.
pub fn sgml(data: &Dataset, kind: ObjectiveKind, params: &SgmlParams) -> Result<SgmlResult> {
    let objective = Objective::new(kind, data, params.seed)?;
    sgml_with_log(data, &objective, params)
}

/// Learns a metric for a prepared objective.
pub fn sgml_with_log(data: &Dataset, objective: &Objective, params: &SgmlParams) -> Result<SgmlResult> {
    let start = Instant::now();
    let k = data.dim();
    params.validate(k)?;
    let budget = params.budget(k);
    let (m0, coloring) = if params.allow_negative_edges {
        init_metric(data, budget)?
    } else {
        init_positive_metric(data, budget)?
    };
    let mut log = RunLog::default();
    let mut state = OptimizerState::new(m0, coloring, objective, params, &mut log)?;

    optimize_diagonal(&mut state, objective, params, &mut log)?;

    let mut bcd_limit = true;
    while state.main_iter < params.max_main_iter {
        let pass = bcd_pass(&mut state, objective, params, &mut log)?;
        state.main_iter += 1;
        debug!(
            "pass {}: loss {} -> {}",
            state.main_iter, pass.loss_before, pass.loss_after
        );
        if !pass.colors_changed || small_change(pass.loss_before, pass.loss_after, params.main_tol) {
            bcd_limit = false;
            break;
        }
    }

    let full = full_matrix_pass(&mut state, objective, params, &mut log)?;
    let termination = if full.degenerate {
        Termination::DegenerateAbort
    } else if full.converged && !bcd_limit {
        Termination::Converged
    } else {
        Termination::IterationLimit
    };
    log.timings.total = start.elapsed();
    info!(
        "{}: loss {} after {} passes and {} Frank-Wolfe steps ({:?})",
        objective.kind(),
        state.loss,
        state.main_iter,
        log.fw_steps,
        termination
    );

    Ok(SgmlResult {
        objective: objective.kind().sense() * state.loss,
        loss: state.loss,
        lambda_min: state.lambda_min(),
        trace: state.m.trace(),
        objective_trace: state.objective_trace.clone(),
        main_iterations: state.main_iter,
        termination,
        m: state.m,
        coloring: state.coloring,
        scalars: state.scalars,
        log,
    })
}
