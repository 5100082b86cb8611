use serde::{Deserialize, Serialize};

use super::LpBackend;
use crate::error::{Error, Result};
use crate::graph::{Color, Coloring};
use crate::lp::{solve, solve_single_budget, LinearProgram, Relation, FEASIBILITY_TOL};
use crate::matrix::MetricMatrix;
use crate::spectral::{scaled_gershgorin, GdpaScalars};

/// A free off-diagonal entry `(i, j)` of a block LP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEdge {
    pub i: usize,
    pub j: usize,
    /// `+1.0` when the entry must stay `>= 0`, `-1.0` when it must stay `<= 0`.
    pub sign: f64,
    /// `|s_i / s_j|`: weight of `|M_ij|` in row `i`.
    pub ratio_ij: f64,
    /// `|s_j / s_i|`: weight of `|M_ij|` in row `j`.
    pub ratio_ji: f64,
}

/// One Frank-Wolfe linear program: all diagonals plus a set of sign-fixed
/// off-diagonals are free.
///
/// Variables are ordered diagonals first, then `edges`. Constraints:
/// - row `i`: `x_ii - sum_{e at i} ratio * sign_e * x_e >= floors[i]`
/// - sign: `sign_e * x_e >= 0`
/// - budget: `sum_i x_ii <= budget`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockLp {
    pub dim: usize,
    pub floors: Vec<f64>,
    pub edges: Vec<FreeEdge>,
    pub budget: f64,
}

impl BlockLp {
    pub fn num_vars(&self) -> usize {
        self.dim + self.edges.len()
    }

    /// Matrix position of every variable.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        (0..self.dim)
            .map(|i| (i, i))
            .chain(self.edges.iter().map(|e| (e.i, e.j)))
            .collect()
    }

    /// Current values of the variables in `m`.
    pub fn current(&self, m: &MetricMatrix) -> Vec<f64> {
        self.entries().into_iter().map(|(i, j)| m.get(i, j)).collect()
    }

    pub fn to_linear_program(&self, grad: &[f64]) -> LinearProgram {
        let k = self.dim;
        let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); k];
        bounds.extend(self.edges.iter().map(|e| {
            if e.sign > 0.0 {
                (0.0, f64::INFINITY)
            } else {
                (f64::NEG_INFINITY, 0.0)
            }
        }));
        let mut rows: Vec<Vec<(usize, f64)>> = (0..k).map(|i| vec![(i, 1.0)]).collect();
        for (n, e) in self.edges.iter().enumerate() {
            rows[e.i].push((k + n, -e.ratio_ij * e.sign));
            rows[e.j].push((k + n, -e.ratio_ji * e.sign));
        }
        let mut lp = LinearProgram::new(grad.to_vec()).with_bounds(bounds);
        for (row, &floor) in rows.into_iter().zip(&self.floors) {
            lp.push(row, Relation::Ge, floor);
        }
        lp.push((0..k).map(|i| (i, 1.0)).collect(), Relation::Le, self.budget);
        lp
    }

    /// Largest constraint violation of `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.to_linear_program(&vec![0.0; self.num_vars()])
            .max_violation(x)
    }

    /// Budget left after every row floor is met.
    pub fn capacity(&self) -> Result<f64> {
        let total: f64 = self.floors.iter().sum();
        let cap = self.budget - total;
        if cap >= 0.0 {
            Ok(cap)
        } else if cap >= -FEASIBILITY_TOL * self.budget.abs().max(1.0) {
            Ok(0.0)
        } else {
            Err(Error::InfeasibleFloors {
                total,
                budget: self.budget,
            })
        }
    }

    /// Minimizer of `grad^T x` over the block polytope.
    pub fn solve(&self, grad: &[f64], backend: LpBackend) -> Result<Vec<f64>> {
        if grad.len() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                found: grad.len(),
            });
        }
        match backend {
            LpBackend::ClosedForm => self.solve_closed_form(grad),
            LpBackend::Simplex => {
                self.capacity()?;
                solve(&self.to_linear_program(grad))?.into_optimal()
            }
        }
    }

    /// Substituting `z_i = x_ii - floor_i - sum ratio * |x_e|` and
    /// `a_e = |x_e|` leaves nonnegative variables under one budget row.
    fn solve_closed_form(&self, grad: &[f64]) -> Result<Vec<f64>> {
        let k = self.dim;
        let capacity = self.capacity()?;
        let mut costs = grad[..k].to_vec();
        let mut weights = vec![1.0; k];
        for (n, e) in self.edges.iter().enumerate() {
            costs.push(grad[e.i] * e.ratio_ij + grad[e.j] * e.ratio_ji + e.sign * grad[k + n]);
            weights.push(e.ratio_ij + e.ratio_ji);
        }
        let y = solve_single_budget(&costs, &weights, capacity)?;
        let mut x = self.floors.clone();
        for i in 0..k {
            x[i] += y[i];
        }
        for (n, e) in self.edges.iter().enumerate() {
            let a = y[k + n];
            x[e.i] += e.ratio_ij * a;
            x[e.j] += e.ratio_ji * a;
            x.push(e.sign * a);
        }
        Ok(x)
    }

    /// `x - current` as sparse upper-triangle entries.
    pub fn direction(&self, x: &[f64], m: &MetricMatrix) -> Vec<(usize, usize, f64)> {
        self.entries()
            .into_iter()
            .zip(x)
            .map(|((i, j), v)| (i, j, v - m.get(i, j)))
            .filter(|&(_, _, d)| d != 0.0)
            .collect()
    }
}

/// Frank-Wolfe vertex for the block and the sparse direction toward it.
pub fn fw_direction(
    lp: &BlockLp,
    grad: &[f64],
    m: &MetricMatrix,
    backend: LpBackend,
) -> Result<Vec<(usize, usize, f64)>> {
    let x = lp.solve(grad, backend)?;
    Ok(lp.direction(&x, m))
}

/// Scaled disc left-end of every row: `M_ii - sum_{j != i} |s_i/s_j| |M_ij|`.
pub fn row_margins(m: &MetricMatrix, s: &GdpaScalars) -> Vec<f64> {
    scaled_gershgorin(m, s).left_ends()
}

fn floors_with_fixed(
    m: &MetricMatrix,
    s: &GdpaScalars,
    rho: f64,
    is_free: impl Fn(usize, usize) -> bool,
) -> Vec<f64> {
    let k = m.dim();
    let margins = row_margins(m, s);
    (0..k)
        .map(|i| {
            let row = m.row(i);
            let fixed: f64 = (0..k)
                .filter(|&j| j != i && !is_free(i, j))
                .map(|j| s.ratio(i, j) * row[j].abs())
                .sum();
            fixed + rho.min(margins[i])
        })
        .collect()
}

fn edge(s: &GdpaScalars, i: usize, j: usize, sign: f64) -> FreeEdge {
    FreeEdge {
        i,
        j,
        sign,
        ratio_ij: s.ratio(i, j),
        ratio_ji: s.ratio(j, i),
    }
}

fn edge_sign(coloring: &Coloring, i: usize, j: usize) -> f64 {
    if coloring.same(i, j) {
        -1.0
    } else {
        1.0
    }
}

fn check_dims(m: &MetricMatrix, s: &GdpaScalars) -> Result<()> {
    if s.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: s.len(),
        });
    }
    Ok(())
}

/// Diagonal block: every off-diagonal frozen at its value in `m`.
///
/// A row whose current margin already sits below `rho` keeps that margin as
/// its floor, so `m` itself is always feasible.
pub fn assemble_diag_constraints(
    m: &MetricMatrix,
    s: &GdpaScalars,
    rho: f64,
    budget: f64,
) -> Result<BlockLp> {
    check_dims(m, s)?;
    Ok(BlockLp {
        dim: m.dim(),
        floors: floors_with_fixed(m, s, rho, |_, _| false),
        edges: Vec::new(),
        budget,
    })
}

/// Column block of `node`: the entries `(i, node)` are free with signs set by
/// `coloring` after `node` takes the `hypothesis` color.
pub fn assemble_offdiag_constraints(
    m: &MetricMatrix,
    s: &GdpaScalars,
    coloring: &Coloring,
    node: usize,
    hypothesis: Color,
    rho: f64,
    budget: f64,
) -> Result<BlockLp> {
    check_dims(m, s)?;
    let k = m.dim();
    if node >= k || coloring.len() != k {
        return Err(Error::InvalidParameter(format!(
            "node {node} out of range for {k} features"
        )));
    }
    let edges = (0..k)
        .filter(|&i| i != node)
        .map(|i| {
            let sign = if coloring.color(i) == hypothesis {
                -1.0
            } else {
                1.0
            };
            edge(s, i, node, sign)
        })
        .collect();
    Ok(BlockLp {
        dim: k,
        floors: floors_with_fixed(m, s, rho, |i, j| i == node || j == node),
        edges,
        budget,
    })
}

/// Whole matrix free, with every off-diagonal sign fixed by `coloring`.
pub fn assemble_full_constraints(
    m: &MetricMatrix,
    s: &GdpaScalars,
    coloring: &Coloring,
    rho: f64,
    budget: f64,
) -> Result<BlockLp> {
    check_dims(m, s)?;
    let k = m.dim();
    let margins = row_margins(m, s);
    let edges = (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .map(|(i, j)| edge(s, i, j, edge_sign(coloring, i, j)))
        .collect();
    Ok(BlockLp {
        dim: k,
        floors: margins.iter().map(|&l| rho.min(l)).collect(),
        edges,
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_2x2() -> MetricMatrix {
        MetricMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap()
    }

    #[test]
    fn diagonal_only_floors_vanish() {
        let m = MetricMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let lp = assemble_diag_constraints(&m, &GdpaScalars::ones(3), 0.0, 6.0).unwrap();
        assert_eq!(lp.floors, vec![0.0; 3]);
        assert_eq!(lp.budget, 6.0);
    }

    #[test]
    fn unit_scalar_floors() {
        let lp = assemble_diag_constraints(&unit_2x2(), &GdpaScalars::ones(2), 0.0, 4.0).unwrap();
        assert_eq!(lp.floors, vec![1.0, 1.0]);
    }

    #[test]
    fn all_positive_gradient_sits_on_floors() {
        let lp = assemble_diag_constraints(&unit_2x2(), &GdpaScalars::ones(2), 0.0, 4.0).unwrap();
        let x = lp.solve(&[1.0, 0.5], LpBackend::ClosedForm).unwrap();
        assert_eq!(x, vec![1.0, 1.0]);
    }

    #[test]
    fn unique_minimum_takes_the_budget() {
        let lp = assemble_diag_constraints(&unit_2x2(), &GdpaScalars::ones(2), 0.0, 4.0).unwrap();
        let x = lp.solve(&[1.0, -0.5], LpBackend::ClosedForm).unwrap();
        assert_eq!(x, vec![1.0, 3.0]);
    }

    #[test]
    fn blue_hypothesis_on_all_blue_is_nonpositive() {
        let m = MetricMatrix::from_diagonal(&[1.0, 1.0, 1.0]);
        let lp = assemble_offdiag_constraints(
            &m,
            &GdpaScalars::ones(3),
            &Coloring::all_blue(3),
            1,
            Color::Blue,
            0.0,
            3.0,
        )
        .unwrap();
        assert_eq!(lp.edges.len(), 2);
        assert!(lp.edges.iter().all(|e| e.sign < 0.0 && e.j == 1));
    }

    #[test]
    fn red_hypothesis_flips_signs() {
        let m = MetricMatrix::from_diagonal(&[1.0, 1.0, 1.0]);
        let lp = assemble_offdiag_constraints(
            &m,
            &GdpaScalars::ones(3),
            &Coloring::all_blue(3),
            0,
            Color::Red,
            0.0,
            3.0,
        )
        .unwrap();
        assert!(lp.edges.iter().all(|e| e.sign > 0.0));
    }

    #[test]
    fn closed_form_matches_simplex_on_a_column() {
        let m = MetricMatrix::from_rows(&[
            vec![1.2, -0.3, 0.0],
            vec![-0.3, 0.9, 0.2],
            vec![0.0, 0.2, 0.9],
        ])
        .unwrap();
        let coloring = Coloring(vec![Color::Blue, Color::Blue, Color::Red]);
        let s = GdpaScalars::new(vec![1.0, 1.3, -0.8]).unwrap();
        let lp = assemble_offdiag_constraints(&m, &s, &coloring, 2, Color::Red, 0.0, 3.0).unwrap();
        let grad = [0.4, 0.1, 0.3, -2.0, 1.5];
        let a = lp.solve(&grad, LpBackend::ClosedForm).unwrap();
        let b = lp.solve(&grad, LpBackend::Simplex).unwrap();
        let obj = |x: &[f64]| x.iter().zip(&grad).map(|(u, g)| u * g).sum::<f64>();
        assert!((obj(&a) - obj(&b)).abs() < 1e-9);
        assert!(lp.violation(&a) < 1e-12);
    }

    #[test]
    fn current_point_is_feasible() {
        let m = unit_2x2();
        let lp = assemble_full_constraints(&m, &GdpaScalars::ones(2), &Coloring::all_blue(2), 0.0, 4.0)
            .unwrap();
        assert!(lp.violation(&lp.current(&m)) < 1e-12);
    }
}
