//! Dense two-phase primal simplex with Bland's rule, plus closed forms for the
//! single-budget LPs the optimizer produces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feasibility tolerance for reported solutions.
pub const FEASIBILITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;
const COST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// Sparse `(variable, coefficient)` list.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `min c^T x` subject to linear rows and per-variable bounds.
///
/// Variables without explicit bounds are free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn push(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    fn bound(&self, j: usize) -> (f64, f64) {
        self.bounds
            .as_ref()
            .map(|b| b[j])
            .unwrap_or((f64::NEG_INFINITY, f64::INFINITY))
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max);
        let bounds = (0..self.num_vars())
            .map(|j| {
                let (lo, hi) = self.bound(j);
                (lo - x[j]).max(x[j] - hi).max(0.0)
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    fn validate(&self) -> Result<()> {
        if self.objective.is_empty() {
            return Err(Error::InvalidParameter("LP has no variables".into()));
        }
        let n = self.num_vars();
        if let Some(b) = &self.bounds {
            if b.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: b.len(),
                });
            }
            if b.iter().any(|(lo, hi)| lo.is_nan() || hi.is_nan() || lo > hi) {
                return Err(Error::InvalidParameter("inconsistent variable bounds".into()));
            }
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.constraints.iter().all(|c| {
                c.rhs.is_finite() && c.coeffs.iter().all(|&(j, a)| j < n && a.is_finite())
            });
        if !finite {
            return Err(Error::NonFinite {
                what: "LP coefficients".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
}

impl LpSolution {
    fn not_optimal(n: usize, status: LpStatus) -> Self {
        LpSolution {
            x: vec![f64::NAN; n],
            objective_value: f64::NAN,
            status,
        }
    }

    pub fn into_optimal(self) -> Result<Vec<f64>> {
        match self.status {
            LpStatus::Optimal => Ok(self.x),
            LpStatus::Infeasible => Err(Error::LpStatus("infeasible")),
            LpStatus::Unbounded => Err(Error::LpStatus("unbounded")),
        }
    }
}

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + y`
    Shift { col: usize, offset: f64 },
    /// `x = offset - y`
    Mirror { col: usize, offset: f64 },
    /// `x = y+ - y-`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `(rows + 1) x (cols + 1)`; last row is the cost row, last column the rhs.
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * (self.cols + 1) + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for (c, pv) in pivot_row.iter().enumerate() {
                self.data[r * w + c] -= f * pv;
            }
            self.data[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Bland's rule simplex on the current cost row, restricted to columns
    /// where `allowed` is true. Returns false when unbounded.
    fn run(&mut self, allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.cols).find(|&c| allowed[c] && self.at(self.rows, c) < -COST_TOL);
            let Some(pc) = entering else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, self.cols) / a;
                    let cand = (ratio, self.basis[r], r);
                    best = match best {
                        None => Some(cand),
                        Some(b) => {
                            if ratio < b.0 - 1e-15 * b.0.abs().max(1.0)
                                || ((ratio - b.0).abs() <= 1e-15 * b.0.abs().max(1.0)
                                    && cand.1 < b.1)
                            {
                                Some(cand)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            match best {
                None => return false,
                Some((_, _, pr)) => self.pivot(pr, pc),
            }
        }
    }

    fn set_cost_row(&mut self, costs: &[f64]) {
        let w = self.cols + 1;
        for c in 0..w {
            self.data[self.rows * w + c] = if c < self.cols { costs[c] } else { 0.0 };
        }
        for r in 0..self.rows {
            let b = self.basis[r];
            let cb = costs[b];
            if cb != 0.0 {
                for c in 0..w {
                    self.data[self.rows * w + c] -= cb * self.data[r * w + c];
                }
            }
        }
    }
}

/// Solves `lp` to a vertex optimum. Deterministic: Bland's rule picks the
/// lowest-index improving column and breaks ratio ties by the lowest basic
/// index.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // standard-form columns
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = lp.bound(j);
        let map = if lo.is_finite() {
            let col = ncols;
            ncols += 1;
            if hi.is_finite() {
                extra_rows.push((col, hi - lo));
            }
            VarMap::Shift { col, offset: lo }
        } else if hi.is_finite() {
            let col = ncols;
            ncols += 1;
            VarMap::Mirror { col, offset: hi }
        } else {
            let pos = ncols;
            ncols += 2;
            VarMap::Split { pos, neg: pos + 1 }
        };
        maps.push(map);
    }

    // rows as (dense coeffs over structural cols, relation, rhs)
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    let mut cost = vec![0.0; ncols];
    for (j, &c) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] += c,
            VarMap::Mirror { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }
    for con in &lp.constraints {
        let mut dense = vec![0.0; ncols];
        let mut rhs = con.rhs;
        for &(j, a) in &con.coeffs {
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    dense[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Mirror { col, offset } => {
                    dense[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    dense[pos] += a;
                    dense[neg] -= a;
                }
            }
        }
        rows.push((dense, con.relation, rhs));
    }
    for (col, width) in extra_rows {
        let mut dense = vec![0.0; ncols];
        dense[col] = 1.0;
        rows.push((dense, Relation::Le, width));
    }
    for row in &mut rows {
        if row.2 < 0.0 {
            row.0.iter_mut().for_each(|v| *v = -*v);
            row.2 = -row.2;
            row.1 = match row.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let total = ncols + n_slack + n_art;
    let art_start = ncols + n_slack;
    let mut t = Tableau {
        rows: m,
        cols: total,
        data: vec![0.0; (m + 1) * (total + 1)],
        basis: vec![0; m],
    };
    let (mut s_idx, mut a_idx) = (ncols, art_start);
    for (r, (dense, rel, rhs)) in rows.iter().enumerate() {
        for (c, v) in dense.iter().enumerate() {
            *t.at_mut(r, c) = *v;
        }
        *t.at_mut(r, total) = *rhs;
        match rel {
            Relation::Le => {
                *t.at_mut(r, s_idx) = 1.0;
                t.basis[r] = s_idx;
                s_idx += 1;
            }
            Relation::Ge => {
                *t.at_mut(r, s_idx) = -1.0;
                s_idx += 1;
                *t.at_mut(r, a_idx) = 1.0;
                t.basis[r] = a_idx;
                a_idx += 1;
            }
            Relation::Eq => {
                *t.at_mut(r, a_idx) = 1.0;
                t.basis[r] = a_idx;
                a_idx += 1;
            }
        }
    }

    if n_art > 0 {
        let mut phase1 = vec![0.0; total];
        phase1[art_start..].iter_mut().for_each(|v| *v = 1.0);
        t.set_cost_row(&phase1);
        t.run(&vec![true; total]);
        let infeas = -t.at(m, total);
        let scale = rows.iter().map(|r| r.2.abs()).fold(1.0, f64::max);
        if infeas > FEASIBILITY_TOL * scale {
            return Ok(LpSolution::not_optimal(n, LpStatus::Infeasible));
        }
        // drive remaining zero-level artificials out of the basis
        for r in 0..m {
            if t.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| t.at(r, c).abs() > 1e-9) {
                    t.pivot(r, c);
                }
            }
        }
    }

    let mut phase2 = vec![0.0; total];
    phase2[..ncols].copy_from_slice(&cost);
    t.set_cost_row(&phase2);
    let allowed: Vec<bool> = (0..total).map(|c| c < art_start).collect();
    if !t.run(&allowed) {
        return Ok(LpSolution::not_optimal(n, LpStatus::Unbounded));
    }

    let mut y = vec![0.0; total];
    for r in 0..m {
        y[t.basis[r]] = t.at(r, total).max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, offset } => offset + y[col],
            VarMap::Mirror { col, offset } => offset - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        objective_value,
        status: LpStatus::Optimal,
    })
}

/// `min grad^T x` subject to `x >= floors` and `sum x <= budget`.
///
/// Every variable sits on its floor; the leftover budget goes to the most
/// negative gradient coordinate (lowest index on ties), if any.
pub fn solve_diagonal_budget(grad: &[f64], floors: &[f64], budget: f64) -> Result<Vec<f64>> {
    if grad.len() != floors.len() {
        return Err(Error::DimensionMismatch {
            expected: grad.len(),
            found: floors.len(),
        });
    }
    let total: f64 = floors.iter().sum();
    if total > budget {
        return Err(Error::InfeasibleFloors { total, budget });
    }
    let mut x = floors.to_vec();
    if let Some((idx, g)) = argmin(grad) {
        if g < 0.0 {
            x[idx] += budget - total;
        }
    }
    Ok(x)
}

/// `min costs^T y` subject to `weights^T y <= capacity`, `y >= 0`, with every
/// weight positive. The optimum saturates the capacity on the variable with
/// the most negative cost-to-weight ratio (lowest index on ties).
pub fn solve_single_budget(costs: &[f64], weights: &[f64], capacity: f64) -> Result<Vec<f64>> {
    if costs.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: costs.len(),
            found: weights.len(),
        });
    }
    if capacity < 0.0 {
        return Err(Error::InfeasibleFloors {
            total: -capacity,
            budget: 0.0,
        });
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParameter("budget weights must be positive".into()));
    }
    let ratios: Vec<f64> = costs.iter().zip(weights).map(|(c, w)| c / w).collect();
    let mut y = vec![0.0; costs.len()];
    if let Some((idx, r)) = argmin(&ratios) {
        if r < 0.0 {
            y[idx] = capacity / weights[idx];
        }
    }
    Ok(y)
}

fn argmin(v: &[f64]) -> Option<(usize, f64)> {
    v.iter()
        .copied()
        .enumerate()
        .fold(None, |best, (i, x)| match best {
            Some((_, b)) if x >= b => best,
            _ => Some((i, x)),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_floors_and_a_cap() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.push(vec![(0, 1.0)], Relation::Ge, 1.0);
        lp.push(vec![(1, 1.0)], Relation::Ge, 1.0);
        lp.push(vec![(0, 1.0), (1, 1.0)], Relation::Le, 3.0);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
        assert!((sol.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn budget_saturating_direction() {
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.push(vec![(0, 1.0)], Relation::Ge, 0.0);
        lp.push(vec![(0, 1.0)], Relation::Le, 5.0);
        let sol = solve(&lp).unwrap();
        assert!((sol.x[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(vec![(0, 1.0)], Relation::Ge, 2.0);
        lp.push(vec![(0, 1.0)], Relation::Le, 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.push(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn bounds_and_equalities() {
        // min x - y, x in [-2, 3], y <= 4, x + y = 1
        let mut lp = LinearProgram::new(vec![1.0, -1.0])
            .with_bounds(vec![(-2.0, 3.0), (f64::NEG_INFINITY, 4.0)]);
        lp.push(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        let sol = solve(&lp).unwrap();
        assert!((sol.x[0] + 2.0).abs() < 1e-12 && (sol.x[1] - 3.0).abs() < 1e-12);
        assert!((sol.objective_value + 5.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_budget_examples() {
        let x = solve_diagonal_budget(&[-1.0, -3.0], &[0.5, 0.5], 3.0).unwrap();
        assert_eq!(x, vec![0.5, 2.5]);
        assert_eq!(
            solve_diagonal_budget(&[1.0, 2.0], &[0.5, 0.25], 3.0).unwrap(),
            vec![0.5, 0.25]
        );
        assert_eq!(
            solve_diagonal_budget(&[-1.0, -1.0], &[0.5, 0.5], 3.0).unwrap(),
            vec![2.5, 0.5]
        );
        assert!(matches!(
            solve_diagonal_budget(&[1.0], &[2.0], 1.0),
            Err(Error::InfeasibleFloors { .. })
        ));
    }

    #[test]
    fn single_budget_picks_best_ratio() {
        let y = solve_single_budget(&[-1.0, -3.0, 2.0], &[1.0, 4.0, 1.0], 2.0).unwrap();
        assert_eq!(y, vec![2.0, 0.0, 0.0]);
        let y = solve_single_budget(&[1.0, 3.0], &[1.0, 4.0], 2.0).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);
    }
}
