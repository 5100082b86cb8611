//! Dense simplex on a small LP, and the closed-form budget LP the optimizer
//! solves for diagonal updates.

use sgml::lp::{solve, solve_diagonal_budget, LinearProgram, Relation};

fn main() -> sgml::Result<()> {
    // min -x - 2y  s.t.  x + y <= 4,  x - y >= -2,  x, y >= 0
    let mut lp = LinearProgram::new(vec![-1.0, -2.0]);
    lp.push(vec![(0, 1.0), (1, 1.0)], Relation::Le, 4.0);
    lp.push(vec![(0, 1.0), (1, -1.0)], Relation::Ge, -2.0);
    let sol = solve(&lp)?;
    println!("simplex: {:?} x = {:?} value {}", sol.status, sol.x, sol.objective_value);

    // min g^T x  s.t.  x >= floors, sum x <= budget
    let grad = [0.3, -1.2, -0.4];
    let floors = [0.5, 0.2, 0.1];
    let x = solve_diagonal_budget(&grad, &floors, 3.0)?;
    println!("budget LP: x = {x:?}");
    Ok(())
}
