//! Solving the fuzzy Euler-Lagrange system for L = x v^2 and comparing with
//! the closed-form extremal A + B ln x.
use std::error::Error;

use fuzzy_noether::fuzzy::{FuzzyNumber, LevelGrid};
use fuzzy_noether::variational::{el_residual, solve_extremal, LagrangianSpec, VariationalProblem};

fn main() -> Result<(), Box<dyn Error>> {
    let grid = LevelGrid::default();
    let l = LagrangianSpec::parse("x*vl^2", "x*vu^2")?;
    let bc_a = FuzzyNumber::triangular(0.0, 1.0, 2.0, &grid)?;
    let bc_b = FuzzyNumber::triangular(1.0, 2.0, 3.0, &grid)?;
    let problem = VariationalProblem::uniform(1.0, std::f64::consts::E, 500, l, bc_a, bc_b)?;
    let solution = solve_extremal(&problem)?;
    let diag = &solution.diagnostics;
    println!(
        "converged {}, consistent {} (tol {:.2e})",
        diag.converged, diag.consistent, diag.tol_consistent
    );

    // lower: r + ln x, upper: (2 - r) + ln x
    let mut worst: f64 = 0.0;
    for (path, r) in solution.extremal.levels().iter().zip(grid.iter()) {
        for (i, &x) in problem.xs().iter().enumerate() {
            worst = worst.max((path.ql[i] - (r + x.ln())).abs());
            worst = worst.max((path.qu[i] - (2.0 - r + x.ln())).abs());
        }
    }
    println!("max error against A + B ln x: {worst:.3e}");
    let res = el_residual(&problem, &solution.extremal)?;
    println!("max |R| per equation: {:?}", res.max_abs_per_equation());

    // ql coupled to vu only in the lower Lagrangian: no exact solution
    let skew = problem.with_lagrangian(LagrangianSpec::parse("vl^2 + ql*vu", "vu^2")?)?;
    let fit = solve_extremal(&skew)?;
    println!(
        "skewed Lagrangian consistent: {} (max residual {:.3e})",
        fit.diagnostics.consistent,
        fit.diagnostics.max_residual()
    );
    Ok(())
}
