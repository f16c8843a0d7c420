//! The weighted kinetic Lagrangian x v^2 on [1, e]: invariance under
//! (tau, zeta) = (2x ln x, q) and the conserved quantity 2 A B.
use std::error::Error;

use fuzzy_noether::fuzzy::{FuzzyNumber, LevelGrid};
use fuzzy_noether::noether::{
    check_invariance, conservation_check, conserved_quantity, invariance_residual,
    ConservationTolerances, DelayedNoetherVariant, InvarianceOptions, SymmetryGenerator,
};
use fuzzy_noether::variational::{solve_extremal, LagrangianSpec, VariationalProblem};

fn main() -> Result<(), Box<dyn Error>> {
    let grid = LevelGrid::default();
    let l = LagrangianSpec::parse("x*vl^2", "x*vu^2")?;
    let bc_a = FuzzyNumber::triangular(0.0, 1.0, 2.0, &grid)?;
    let bc_b = FuzzyNumber::triangular(1.0, 2.0, 3.0, &grid)?;
    let problem = VariationalProblem::uniform(1.0, std::f64::consts::E, 2001, l, bc_a, bc_b)?;
    let extremal = solve_extremal(&problem)?.extremal;

    let g = SymmetryGenerator::parse(Some("2*x*ln(x)"), "ql", "qu")?;
    let inv = check_invariance(&problem, &g, &extremal, &InvarianceOptions::default())?;
    println!(
        "invariant: {} (min slope {:.3})",
        inv.invariant,
        inv.min_slope().unwrap_or(f64::NAN)
    );

    let report = conserved_quantity(
        &problem,
        &g,
        &extremal,
        DelayedNoetherVariant::default(),
        ConservationTolerances::default(),
    )?;
    let verdict = conservation_check(&report);
    println!(
        "conserved: {} (max |dC/dx| {:.2e}, span {:.2e})",
        verdict.conserved, verdict.max_dcdx, verdict.max_relative_span
    );
    for level in report.levels.iter().step_by(5) {
        // lower extremal r + ln x gives C = 2 r
        println!(
            "r = {:.1}: C_lower = {:.6} (expect {:.6}), C_upper = {:.6}",
            level.r,
            level.lower[1000],
            2.0 * level.r,
            level.upper[1000]
        );
    }

    // without the time component the symmetry is lost
    let space_only = SymmetryGenerator::parse(None, "ql", "qu")?;
    let inv = check_invariance(
        &problem,
        &space_only,
        &extremal,
        &InvarianceOptions::default(),
    )?;
    let res = invariance_residual(&problem, &extremal, &space_only)?;
    println!(
        "zeta = q alone: invariant {}, residual at x = {:.3}: {:.4} (2x v^2)",
        inv.invariant,
        problem.xs()[1000],
        res[0][0][1000]
    );
    Ok(())
}
