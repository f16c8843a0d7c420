//! A delayed problem: residuals and conserved quantities with the regime
//! split at b - tau_d.
use std::error::Error;

use fuzzy_noether::expr::parse;
use fuzzy_noether::fuzzy::{FuzzyNumber, LevelGrid};
use fuzzy_noether::noether::{
    conservation_check, conserved_quantity, ConservationTolerances, DelayedNoetherVariant,
    SymmetryGenerator,
};
use fuzzy_noether::variational::{
    delayed_el_residual, el_residual, solve_extremal, Delay, Extremal, LagrangianSpec,
    VariationalProblem,
};

fn main() -> Result<(), Box<dyn Error>> {
    let grid = LevelGrid::uniform(5)?;
    let n = 200;
    let xs: Vec<f64> = (0..=n).map(|i| 2.0 * i as f64 / n as f64).collect();
    let bc_a = FuzzyNumber::crisp(0.0, &grid);
    let bc_b = FuzzyNumber::triangular(1.0, 2.0, 3.0, &grid)?;

    // delay-free L through the delayed path matches the plain problem
    let free = LagrangianSpec::parse("vl^2", "vu^2")?;
    let delay = Delay::new(1.0, parse("0")?, parse("0")?);
    let delayed = VariationalProblem::delayed(
        xs.clone(),
        free.clone(),
        bc_a.clone(),
        bc_b.clone(),
        delay.clone(),
    )?;
    let plain = VariationalProblem::with_nodes(xs.clone(), free, bc_a.clone(), bc_b.clone())?;
    let sol = solve_extremal(&delayed)?;
    let rd = delayed_el_residual(&delayed, &sol.extremal)?;
    let plain_extremal = solve_extremal(&plain)?.extremal;
    let rp = el_residual(&plain, &plain_extremal)?;
    println!(
        "split node {:?} at x = {}",
        rd.split(),
        xs[delayed.regime_split().unwrap()]
    );
    println!(
        "max residual delayed {:.3e}, plain {:.3e}",
        rd.max_abs(),
        rp.max_abs()
    );

    let g = SymmetryGenerator::parse(None, "1", "1")?;
    let c = conserved_quantity(
        &delayed,
        &g,
        &sol.extremal,
        DelayedNoetherVariant::Symmetric,
        ConservationTolerances::default(),
    )?;
    println!(
        "momentum conserved: {}, segments {:?}",
        conservation_check(&c).conserved,
        c.segments
    );

    // a genuinely delayed Lagrangian evaluated on a prescribed, non-extremal trajectory
    let coupled = LagrangianSpec::parse("vl^2 + vl*wl", "vu^2 + vu*wu")?;
    let problem = VariationalProblem::delayed(xs.clone(), coupled, bc_a, bc_b, delay)?;
    let trial = Extremal::sample(xs, grid.clone(), |r, x| (r * x / 2.0, (3.0 - r) * x / 2.0))?
        .attach_history(&problem)?;
    let res = delayed_el_residual(&problem, &trial)?;
    let per_eq = res.max_abs_per_equation().map(|v| format!("{v:.3e}"));
    println!(
        "delayed residual per equation on a linear trial: {}",
        per_eq.join(", ")
    );
    for variant in [
        DelayedNoetherVariant::Symmetric,
        DelayedNoetherVariant::Literal,
    ] {
        let c = conserved_quantity(
            &problem,
            &g,
            &trial,
            variant,
            ConservationTolerances::default(),
        )?;
        println!(
            "{variant:?}: max |dC/dx| {:.3e}",
            conservation_check(&c).max_dcdx
        );
    }
    Ok(())
}
