//! gH-derivatives and integrals of sampled fuzzy-valued functions.
use std::error::Error;

use fuzzy_noether::calculus::FuzzyTrajectory;
use fuzzy_noether::fuzzy::{FuzzyNumber, LevelGrid};

fn main() -> Result<(), Box<dyn Error>> {
    let grid = LevelGrid::default();
    let xs: Vec<f64> = (0..=90).map(|i| 0.1 + 0.01 * i as f64).collect();

    // x * (0, 1, 2): the spread grows, so the derivative is of the first kind
    let growing = FuzzyTrajectory::sample(xs.clone(), |x| {
        Ok(FuzzyNumber::triangular(0.0, 1.0, 2.0, &grid)?.scale(x))
    })?;
    let (d, kinds) = growing.gh_derivative()?;
    println!(
        "growing: kind {:?}, derivative core {:?}",
        kinds[45],
        d.values()[45].cut(grid.len() - 1)
    );

    // (2 - x) * (0, 1, 2): the spread shrinks, second kind
    let shrinking = FuzzyTrajectory::sample(xs.clone(), |x| {
        Ok(FuzzyNumber::triangular(0.0, 1.0, 2.0, &grid)?.scale(2.0 - x))
    })?;
    let (d, kinds) = shrinking.gh_derivative()?;
    println!(
        "shrinking: kind {:?}, derivative support {:?}",
        kinds[45],
        d.values()[45].cut(0)
    );

    let translated =
        FuzzyTrajectory::sample(xs, |x| FuzzyNumber::triangular(x - 1.0, x, x + 1.0, &grid))?;
    let (_, kinds) = translated.gh_derivative()?;
    println!("translated: kind {:?}", kinds[45]);

    let constant = FuzzyTrajectory::sample(vec![0.0, 0.5, 1.0, 1.5, 2.0], |_| {
        FuzzyNumber::triangular(0.0, 1.0, 2.0, &grid)
    })?;
    let integral = constant.integral()?;
    println!(
        "integral of (0, 1, 2) over [0, 2]: support {:?}, core {:?}",
        integral.cut(0),
        integral.cut(grid.len() - 1)
    );
    Ok(())
}
