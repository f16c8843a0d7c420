//! Level-cut arithmetic on triangular fuzzy numbers.
use std::error::Error;

use fuzzy_noether::fuzzy::{FuzzyNumber, GhDifference, LevelGrid};

fn show(name: &str, v: &FuzzyNumber) {
    let (l0, u0) = v.cut(0);
    let (l1, u1) = v.cut(v.grid().len() - 1);
    println!("{name:<10} support [{l0:.3}, {u0:.3}], core [{l1:.3}, {u1:.3}]");
}

fn main() -> Result<(), Box<dyn Error>> {
    let grid = LevelGrid::default();
    let a = FuzzyNumber::triangular(1.0, 2.0, 4.0, &grid)?;
    let b = FuzzyNumber::triangular(0.0, 1.0, 1.5, &grid)?;
    show("a", &a);
    show("b", &b);
    show("a + b", &a.add(&b)?);
    show("-2 a", &a.scale(-2.0));
    show("a * b", &a.multiply(&b)?);

    // a gH-difference undoes an addition exactly
    let sum = a.add(&b)?;
    match sum.gh_difference(&b)? {
        GhDifference::Exists(d) => println!("(a + b) gH- b is a: distance {:e}", d.hausdorff(&a)?),
        GhDifference::Nonexistent(r) => println!("no gH-difference: {:?}", r.violation),
    }
    println!("hausdorff(a, b) = {}", a.hausdorff(&b)?);
    println!("a vs b: {:?}", a.compare(&b)?);
    println!("membership of 3 in a: {}", a.membership(3.0));
    Ok(())
}
