//! Parsing, evaluating and differentiating Lagrangian expressions.
use std::error::Error;

use fuzzy_noether::expr::{parse, Env, Var};

fn main() -> Result<(), Box<dyn Error>> {
    let l = parse("x*vl^2 + sin(ql)*exp(-x/2)")?;
    println!("L        = {l}");
    for var in [Var::X, Var::Ql, Var::Vl] {
        println!("dL/d{:<4} = {}", var.to_string(), l.derivative(var));
    }
    let env = Env::new()
        .with(Var::X, 1.0)
        .with(Var::Ql, 0.5)
        .with(Var::Vl, 2.0);
    println!("L(1, 0.5, 2) = {}", l.eval(&env)?);

    // domain errors name the failing subexpression
    let bad = parse("ln(x - 1)")?;
    match bad.eval(&Env::new().with(Var::X, 0.5)) {
        Ok(v) => println!("unexpected value {v}"),
        Err(e) => println!("error: {e}"),
    }
    match parse("x^ql") {
        Ok(e) => println!("unexpected parse {e}"),
        Err(e) => println!("error: {e}"),
    }
    Ok(())
}
