//! Expression language for Lagrangians and symmetry generators.
//!
//! Expressions range over the fixed alphabet `x ql qu vl vu wl wu` and the
//! functions `ln exp sin cos sqrt`. Parsing, evaluation and symbolic
//! differentiation are pure, so trees can be shared across threads.
//!
//! ```
//! use fuzzy_noether::expr::{parse, Env, Var};
//!
//! let l = parse("x*vl^2").unwrap();
//! let dl = l.derivative(Var::Vl);
//! let env = Env::new().with(Var::X, 2.0).with(Var::Vl, 3.0);
//! assert_eq!(l.eval(&env).unwrap(), 18.0);
//! assert_eq!(dl.eval(&env).unwrap(), 12.0);
//! ```

mod ast;
mod diff;
mod eval;
mod parse;

pub use ast::{BinaryOp, Expr, UnaryOp, Var};
pub use eval::{DomainKind, Env, EvalError};
pub use parse::{parse, ParseError, ParseErrorKind};

/// Parses text that must not mention any variable and evaluates it.
pub fn parse_constant(text: &str) -> Result<f64, ConstantError> {
    let e = parse(text)?;
    if let Some(v) = e.variables().first() {
        return Err(ConstantError::NotConstant(*v));
    }
    Ok(e.eval(&Env::new())?)
}

#[derive(Debug, thiserror::Error)]
pub enum ConstantError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("expected a constant but found variable `{0}`")]
    NotConstant(Var),
}
