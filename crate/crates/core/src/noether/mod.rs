//! Symmetries and conservation laws of fuzzy variational problems.
//!
//! A [`SymmetryGenerator`] describes the infinitesimal transformation
//! `x -> x + eps*tau`, `q -> q + eps*zeta`. [`check_invariance`] tests
//! numerically whether the endpoint functionals are invariant, and
//! [`conserved_quantity`] evaluates the associated Noether quantity along
//! an extremal so that [`conservation_check`] can confirm it is constant.

mod conserved;
mod generator;
mod invariance;

use thiserror::Error;

use crate::expr::{EvalError, ParseError, Var};
use crate::variational::EngineError;

pub use conserved::{
    conservation_check, conserved_quantity, ConservationReport, ConservationTolerances,
    ConservationVerdict, CurveStats, DelayedNoetherVariant, Formula, LevelConserved,
};
pub(crate) use generator::GeneratorValues;
pub use generator::SymmetryGenerator;
pub use invariance::{
    check_invariance, invariance_residual, InvarianceFit, InvarianceOptions, InvarianceReport,
};

#[derive(Debug, Error)]
pub enum NoetherError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Parse(ParseError),
    #[error("generator may only depend on x, ql, qu; found `{0}`")]
    GeneratorVariable(Var),
    #[error("the necessary condition is stated without a time generator")]
    TimeGenerator,
    #[error("a time generator cannot be combined with a delay")]
    TimeWithDelay,
    #[error("epsilons must be positive and strictly decreasing: {0:?}")]
    Epsilons(Vec<f64>),
    #[error("subinterval [{0}, {1}] is empty or leaves the problem interval")]
    Subinterval(f64, f64),
    #[error("{what} at level index {level}, node {node} (x = {x}): {source}")]
    Eval {
        what: &'static str,
        level: usize,
        node: usize,
        x: f64,
        source: EvalError,
    },
}
