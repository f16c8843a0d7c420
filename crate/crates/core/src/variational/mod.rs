//! Fuzzy variational problems: the four endpoint Euler-Lagrange residuals,
//! their delayed variant, and a least-squares collocation solver.
//!
//! Each level r contributes a lower and an upper Lagrangian in the
//! arguments `(x, ql, qu, vl, vu[, wl, wu])`. An extremal satisfies four
//! equations for two unknown functions per level, so the solver works in
//! the least-squares sense and reports whether the system was consistent.

mod extremal;
mod lagrangian;
mod problem;
mod residual;
mod solve;

use thiserror::Error;

use crate::expr::EvalError;
use crate::fuzzy::{Bound, FuzzyError};

pub use extremal::{Extremal, LevelPath, NodeViolation};
pub use lagrangian::LagrangianSpec;
pub use problem::{Delay, VariationalProblem};
pub(crate) use residual::nodal_partial;
pub use residual::{delayed_el_residual, el_residual, Residuals};
pub use solve::{
    solve_extremal, solve_extremal_with, LevelDiagnostics, Solution, SolveDiagnostics, SolveOptions,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("need at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("nodes not strictly increasing at index {0}")]
    NodesNotIncreasing(usize),
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("the Lagrangian mentions wl/wu but the problem has no delay")]
    MissingDelay,
    #[error("problem has no delay")]
    NotDelayed,
    #[error("problem is delayed; use the delayed residual")]
    Delayed,
    #[error("extremal carries no delayed velocities; attach the history first")]
    MissingHistory,
    #[error("delay {tau_d} must lie strictly inside (0, {span})")]
    DelayOutOfRange { tau_d: f64, span: f64 },
    #[error("delayed problems need uniform nodes")]
    NonUniformNodes,
    #[error("delay {tau_d} is not a whole number of steps h = {h}")]
    DelayMisaligned { tau_d: f64, h: f64 },
    #[error("{} history {history} differs from the boundary value {boundary} at level index {level}", bound.name())]
    HistoryMismatch {
        bound: Bound,
        level: usize,
        history: f64,
        boundary: f64,
    },
    #[error("{} history at x = {x}: {source}", bound.name())]
    History {
        bound: Bound,
        x: f64,
        source: EvalError,
    },
    #[error("solving Lagrangians with delayed arguments is not supported")]
    DelayedSolve,
    #[error("{} Lagrangian at level index {level}, node {node} (x = {x}): {source}", bound.name())]
    Eval {
        level: usize,
        node: usize,
        x: f64,
        bound: Bound,
        source: EvalError,
    },
    #[error("Gauss-Newton did not converge within the iteration limit (max residual {:.3e})", .0.diagnostics.max_residual())]
    NonConvergence(Box<Solution>),
}
