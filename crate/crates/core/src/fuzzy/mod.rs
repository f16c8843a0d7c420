//! Fuzzy numbers represented by their r-level cuts on a shared level grid.
//!
//! A fuzzy number is stored as two endpoint families `lower(r)` and
//! `upper(r)` sampled on a [`LevelGrid`]. Arithmetic is level-wise interval
//! arithmetic; suprema over r become maxima over the grid.

mod grid;
mod number;
mod order;

use thiserror::Error;

pub use grid::{LevelGrid, DEFAULT_LEVELS};
pub use number::{
    validate, validate_with_tol, FuzzyNumber, GhDifference, LevelCondition, NonexistenceReport,
    Violation,
};
pub use order::OrderRelation;

/// Absolute slack allowed when checking monotonicity of endpoint families.
pub const TOL_MONO: f64 = 1e-10;
/// Absolute tolerance for level-wise equality.
pub const TOL_EQ: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("invalid level grid: {0}")]
    InvalidGrid(String),
    #[error("operands live on different level grids")]
    GridMismatch,
    #[error("expected {expected} levels, got lower={lower} upper={upper}")]
    SizeMismatch {
        expected: usize,
        lower: usize,
        upper: usize,
    },
    #[error("triangular number needs x <= y <= z, got ({x}, {y}, {z})")]
    TriangularOrder { x: f64, y: f64, z: f64 },
    #[error("not a fuzzy number: {0}")]
    Invalid(Violation),
}

/// Lower or upper endpoint family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Bound {
    Lower,
    Upper,
}

impl Bound {
    pub const BOTH: [Bound; 2] = [Bound::Lower, Bound::Upper];

    /// 0 for lower, 1 for upper.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Bound::Lower => "lower",
            Bound::Upper => "upper",
        }
    }
}
