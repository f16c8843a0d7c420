//! Calculus of sampled fuzzy-valued functions: gH-derivatives through the
//! endpoint derivatives and endpoint-wise integration.

mod stencil;
mod trajectory;

use thiserror::Error;

use crate::fuzzy::{FuzzyError, Violation};

pub(crate) use stencil::derivative_short;
pub use stencil::{trapezoid, DiffStencil};
pub use trajectory::{FuzzyTrajectory, GhKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("{xs} sample points but {values} values")]
    LengthMismatch { xs: usize, values: usize },
    #[error("sample points not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("samples use different level grids")]
    MixedGrids,
    #[error("integral is not a fuzzy number: {0}")]
    InvalidIntegral(Violation),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}
