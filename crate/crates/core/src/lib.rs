pub mod batch;
pub mod calculus;
pub mod expr;
pub mod fuzzy;
pub mod noether;
pub mod variational;
