//! Rigorous integration of polynomial ODEs and Poincaré maps.

mod lohner;
mod poincare;
mod poly;
pub mod reference;

pub use lohner::{Doubleton, OdeSolver, StepOutcome};
pub(crate) use lohner::orthonormal_basis;
pub use poincare::{poincare_map, PoincareImage, Section};
pub use poly::{horner, Dual, PolyField, Scalar, TaylorProgram, Term};

use thiserror::Error;

use crate::interval::IntervalError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid vector field: {0}")]
    Field(String),
    #[error("no a-priori enclosure found down to step {0:e}")]
    StepFailure(f64),
    #[error("transversality to the section could not be established")]
    Transversality,
    #[error("no return to the section before time {0}")]
    NoReturn(f64),
    #[error("enclosure blew up (width {0:e}); subdivide")]
    BlowUp(f64),
    #[error("initial set violates a precondition: {0}")]
    Precondition(String),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}
