//! Spectral exterior calculus on the flat unit 3-torus.
//!
//! Forms are collocated on a uniform periodic grid. `d` is a Fourier
//! multiplier, wedge and interior products are pointwise, and integrals are
//! grid means (exact for the trigonometric interpolant). Evolution
//! equations project their products with the 2/3 rule.

mod curve;
mod evolve;
mod form;
mod grid;
pub mod io;
pub mod random;
mod vector;

use thiserror::Error;

pub use curve::{line_integral, Loop, CLOSURE_TOL};
pub use evolve::{transport, transport_rhs};
pub(crate) use evolve::rk4;
pub use form::{component_count, d, integrate3, interior, lie_derivative, vorticity_from, wedge, Form};
pub use grid::{Grid, Interpolant, ScalarField, Spectrum};
pub use vector::VectorField;

#[derive(Debug, Error)]
pub enum FormsError {
    #[error("grid size {0} must be even and at least 4")]
    InvalidGrid(usize),
    #[error("{op}: rank {rank} out of range")]
    Rank { op: &'static str, rank: usize },
    #[error("expected {expected} values, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite state at t = {t}")]
    BlowUp { t: f64 },
    #[error("curve is not closed (gap {gap:e})")]
    OpenCurve { gap: f64 },
    #[error("curve: {0}")]
    Curve(String),
    #[error("container format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
