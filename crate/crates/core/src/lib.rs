//! Numerical verification of Casimir and restricted-Casimir structure in
//! Lie-Poisson systems.
//!
//! Two engines share this crate:
//!
//! * [`rattleback`]: the three-dimensional Bianchi VI_h Lie-Poisson system,
//!   its Casimir `p r^{-h}` and the singular line `(0, 0, s)`.
//! * [`forms3`] with [`fluid`] and [`foliation`]: spectral differential
//!   forms on the 3-torus, the ideal-fluid Lie-Poisson structure, and the
//!   Godbillon-Vey chain for codimension-1 foliations.
//!
//! [`fieldexpr`] parses the scalar-field expressions used to describe
//! fields on the command line.

pub mod fieldexpr;
pub mod fluid;
pub mod foliation;
pub mod forms3;
pub mod rattleback;

/// Library version, recorded in verification reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
