//! Numerical laboratory for the quadratic wave equation
//! `□u = B(u, u)` in three space dimensions with Fourier-Lebesgue data.
//!
//! The crate provides discrete versions of the function spaces
//! `Ĥ^r_s` and `X^{r,±}_{s,b}`, half-wave and Klein-Gordon type propagators,
//! bilinear free-wave interactions together with their one-dimensional
//! surface-integral reductions, dyadic decompositions, an estimate
//! verification harness, and a Picard solver for the first-order system.

// `!(x > 0.0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bilinear;
pub mod dyadic;
pub mod error;
pub mod grid;
pub mod io;
pub mod par;
pub mod propagator;
pub mod quad;
pub mod solver;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{
    apply_multiplier, forward_transform, inverse_transform, Field, Repr, SpacetimeField, SpacetimeGrid,
    SpacetimeSpectrum, SpatialGrid, Spectrum, C64,
};
