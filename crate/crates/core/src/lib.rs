//! Cubature for two-dimensional weakly singular integrals and an iterative
//! panel solver for the capacitance of star-shaped conductors.
//!
//! The crate is organised bottom-up:
//!
//! * [`quad`]: grids, Gauss-Legendre panels, the adaptive reference
//!   integrator and deterministic summation.
//! * [`periodic`]: the midpoint-weight formula for the periodic kernel
//!   `(sin²(·/2) + sin²(·/2))^{-λ}` on `[0, 2π]²`.
//! * [`planar`]: cell-integral weights and the local-spline formula for the
//!   kernel `|τ - t|^{-2λ}` on `[-1, 1]²`.
//! * [`theory`]: constants and leading-order error bounds.
//! * [`surface`] and [`capacitance`]: triangulated star-shaped bodies and the
//!   double-layer iteration.
//! * [`convergence`]: test integrands, reference values and log-log fits used
//!   by the rate experiments.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacitance;
pub mod convergence;
pub mod error;
pub mod periodic;
pub mod planar;
pub mod quad;
pub mod surface;
pub mod theory;

pub use error::{Error, PanelId, Result};
pub use quad::summation::SummationPolicy;
