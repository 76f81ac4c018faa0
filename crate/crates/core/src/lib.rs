//! Finite difference discretization of the d-dimensional (d = 1, 2, 3)
//! tempered integral fractional Laplacian `(−Δ + λ)^{α/2}`.
//!
//! The crate is organized bottom-up:
//!
//! * [`special`]: incomplete gamma functions and the normalization constant.
//! * [`quadrature`]: weight-function integrals over radial intervals, boxes
//!   and the exterior of the cube `[0, L]^d`.
//! * [`stencil`]: coefficient tensors of the scheme.
//! * [`operator`]: multilevel Toeplitz operator with FFT matvec.
//! * [`solver`]: conjugate gradients, Poisson solves and Crank–Nicolson
//!   stepping for the Allen–Cahn and Gray–Scott systems.
//! * [`harness`]: test functions, error norms, convergence studies and I/O.

// `!(x > 0.0)` guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `is_multiple_of` is newer than the supported toolchain.
#![allow(clippy::manual_is_multiple_of)]

pub mod error;
pub mod fft;
pub mod harness;
pub mod operator;
pub mod par;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod stencil;

pub use error::{Error, Result};
