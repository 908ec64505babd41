//! Sharp exponential decay of eigenfunctions for periodic Schrödinger
//! operators `H = -Δ + V + v` on `ℤ^d`.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the numerical side of
//! the theory: Floquet fibers and their determinants, band structure, the
//! complexified dispersion surface `D(λ)` with the decay rate
//! `r(λ) = 2π·dist(ℝ^d, D(λ))`, lattice Green's functions, the explicit
//! single-site sharp example, decay/analyticity witnesses, and a finite-volume
//! oracle. IO, configuration and the command line live in the `sharpdecay`
//! companion crate.
//!
//! Conventions: `Δ` is the adjacency operator (no diagonal term), sites of a
//! box and of the fundamental cell `W` are ordered lexicographically with the
//! first coordinate varying slowest, and quasi-momenta `x` enter through
//! `e^{2πi x_j}` per lattice step.
#![no_std]
// index loops mirror the textbook numerical kernels; `!(x > 0.0)` also rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analyticity;
pub mod dispersion;
mod error;
pub mod floquet;
pub mod lattice;
pub mod linalg;
pub mod oracle;
pub mod resolvent;
pub mod sharpness;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub(crate) const TAU: f64 = core::f64::consts::TAU;

/// `e^{iθ}`.
#[inline]
pub(crate) fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// `x mod m` in `[0, m)`.
#[inline]
pub(crate) fn fold(x: f64, m: f64) -> f64 {
    let r = x - num_traits::Float::floor(x / m) * m;
    if r >= m {
        0.0
    } else {
        r
    }
}
