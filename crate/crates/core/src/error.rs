use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Inputs violate a structural precondition (shapes, dimensions, ranges).
    Domain(String),
    /// Fewer usable shells than a fit needs.
    InsufficientData { usable: usize, needed: usize },
    /// Every coefficient of a slice polynomial vanished.
    DegenerateSlice,
    /// `λ` is too close to `σ(H₀)` for the requested object.
    SpectralProximity { distance: f64, required: f64 },
    /// No feasible point on `D(λ)` was found.
    SearchFailure { best_residual: f64 },
    /// `G₀(0,0;λ)` is numerically zero, so the single-site coupling is undefined.
    ExceptionalLambda { g00_abs: f64 },
    /// Combes–Thomas exponent outside the admissible range.
    InvalidMu { mu: f64, sup: f64 },
    /// Evaluation point outside the guaranteed analyticity strip.
    OutOfStrip { imag: f64, limit: f64 },
    /// A quadrature or truncation did not reach the requested accuracy.
    Accuracy { what: &'static str, estimate: f64 },
    /// Inverse transform grid too coarse for the requested sites.
    Aliasing { required: usize, available: usize },
    /// A shifted truncated operator is numerically singular.
    NearEigenvalue { pivot: f64 },
    /// Problem size exceeds a memory guard.
    TooLarge { sites: usize, limit: usize },
    /// Every sample landed too close to the real Fermi set.
    Resample { samples: usize },
    /// Operation requires a self-adjoint operator.
    NonHermitian,
    /// An iterative eigensolver ran out of iterations.
    NoConvergence(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InsufficientData { usable, needed } => {
                write!(
                    f,
                    "insufficient data: {usable} usable shells, need {needed}"
                )
            }
            Error::DegenerateSlice => {
                write!(f, "degenerate slice: determinant vanishes identically")
            }
            Error::SpectralProximity { distance, required } => write!(
                f,
                "spectral proximity: dist(λ, σ(H₀)) = {distance:e} is below {required:e}"
            ),
            Error::SearchFailure { best_residual } => write!(
                f,
                "search failure: no feasible point on D(λ), best residual {best_residual:e}"
            ),
            Error::ExceptionalLambda { g00_abs } => {
                write!(f, "exceptional λ: |G₀(0,0;λ)| = {g00_abs:e}")
            }
            Error::InvalidMu { mu, sup } => {
                write!(f, "invalid μ = {mu}: Combes–Thomas needs μ < {sup}")
            }
            Error::OutOfStrip { imag, limit } => {
                write!(f, "point outside analyticity strip: {imag} ≥ {limit}")
            }
            Error::Accuracy { what, estimate } => {
                write!(f, "{what} did not converge (error estimate {estimate:e})")
            }
            Error::Aliasing {
                required,
                available,
            } => write!(
                f,
                "aliasing: grid has {available} nodes per axis, sites need at least {required}"
            ),
            Error::NearEigenvalue { pivot } => {
                write!(
                    f,
                    "near-eigenvalue: shifted operator is singular (pivot {pivot:e})"
                )
            }
            Error::TooLarge { sites, limit } => {
                write!(f, "problem too large: {sites} sites exceeds {limit}")
            }
            Error::Resample { samples } => write!(
                f,
                "all {samples} samples lie near the real Fermi set; resample"
            ),
            Error::NonHermitian => write!(f, "operation requires a real (self-adjoint) impurity"),
            Error::NoConvergence(what) => write!(f, "{what} did not converge"),
        }
    }
}

impl core::error::Error for Error {}
