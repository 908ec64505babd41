//! The single-site sharp example `v = −δ₀/G₀(0,0;λ)`, `u = (H₀−λ)⁻¹δ₀`,
//! its decay diagnostics and the Cramer fraction representation
//! `P̃(x,λ)·û(x) = B̃(x,λ)·ψ̂(x)` with `ψ = −vu`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dispersion::{rate_with_bands, RateOptions, RateResult};
use crate::floquet::{floquet_transform, restriction_matrix, QuasiMomentum};
use crate::lattice::{
    decay_rate_estimate, eigen_residual, DecayFit, Impurity, LatticeFunction, Norm,
    PeriodicPotential, SiteBox,
};
use crate::resolvent::{GreenOptions, Resolvent};
use crate::spectrum::BandStructure;
use crate::{Error, Result};

/// `|G₀(0,0;λ)|` at or below this counts as the exceptional set.
pub const EXCEPTIONAL_TOL: f64 = 1e-8;
/// Slack on `−s ≥ μ₀` for finite-box fitting.
pub const SLOPE_TOL: f64 = 0.05;
/// Relative shell-maximum floor for the decay fit.
pub const FIT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SharpExample {
    pub lambda: Complex64,
    pub g00: Complex64,
    pub v: Impurity,
    pub u: LatticeFunction,
    /// `max |(H₀ + v − λ)u|` over the interior of the box.
    pub residual_max: f64,
    /// `dist(λ, σ(H₀))`.
    pub gamma: f64,
    /// Quadrature error estimate of the column.
    pub quadrature_error: f64,
}

impl SharpExample {
    /// `v(0) = −1/g00`.
    pub fn coupling(&self) -> Complex64 {
        -self.g00.inv()
    }
}

/// Builds `(v, u)` on `domain`, which must contain the origin with at
/// least one layer of margin.
pub fn construct_sharp_example(
    potential: &PeriodicPotential,
    lambda: Complex64,
    domain: &SiteBox,
    bands: &BandStructure,
    opts: &GreenOptions,
) -> Result<SharpExample> {
    let d = potential.dim();
    let origin = vec![0i64; d];
    if domain.dim() != d || !domain.shrink(1).is_some_and(|b| b.contains(&origin)) {
        return Err(Error::Domain(
            "box must contain the origin in its interior".into(),
        ));
    }
    let resolvent = Resolvent::new(potential, lambda, bands)?;
    let (u, table) = resolvent.delta_column(domain, opts)?;
    let g00 = u.get(&origin);
    if g00.norm() <= EXCEPTIONAL_TOL {
        return Err(Error::ExceptionalLambda {
            g00_abs: g00.norm(),
        });
    }
    let v = Impurity::single_site(d, -g00.inv());
    let residual_max = eigen_residual(potential, &v, lambda, &u)?.max_abs();
    Ok(SharpExample {
        lambda,
        g00,
        v,
        u,
        residual_max,
        gamma: resolvent.gamma(),
        quadrature_error: table.error_estimate,
    })
}

/// Diagnostics of a constructed example.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpReport {
    pub lambda: Complex64,
    pub g00: Complex64,
    pub residual_max: f64,
    pub fit: DecayFit,
    /// Fitted slope `s` (estimates `−β`).
    pub slope: f64,
    /// `ln γ(λ) − ln 2d`.
    pub mu0: f64,
    /// `ln|λ| − ln 2d`.
    pub log_lambda_rate: f64,
    pub rate: RateResult,
    /// `−s / r_upper`.
    pub sharpness_ratio: f64,
    /// `−s ≥ μ₀ − SLOPE_TOL`.
    pub dominance_ok: bool,
    /// Free `d = 1` only: `|−s − r|/r < 2%`.
    pub free_match: Option<bool>,
    /// Real `λ` only: `|Im v(0)| < 1e−10`.
    pub real_coupling: Option<bool>,
}

impl SharpReport {
    pub fn passed(&self) -> bool {
        self.residual_max < 1e-8
            && self.dominance_ok
            && self.free_match.unwrap_or(true)
            && self.real_coupling.unwrap_or(true)
    }
}

/// Half-width of the largest centred cube inside `domain`.
fn inner_radius(domain: &SiteBox) -> u64 {
    domain
        .lo()
        .iter()
        .zip(domain.hi())
        .map(|(&lo, &hi)| (-lo).min(hi).max(0) as u64)
        .min()
        .unwrap_or(0)
}

/// ℓ_max shell fit over radii `1..=⌊0.8 L⌋`.
pub fn fit_example_decay(ex: &SharpExample) -> Result<DecayFit> {
    let l = inner_radius(ex.u.domain());
    let top = (l * 4) / 5;
    decay_rate_estimate(&ex.u, Norm::Max, 1..=top.max(1), FIT_FLOOR)
}

pub fn verify_sharp_example(
    ex: &SharpExample,
    potential: &PeriodicPotential,
    bands: &BandStructure,
    rate_opts: &RateOptions,
) -> Result<SharpReport> {
    let d = potential.dim() as f64;
    let fit = fit_example_decay(ex)?;
    let slope = fit.slope;
    let mu0 = ex.gamma.ln() - (2.0 * d).ln();
    let rate = rate_with_bands(potential, ex.lambda, rate_opts, bands)?;
    let free_match = (potential.is_zero() && potential.dim() == 1)
        .then(|| ((-slope - rate.r_upper) / rate.r_upper).abs() < 0.02);
    let real_coupling = (ex.lambda.im == 0.0).then(|| ex.coupling().im.abs() < 1e-10);
    Ok(SharpReport {
        lambda: ex.lambda,
        g00: ex.g00,
        residual_max: ex.residual_max,
        slope,
        mu0,
        log_lambda_rate: ex.lambda.norm().ln() - (2.0 * d).ln(),
        sharpness_ratio: -slope / rate.r_upper,
        dominance_ok: -slope >= mu0 - SLOPE_TOL,
        free_match,
        real_coupling,
        rate,
        fit,
    })
}

/// Result of checking `P̃·û = B̃·ψ̂` at sample momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionReport {
    /// Largest componentwise mismatch, relative to `max(1, |B̃ψ̂|_∞)`.
    pub max_error: f64,
    pub used: usize,
    /// Samples skipped because `|P̃| ≤ 1e−6`.
    pub skipped: usize,
}

/// Checks the fraction identity with `B̃` the adjugate of the fiber in the
/// basis produced by the Floquet transform.
pub fn fraction_representation_check(
    ex: &SharpExample,
    potential: &PeriodicPotential,
    x_samples: &[Vec<f64>],
) -> Result<FractionReport> {
    let psi = LatticeFunction::from_fn(ex.u.domain().clone(), |n| -ex.v.value(n) * ex.u.get(n));
    let periods = potential.periods();
    let mut max_error = 0.0f64;
    let mut used = 0;
    for x in x_samples {
        let x = QuasiMomentum::real(x);
        let m = restriction_matrix(potential, &x)?.shift(ex.lambda);
        let p = m.det();
        if p.norm() <= 1e-6 {
            continue;
        }
        let uh = floquet_transform(&ex.u, periods, &x)?;
        let ph = floquet_transform(&psi, periods, &x)?;
        let rhs = m.adjugate().mul_vec(&ph);
        let scale = rhs.iter().fold(1.0f64, |s, v| s.max(v.norm()));
        for (a, b) in uh.iter().zip(&rhs) {
            max_error = max_error.max((p * a - b).norm() / scale);
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::Resample {
            samples: x_samples.len(),
        });
    }
    Ok(FractionReport {
        max_error,
        used,
        skipped: x_samples.len() - used,
    })
}
