//! The complexified dispersion surface `D(λ) = {x ∈ ℂ^d : P̃(x,λ) = 0}` and
//! the rate `r(λ) = 2π·dist(ℝ^d, D(λ))`.
//!
//! Roots in one coordinate come from the quadratic pencil
//! `w·M̃(w) = A w² + K w + A′` (with `w = e^{2πi x_j}`), linearized into a
//! `2Q × 2Q` companion matrix. The upper bound eliminates one coordinate
//! through those roots and minimizes `‖Im x‖₂` over the remaining ones with
//! Nelder–Mead, so every candidate lies exactly on `D(λ)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::floquet::{
    char_det_with_derivative, det_scale, fiber_matrix, laurent_coefficients, potential_block,
    QuasiMomentum,
};
use crate::lattice::PeriodicPotential;
use crate::linalg::{eigenvalues, CMatrix};
use crate::spectrum::{band_structure, fermi_point, BandStructure};
use crate::{cis, fold, Error, Result, TAU};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Knobs of the upper-bound search.
#[derive(Debug, Clone, PartialEq)]
pub struct RateOptions {
    /// Random seed points per eliminated axis.
    pub seeds: usize,
    /// Local searches started from the best seeds.
    pub restarts: usize,
    /// Real grid per free coordinate used for seeding.
    pub grid: usize,
    /// Band grid used to decide whether `λ` lies in `σ(H₀)`.
    pub band_grid: usize,
    pub seed: u64,
    /// Relative residual accepted as feasible.
    pub root_tol: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        RateOptions {
            seeds: 24,
            restarts: 6,
            grid: 8,
            band_grid: 64,
            seed: 0,
            root_tol: 1e-10,
        }
    }
}

/// Certified lower bound, numerical upper bound and witness for `r(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub lambda: Complex64,
    pub r_lower: f64,
    pub r_upper: f64,
    /// Point of `D(λ)` with `2π‖Im x‖₂ = r_upper`.
    pub minimizer: QuasiMomentum,
    /// `|P̃(minimizer, λ)|`.
    pub residual: f64,
    /// `|P̃|` relative to the size of the terms entering `M̃`.
    pub relative_residual: f64,
    pub lower_method: &'static str,
    pub upper_method: &'static str,
}

/// Data shared by every slice at fixed `λ`: the constant block `B − λ` and
/// the cell sites.
struct SliceContext<'a> {
    potential: &'a PeriodicPotential,
    b_minus_lambda: CMatrix,
    sites: Vec<Vec<i64>>,
    lambda: Complex64,
}

impl<'a> SliceContext<'a> {
    fn new(potential: &'a PeriodicPotential, lambda: Complex64) -> Self {
        SliceContext {
            potential,
            b_minus_lambda: potential_block(potential).shift(lambda),
            sites: potential.cell_sites().collect(),
            lambda,
        }
    }

    fn mu(&self, n: &[i64], axis: usize) -> Complex64 {
        cis(TAU * n[axis] as f64 / self.potential.periods()[axis] as f64)
    }

    /// Roots `w` of `det(w M̃(w)) = 0` in coordinate `axis`; `x` supplies the
    /// other coordinates (its `axis` entry is ignored).
    fn roots_w(&self, axis: usize, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let q = self.sites.len();
        let mut k = self.b_minus_lambda.clone();
        for (a, n) in self.sites.iter().enumerate() {
            let mut d = ZERO;
            for (j, &xj) in x.iter().enumerate() {
                if j != axis {
                    let w = self.mu(n, j) * crate::floquet::phase(xj);
                    d -= w + w.inv();
                }
            }
            k[(a, a)] += d;
        }
        // [[0, I], [−diag(1/μ²), diag(1/μ)·K]]
        let mut c = CMatrix::zeros(2 * q);
        for a in 0..q {
            let inv_mu = self.mu(&self.sites[a], axis).inv();
            c[(a, q + a)] = ONE;
            c[(q + a, a)] = -inv_mu * inv_mu;
            for b in 0..q {
                c[(q + a, q + b)] = inv_mu * k[(a, b)];
            }
        }
        eigenvalues(&c)
    }
}

/// `x = log(w)/(2πi)` with `Re x ∈ [0,1)`.
fn x_of_w(w: Complex64) -> Complex64 {
    let re = fold(w.arg() / TAU, 1.0);
    Complex64::new(re, -w.norm().ln() / TAU)
}

/// Newton on `P̃` in one coordinate; keeps the best iterate.
fn polish(
    potential: &PeriodicPotential,
    lambda: Complex64,
    x: &mut QuasiMomentum,
    axis: usize,
) -> Result<Complex64> {
    let (mut det, mut deriv) = char_det_with_derivative(potential, x, lambda, axis)?;
    for _ in 0..8 {
        if det == ZERO || deriv == ZERO {
            break;
        }
        let mut trial = x.clone();
        trial.0[axis] -= det / deriv;
        let (d2, g2) = char_det_with_derivative(potential, &trial, lambda, axis)?;
        if d2.norm() < det.norm() {
            *x = trial;
            det = d2;
            deriv = g2;
        } else {
            break;
        }
    }
    Ok(det)
}

/// Roots of `P̃` in coordinate `axis` with the other coordinates fixed by
/// `x_rest` (length `d−1`, in axis order with `axis` skipped).
///
/// Each root is Newton-polished and returned as `x_axis` with
/// `Im x = −ln|w|/(2π)` and `Re x ∈ [0,1)`.
pub fn slice_roots(
    potential: &PeriodicPotential,
    lambda: Complex64,
    axis: usize,
    x_rest: &[Complex64],
) -> Result<Vec<Complex64>> {
    let d = potential.dim();
    if axis >= d || x_rest.len() + 1 != d {
        return Err(Error::Domain(
            "slice needs an axis < d and d−1 fixed coordinates".into(),
        ));
    }
    let mut x: Vec<Complex64> = x_rest.to_vec();
    x.insert(axis, ZERO);
    let ctx = SliceContext::new(potential, lambda);
    let mut out = Vec::new();
    for w in ctx.roots_w(axis, &x)? {
        if w.norm() == 0.0 || !w.norm().is_finite() {
            continue;
        }
        let mut full = QuasiMomentum(x.clone());
        full.0[axis] = x_of_w(w);
        polish(potential, lambda, &mut full, axis)?;
        let xa = full.0[axis];
        out.push(Complex64::new(fold(xa.re, 1.0), xa.im));
    }
    Ok(out)
}

/// Laurent coefficients `c_{−Q..Q}` of the slice; fails when they all vanish.
pub fn slice_polynomial(
    potential: &PeriodicPotential,
    lambda: Complex64,
    axis: usize,
    x_rest: &[Complex64],
) -> Result<Vec<Complex64>> {
    let mut x: Vec<Complex64> = x_rest.to_vec();
    x.insert(axis, ZERO);
    let co = laurent_coefficients(potential, &QuasiMomentum(x), lambda, axis)?;
    if co.iter().all(|c| c.norm() < 1e-14) {
        return Err(Error::DegenerateSlice);
    }
    Ok(co)
}

/// Gershgorin bound: `ln((|λ| − ‖B‖)/(2d))` when positive, else `0`.
pub fn rate_lower(lambda: Complex64, b_norm: f64, dim: usize) -> f64 {
    let margin = lambda.norm() - b_norm;
    if margin <= 2.0 * dim as f64 {
        return 0.0;
    }
    (margin / (2.0 * dim as f64)).ln()
}

/// Upper bound on `r(λ)` with its witness point on `D(λ)`.
pub fn rate_upper(
    potential: &PeriodicPotential,
    lambda: Complex64,
    opts: &RateOptions,
) -> Result<RateResult> {
    let bands = band_structure(potential, opts.band_grid.max(2))?;
    rate_upper_with_bands(potential, lambda, opts, &bands)
}

pub fn rate_upper_with_bands(
    potential: &PeriodicPotential,
    lambda: Complex64,
    opts: &RateOptions,
    bands: &BandStructure,
) -> Result<RateResult> {
    let d = potential.dim();
    if lambda.im == 0.0 {
        let inside = bands
            .intervals()
            .iter()
            .position(|&(a, b)| lambda.re >= a && lambda.re <= b);
        if let Some(m) = inside {
            let k = fermi_point(potential, bands, m, lambda.re)?;
            let x = QuasiMomentum::real(&k);
            return finish(potential, lambda, x, 0.0, "fermi-point", opts);
        }
    }
    let ctx = SliceContext::new(potential, lambda);
    if d == 1 {
        let roots = slice_roots(potential, lambda, 0, &[])?;
        let best = roots
            .into_iter()
            .min_by(|a, b| a.im.abs().total_cmp(&b.im.abs()))
            .ok_or(Error::SearchFailure {
                best_residual: f64::INFINITY,
            })?;
        let x = QuasiMomentum(vec![best]);
        return finish(
            potential,
            lambda,
            x,
            TAU * best.im.abs(),
            "slice-roots",
            opts,
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let probe_y = rate_lower(lambda, potential.sup_norm(), d).max(0.1) / TAU;
    for axis in 0..d {
        let objective = |p: &[f64]| reduced_objective(&ctx, axis, p);
        let mut seeds: Vec<Vec<f64>> = Vec::new();
        // (a) real grid over the free coordinates
        let free: Vec<usize> = (0..d).filter(|&j| j != axis).collect();
        let g = opts.grid.max(1);
        let total = g.pow(free.len() as u32);
        for idx in 0..total {
            let mut p = vec![0.0; 2 * free.len()];
            let mut r = idx;
            for (t, &j) in free.iter().enumerate() {
                let cell = 1.0 / potential.periods()[j] as f64;
                p[2 * t] = (r % g) as f64 / g as f64 * cell;
                r /= g;
            }
            seeds.push(p);
        }
        // (b) symmetric imaginary patterns on the half-cell corners
        let patterns = 1usize << free.len();
        for s in 0..patterns {
            for corner in 0..patterns {
                let mut p = vec![0.0; 2 * free.len()];
                for (t, &j) in free.iter().enumerate() {
                    let half = 0.5 / potential.periods()[j] as f64;
                    p[2 * t] = if corner >> t & 1 == 1 { half } else { 0.0 };
                    p[2 * t + 1] = if s >> t & 1 == 1 { probe_y } else { -probe_y };
                }
                seeds.push(p);
            }
        }
        // (c) random points
        for _ in 0..opts.seeds {
            let p: Vec<f64> = free
                .iter()
                .flat_map(|&j| {
                    let cell = 1.0 / potential.periods()[j] as f64;
                    [rng.gen_range(0.0..cell), rng.gen_range(-2.0..2.0) * probe_y]
                })
                .collect();
            seeds.push(p);
        }
        let mut scored: Vec<(f64, Vec<f64>)> = seeds
            .into_iter()
            .filter_map(|p| objective(&p).ok().map(|f| (f, p)))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, start) in scored.into_iter().take(opts.restarts.max(1)) {
            let mut p = start;
            let mut fp = f64::INFINITY;
            for step in [0.05, 0.01, 0.002] {
                let (q, fq) = nelder_mead(
                    &|v: &[f64]| objective(v).unwrap_or(f64::INFINITY),
                    &p,
                    step,
                    4000,
                    1e-15,
                );
                if fq <= fp {
                    p = q;
                    fp = fq;
                }
            }
            if best.as_ref().is_none_or(|b| fp < b.0) {
                best = Some((fp, axis, p));
            }
        }
    }
    let (fval, axis, p) = best.ok_or(Error::SearchFailure {
        best_residual: f64::INFINITY,
    })?;
    if !fval.is_finite() {
        return Err(Error::SearchFailure {
            best_residual: f64::INFINITY,
        });
    }
    let x = assemble(&ctx, axis, &p)?;
    let value = TAU * x.imag_norm();
    finish(potential, lambda, x, value, "reduced-nelder-mead", opts)
}

/// `‖Im x‖₂²` over the free coordinates plus the smallest `(Im x_axis)²`
/// among the slice roots.
fn reduced_objective(ctx: &SliceContext<'_>, axis: usize, p: &[f64]) -> Result<f64> {
    let x = free_to_full(ctx, axis, p);
    let roots = ctx.roots_w(axis, &x)?;
    let m = roots
        .iter()
        .filter(|w| w.norm() > 0.0)
        .map(|w| w.norm().ln().powi(2))
        .fold(f64::INFINITY, f64::min);
    let free: f64 = p.chunks(2).map(|c| c[1] * c[1]).sum();
    Ok(free + m / (TAU * TAU))
}

fn free_to_full(ctx: &SliceContext<'_>, axis: usize, p: &[f64]) -> Vec<Complex64> {
    let d = ctx.potential.dim();
    let mut x = vec![ZERO; d];
    let mut t = 0;
    for (j, xj) in x.iter_mut().enumerate() {
        if j != axis {
            *xj = Complex64::new(p[2 * t], p[2 * t + 1]);
            t += 1;
        }
    }
    x
}

fn assemble(ctx: &SliceContext<'_>, axis: usize, p: &[f64]) -> Result<QuasiMomentum> {
    let mut x = free_to_full(ctx, axis, p);
    let w = ctx
        .roots_w(axis, &x)?
        .into_iter()
        .filter(|w| w.norm() > 0.0)
        .min_by(|a, b| a.norm().ln().abs().total_cmp(&b.norm().ln().abs()))
        .ok_or(Error::SearchFailure {
            best_residual: f64::INFINITY,
        })?;
    x[axis] = x_of_w(w);
    let mut q = QuasiMomentum(x);
    polish(ctx.potential, ctx.lambda, &mut q, axis)?;
    Ok(q)
}

fn finish(
    potential: &PeriodicPotential,
    lambda: Complex64,
    x: QuasiMomentum,
    value: f64,
    method: &'static str,
    opts: &RateOptions,
) -> Result<RateResult> {
    let x = x.reduced(potential.periods());
    let fiber = fiber_matrix(potential, &x, Some(lambda))?;
    let residual = fiber.det().norm();
    let relative_residual = residual / det_scale(potential, &x, lambda)?;
    if !(relative_residual < opts.root_tol) {
        return Err(Error::SearchFailure {
            best_residual: relative_residual,
        });
    }
    Ok(RateResult {
        lambda,
        r_lower: rate_lower(lambda, potential.sup_norm(), potential.dim()),
        r_upper: value,
        minimizer: x,
        residual,
        relative_residual,
        lower_method: "gershgorin",
        upper_method: method,
    })
}

/// Both bounds; fails if they cross by more than `1e−9`.
pub fn rate(
    potential: &PeriodicPotential,
    lambda: Complex64,
    opts: &RateOptions,
) -> Result<RateResult> {
    let res = rate_upper(potential, lambda, opts)?;
    check_bracket(res)
}

pub fn rate_with_bands(
    potential: &PeriodicPotential,
    lambda: Complex64,
    opts: &RateOptions,
    bands: &BandStructure,
) -> Result<RateResult> {
    check_bracket(rate_upper_with_bands(potential, lambda, opts, bands)?)
}

fn check_bracket(res: RateResult) -> Result<RateResult> {
    if res.r_lower > res.r_upper + 1e-9 {
        return Err(Error::Accuracy {
            what: "rate bracket",
            estimate: res.r_lower - res.r_upper,
        });
    }
    Ok(res)
}

/// One row of an asymptotic sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: Complex64,
    pub r_lower: f64,
    pub r_upper: f64,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
    pub residual: f64,
}

/// `r_lower/ln|λ|` and `r_upper/ln|λ|` along `lambdas`.
pub fn asymptotic_ratio_sweep(
    potential: &PeriodicPotential,
    lambdas: &[Complex64],
    opts: &RateOptions,
) -> Result<Vec<SweepRow>> {
    let floor = potential.sup_norm() + 2.0 * potential.dim() as f64;
    let bands = band_structure(potential, opts.band_grid.max(2))?;
    lambdas
        .iter()
        .map(|&lambda| {
            if lambda.norm() <= floor {
                return Err(Error::Domain(alloc::format!(
                    "|λ| = {} must exceed ‖V‖∞ + 2d = {floor}",
                    lambda.norm()
                )));
            }
            let r = rate_with_bands(potential, lambda, opts, &bands)?;
            let ln = lambda.norm().ln();
            Ok(SweepRow {
                lambda,
                r_lower: r.r_lower,
                r_upper: r.r_upper,
                ratio_lower: r.r_lower / ln,
                ratio_upper: r.r_upper / ln,
                residual: r.residual,
            })
        })
        .collect()
}

/// Nelder–Mead simplex minimization.
pub(crate) fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    ftol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        let fp = f(&p);
        simplex.push((p, fp));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (fbest, fworst) = (simplex[0].1, simplex[n].1);
        if (fworst - fbest).abs() <= ftol * (1.0 + fbest.abs()) {
            let spread = simplex
                .iter()
                .flat_map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0f64, f64::max);
            if spread < 1e-12 {
                break;
            }
        }
        let mut centroid = vec![0.0; n];
        for (p, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (p, fp) in simplex.iter_mut().skip(1) {
                    for (v, b) in p.iter_mut().zip(&best) {
                        *v = b + 0.5 * (*v - b);
                    }
                    *fp = f(p);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::char_det;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn free_chain_roots_at_three() {
        let roots = slice_roots(&PeriodicPotential::free(1), c(3.0), 0, &[]).unwrap();
        assert_eq!(roots.len(), 2);
        let target = ((3.0 + 5f64.sqrt()) / 2.0).ln() / TAU;
        for r in &roots {
            assert!((r.im.abs() - target).abs() < 1e-13, "{r}");
            assert!((r.re - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_slice() {
        let roots = slice_roots(&PeriodicPotential::free(2), c(10.0), 0, &[c(0.25)]).unwrap();
        let best = roots
            .iter()
            .map(|r| TAU * r.im.abs())
            .fold(f64::INFINITY, f64::min);
        assert!((best - 5f64.acosh()).abs() < 1e-12);
    }

    #[test]
    fn in_band_roots_are_real() {
        let roots = slice_roots(&PeriodicPotential::free(1), c(0.0), 0, &[]).unwrap();
        for r in roots {
            assert!(r.im.abs() < 1e-12);
        }
    }

    #[test]
    fn roots_solve_the_determinant() {
        let v = PeriodicPotential::new(vec![2, 3], vec![0.1, -0.4, 1.2, 0.0, 0.7, -1.0]).unwrap();
        let lam = Complex64::new(5.5, 0.3);
        let rest = [Complex64::new(0.2, 0.05)];
        for axis in 0..2 {
            for r in slice_roots(&v, lam, axis, &rest).unwrap() {
                let mut x = rest.to_vec();
                x.insert(axis, r);
                let x = QuasiMomentum(x);
                let rel = char_det(&v, &x, lam).unwrap().norm() / det_scale(&v, &x, lam).unwrap();
                assert!(rel < 1e-11, "axis {axis} root {r}: {rel}");
            }
        }
    }

    #[test]
    fn laurent_degree_is_at_most_q() {
        let v = PeriodicPotential::new(vec![3], vec![0.3, 0.0, -0.5]).unwrap();
        let co = slice_polynomial(&v, c(4.0), 0, &[]).unwrap();
        assert_eq!(co.len(), 7);
        // extreme coefficients are ∓Πμ, modulus 1
        assert!((co[0].norm() - 1.0).abs() < 1e-12 && (co[6].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lower_bounds() {
        assert!((rate_lower(c(10.0), 0.0, 2) - 2.5f64.ln()).abs() < 1e-15);
        assert!((rate_lower(c(10.0), 1.0, 1) - 4.5f64.ln()).abs() < 1e-15);
        assert_eq!(rate_lower(c(2.5), 1.0, 1), 0.0);
    }

    #[test]
    fn free_chain_rate_closed_form() {
        let opts = RateOptions::default();
        for lam in [3.0f64, 5.0, 10.0, 100.0] {
            let r = rate(&PeriodicPotential::free(1), c(lam), &opts).unwrap();
            let want = ((lam + (lam * lam - 4.0).sqrt()) / 2.0).ln();
            assert!((r.r_upper - want).abs() < 1e-9, "λ={lam}");
            assert!(r.r_lower <= r.r_upper);
        }
    }

    #[test]
    fn free_square_lattice_beats_symmetric_point() {
        let r = rate(
            &PeriodicPotential::free(2),
            c(10.0),
            &RateOptions::default(),
        )
        .unwrap();
        assert!((r.r_upper - 4f64.acosh()).abs() < 1e-6, "{}", r.r_upper);
        assert!(r.relative_residual < 1e-10);
    }

    #[test]
    fn in_band_rate_is_zero() {
        let r = rate(&PeriodicPotential::free(2), c(1.0), &RateOptions::default()).unwrap();
        assert_eq!(r.r_upper, 0.0);
        assert!(r.minimizer.is_real());
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let (x, fx) = nelder_mead(&f, &[-1.2, 1.0], 0.1, 10_000, 1e-16);
        assert!(fx < 1e-12 && (x[0] - 1.0).abs() < 1e-5);
    }
}
