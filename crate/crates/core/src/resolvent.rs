//! Lattice Green's function `G₀(m,n;λ) = ⟨δ_m, (H₀−λ)⁻¹ δ_n⟩` by trapezoid
//! quadrature over the dual cell, resolvent columns and the Combes–Thomas
//! bound.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::floquet::{restriction_matrix, QuasiMomentum};
use crate::lattice::{LatticeFunction, Norm, PeriodicPotential, SiteBox};
use crate::linalg::Lu;
use crate::spectrum::{band_structure, spectrum_distance, BandStructure};
use crate::{cis, Error, Result, TAU};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Smallest `dist(λ, σ(H₀))` accepted by the quadrature.
pub const MIN_GAMMA: f64 = 1e-3;

/// Quadrature controls.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenOptions {
    /// Stop doubling once successive values differ by less than this.
    pub tol: f64,
    /// Initial nodes per axis (rounded up to a power of two).
    pub start: usize,
    /// Nodes-per-axis cap; `None` picks the dimension default.
    pub cap: Option<usize>,
    /// Band grid used for the spectral-proximity guard.
    pub band_grid: usize,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions {
            tol: 1e-8,
            start: 16,
            cap: None,
            band_grid: 64,
        }
    }
}

/// Default nodes-per-axis cap: `2¹⁴`, `2¹⁰`, `2⁷` for `d = 1, 2, ≥3`.
pub fn default_cap(dim: usize) -> usize {
    match dim {
        1 => 1 << 14,
        2 => 1 << 10,
        _ => 1 << 7,
    }
}

/// Tabulated `G₀(m,n;λ)` with quadrature diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenTable {
    pub lambda: Complex64,
    pub entries: Vec<(Vec<i64>, Vec<i64>, Complex64)>,
    /// Nodes per axis of the final grid.
    pub nodes: usize,
    /// Largest change in the last doubling.
    pub error_estimate: f64,
    pub converged: bool,
}

impl GreenTable {
    pub fn get(&self, m: &[i64], n: &[i64]) -> Option<Complex64> {
        self.entries
            .iter()
            .find(|(a, b, _)| a.as_slice() == m && b.as_slice() == n)
            .map(|e| e.2)
    }

    pub fn dim(&self) -> usize {
        self.entries.first().map_or(0, |e| e.0.len())
    }
}

/// Green's function evaluator bound to `(V, λ)` after the proximity check.
#[derive(Debug, Clone)]
pub struct Resolvent<'a> {
    potential: &'a PeriodicPotential,
    lambda: Complex64,
    gamma: f64,
}

impl<'a> Resolvent<'a> {
    pub fn new(
        potential: &'a PeriodicPotential,
        lambda: Complex64,
        bands: &BandStructure,
    ) -> Result<Self> {
        let gamma = spectrum_distance(lambda, bands);
        if gamma < MIN_GAMMA {
            return Err(Error::SpectralProximity {
                distance: gamma,
                required: MIN_GAMMA,
            });
        }
        Ok(Resolvent {
            potential,
            lambda,
            gamma,
        })
    }

    /// `γ(λ)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn table(&self, pairs: &[(Vec<i64>, Vec<i64>)], opts: &GreenOptions) -> Result<GreenTable> {
        let d = self.potential.dim();
        let mut terms = Vec::with_capacity(pairs.len());
        let mut spread = 0i64;
        for (m, n) in pairs {
            if m.len() != d || n.len() != d {
                return Err(Error::Domain(
                    "site dimension does not match the potential".into(),
                ));
            }
            let (jm, km) = self.potential.reduce(m);
            let (jn, kn) = self.potential.reduce(n);
            let dk: Vec<i64> = km.iter().zip(&kn).map(|(a, b)| a - b).collect();
            spread = spread.max(dk.iter().map(|v| v.abs()).max().unwrap_or(0));
            terms.push((jm, jn, dk));
        }
        let cap = opts.cap.unwrap_or_else(|| default_cap(d));
        // the integrand's Fourier modes reach `spread`; keep aliases well away
        let mut n = opts
            .start
            .max(4 * spread as usize)
            .max(2)
            .next_power_of_two();
        if n > cap {
            return Err(Error::Aliasing {
                required: n,
                available: cap,
            });
        }
        let mut sums = vec![ZERO; terms.len()];
        self.accumulate(&terms, n, false, &mut sums)?;
        let mut values = normalize(&sums, n, d);
        let mut err = f64::INFINITY;
        let mut converged = false;
        while n < cap {
            n *= 2;
            self.accumulate(&terms, n, true, &mut sums)?;
            let next = normalize(&sums, n, d);
            err = values
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            values = next;
            if err < opts.tol {
                converged = true;
                break;
            }
        }
        let entries = pairs
            .iter()
            .zip(values)
            .map(|((m, n), v)| (m.clone(), n.clone(), v))
            .collect();
        Ok(GreenTable {
            lambda: self.lambda,
            entries,
            nodes: n,
            error_estimate: err,
            converged,
        })
    }

    /// Adds the contributions of the `n`-per-axis grid; with `only_new`, nodes
    /// already present on the `n/2` grid (all indices even) are skipped.
    fn accumulate(
        &self,
        terms: &[(usize, usize, Vec<i64>)],
        n: usize,
        only_new: bool,
        sums: &mut [Complex64],
    ) -> Result<()> {
        let periods = self.potential.periods();
        let d = periods.len();
        let roots: Vec<Complex64> = (0..n).map(|t| cis(TAU * t as f64 / n as f64)).collect();
        let total = n.pow(d as u32);
        let mut k = vec![0usize; d];
        for idx in 0..total {
            let mut r = idx;
            for axis in (0..d).rev() {
                k[axis] = r % n;
                r /= n;
            }
            if only_new && k.iter().all(|&v| v % 2 == 0) {
                continue;
            }
            let x: Vec<f64> = k
                .iter()
                .zip(periods)
                .map(|(&kj, &q)| kj as f64 / (q * n) as f64)
                .collect();
            let m =
                restriction_matrix(self.potential, &QuasiMomentum::real(&x))?.shift(self.lambda);
            let lu = Lu::new(&m);
            if lu.is_singular() {
                return Err(Error::SpectralProximity {
                    distance: 0.0,
                    required: MIN_GAMMA,
                });
            }
            let inv = lu.inverse();
            for (s, (jm, jn, dk)) in sums.iter_mut().zip(terms) {
                let mut ph = 0i64;
                for (axis, &v) in dk.iter().enumerate() {
                    ph += v * k[axis] as i64;
                }
                let p = roots[ph.rem_euclid(n as i64) as usize];
                *s += p * inv[(*jm, *jn)];
            }
        }
        Ok(())
    }

    pub fn entry(&self, m: &[i64], n: &[i64], opts: &GreenOptions) -> Result<GreenTable> {
        self.table(&[(m.to_vec(), n.to_vec())], opts)
    }

    /// `u = (H₀−λ)⁻¹δ₀` sampled on `domain`.
    pub fn delta_column(
        &self,
        domain: &SiteBox,
        opts: &GreenOptions,
    ) -> Result<(LatticeFunction, GreenTable)> {
        let origin = vec![0i64; domain.dim()];
        let pairs: Vec<(Vec<i64>, Vec<i64>)> =
            domain.sites().map(|s| (s, origin.clone())).collect();
        let table = self.table(&pairs, opts)?;
        let data = table.entries.iter().map(|e| e.2).collect();
        Ok((LatticeFunction::new(domain.clone(), data)?, table))
    }
}

fn normalize(sums: &[Complex64], n: usize, d: usize) -> Vec<Complex64> {
    let w = 1.0 / (n as f64).powi(d as i32);
    sums.iter().map(|s| s * w).collect()
}

/// `G₀(m,n;λ)` as a one-entry table.
pub fn green(
    potential: &PeriodicPotential,
    lambda: Complex64,
    m: &[i64],
    n: &[i64],
    opts: &GreenOptions,
) -> Result<GreenTable> {
    let bands = band_structure(potential, opts.band_grid)?;
    Resolvent::new(potential, lambda, &bands)?.entry(m, n, opts)
}

/// `u(n) = G₀(n,0;λ)` on `domain`.
pub fn resolvent_delta_column(
    potential: &PeriodicPotential,
    lambda: Complex64,
    domain: &SiteBox,
    opts: &GreenOptions,
) -> Result<LatticeFunction> {
    let bands = band_structure(potential, opts.band_grid)?;
    Ok(Resolvent::new(potential, lambda, &bands)?
        .delta_column(domain, opts)?
        .0)
}

/// Outcome of checking `|G₀(m,n)| ≤ e^{−μ|m−n|₁}/(γ − 2d e^μ)` on a table.
#[derive(Debug, Clone, PartialEq)]
pub struct CombesThomasReport {
    pub mu: f64,
    pub gamma: f64,
    pub pairs: usize,
    /// Largest `|G₀| / bound` over the table.
    pub worst_ratio: f64,
    pub holds: bool,
}

/// Combes–Thomas bound `e^{−μ·dist}/(γ − 2d e^μ)`.
pub fn combes_thomas_bound(dim: usize, gamma: f64, mu: f64, dist: u64) -> Result<f64> {
    let sup = gamma.ln() - (2.0 * dim as f64).ln();
    if !(mu > 0.0 && mu < sup) {
        return Err(Error::InvalidMu { mu, sup });
    }
    Ok((-mu * dist as f64).exp() / (gamma - 2.0 * dim as f64 * mu.exp()))
}

pub fn combes_thomas_check(gamma: f64, mu: f64, table: &GreenTable) -> Result<CombesThomasReport> {
    let d = table.dim();
    let mut worst = 0.0f64;
    for (m, n, g) in &table.entries {
        let diff: Vec<i64> = m.iter().zip(n).map(|(a, b)| a - b).collect();
        let bound = combes_thomas_bound(d, gamma, mu, Norm::L1.of(&diff))?;
        worst = worst.max(g.norm() / bound);
    }
    // quadrature error enters at the level of `error_estimate`
    let holds = worst <= 1.0 + table.error_estimate.max(1e-12);
    Ok(CombesThomasReport {
        mu,
        gamma,
        pairs: table.entries.len(),
        worst_ratio: worst,
        holds,
    })
}

/// Admissible `μ` on a `step` grid in `(0, ln γ − ln 2d)`.
pub fn admissible_mu_grid(dim: usize, gamma: f64, step: f64) -> Vec<f64> {
    let sup = gamma.ln() - (2.0 * dim as f64).ln();
    let mut out = Vec::new();
    let mut k = 1;
    while (k as f64) * step < sup {
        out.push(k as f64 * step);
        k += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::eigen_residual;
    use crate::lattice::Impurity;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bands(v: &PeriodicPotential) -> BandStructure {
        band_structure(v, 64).unwrap()
    }

    #[test]
    fn free_chain_closed_forms() {
        let v = PeriodicPotential::free(1);
        let opts = GreenOptions::default();
        let g00 = green(&v, c(3.0), &[0], &[0], &opts).unwrap();
        assert!(g00.converged);
        assert!((g00.entries[0].2 - c(-1.0 / 5f64.sqrt())).norm() < 1e-10);
        let g10 = green(&v, c(3.0), &[1], &[0], &opts).unwrap();
        assert!((g10.entries[0].2 - c(0.17082039324993686)).norm() < 1e-10);
        let g = green(&v, c(10.0), &[0], &[0], &opts).unwrap();
        assert!((g.entries[0].2 - c(-1.0 / 96f64.sqrt())).norm() < 1e-10);
    }

    #[test]
    fn proximity_is_rejected() {
        let v = PeriodicPotential::free(1);
        let err = green(&v, c(0.0), &[0], &[0], &GreenOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SpectralProximity { .. }));
    }

    #[test]
    fn column_solves_defect_equation() {
        let v = PeriodicPotential::new(vec![2], vec![0.0, 2.0]).unwrap();
        let lam = c(1.0);
        let r = Resolvent::new(&v, lam, &bands(&v)).unwrap();
        let (u, _) = r
            .delta_column(&SiteBox::centered(1, 10), &GreenOptions::default())
            .unwrap();
        let res = eigen_residual(&v, &Impurity::None, lam, &u).unwrap();
        for (s, val) in res.iter() {
            let want = if s == [0] { c(1.0) } else { c(0.0) };
            assert!((val - want).norm() < 1e-8, "{s:?}: {val}");
        }
    }

    #[test]
    fn combes_thomas_example() {
        let b = combes_thomas_bound(1, 8.0, 1.0, 1).unwrap();
        assert!((b - 0.1435102697846425).abs() < 1e-12);
        assert!(matches!(
            combes_thomas_bound(1, 8.0, 4f64.ln(), 0),
            Err(Error::InvalidMu { .. })
        ));
        let v = PeriodicPotential::free(1);
        let r = Resolvent::new(&v, c(10.0), &bands(&v)).unwrap();
        let pairs: Vec<_> = (-5..=5).map(|m| (vec![m], vec![0])).collect();
        let t = r.table(&pairs, &GreenOptions::default()).unwrap();
        for mu in admissible_mu_grid(1, r.gamma(), 0.1) {
            assert!(
                combes_thomas_check(r.gamma(), mu, &t).unwrap().holds,
                "μ={mu}"
            );
        }
    }

    #[test]
    fn herglotz_sign() {
        let v = PeriodicPotential::new(vec![2], vec![0.3, -1.0]).unwrap();
        for lam in [
            Complex64::new(0.0, 0.5),
            Complex64::new(-1.0, 0.01),
            Complex64::new(3.0, 2.0),
        ] {
            let g = green(&v, lam, &[0], &[0], &GreenOptions::default()).unwrap();
            assert!(g.entries[0].2.im > 0.0);
        }
    }
}
