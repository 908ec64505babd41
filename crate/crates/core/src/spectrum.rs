//! Band functions of `H₀ = −Δ + V`, the spectral bands `[a_m, b_m]`,
//! distance from `λ` to `σ(H₀)` and regime classification.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::floquet::{fiber_matrix, DualGrid, QuasiMomentum};
use crate::lattice::PeriodicPotential;
use crate::linalg::hermitian_eigenvalues;
use crate::{Error, Result};

/// Sorted eigenvalues of `H̃₀(k)` on a uniform dual-cell grid plus the
/// per-band ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    grid: DualGrid,
    /// `bands[i]` holds the ascending eigenvalues at grid node `i`.
    bands: Vec<Vec<f64>>,
    intervals: Vec<(f64, f64)>,
    /// Quasi-momenta attaining `a_m` and `b_m` after refinement.
    extrema: Vec<(Vec<f64>, Vec<f64>)>,
}

/// Position of `λ` relative to `σ(H₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Strictly inside band `m` (real `λ`).
    Interior(usize),
    /// Within tolerance of an endpoint of band `m`.
    Endpoint(usize),
    Outside,
}

/// `m`-th eigenvalue (ascending) of `H̃₀(k)` at a real quasi-momentum.
pub fn band_value(potential: &PeriodicPotential, k: &[f64], m: usize) -> Result<f64> {
    Ok(band_values(potential, k)?[m])
}

/// All eigenvalues of `H̃₀(k)`, ascending.
pub fn band_values(potential: &PeriodicPotential, k: &[f64]) -> Result<Vec<f64>> {
    let fiber = fiber_matrix(potential, &QuasiMomentum::real(k), None)?;
    hermitian_eigenvalues(&fiber.matrix)
}

pub fn band_structure(
    potential: &PeriodicPotential,
    grid_per_axis: usize,
) -> Result<BandStructure> {
    if grid_per_axis < 2 {
        return Err(Error::Domain(
            "band grid needs at least 2 points per axis".into(),
        ));
    }
    let grid = DualGrid::uniform(potential.periods(), grid_per_axis)?;
    let bands = (0..grid.len())
        .map(|i| band_values(potential, &grid.point(i)))
        .collect::<Result<Vec<_>>>()?;
    let q = potential.cell_size();
    let step: Vec<f64> = potential
        .periods()
        .iter()
        .map(|&p| 1.0 / (p * grid_per_axis) as f64)
        .collect();
    let mut intervals = Vec::with_capacity(q);
    let mut extrema = Vec::with_capacity(q);
    for m in 0..q {
        let (imin, imax) = argminmax(bands.iter().map(|b| b[m]));
        let (kmin, lo) = refine(potential, m, grid.point(imin), bands[imin][m], &step, 1.0)?;
        let (kmax, hi) = refine(potential, m, grid.point(imax), bands[imax][m], &step, -1.0)?;
        intervals.push((lo, hi));
        extrema.push((kmin, kmax));
    }
    Ok(BandStructure {
        grid,
        bands,
        intervals,
        extrema,
    })
}

fn argminmax(values: impl Iterator<Item = f64>) -> (usize, usize) {
    let (mut imin, mut imax) = (0, 0);
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v < vmin {
            vmin = v;
            imin = i;
        }
        if v > vmax {
            vmax = v;
            imax = i;
        }
    }
    (imin, imax)
}

/// Coordinate-wise parabolic refinement of an extremum of `sign·λ_m(k)`
/// (minimum for `sign = 1`). Only accepted moves that improve the value are
/// kept, so the refined endpoint is always a true band value.
fn refine(
    potential: &PeriodicPotential,
    m: usize,
    mut k: Vec<f64>,
    mut best: f64,
    step: &[f64],
    sign: f64,
) -> Result<(Vec<f64>, f64)> {
    let mut h: Vec<f64> = step.to_vec();
    for _ in 0..40 {
        for axis in 0..k.len() {
            let mut kp = k.clone();
            kp[axis] += h[axis];
            let fp = band_value(potential, &kp, m)?;
            let mut km = k.clone();
            km[axis] -= h[axis];
            let fm = band_value(potential, &km, m)?;
            let curv = fp + fm - 2.0 * best;
            if sign * curv > 0.0 {
                let t = (0.5 * (fm - fp) / curv).clamp(-1.0, 1.0);
                let mut kt = k.clone();
                kt[axis] += t * h[axis];
                let ft = band_value(potential, &kt, m)?;
                if sign * (ft - best) < 0.0 {
                    best = ft;
                    k = kt;
                }
            }
            for (kk, fk) in [(kp, fp), (km, fm)] {
                if sign * (fk - best) < 0.0 {
                    best = fk;
                    k = kk;
                }
            }
            h[axis] *= 0.5;
        }
        if h.iter().all(|&s| s < 1e-9) {
            break;
        }
    }
    Ok((k, best))
}

impl BandStructure {
    pub fn grid(&self) -> &DualGrid {
        &self.grid
    }

    pub fn grid_per_axis(&self) -> usize {
        self.grid.nodes_per_axis()[0]
    }

    pub fn bands(&self) -> &[Vec<f64>] {
        &self.bands
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Refined `(argmin, argmax)` of band `m`.
    pub fn extrema(&self, m: usize) -> (&[f64], &[f64]) {
        (&self.extrema[m].0, &self.extrema[m].1)
    }

    /// `σ(H₀)` as a sorted union of disjoint intervals.
    pub fn union(&self) -> Vec<(f64, f64)> {
        let mut iv = self.intervals.clone();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (a, b) in iv {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        out
    }

    /// Largest jump of any band between grid neighbours.
    pub fn max_adjacent_jump(&self) -> f64 {
        let n = self.grid.nodes_per_axis();
        let mut worst = 0.0f64;
        for i in 0..self.grid.len() {
            let idx = self.grid.index(i);
            for axis in 0..n.len() {
                if idx[axis] + 1 == n[axis] {
                    continue;
                }
                let mut stride = 1;
                for later in &n[axis + 1..] {
                    stride *= later;
                }
                let j = i + stride;
                for (a, b) in self.bands[i].iter().zip(&self.bands[j]) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }
}

/// `γ(λ) = dist(λ, σ(H₀))`.
pub fn spectrum_distance(lambda: Complex64, bands: &BandStructure) -> f64 {
    bands
        .intervals
        .iter()
        .map(|&(a, b)| {
            let dx = if lambda.re < a {
                a - lambda.re
            } else if lambda.re > b {
                lambda.re - b
            } else {
                0.0
            };
            dx.hypot(lambda.im)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn classify_regime(lambda: Complex64, bands: &BandStructure, tol: f64) -> Regime {
    if lambda.im.abs() <= tol {
        let x = lambda.re;
        if let Some(m) = bands
            .intervals
            .iter()
            .position(|&(a, b)| x > a + tol && x < b - tol)
        {
            return Regime::Interior(m);
        }
    }
    for (m, &(a, b)) in bands.intervals.iter().enumerate() {
        let near = |e: f64| (lambda - Complex64::new(e, 0.0)).norm() <= tol;
        if near(a) || near(b) {
            return Regime::Endpoint(m);
        }
    }
    Regime::Outside
}

/// A real quasi-momentum `k` with `λ ∈ σ(H̃₀(k))`, for real `λ` in band `m`.
///
/// Bisects the continuous band function along the segment joining its
/// refined minimiser and maximiser.
pub fn fermi_point(
    potential: &PeriodicPotential,
    bands: &BandStructure,
    m: usize,
    lambda: f64,
) -> Result<Vec<f64>> {
    let (a, b) = bands.intervals[m];
    if !(lambda >= a && lambda <= b) {
        return Err(Error::Domain("λ is not inside the requested band".into()));
    }
    let (kmin, kmax) = bands.extrema(m);
    let at = |t: f64| -> Vec<f64> {
        kmin.iter()
            .zip(kmax)
            .map(|(p, q)| p + t * (q - p))
            .collect()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if band_value(potential, &at(mid), m)? < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(at(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn free_chain_band() {
        let bs = band_structure(&PeriodicPotential::free(1), 64).unwrap();
        let (a, b) = bs.intervals()[0];
        assert!((a + 2.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_recovers_offgrid_extremum() {
        // with 3 grid points per axis neither 0 nor 1/2 is a node
        let bs = band_structure(&PeriodicPotential::free(1), 3).unwrap();
        let (a, b) = bs.intervals()[0];
        assert!((a + 2.0).abs() < 1e-10, "{a}");
        assert!((b - 2.0).abs() < 1e-10, "{b}");
    }

    #[test]
    fn dimer_bands_and_gap() {
        let v = PeriodicPotential::new(vec![2], vec![0.0, 2.0]).unwrap();
        let bs = band_structure(&v, 64).unwrap();
        let s5 = 5f64.sqrt();
        let want = [(1.0 - s5, 0.0), (2.0, 1.0 + s5)];
        for (got, w) in bs.intervals().iter().zip(&want) {
            assert!(
                (got.0 - w.0).abs() < 1e-9 && (got.1 - w.1).abs() < 1e-9,
                "{got:?}"
            );
        }
        assert!((spectrum_distance(c(1.0), &bs) - 1.0).abs() < 1e-9);
        assert_eq!(bs.union().len(), 2);
    }

    #[test]
    fn distances_and_regimes() {
        let bs = band_structure(&PeriodicPotential::free(1), 32).unwrap();
        assert!((spectrum_distance(c(10.0), &bs) - 8.0).abs() < 1e-12);
        assert!((spectrum_distance(Complex64::new(0.0, 3.0), &bs) - 3.0).abs() < 1e-12);
        assert_eq!(classify_regime(c(0.0), &bs, 1e-6), Regime::Interior(0));
        assert_eq!(classify_regime(c(2.0), &bs, 1e-6), Regime::Endpoint(0));
        assert_eq!(classify_regime(c(10.0), &bs, 1e-6), Regime::Outside);
        assert_eq!(
            classify_regime(Complex64::new(0.0, 1.0), &bs, 1e-6),
            Regime::Outside
        );
    }

    #[test]
    fn fermi_point_lies_on_fermi_surface() {
        let v = PeriodicPotential::new(vec![2, 1], vec![0.5, -0.7]).unwrap();
        let bs = band_structure(&v, 16).unwrap();
        let (a, b) = bs.intervals()[1];
        let lam = 0.3 * a + 0.7 * b;
        let k = fermi_point(&v, &bs, 1, lam).unwrap();
        assert!((band_value(&v, &k, 1).unwrap() - lam).abs() < 1e-12);
    }
}
