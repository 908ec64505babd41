//! Finite-volume ground truth: `H = −Δ + V + v` on `‖n‖_max ≤ L` with zero
//! boundary conditions, direct resolvent solves and an eigenvector probe for
//! in-band bound states.
//!
//! The probe is supporting evidence only. Absence of embedded eigenvalues is
//! an infinite-volume statement that no finite box can settle.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::lattice::{Impurity, LatticeFunction, Norm, PeriodicPotential, SiteBox};
use crate::linalg::{
    symmetric_eigen, tridiagonal_eigenvalues, tridiagonal_eigenvector, BandedMatrix,
};
use crate::{Error, Result};

/// Largest box (in sites) the oracle will assemble.
pub const MAX_SITES: usize = 1_000_000;
/// Largest banded storage (complex entries, LU fill included) the oracle
/// will allocate.
pub const MAX_BAND_ENTRIES: usize = 1 << 25;
/// Largest box handed to the dense symmetric eigensolver.
pub const MAX_DENSE_SITES: usize = 2_500;

/// `H` restricted to `[−L, L]^d` with Dirichlet truncation.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    half: usize,
    domain: SiteBox,
    matrix: BandedMatrix,
    real: bool,
}

pub fn truncated_matrix(
    potential: &PeriodicPotential,
    impurity: &Impurity,
    half: usize,
) -> Result<TruncatedOperator> {
    if half < 1 {
        return Err(Error::Domain("truncation needs L ≥ 1".into()));
    }
    let d = potential.dim();
    let side = 2 * half + 1;
    let sites = side
        .checked_pow(d as u32)
        .filter(|&s| s <= MAX_SITES)
        .ok_or(Error::TooLarge {
            sites: side.saturating_pow(d as u32),
            limit: MAX_SITES,
        })?;
    let domain = SiteBox::centered(d, half);
    let bandwidth = side.pow(d as u32 - 1);
    if sites.saturating_mul(3 * bandwidth + 1) > MAX_BAND_ENTRIES {
        return Err(Error::TooLarge {
            sites,
            limit: MAX_BAND_ENTRIES / (3 * bandwidth + 1),
        });
    }
    let mut matrix = BandedMatrix::zeros(sites, bandwidth);
    let mut nb = vec![0i64; d];
    for (i, n) in domain.sites().enumerate() {
        matrix.add(
            i,
            i,
            Complex64::new(potential.at(&n), 0.0) + impurity.value(&n),
        );
        for axis in 0..d {
            for step in [-1i64, 1] {
                nb.copy_from_slice(&n);
                nb[axis] += step;
                if let Some(j) = domain.index_of(&nb) {
                    matrix.add(i, j, Complex64::new(-1.0, 0.0));
                }
            }
        }
    }
    Ok(TruncatedOperator {
        half,
        domain,
        matrix,
        real: impurity.is_real(),
    })
}

impl TruncatedOperator {
    pub fn half_width(&self) -> usize {
        self.half
    }

    pub fn domain(&self) -> &SiteBox {
        &self.domain
    }

    pub fn matrix(&self) -> &BandedMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `true` when `v` is real, so the matrix is real symmetric.
    pub fn is_hermitian(&self) -> bool {
        self.real
    }

    pub fn apply(&self, u: &LatticeFunction) -> LatticeFunction {
        let x: Vec<Complex64> = self.domain.sites().map(|s| u.get(&s)).collect();
        let y = self.matrix.mul_vec(&x);
        LatticeFunction::new(self.domain.clone(), y).expect("shape matches the domain")
    }

    fn dense_real(&self) -> Vec<f64> {
        let n = self.dim();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            let lo = i.saturating_sub(self.matrix.bandwidth());
            let hi = (i + self.matrix.bandwidth() + 1).min(n);
            for j in lo..hi {
                a[i * n + j] = self.matrix.get(i, j).re;
            }
        }
        a
    }

    fn tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let diag = (0..n).map(|i| self.matrix.get(i, i).re).collect();
        let off = (0..n - 1).map(|i| self.matrix.get(i, i + 1).re).collect();
        (diag, off)
    }

    /// Ascending eigenvalues; requires a real impurity.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.real {
            return Err(Error::NonHermitian);
        }
        if self.domain.dim() == 1 {
            let (d, e) = self.tridiagonal();
            return tridiagonal_eigenvalues(&d, &e);
        }
        if self.dim() > MAX_DENSE_SITES {
            return Err(Error::TooLarge {
                sites: self.dim(),
                limit: MAX_DENSE_SITES,
            });
        }
        Ok(symmetric_eigen(&self.dense_real(), self.dim())?.values)
    }

    /// Ascending eigenpairs with unit eigenvectors; requires a real impurity.
    pub fn eigenpairs(&self) -> Result<Vec<(f64, Vec<f64>)>> {
        if !self.real {
            return Err(Error::NonHermitian);
        }
        if self.domain.dim() == 1 {
            let (d, e) = self.tridiagonal();
            let vals = tridiagonal_eigenvalues(&d, &e)?;
            return Ok(vals
                .into_iter()
                .map(|l| (l, tridiagonal_eigenvector(&d, &e, l)))
                .collect());
        }
        if self.dim() > MAX_DENSE_SITES {
            return Err(Error::TooLarge {
                sites: self.dim(),
                limit: MAX_DENSE_SITES,
            });
        }
        let eig = symmetric_eigen(&self.dense_real(), self.dim())?;
        Ok(eig.values.into_iter().zip(eig.vectors).collect())
    }
}

/// Solves `(H_L − λ)u = rhs`; `rhs` is read on the operator's box.
pub fn truncated_resolvent_solve(
    op: &TruncatedOperator,
    lambda: Complex64,
    rhs: &LatticeFunction,
) -> Result<LatticeFunction> {
    if rhs.dim() != op.domain.dim() {
        return Err(Error::Domain(
            "right-hand side has the wrong dimension".into(),
        ));
    }
    let mut shifted = op.matrix.clone();
    for i in 0..shifted.dim() {
        shifted.add(i, i, -lambda);
    }
    let b: Vec<Complex64> = op.domain.sites().map(|s| rhs.get(&s)).collect();
    let x = shifted.solve(&b)?;
    LatticeFunction::new(op.domain.clone(), x)
}

/// One eigenpair seen by the probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub half_width: usize,
    pub eigenvalue: f64,
    /// `‖u on ‖n‖_max = L‖ / ‖u‖`.
    pub boundary_mass: f64,
    pub in_band: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub header: &'static str,
    pub interval: (f64, f64),
    pub rows: Vec<ProbeRow>,
    /// Per `L`, the smallest boundary mass among in-band eigenvectors
    /// (`None` when no eigenvalue falls in the interval).
    pub min_in_band: Vec<(usize, Option<f64>)>,
    /// In-band rows whose boundary mass fell below `threshold`.
    pub flagged: Vec<ProbeRow>,
    pub threshold: f64,
}

pub const PROBE_HEADER: &str =
    "finite-volume probe; supporting evidence only, not a proof about infinite-volume eigenvalues";

/// Default boundary-mass threshold below which an in-band state is flagged.
pub const PROBE_THRESHOLD: f64 = 1e-3;

/// Eigenpairs of truncated `H` for each `L`, with boundary mass and an
/// in-interval flag.
pub fn embedded_eigenvalue_probe(
    potential: &PeriodicPotential,
    impurity: &Impurity,
    interval: (f64, f64),
    half_widths: &[usize],
    threshold: f64,
) -> Result<ProbeReport> {
    if !impurity.is_real() {
        return Err(Error::NonHermitian);
    }
    let mut rows = Vec::new();
    let mut min_in_band = Vec::new();
    for &l in half_widths {
        let op = truncated_matrix(potential, impurity, l)?;
        let sites: Vec<Vec<i64>> = op.domain.sites().collect();
        let mut best: Option<f64> = None;
        for (lambda, vec) in op.eigenpairs()? {
            let total: f64 = vec.iter().map(|x| x * x).sum();
            let edge: f64 = vec
                .iter()
                .zip(&sites)
                .filter(|(_, s)| Norm::Max.of(s) == l as u64)
                .map(|(x, _)| x * x)
                .sum();
            let mass = (edge / total).sqrt();
            let in_band = lambda > interval.0 && lambda < interval.1;
            if in_band {
                best = Some(best.map_or(mass, |b: f64| b.min(mass)));
            }
            rows.push(ProbeRow {
                half_width: l,
                eigenvalue: lambda,
                boundary_mass: mass,
                in_band,
            });
        }
        min_in_band.push((l, best));
    }
    let flagged = rows
        .iter()
        .filter(|r| r.in_band && r.boundary_mass < threshold)
        .cloned()
        .collect();
    Ok(ProbeReport {
        header: PROBE_HEADER,
        interval,
        rows,
        min_in_band,
        flagged,
        threshold,
    })
}
