//! Floquet transform `F_q`, fiber matrices `D^x + B`, the boundary-condition
//! restriction of `H₀` to the cell, the characteristic determinant
//! `P̃(x,λ) = det M̃(x,λ)` and its adjugate.
//!
//! Quasi-momenta may be complex everywhere: all fiber objects are entire in
//! `x` and the dispersion code evaluates them off the real torus.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::lattice::{potential_dft, LatticeFunction, PeriodicPotential, SiteBox};
use crate::linalg::CMatrix;
use crate::{cis, fold, Error, Result, TAU};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex quasi-momentum; the real part lives on `ℝ^d/Γ*`,
/// `Γ* = ⊕ q_j⁻¹ℤ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiMomentum(pub Vec<Complex64>);

impl QuasiMomentum {
    pub fn real(x: &[f64]) -> Self {
        QuasiMomentum(x.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|v| v.im == 0.0)
    }

    /// Real parts folded into the dual cell `Π[0, 1/q_j)`.
    pub fn reduced(&self, periods: &[usize]) -> Self {
        QuasiMomentum(
            self.0
                .iter()
                .zip(periods)
                .map(|(x, &q)| {
                    let cell = 1.0 / q as f64;
                    Complex64::new(fold(x.re, cell), x.im)
                })
                .collect(),
        )
    }

    /// `‖Im x‖₂`.
    pub fn imag_norm(&self) -> f64 {
        self.0.iter().map(|v| v.im * v.im).sum::<f64>().sqrt()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

/// `e^{2πi x}` for complex `x`.
#[inline]
pub(crate) fn phase(x: Complex64) -> Complex64 {
    (I * TAU * x).exp()
}

/// `M̃ = D^x + B − λI` (or `H̃₀(x) = D^x + B` when `lambda` is `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct FiberMatrix {
    pub matrix: CMatrix,
    pub x: QuasiMomentum,
    pub lambda: Option<Complex64>,
}

impl FiberMatrix {
    pub fn det(&self) -> Complex64 {
        self.matrix.det()
    }

    pub fn adjugate(&self) -> CMatrix {
        self.matrix.adjugate()
    }
}

/// The constant block `B(n,n′) = Q^{−1/2} V̂((n−n′)/q)`.
pub fn potential_block(potential: &PeriodicPotential) -> CMatrix {
    let vhat = potential_dft(potential);
    let q = potential.periods();
    let qn = potential.cell_size();
    let norm = 1.0 / (qn as f64).sqrt();
    let cell = potential.cell_box();
    let sites: Vec<Vec<i64>> = cell.sites().collect();
    CMatrix::from_fn(qn, |a, b| {
        let mut idx = 0usize;
        for (axis, &p) in q.iter().enumerate() {
            let l = (sites[a][axis] - sites[b][axis]).rem_euclid(p as i64) as usize;
            idx = idx * p + l;
        }
        vhat[idx] * norm
    })
}

/// Diagonal of `D^x`: `−Σ_j (μ_n^j z_j + 1/(μ_n^j z_j))`, `μ_n^j = e^{2πi n_j/q_j}`.
pub fn dispersion_diagonal(periods: &[usize], x: &[Complex64]) -> Vec<Complex64> {
    let cell = cell_box(periods);
    let z: Vec<Complex64> = x.iter().map(|&v| phase(v)).collect();
    cell.sites()
        .map(|n| {
            -n.iter()
                .zip(periods)
                .zip(&z)
                .map(|((&nj, &q), &zj)| {
                    let w = cis(TAU * nj as f64 / q as f64) * zj;
                    w + w.inv()
                })
                .sum::<Complex64>()
        })
        .collect()
}

fn cell_box(periods: &[usize]) -> SiteBox {
    SiteBox::new(
        vec![0; periods.len()],
        periods.iter().map(|&q| q as i64 - 1).collect(),
    )
    .expect("periods are positive")
}

fn check_dim(potential: &PeriodicPotential, x: &[Complex64]) -> Result<()> {
    if x.len() != potential.dim() {
        return Err(Error::Domain(alloc::format!(
            "quasi-momentum has {} components, lattice is {}-dimensional",
            x.len(),
            potential.dim()
        )));
    }
    Ok(())
}

pub fn fiber_matrix(
    potential: &PeriodicPotential,
    x: &QuasiMomentum,
    lambda: Option<Complex64>,
) -> Result<FiberMatrix> {
    check_dim(potential, x.as_slice())?;
    let mut m = potential_block(potential);
    let diag = dispersion_diagonal(potential.periods(), x.as_slice());
    for (i, d) in diag.iter().enumerate() {
        m[(i, i)] += d - lambda.unwrap_or(ZERO);
    }
    Ok(FiberMatrix {
        matrix: m,
        x: x.clone(),
        lambda,
    })
}

/// `H₀` restricted to `W` under `u(n + m⊙q) = e^{2πi⟨m⊙q, x⟩} u(n)`.
///
/// This is the matrix of the fiber operator in the basis in which `F_q`
/// produces `û(x, ·)`; it is built directly from the lattice and serves as
/// the independent check of [`fiber_matrix`].
pub fn restriction_matrix(potential: &PeriodicPotential, x: &QuasiMomentum) -> Result<CMatrix> {
    check_dim(potential, x.as_slice())?;
    let q = potential.periods();
    let mut m = CMatrix::zeros(potential.cell_size());
    let mut nb = vec![0i64; potential.dim()];
    for (a, n) in potential.cell_sites().enumerate() {
        m[(a, a)] += Complex64::new(potential.values()[a], 0.0);
        for axis in 0..n.len() {
            for step in [-1i64, 1] {
                nb.copy_from_slice(&n);
                nb[axis] += step;
                let (b, cell) = potential.reduce(&nb);
                let arg: Complex64 = cell
                    .iter()
                    .zip(q)
                    .zip(x.as_slice())
                    .map(|((&c, &p), &xj)| xj * (c * p as i64) as f64)
                    .sum();
                m[(a, b)] -= phase(arg);
            }
        }
    }
    Ok(m)
}

/// `P̃(x,λ) = det(D^x + B − λI)`.
pub fn char_det(
    potential: &PeriodicPotential,
    x: &QuasiMomentum,
    lambda: Complex64,
) -> Result<Complex64> {
    Ok(fiber_matrix(potential, x, Some(lambda))?.det())
}

/// Scale against which `|P̃(x,λ)|` counts as zero: the product over rows of
/// the magnitudes of all terms that enter the row (before cancellation).
pub fn det_scale(
    potential: &PeriodicPotential,
    x: &QuasiMomentum,
    lambda: Complex64,
) -> Result<f64> {
    check_dim(potential, x.as_slice())?;
    let b = potential_block(potential);
    let q = potential.periods();
    let z: Vec<Complex64> = x.as_slice().iter().map(|&v| phase(v)).collect();
    Ok(potential
        .cell_sites()
        .enumerate()
        .map(|(a, n)| {
            let brow = b.row(a).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let d: f64 = n
                .iter()
                .zip(q)
                .zip(&z)
                .map(|((&nj, &p), &zj)| {
                    let w = cis(TAU * nj as f64 / p as f64) * zj;
                    w.norm() + w.inv().norm()
                })
                .sum();
            brow + d + lambda.norm()
        })
        .product())
}

/// `P̃` together with `∂P̃/∂x_axis`, via `∂ det M = det M · tr(M⁻¹ ∂M)`
/// (or the adjugate form when `M` is singular).
pub fn char_det_with_derivative(
    potential: &PeriodicPotential,
    x: &QuasiMomentum,
    lambda: Complex64,
    axis: usize,
) -> Result<(Complex64, Complex64)> {
    let fiber = fiber_matrix(potential, x, Some(lambda))?;
    let q = potential.periods();
    let z = phase(x.0[axis]);
    let cell = potential.cell_box();
    // ∂D/∂x_axis = −2πi (μz − 1/(μz))
    let dd: Vec<Complex64> = cell
        .sites()
        .map(|n| {
            let w = cis(TAU * n[axis] as f64 / q[axis] as f64) * z;
            -(I * TAU) * (w - w.inv())
        })
        .collect();
    let adj = fiber.matrix.adjugate();
    let det = fiber.matrix.det();
    let deriv: Complex64 = dd.iter().enumerate().map(|(i, d)| adj[(i, i)] * d).sum();
    Ok((det, deriv))
}

/// Coefficients `c_{−Q..Q}` of `P̃` as a Laurent polynomial in
/// `w = e^{2πi x_axis}` with the other coordinates of `x` fixed, recovered by
/// exact trigonometric interpolation from `2Q+1` samples on `|w| = 1`.
pub fn laurent_coefficients(
    potential: &PeriodicPotential,
    x: &QuasiMomentum,
    lambda: Complex64,
    axis: usize,
) -> Result<Vec<Complex64>> {
    let qn = potential.cell_size();
    let m = 2 * qn + 1;
    let mut samples = Vec::with_capacity(m);
    let mut xs = x.clone();
    for k in 0..m {
        xs.0[axis] = Complex64::new(k as f64 / m as f64, 0.0);
        samples.push(char_det(potential, &xs, lambda)?);
    }
    Ok((0..m)
        .map(|idx| {
            let p = idx as i64 - qn as i64;
            samples
                .iter()
                .enumerate()
                .map(|(k, s)| s * cis(-TAU * (p * k as i64) as f64 / m as f64))
                .sum::<Complex64>()
                / m as f64
        })
        .collect())
}

/// `û(x, j) = Σ_m e^{−2πi⟨m⊙q, x⟩} u(j + m⊙q)` for the finitely supported `u`.
pub fn floquet_transform(
    u: &LatticeFunction,
    periods: &[usize],
    x: &QuasiMomentum,
) -> Result<Vec<Complex64>> {
    if periods.len() != u.dim() || x.dim() != u.dim() {
        return Err(Error::Domain(
            "period, momentum and lattice dimensions differ".into(),
        ));
    }
    let qn: usize = periods.iter().product();
    let mut out = vec![ZERO; qn];
    for (site, value) in u.iter() {
        if value == ZERO {
            continue;
        }
        let (j, cell) = reduce(periods, &site);
        let arg: Complex64 = cell
            .iter()
            .zip(periods)
            .zip(x.as_slice())
            .map(|((&c, &p), &xj)| xj * (c * p as i64) as f64)
            .sum();
        out[j] += phase(-arg) * value;
    }
    Ok(out)
}

fn reduce(periods: &[usize], site: &[i64]) -> (usize, Vec<i64>) {
    let mut idx = 0usize;
    let mut cell = Vec::with_capacity(site.len());
    for (&s, &q) in site.iter().zip(periods) {
        let qi = q as i64;
        let j = s.rem_euclid(qi);
        cell.push((s - j) / qi);
        idx = idx * q + j as usize;
    }
    (idx, cell)
}

/// Uniform grid `x = (k_j / (q_j N_j))_j`, `0 ≤ k_j < N_j`, on the dual cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGrid {
    periods: Vec<usize>,
    nodes: Vec<usize>,
}

impl DualGrid {
    pub fn new(periods: &[usize], nodes: Vec<usize>) -> Result<Self> {
        if nodes.len() != periods.len() || nodes.contains(&0) {
            return Err(Error::Domain(
                "grid needs a positive node count per axis".into(),
            ));
        }
        Ok(DualGrid {
            periods: periods.to_vec(),
            nodes,
        })
    }

    pub fn uniform(periods: &[usize], per_axis: usize) -> Result<Self> {
        Self::new(periods, vec![per_axis; periods.len()])
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, mut i: usize) -> Vec<usize> {
        let mut k = vec![0; self.nodes.len()];
        for axis in (0..self.nodes.len()).rev() {
            k[axis] = i % self.nodes[axis];
            i /= self.nodes[axis];
        }
        k
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.index(i)
            .iter()
            .zip(&self.nodes)
            .zip(&self.periods)
            .map(|((&k, &n), &q)| k as f64 / (q * n) as f64)
            .collect()
    }

    pub fn momentum(&self, i: usize) -> QuasiMomentum {
        QuasiMomentum::real(&self.point(i))
    }
}

/// Samples of `û(x, j)` on a [`DualGrid`]; `values[node·Q + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetField {
    grid: DualGrid,
    cell_size: usize,
    values: Vec<Complex64>,
}

impl FloquetField {
    pub fn new(grid: DualGrid, values: Vec<Complex64>) -> Result<Self> {
        let cell_size: usize = grid.periods.iter().product();
        if values.len() != grid.len() * cell_size {
            return Err(Error::Domain(
                "field values do not match grid × cell".into(),
            ));
        }
        Ok(FloquetField {
            grid,
            cell_size,
            values,
        })
    }

    /// `F_q u` sampled on `grid`.
    pub fn sample(u: &LatticeFunction, grid: DualGrid) -> Result<Self> {
        let mut values = Vec::new();
        for i in 0..grid.len() {
            values.extend(floquet_transform(u, &grid.periods, &grid.momentum(i))?);
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &DualGrid {
        &self.grid
    }

    pub fn at_node(&self, i: usize) -> &[Complex64] {
        &self.values[i * self.cell_size..(i + 1) * self.cell_size]
    }

    /// `⟨f, g⟩` in `L²(𝕋^d_*, ℂ^W; dx/|𝕋^d_*|)` by the trapezoid rule.
    pub fn inner(&self, other: &FloquetField) -> Complex64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        s / self.grid.len() as f64
    }
}

/// `u(j + m⊙q) = |𝕋^d_*|⁻¹ ∫ e^{2πi⟨m⊙q, x⟩} û(x, j) dx`, trapezoid rule.
///
/// Exact when the grid resolves the lattice-vector spread of the support;
/// see [`inverse_floquet_box`] for the checked version.
pub fn inverse_floquet(field: &FloquetField, site: &[i64]) -> Complex64 {
    let periods = &field.grid.periods;
    let (j, cell) = reduce(periods, site);
    let mut acc = ZERO;
    for i in 0..field.grid.len() {
        let x = field.grid.point(i);
        let arg: f64 = cell
            .iter()
            .zip(periods)
            .zip(&x)
            .map(|((&c, &p), &xj)| xj * (c * p as i64) as f64)
            .sum();
        acc += cis(TAU * arg) * field.at_node(i)[j];
    }
    acc / field.grid.len() as f64
}

/// Inverse transform on every site of `domain`, refusing grids too coarse
/// to separate the lattice translates that meet `domain`.
pub fn inverse_floquet_box(field: &FloquetField, domain: &SiteBox) -> Result<LatticeFunction> {
    let periods = &field.grid.periods;
    for (axis, &q) in periods.iter().enumerate() {
        let q = q as i64;
        let span = (domain.hi()[axis].div_euclid(q) - domain.lo()[axis].div_euclid(q) + 1) as usize;
        let have = field.grid.nodes[axis];
        if have < span {
            return Err(Error::Aliasing {
                required: span,
                available: have,
            });
        }
    }
    Ok(LatticeFunction::from_fn(domain.clone(), |s| {
        inverse_floquet(field, s)
    }))
}

/// Permutation of `W` induced by `x ↦ x + e_axis/q_axis`: the fiber at the
/// shifted point equals `P·M·Pᵀ` with `(P·M·Pᵀ)[a][b] = M[σ(a)][σ(b)]`.
pub fn dual_shift_permutation(periods: &[usize], axis: usize) -> Vec<usize> {
    let cell = cell_box(periods);
    cell.sites()
        .map(|mut n| {
            n[axis] = (n[axis] + 1).rem_euclid(periods[axis] as i64);
            cell.index_of(&n).expect("shifted site stays in the cell")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn free_single_site_fiber() {
        let v = PeriodicPotential::free(1);
        for &x in &[0.0, 0.13, 0.37] {
            let m = fiber_matrix(&v, &QuasiMomentum::real(&[x]), Some(c(0.5))).unwrap();
            let expect = -2.0 * (TAU * x).cos() - 0.5;
            assert!((m.matrix[(0, 0)] - c(expect)).norm() < 1e-14);
            let r = restriction_matrix(&v, &QuasiMomentum::real(&[x])).unwrap();
            assert!((r[(0, 0)] - c(expect + 0.5)).norm() < 1e-14);
        }
    }

    #[test]
    fn dimer_fiber_blocks() {
        let cval = 2.0;
        let v = PeriodicPotential::new(vec![2], vec![0.0, cval]).unwrap();
        let x = 0.21;
        let m = fiber_matrix(&v, &QuasiMomentum::real(&[x]), None)
            .unwrap()
            .matrix;
        let t = 2.0 * (TAU * x).cos();
        let want = [
            [-t + cval / 2.0, -cval / 2.0],
            [-cval / 2.0, t + cval / 2.0],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[(i, j)] - c(want[i][j])).norm() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn dimer_restriction_spectrum_at_zero() {
        // eigenvalues c/2 ± √(t² + c²/4) at t = 2
        let cval = 1.3;
        let v = PeriodicPotential::new(vec![2], vec![0.0, cval]).unwrap();
        let r = restriction_matrix(&v, &QuasiMomentum::real(&[0.0])).unwrap();
        let ev = hermitian_eigenvalues(&r).unwrap();
        let disc = (4.0 + cval * cval / 4.0).sqrt();
        assert!((ev[0] - (cval / 2.0 - disc)).abs() < 1e-13);
        assert!((ev[1] - (cval / 2.0 + disc)).abs() < 1e-13);
    }

    #[test]
    fn delta_in_cell_transforms_to_indicator() {
        let periods = [2, 3];
        let dom = SiteBox::centered(2, 4);
        let u = LatticeFunction::delta(dom, &[1, 2]);
        let x = QuasiMomentum::real(&[0.17, -0.3]);
        let uh = floquet_transform(&u, &periods, &x).unwrap();
        for (j, val) in uh.iter().enumerate() {
            let want = if j == 5 { c(1.0) } else { c(0.0) };
            assert!((val - want).norm() < 1e-15);
        }
    }

    #[test]
    fn delta_at_period_picks_up_phase() {
        let periods = [3];
        let u = LatticeFunction::delta(SiteBox::centered(1, 5), &[3]);
        let x = 0.11;
        let uh = floquet_transform(&u, &periods, &QuasiMomentum::real(&[x])).unwrap();
        assert!((uh[0] - cis(-TAU * 3.0 * x)).norm() < 1e-15);
        assert!(uh[1].norm() == 0.0 && uh[2].norm() == 0.0);
    }

    #[test]
    fn constant_field_inverts_to_delta() {
        let periods = [2];
        let grid = DualGrid::uniform(&periods, 8).unwrap();
        let mut vals = Vec::new();
        for _ in 0..grid.len() {
            vals.extend([c(0.0), c(1.0)]);
        }
        let field = FloquetField::new(grid, vals).unwrap();
        let u = inverse_floquet_box(&field, &SiteBox::centered(1, 6)).unwrap();
        for (s, val) in u.iter() {
            let want = if s == [1] { 1.0 } else { 0.0 };
            assert!((val - c(want)).norm() < 1e-14, "{s:?}");
        }
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let grid = DualGrid::uniform(&[1], 4).unwrap();
        let field = FloquetField::new(grid, vec![c(1.0); 4]).unwrap();
        let err = inverse_floquet_box(&field, &SiteBox::centered(1, 5)).unwrap_err();
        assert_eq!(
            err,
            Error::Aliasing {
                required: 11,
                available: 4
            }
        );
    }

    #[test]
    fn laurent_coefficients_of_free_chain() {
        // P̃ = −w − 1/w − λ
        let v = PeriodicPotential::free(1);
        let lam = c(3.0);
        let co = laurent_coefficients(&v, &QuasiMomentum::real(&[0.0]), lam, 0).unwrap();
        assert_eq!(co.len(), 3);
        assert!((co[0] - c(-1.0)).norm() < 1e-14);
        assert!((co[1] - c(-3.0)).norm() < 1e-14);
        assert!((co[2] - c(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let v = PeriodicPotential::new(vec![2, 1], vec![0.3, -1.1]).unwrap();
        let x = QuasiMomentum(vec![Complex64::new(0.1, 0.05), Complex64::new(0.3, -0.02)]);
        let lam = Complex64::new(0.4, 0.1);
        for axis in 0..2 {
            let (_, d) = char_det_with_derivative(&v, &x, lam, axis).unwrap();
            let h = 1e-6;
            let mut xp = x.clone();
            xp.0[axis] += h;
            let mut xm = x.clone();
            xm.0[axis] -= h;
            let fd =
                (char_det(&v, &xp, lam).unwrap() - char_det(&v, &xm, lam).unwrap()) / (2.0 * h);
            assert!(
                (fd - d).norm() < 1e-6 * (1.0 + d.norm()),
                "axis {axis}: {fd} vs {d}"
            );
        }
    }
}
