//! Small dense complex linear algebra.
//!
//! Fibers are at most a few dozen rows, so everything here is plain
//! row-major storage with textbook algorithms: LU with partial pivoting,
//! cyclic Jacobi for Hermitian matrices, Hessenberg + shifted QR for general
//! spectra, Householder/QL for real symmetric matrices and a banded solver
//! for finite-volume operators.

mod banded;
mod eig;
mod hermitian;
mod lu;
mod symmetric;

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

pub use banded::BandedMatrix;
pub use eig::eigenvalues;
pub use hermitian::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen};
pub use lu::Lu;
pub use symmetric::{symmetric_eigen, tridiagonal_eigenvalues, tridiagonal_eigenvector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMatrix { n, data }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self - s·I`.
    pub fn shift(&self, s: Complex64) -> CMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out[(i, i)] -= s;
        }
        out
    }

    /// Submatrix with row `r` and column `c` removed.
    pub fn minor(&self, r: usize, c: usize) -> CMatrix {
        let n = self.n;
        let mut data = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != r) {
            for j in (0..n).filter(|&j| j != c) {
                data.push(self[(i, j)]);
            }
        }
        CMatrix { n: n - 1, data }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// `‖A − A^†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Product of Euclidean row norms; bounds `|det|` (Hadamard).
    pub fn hadamard_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt())
            .product()
    }

    pub fn det(&self) -> Complex64 {
        Lu::new(self).det()
    }

    /// Classical adjugate (transpose of the cofactor matrix), so that
    /// `A·adj(A) = det(A)·I` even when `A` is singular.
    ///
    /// Cofactors are used for `n ≤ 8` and whenever the LU pivots indicate
    /// near-singularity; otherwise `det(A)·A⁻¹`.
    pub fn adjugate(&self) -> CMatrix {
        let n = self.n;
        if n == 0 {
            return CMatrix::zeros(0);
        }
        if n == 1 {
            return CMatrix::identity(1);
        }
        let lu = Lu::new(self);
        if n <= 8 || lu.pivot_ratio() < 1e-8 {
            return self.cofactor_adjugate();
        }
        let det = lu.det();
        lu.inverse().scale(det)
    }

    fn cofactor_adjugate(&self) -> CMatrix {
        let n = self.n;
        let mut adj = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                // adj(A)[j][i] = C[i][j]
                adj[(j, i)] = self.minor(i, j).det() * sign;
            }
        }
        adj
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a, b⟩` conjugate-linear in the first slot.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn adjugate_satisfies_cramer_identity() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3), (6, 4), (9, 5), (12, 6)] {
            let a = random_matrix(n, seed);
            let lhs = a.matmul(&a.adjugate());
            let det = a.det();
            let rhs = CMatrix::identity(n).scale(det);
            let err = lhs.sub(&rhs).max_abs() / det.norm().max(1e-300);
            assert!(err < 1e-10, "n={n}: relative Cramer error {err}");
        }
    }

    #[test]
    fn adjugate_of_singular_matrix_is_rank_one() {
        // rank n-1: adj has rank 1 and A·adj(A) = 0
        let mut a = random_matrix(4, 11);
        for j in 0..4 {
            let v = a[(0, j)] + a[(1, j)] * 2.0;
            a[(3, j)] = v;
        }
        let adj = a.adjugate();
        assert!(adj.max_abs() > 1e-6);
        assert!(a.matmul(&adj).max_abs() < 1e-12);
    }

    #[test]
    fn det_of_triangular_is_product_of_diagonal() {
        let mut a = CMatrix::identity(3);
        a[(0, 0)] = Complex64::new(2.0, 1.0);
        a[(1, 1)] = Complex64::new(0.0, 3.0);
        a[(2, 2)] = Complex64::new(-1.0, 0.0);
        a[(0, 2)] = Complex64::new(5.0, 5.0);
        let expect = Complex64::new(2.0, 1.0) * Complex64::new(0.0, 3.0) * -1.0;
        assert!((a.det() - expect).norm() < 1e-14);
    }
}
