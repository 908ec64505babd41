use alloc::vec::Vec;

use num_complex::Complex64;

use super::{CMatrix, ONE, ZERO};

/// LU factorization with partial pivoting, `P·A = L·U`.
///
/// A zero pivot does not abort the factorization; `det` is then exactly zero
/// and `solve` produces non-finite values, so callers check `is_singular`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    parity: f64,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Self {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                parity = -parity;
            }
            let pivot = lu[(k, k)];
            if pivot == ZERO {
                continue;
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Lu { lu, perm, parity }
    }

    pub fn det(&self) -> Complex64 {
        let n = self.lu.dim();
        let mut d = Complex64::new(self.parity, 0.0);
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Smallest over largest pivot modulus; 0 for exactly singular input.
    pub fn pivot_ratio(&self) -> f64 {
        let n = self.lu.dim();
        if n == 0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let v = self.lu[(i, i)].norm();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }

    pub fn is_singular(&self) -> bool {
        (0..self.lu.dim()).any(|i| self.lu[(i, i)] == ZERO)
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.dim();
        assert_eq!(b.len(), n, "dimension mismatch");
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.lu.dim();
        let mut inv = CMatrix::zeros(n);
        let mut e = alloc::vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = ZERO);
            e[j] = ONE;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tests::random_matrix;

    #[test]
    fn solve_recovers_rhs() {
        let a = random_matrix(7, 3);
        let x: Vec<Complex64> = (0..7).map(|i| Complex64::new(i as f64, -1.0)).collect();
        let b = a.mul_vec(&x);
        let got = Lu::new(&a).solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-11);
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = random_matrix(5, 9);
        let inv = Lu::new(&a).inverse();
        let err = a.matmul(&inv).sub(&CMatrix::identity(5)).max_abs();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn singular_matrix_is_flagged() {
        let a = CMatrix::zeros(3);
        let lu = Lu::new(&a);
        assert!(lu.is_singular());
        assert_eq!(lu.det(), ZERO);
        assert_eq!(lu.pivot_ratio(), 0.0);
    }
}
