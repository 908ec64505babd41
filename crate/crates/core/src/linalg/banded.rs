use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::ZERO;
use crate::{Error, Result};

/// Square banded complex matrix with `bandwidth` sub- and super-diagonals.
///
/// Rows are stored densely over their band; the solver widens rows as
/// partial pivoting introduces fill-in (at most `2·bandwidth` above the
/// diagonal).
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    bandwidth: usize,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
struct Row {
    lo: usize,
    vals: Vec<Complex64>,
}

impl Row {
    #[inline]
    fn hi(&self) -> usize {
        self.lo + self.vals.len()
    }

    #[inline]
    fn get(&self, c: usize) -> Complex64 {
        if c >= self.lo && c < self.hi() {
            self.vals[c - self.lo]
        } else {
            ZERO
        }
    }

    fn extend_to(&mut self, hi: usize) {
        if hi > self.hi() {
            let extra = hi - self.hi();
            self.vals.extend(core::iter::repeat_n(ZERO, extra));
        }
    }
}

impl BandedMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(bandwidth);
                let hi = (i + bandwidth + 1).min(n);
                Row {
                    lo,
                    vals: vec![ZERO; hi - lo],
                }
            })
            .collect();
        BandedMatrix { n, bandwidth, rows }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rows[i].get(j)
    }

    /// Adds `value` at `(i, j)`; panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, value: Complex64) {
        let row = &mut self.rows[i];
        assert!(
            j >= row.lo && j < row.hi(),
            "entry ({i},{j}) outside the band"
        );
        row.vals[j - row.lo] += value;
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|r| {
                r.vals
                    .iter()
                    .zip(&x[r.lo..r.hi()])
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    ///
    /// Fails with `NearEigenvalue` when a pivot is negligible relative to
    /// the matrix scale or the solution blows up beyond `1/ε` of the data.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Domain(alloc::format!(
                "right-hand side has {} entries, matrix has {n} rows",
                b.len()
            )));
        }
        let scale = self
            .rows
            .iter()
            .flat_map(|r| r.vals.iter())
            .fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return Err(Error::NearEigenvalue { pivot: 0.0 });
        }
        let mut rows = self.rows.clone();
        let mut rhs = b.to_vec();
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let last = (k + self.bandwidth).min(n - 1);
            let mut p = k;
            let mut best = rows[k].get(k).norm();
            for i in k + 1..=last {
                let v = rows[i].get(k).norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            min_pivot = min_pivot.min(best);
            if best <= f64::EPSILON * scale * 1e-4 {
                return Err(Error::NearEigenvalue {
                    pivot: best / scale,
                });
            }
            if p != k {
                rows.swap(k, p);
                rhs.swap(k, p);
            }
            let pivot_row = rows[k].clone();
            let pivot = pivot_row.get(k);
            for i in k + 1..=last {
                let a = rows[i].get(k);
                if a == ZERO {
                    continue;
                }
                let f = a / pivot;
                let row = &mut rows[i];
                row.extend_to(pivot_row.hi());
                for c in k..pivot_row.hi() {
                    let pv = pivot_row.vals[c - pivot_row.lo];
                    if c >= row.lo {
                        row.vals[c - row.lo] -= f * pv;
                    }
                }
                rhs[i] = rhs[i] - f * rhs[k];
            }
        }
        let mut x = vec![ZERO; n];
        for i in (0..n).rev() {
            let row = &rows[i];
            let mut s = rhs[i];
            for c in i + 1..row.hi() {
                s -= row.get(c) * x[c];
            }
            x[i] = s / row.get(i);
        }
        let bmax = b.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if !xmax.is_finite() || xmax * scale > bmax / f64::EPSILON * 1e-2 {
            return Err(Error::NearEigenvalue {
                pivot: min_pivot / scale,
            });
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMatrix, Lu};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_solve() {
        let n = 40;
        let bw = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut band = BandedMatrix::zeros(n, bw);
        let mut dense = CMatrix::zeros(n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                band.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0, i as f64 * 0.1))
            .collect();
        let xb = band.solve(&b).unwrap();
        let xd = Lu::new(&dense).solve(&b);
        for (u, v) in xb.iter().zip(&xd) {
            assert!((u - v).norm() < 1e-9 * (1.0 + v.norm()));
        }
        let r = band.mul_vec(&xb);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-9);
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0,1],[1,0]] needs a row swap
        let mut m = BandedMatrix::zeros(2, 1);
        m.add(0, 1, Complex64::new(1.0, 0.0));
        m.add(1, 0, Complex64::new(1.0, 0.0));
        let x = m
            .solve(&[Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)])
            .unwrap();
        assert!((x[0] - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_system_is_rejected() {
        let mut m = BandedMatrix::zeros(3, 1);
        for i in 0..3 {
            m.add(i, i, Complex64::new(1.0, 0.0));
        }
        m.add(1, 1, Complex64::new(-1.0, 0.0));
        let err = m.solve(&[Complex64::new(1.0, 0.0); 3]).unwrap_err();
        assert!(matches!(err, Error::NearEigenvalue { .. }));
    }
}
