//! Decay of Fourier coefficients versus analyticity in a strip.
//!
//! Forward: `|f_n| ≤ C₁e^{−C₂‖n‖_max}` makes `f̂(z) = Σ f_n e^{2πi n·z}`
//! converge on `2π Σ_j |Im z_j| < C₂`, with an explicit shell-count tail.
//! Backward: moving the contour of one coordinate to `Im z = ∓R` bounds
//! `|f_n|` by `sup|f̂| · e^{−2π‖n‖_max R}`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::lattice::{Norm, SiteBox};
use crate::{cis, Error, Result, TAU};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest truncation radius tried before giving up.
const MAX_SITES: usize = 1 << 22;

/// Coefficients `f_n` on `ℤ^d` with a decay certificate `(C₁, C₂)`.
type CoeffFn<'a> = Box<dyn Fn(&[i64]) -> Complex64 + 'a>;

pub struct CoefficientSeq<'a> {
    dim: usize,
    c1: f64,
    c2: f64,
    /// `‖n‖_max` bound on the support, when finite.
    support: Option<u64>,
    f: CoeffFn<'a>,
}

impl core::fmt::Debug for CoefficientSeq<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CoefficientSeq")
            .field("dim", &self.dim)
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .finish_non_exhaustive()
    }
}

impl<'a> CoefficientSeq<'a> {
    pub fn from_fn(
        dim: usize,
        c1: f64,
        c2: f64,
        f: impl Fn(&[i64]) -> Complex64 + 'a,
    ) -> Result<Self> {
        if dim == 0 || !(c1 > 0.0 && c2 > 0.0) {
            return Err(Error::Domain(
                "certificate needs d ≥ 1, C₁ > 0 and C₂ > 0".into(),
            ));
        }
        Ok(CoefficientSeq {
            dim,
            c1,
            c2,
            support: None,
            f: Box::new(f),
        })
    }

    /// Finite table; every entry is checked against the certificate.
    pub fn from_table(
        dim: usize,
        c1: f64,
        c2: f64,
        entries: Vec<(Vec<i64>, Complex64)>,
    ) -> Result<Self> {
        for (n, v) in &entries {
            if n.len() != dim {
                return Err(Error::Domain(
                    "coefficient index has the wrong dimension".into(),
                ));
            }
            let cap = c1 * (-c2 * Norm::Max.of(n) as f64).exp();
            if v.norm() > cap * (1.0 + 1e-12) {
                return Err(Error::Domain(alloc::format!(
                    "|f_{n:?}| exceeds the decay certificate"
                )));
            }
        }
        let radius = entries
            .iter()
            .map(|(n, _)| Norm::Max.of(n))
            .max()
            .unwrap_or(0);
        let mut seq = Self::from_fn(dim, c1, c2, move |n| {
            entries
                .iter()
                .find(|(s, _)| s.as_slice() == n)
                .map_or(ZERO, |e| e.1)
        })?;
        seq.support = Some(radius);
        Ok(seq)
    }

    /// `‖n‖_max` radius of the support for tabulated sequences.
    pub fn support_radius(&self) -> Option<u64> {
        self.support
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn coeff(&self, n: &[i64]) -> Complex64 {
        (self.f)(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StripEval {
    pub value: Complex64,
    /// Certified bound on the omitted shells.
    pub tail_bound: f64,
    /// Truncation radius actually used.
    pub trunc: u64,
}

/// `Σ_{l > trunc} C₁·2d(2l+1)^{d−1}·e^{−δl}`, `δ = C₂ − 2πΣ|Im z_j|`.
fn tail(c1: f64, dim: usize, delta: f64, trunc: u64) -> f64 {
    let d = dim as f64;
    let mut sum = 0.0;
    let mut l = trunc + 1;
    loop {
        let lf = l as f64;
        let term = c1 * 2.0 * d * (2.0 * lf + 1.0).powi(dim as i32 - 1) * (-delta * lf).exp();
        sum += term;
        // past the maximum of l^{d−1}e^{−δl} the terms decay at least geometrically
        let ratio = ((2.0 * lf + 3.0) / (2.0 * lf + 1.0)).powi(dim as i32 - 1) * (-delta).exp();
        if ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-3 * sum.max(1e-300) {
            sum += term * ratio / (1.0 - ratio);
            break;
        }
        if !sum.is_finite() || l > trunc + 10_000_000 {
            return f64::INFINITY;
        }
        l += 1;
    }
    sum
}

/// `f̂(z)` by a truncated sum, raising `trunc` until the tail is below `1e−10`.
pub fn coeffs_to_strip_eval(
    seq: &CoefficientSeq<'_>,
    z: &[Complex64],
    trunc: u64,
) -> Result<StripEval> {
    if z.len() != seq.dim {
        return Err(Error::Domain(
            "evaluation point has the wrong dimension".into(),
        ));
    }
    let s = TAU * z.iter().map(|v| v.im.abs()).sum::<f64>();
    if s >= seq.c2 {
        return Err(Error::OutOfStrip {
            imag: s / TAU,
            limit: seq.c2 / TAU,
        });
    }
    let delta = seq.c2 - s;
    let mut t = trunc.max(1);
    let mut tb = tail(seq.c1, seq.dim, delta, t);
    if let Some(r) = seq.support {
        // nothing beyond the support
        t = t.min(r.max(1));
        tb = 0.0;
    }
    while tb >= 1e-10 {
        t *= 2;
        if (2 * t + 1).pow(seq.dim as u32) as usize > MAX_SITES {
            return Err(Error::Accuracy {
                what: "strip evaluation tail",
                estimate: tb,
            });
        }
        tb = tail(seq.c1, seq.dim, delta, t);
    }
    let domain = SiteBox::centered(seq.dim, t as usize);
    let mut value = ZERO;
    for n in domain.sites() {
        let arg: Complex64 = n.iter().zip(z).map(|(&nj, &zj)| zj * nj as f64).sum();
        value += seq.coeff(&n) * (Complex64::new(0.0, TAU) * arg).exp();
    }
    Ok(StripEval {
        value,
        tail_bound: tb,
        trunc: t,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffBound {
    pub coeff: Complex64,
    /// `sup|f̂|` on the shifted contour.
    pub sup: f64,
    /// `sup·e^{−2π‖n‖_max R}`.
    pub bound: f64,
    /// Measured `|f_n| / bound`.
    pub c3: f64,
    pub ok: bool,
    /// Quadrature nodes per axis.
    pub nodes: usize,
}

/// Coefficient `f_n` of a strip-analytic `f̂` by trapezoid quadrature along
/// `Im z_j = −sign(n_j)(C₂ − eps)` in the dominant coordinate of `n`.
///
/// `eps = None` uses `0.05·C₂`.
pub fn strip_to_coeff_bound(
    evaluator: &dyn Fn(&[Complex64]) -> Complex64,
    dim: usize,
    c2: f64,
    eps: Option<f64>,
    n: &[i64],
) -> Result<CoeffBound> {
    if n.len() != dim {
        return Err(Error::Domain(
            "coefficient index has the wrong dimension".into(),
        ));
    }
    let eps = eps.unwrap_or(0.05 * c2);
    let r = c2 - eps;
    if !(r > 0.0) {
        return Err(Error::Domain("need 0 ≤ eps < C₂".into()));
    }
    let norm = Norm::Max.of(n);
    // dominant coordinate, ties to the lowest index
    let axis = (0..dim).find(|&j| n[j].unsigned_abs() == norm).unwrap_or(0);
    let shift = if n[axis] == 0 {
        0.0
    } else {
        -(n[axis].signum() as f64) * r
    };

    let mut nodes = (4 * norm as usize + 16).next_power_of_two();
    let cap = match dim {
        1 => 1 << 16,
        2 => 1 << 9,
        _ => 1 << 6,
    };
    let mut prev: Option<(Complex64, f64)> = None;
    loop {
        let (coeff, sup) = contour_sum(evaluator, dim, n, axis, shift, nodes);
        if let Some((c_prev, _)) = prev {
            let diff = (coeff - c_prev).norm();
            if diff <= 1e-13 * sup.max(1e-300) || diff < 1e-15 {
                let bound = sup * (-TAU * norm as f64 * r).exp();
                let c3 = if bound > 0.0 {
                    coeff.norm() / bound
                } else {
                    0.0
                };
                return Ok(CoeffBound {
                    coeff,
                    sup,
                    bound,
                    c3,
                    ok: c3 <= 1.0 + 1e-9,
                    nodes,
                });
            }
            if nodes >= cap {
                return Err(Error::Accuracy {
                    what: "shifted-contour quadrature",
                    estimate: diff,
                });
            }
        }
        prev = Some((coeff, sup));
        nodes *= 2;
    }
}

fn contour_sum(
    evaluator: &dyn Fn(&[Complex64]) -> Complex64,
    dim: usize,
    n: &[i64],
    axis: usize,
    shift: f64,
    nodes: usize,
) -> (Complex64, f64) {
    let total = nodes.pow(dim as u32);
    let mut k = vec![0usize; dim];
    let mut z = vec![ZERO; dim];
    let mut acc = ZERO;
    let mut sup = 0.0f64;
    let damp = (TAU * n[axis] as f64 * shift).exp();
    for idx in 0..total {
        let mut r = idx;
        for j in (0..dim).rev() {
            k[j] = r % nodes;
            r /= nodes;
        }
        let mut phase = 0.0;
        for j in 0..dim {
            let x = k[j] as f64 / nodes as f64;
            z[j] = Complex64::new(x, if j == axis { shift } else { 0.0 });
            phase += n[j] as f64 * x;
        }
        let f = evaluator(&z);
        sup = sup.max(f.norm());
        acc += f * cis(-TAU * phase);
    }
    (acc * damp / total as f64, sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(n: &[i64]) -> Complex64 {
        Complex64::new(0.5f64.powi(Norm::Max.of(n) as i32), 0.0)
    }

    #[test]
    fn geometric_sum_closed_form() {
        let seq = CoefficientSeq::from_fn(1, 1.0, 2f64.ln(), geometric).unwrap();
        let y = 0.05 * 2f64.ln() / TAU;
        let z = Complex64::new(0.21, y);
        let ev = coeffs_to_strip_eval(&seq, &[z], 10).unwrap();
        let w = (Complex64::new(0.0, TAU) * z).exp() * 0.5;
        let wb = (Complex64::new(0.0, -TAU) * z).exp() * 0.5;
        let want = 1.0 / (1.0 - w) + 1.0 / (1.0 - wb) - 1.0;
        assert!((ev.value - want).norm() < 1e-10);
        assert!(ev.tail_bound < 1e-10);
    }

    #[test]
    fn strip_boundary() {
        let seq = CoefficientSeq::from_fn(1, 1.0, 2f64.ln(), geometric).unwrap();
        let edge = 2f64.ln() / TAU;
        assert!(coeffs_to_strip_eval(&seq, &[Complex64::new(0.0, 0.99 * edge)], 10).is_ok());
        let err = coeffs_to_strip_eval(&seq, &[Complex64::new(0.0, 1.01 * edge)], 10).unwrap_err();
        assert!(matches!(err, Error::OutOfStrip { .. }));
    }

    #[test]
    fn delta_sequence_is_constant() {
        let seq = CoefficientSeq::from_table(
            2,
            1.0,
            1.0,
            alloc::vec![(alloc::vec![0, 0], Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let ev = coeffs_to_strip_eval(
            &seq,
            &[Complex64::new(0.3, 0.01), Complex64::new(0.7, -0.02)],
            4,
        )
        .unwrap();
        assert!((ev.value - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn single_mode_recovered_on_shifted_contour() {
        let f = |z: &[Complex64]| (Complex64::new(0.0, TAU) * z[0]).exp();
        for n in -2..=2i64 {
            let cb = strip_to_coeff_bound(&f, 1, 0.3, None, &[n]).unwrap();
            let want = if n == 1 { 1.0 } else { 0.0 };
            assert!(
                (cb.coeff - Complex64::new(want, 0.0)).norm() < 1e-10,
                "n={n}"
            );
            assert!(cb.ok);
        }
    }

    #[test]
    fn geometric_function_coefficients() {
        // 1/(1 − ½e^{2πiz}) = Σ_{n≥0} 2^{−n} e^{2πinz}; poles at Im z = −ln2/2π
        let f = |z: &[Complex64]| 1.0 / (1.0 - 0.5 * (Complex64::new(0.0, TAU) * z[0]).exp());
        let c2 = 2f64.ln() / TAU;
        for n in [0i64, 1, 3, 6] {
            let cb = strip_to_coeff_bound(&f, 1, c2, None, &[n]).unwrap();
            assert!((cb.coeff.re - 0.5f64.powi(n as i32)).abs() < 1e-10);
            assert!(cb.ok, "n={n}: C₃ = {}", cb.c3);
        }
    }
}
