use num_complex::Complex64;
use proptest::prelude::*;

use sharpdecay_core::analyticity::{coeffs_to_strip_eval, strip_to_coeff_bound, CoefficientSeq};
use sharpdecay_core::dispersion::{rate_upper, rate_with_bands, RateOptions};
use sharpdecay_core::floquet::{
    char_det, fiber_matrix, laurent_coefficients, restriction_matrix, DualGrid, FloquetField,
    QuasiMomentum,
};
use sharpdecay_core::lattice::{
    adjacency, decay_rate_estimate, eigen_residual, inverse_potential_dft, potential_dft, Impurity,
    LatticeFunction, Norm, PeriodicPotential, SiteBox,
};
use sharpdecay_core::linalg::{eigenvalues, hermitian_eigenvalues};
use sharpdecay_core::oracle::truncated_matrix;
use sharpdecay_core::resolvent::{green, GreenOptions};
use sharpdecay_core::sharpness::construct_sharp_example;
use sharpdecay_core::spectrum::{band_structure, spectrum_distance};

const TAU: f64 = std::f64::consts::TAU;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn potential(dim: usize) -> impl Strategy<Value = PeriodicPotential> {
    prop::collection::vec(1usize..=3, dim).prop_flat_map(|periods| {
        let q: usize = periods.iter().product();
        prop::collection::vec(-2.0f64..2.0, q)
            .prop_map(move |values| PeriodicPotential::new(periods.clone(), values).unwrap())
    })
}

fn any_potential() -> impl Strategy<Value = PeriodicPotential> {
    prop_oneof![potential(1), potential(2)]
}

fn field(dim: usize, half: usize) -> impl Strategy<Value = LatticeFunction> {
    let dom = SiteBox::centered(dim, half);
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dom.volume()).prop_map(move |v| {
        LatticeFunction::new(dom.clone(), v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
    })
}

/// Sorted-multiset distance between two complex spectra.
fn spectrum_gap(mut a: Vec<Complex64>, mut b: Vec<Complex64>) -> f64 {
    let key = |z: &Complex64| (z.re, z.im);
    a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn adjacency_is_symmetric(u in field(2, 4), w in field(2, 4)) {
        // zero-pad so both functions are finitely supported inside the box
        let pad = |f: &LatticeFunction| {
            let inner = SiteBox::centered(2, 3);
            LatticeFunction::from_fn(f.domain().clone(), |n| if inner.contains(n) { f.get(n) } else { c(0.0, 0.0) })
        };
        let (u, w) = (pad(&u), pad(&w));
        let lhs = adjacency(&u).unwrap().inner(&w);
        let rhs = u.inner(&adjacency(&w).unwrap());
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn residual_is_linear(v in potential(1), u in field(1, 6), w in field(1, 6), a in -2.0f64..2.0, lam in -5.0f64..5.0) {
        let imp = Impurity::exponential(c(0.7, 0.1), 0.5).unwrap();
        let lam = c(lam, 0.2);
        let comb = LatticeFunction::from_fn(u.domain().clone(), |n| u.get(n) * a + w.get(n));
        let lhs = eigen_residual(&v, &imp, lam, &comb).unwrap();
        let ru = eigen_residual(&v, &imp, lam, &u).unwrap();
        let rw = eigen_residual(&v, &imp, lam, &w).unwrap();
        for (n, val) in lhs.iter() {
            prop_assert!((val - (ru.get(&n) * a + rw.get(&n))).norm() < 1e-12);
        }
    }

    #[test]
    fn potential_dft_round_trip(v in any_potential()) {
        let back = inverse_potential_dft(v.periods(), &potential_dft(&v));
        for (x, y) in back.iter().zip(v.values()) {
            prop_assert!((x - c(*y, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn decay_slope_ignores_amplitude(amp in 1e-6f64..1e6, beta in 0.1f64..2.0) {
        let u = LatticeFunction::from_fn(SiteBox::centered(2, 10), |n| c(amp * (-beta * Norm::Max.of(n) as f64).exp(), 0.0));
        let fit = decay_rate_estimate(&u, Norm::Max, 1..=9, 0.0).unwrap();
        prop_assert!((fit.slope + beta).abs() < 1e-6);
    }

    #[test]
    fn plancherel_and_round_trip(v in any_potential(), seed in any::<u64>()) {
        let d = v.dim();
        let half = 2;
        let dom = SiteBox::centered(d, half);
        let mut s = seed;
        let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5 };
        let u = LatticeFunction::from_fn(dom.clone(), |_| c(next(), next()));
        let w = LatticeFunction::from_fn(dom.clone(), |_| c(next(), next()));
        let grid = DualGrid::uniform(v.periods(), 2 * half + 2).unwrap();
        let fu = FloquetField::sample(&u, grid.clone()).unwrap();
        let fw = FloquetField::sample(&w, grid).unwrap();
        prop_assert!((fu.inner(&fu).re - u.norm_sqr()).abs() < 1e-10);
        prop_assert!((fu.inner(&fw) - u.inner(&w)).norm() < 1e-10);
        let back = sharpdecay_core::floquet::inverse_floquet_box(&fu, &dom).unwrap();
        for (n, val) in back.iter() {
            prop_assert!((val - u.get(&n)).norm() < 1e-10);
        }
    }

    #[test]
    fn fiber_is_periodic_and_hermitian(v in any_potential(), x0 in 0.0f64..1.0, x1 in 0.0f64..1.0) {
        let x: Vec<f64> = [x0, x1][..v.dim()].to_vec();
        let f = fiber_matrix(&v, &QuasiMomentum::real(&x), None).unwrap().matrix;
        prop_assert!(f.hermiticity_defect() < 1e-12);
        let shifted: Vec<f64> = x.iter().map(|t| t + 3.0).collect();
        let g = fiber_matrix(&v, &QuasiMomentum::real(&shifted), None).unwrap().matrix;
        prop_assert!(f.sub(&g).max_abs() < 1e-12);
        for z in eigenvalues(&f).unwrap() {
            prop_assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_and_fiber_spectra_agree(v in any_potential(), x0 in -1.0f64..1.0, x1 in -1.0f64..1.0, y in -0.2f64..0.2) {
        let x: Vec<Complex64> = [c(x0, y), c(x1, -y)][..v.dim()].to_vec();
        let x = QuasiMomentum(x);
        let a = eigenvalues(&restriction_matrix(&v, &x).unwrap()).unwrap();
        let b = eigenvalues(&fiber_matrix(&v, &x, None).unwrap().matrix).unwrap();
        prop_assert!(spectrum_gap(a, b) < 1e-10);
    }

    #[test]
    fn determinant_is_laurent_of_degree_q(v in any_potential(), lam in -4.0f64..4.0, x0 in 0.0f64..1.0, w in 0.0f64..1.0) {
        let q = v.cell_size();
        let x = QuasiMomentum(vec![c(x0, 0.0); v.dim()]);
        let lam = c(lam, 0.3);
        let coeffs = laurent_coefficients(&v, &x, lam, 0).unwrap();
        prop_assert_eq!(coeffs.len(), 2 * q + 1);
        // evaluate the interpolant at an unsampled point
        let mut xs = x.0.clone();
        xs[0] = c(w, 0.1);
        let wz = (c(0.0, TAU) * xs[0]).exp();
        let interp: Complex64 = coeffs.iter().enumerate().map(|(k, a)| a * wz.powi(k as i32 - q as i32)).sum();
        let direct = char_det(&v, &QuasiMomentum(xs), lam).unwrap();
        prop_assert!((interp - direct).norm() < 1e-9 * direct.norm().max(1.0));
    }

    #[test]
    fn shifting_potential_shifts_bands(v in potential(1), shift in -3.0f64..3.0) {
        let a = band_structure(&v, 32).unwrap().union();
        let b = band_structure(&v.shifted(shift), 32).unwrap().union();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.0 + shift - y.0).abs() < 1e-5 && (x.1 + shift - y.1).abs() < 1e-5);
        }
    }

    #[test]
    fn truncated_real_spectrum_is_bracketed(v in any_potential(), amp in -3.0f64..3.0) {
        let imp = Impurity::single_site(v.dim(), c(amp, 0.0));
        let op = truncated_matrix(&v, &imp, 4).unwrap();
        let bands = band_structure(&v, 32).unwrap().union();
        let (lo, hi) = (bands[0].0, bands.last().unwrap().1);
        for e in op.eigenvalues().unwrap() {
            prop_assert!(e >= lo - amp.abs() - 1e-9 && e <= hi + amp.abs() + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn rate_bracket_and_conjugate_root(v in potential(1), lam in 3.5f64..8.0) {
        let res = rate_upper(&v, c(lam, 0.0), &RateOptions::default()).unwrap();
        prop_assert!(res.r_lower <= res.r_upper + 1e-12);
        let conj = QuasiMomentum(res.minimizer.0.iter().map(|z| z.conj()).collect());
        let scale = sharpdecay_core::floquet::det_scale(&v, &conj, c(lam, 0.0)).unwrap();
        prop_assert!(char_det(&v, &conj, c(lam, 0.0)).unwrap().norm() / scale < 1e-10);
        // dual-lattice shift of the witness leaves r unchanged
        let shifted = QuasiMomentum(res.minimizer.0.iter().map(|z| z + 1.0).collect());
        prop_assert!((shifted.imag_norm() - res.minimizer.imag_norm()).abs() < 1e-15);
        prop_assert!(char_det(&v, &shifted, c(lam, 0.0)).unwrap().norm() / scale < 1e-9);
    }

    #[test]
    fn in_band_rate_is_zero(v in any_potential(), t in 0.05f64..0.95) {
        let bands = band_structure(&v, 32).unwrap();
        let (a, b) = bands.intervals()[0];
        let lam = a + t * (b - a);
        let res = rate_with_bands(&v, c(lam, 0.0), &RateOptions::default(), &bands).unwrap();
        prop_assert_eq!(res.r_upper, 0.0);
        prop_assert!(res.minimizer.is_real());
    }

    #[test]
    fn herglotz_and_conjugation(v in any_potential(), re in -6.0f64..6.0, im in 0.5f64..3.0) {
        let opts = GreenOptions { tol: 1e-10, ..GreenOptions::default() };
        let z = c(re, im);
        let g = green(&v, z, &vec![0; v.dim()], &vec![0; v.dim()], &opts).unwrap();
        let gc = green(&v, z.conj(), &vec![0; v.dim()], &vec![0; v.dim()], &opts).unwrap();
        let (a, b) = (g.entries[0].2, gc.entries[0].2);
        prop_assert!(a.im > 0.0);
        prop_assert!((a.conj() - b).norm() < 1e-10);
    }

    #[test]
    fn sharp_examples_solve_their_equation(v in any_potential(), lam in 5.5f64..9.0, sign in prop::bool::ANY) {
        let lam = if sign { lam } else { -lam - v.dim() as f64 };
        let bands = band_structure(&v, 32).unwrap();
        prop_assume!(spectrum_distance(c(lam, 0.0), &bands) > 0.5);
        let half = if v.dim() == 1 { 20 } else { 6 };
        let ex = construct_sharp_example(&v, c(lam, 0.0), &SiteBox::centered(v.dim(), half), &bands, &GreenOptions::default()).unwrap();
        prop_assert!(ex.residual_max < 1e-8);
        prop_assert!(ex.coupling().im.abs() < 1e-10);
    }
}

#[test]
fn strip_round_trip_recovers_coefficients() {
    let c2 = 0.9;
    let f = |n: &[i64]| {
        c(
            0.8 * (-c2 * n[0].abs() as f64).exp() * if n[0] < 0 { -0.5 } else { 1.0 },
            0.0,
        )
    };
    let seq = CoefficientSeq::from_fn(1, 1.0, c2, f).unwrap();
    let eval = |z: &[Complex64]| coeffs_to_strip_eval(&seq, z, 16).unwrap().value;
    for n in [-5i64, -1, 0, 2, 7] {
        let cb = strip_to_coeff_bound(&eval, 1, c2 / TAU, Some(0.2 * c2 / TAU), &[n]).unwrap();
        assert!((cb.coeff - f(&[n])).norm() < 1e-8, "n={n}");
        assert!(cb.ok, "C₃ = {}", cb.c3);
    }
}

#[test]
fn hermitian_fibers_have_real_spectrum() {
    let v = PeriodicPotential::new(vec![3, 2], vec![0.1, -0.4, 1.3, 0.0, 2.2, -1.0]).unwrap();
    let f = fiber_matrix(&v, &QuasiMomentum::real(&[0.123, 0.77]), None)
        .unwrap()
        .matrix;
    let ev = hermitian_eigenvalues(&f).unwrap();
    let general = eigenvalues(&f).unwrap();
    let gap = spectrum_gap(ev.iter().map(|&e| c(e, 0.0)).collect(), general);
    assert!(gap < 1e-10);
}
