//! The invariant suite behind `sharpdecay verify`.
//!
//! Every check is seeded and single-threaded internally; checks run in
//! parallel and are reported in a fixed order, so the rendered report is
//! byte-identical across runs.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sharpdecay_core::analyticity::{coeffs_to_strip_eval, strip_to_coeff_bound, CoefficientSeq};
use sharpdecay_core::dispersion::{rate_lower, rate_upper_with_bands, RateOptions};
use sharpdecay_core::floquet::{
    char_det, det_scale, dual_shift_permutation, fiber_matrix, inverse_floquet_box,
    laurent_coefficients, restriction_matrix, DualGrid, FloquetField, QuasiMomentum,
};
use sharpdecay_core::lattice::{
    adjacency, decay_rate_estimate, eigen_residual, inverse_potential_dft, potential_dft, Impurity,
    LatticeFunction, Norm, PeriodicPotential, SiteBox,
};
use sharpdecay_core::linalg::{eigenvalues, CMatrix};
use sharpdecay_core::oracle::{
    embedded_eigenvalue_probe, truncated_matrix, truncated_resolvent_solve, PROBE_THRESHOLD,
};
use sharpdecay_core::resolvent::{
    admissible_mu_grid, combes_thomas_bound, combes_thomas_check, green, GreenOptions, Resolvent,
};
use sharpdecay_core::sharpness::{
    construct_sharp_example, fraction_representation_check, verify_sharp_example, SharpExample,
};
use sharpdecay_core::spectrum::{band_structure, spectrum_distance, BandStructure};
use sharpdecay_core::{Complex64, Error};

use crate::config::Problem;

type Outcome = Result<(bool, String), Error>;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        let _ = writeln!(
            s,
            "{} checks, {} failed",
            self.checks.len(),
            self.failures()
        );
        s
    }
}

/// Inputs shared by the checks.
pub struct Context<'a> {
    pub seed: u64,
    pub problem: Option<&'a Problem>,
    /// Run only checks whose name starts with this prefix.
    pub only: Option<&'a str>,
}

impl Context<'_> {
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

type CheckFn = fn(&Context<'_>) -> Outcome;

const GENERIC: &[(&str, CheckFn)] = &[
    ("lattice.adjacency_symmetry", adjacency_symmetry),
    ("lattice.residual_linearity", residual_linearity),
    ("lattice.dft_round_trip", dft_round_trip),
    (
        "lattice.decay_amplitude_invariance",
        decay_amplitude_invariance,
    ),
    ("floquet.plancherel", plancherel),
    ("floquet.dual_periodicity", dual_periodicity),
    ("floquet.hermiticity", fiber_hermiticity),
    ("floquet.fiber_equivalence", fiber_equivalence),
    ("floquet.laurent_degree", laurent_degree),
    ("spectrum.free_bands", free_bands),
    ("spectrum.dimer_bands", dimer_bands),
    ("spectrum.continuity", band_continuity),
    ("spectrum.shift_invariance", shift_invariance),
    ("dispersion.free_exact", free_exact),
    ("dispersion.conjugation", conjugation_symmetry),
    ("dispersion.dual_shift", dual_shift_rate),
    ("dispersion.in_band_zero", in_band_zero),
    ("dispersion.bracket", bracket_validity),
    ("dispersion.multi_coordinate", multi_coordinate),
    ("dispersion.asymptotics", asymptotics),
    ("resolvent.closed_forms", green_closed_forms),
    ("resolvent.herglotz", herglotz),
    ("resolvent.conjugation", green_conjugation),
    ("resolvent.oracle", green_vs_oracle),
    ("resolvent.combes_thomas", combes_thomas),
    ("sharpness.construction", sharp_construction),
    ("sharpness.free_match", sharp_free_match),
    ("sharpness.asymptotic", sharp_asymptotic),
    ("sharpness.fraction", fraction_identity),
    ("analyticity.round_trip", analyticity_round_trip),
    ("oracle.hermiticity", truncated_hermiticity),
    ("oracle.bracketing", truncated_bracketing),
    ("oracle.probe_superexp", probe_superexp),
    ("oracle.probe_gap_contrast", probe_gap_contrast),
];

const PROBLEM: &[(&str, CheckFn)] = &[
    ("config.bands", config_bands),
    ("config.fiber_equivalence", config_fiber_equivalence),
    ("config.sharp_example", config_sharp_example),
    ("config.truncation", config_truncation),
];

/// Runs the generic suite, plus the problem-specific checks when a problem
/// is supplied.
pub fn run_suite(ctx: &Context<'_>) -> VerifyReport {
    let mut list: Vec<(&'static str, CheckFn)> = GENERIC.to_vec();
    if ctx.problem.is_some() {
        list.extend_from_slice(PROBLEM);
    }
    if let Some(prefix) = ctx.only {
        list.retain(|(name, _)| name.starts_with(prefix));
    }
    let checks = list
        .par_iter()
        .map(|&(name, f)| {
            let (passed, detail) = match f(ctx) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            Check {
                name,
                passed,
                detail,
            }
        })
        .collect();
    VerifyReport { checks }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn random_potential(rng: &mut ChaCha8Rng, dim: usize, max_period: usize) -> PeriodicPotential {
    let periods: Vec<usize> = (0..dim).map(|_| rng.gen_range(1..=max_period)).collect();
    let q: usize = periods.iter().product();
    let values = (0..q).map(|_| rng.gen_range(-2.0..2.0)).collect();
    PeriodicPotential::new(periods, values).expect("valid random potential")
}

fn random_function(rng: &mut ChaCha8Rng, domain: SiteBox) -> LatticeFunction {
    LatticeFunction::from_fn(domain, |_| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// Matches every eigenvalue of `a` to the nearest unused one of `b`.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in sorted(a.to_vec()) {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap_or((0, f64::INFINITY));
        if j < used.len() {
            used[j] = true;
        }
        worst = worst.max(d);
    }
    worst
}

fn adjacency_symmetry(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(1);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let d = 1 + trial % 2;
        // Δu is computed on radius 4, which must cover the support plus one layer
        let outer = SiteBox::centered(d, 5);
        let inner = SiteBox::centered(d, 3);
        let pad = |f: LatticeFunction| {
            LatticeFunction::from_fn(outer.clone(), |n| {
                if inner.contains(n) {
                    f.get(n)
                } else {
                    c(0.0, 0.0)
                }
            })
        };
        let u = pad(random_function(&mut rng, inner.clone()));
        let w = pad(random_function(&mut rng, inner.clone()));
        let lhs = adjacency(&u)?.inner(&w);
        let rhs = u.inner(&adjacency(&w)?);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok((
        worst < 1e-12,
        format!("max |<Du,w> - <u,Dw>| = {}", sci(worst)),
    ))
}

fn residual_linearity(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(2);
    let mut worst = 0.0f64;
    for trial in 0..10 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 3);
        let imp =
            Impurity::exponential(c(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0)), 0.5)?;
        let lam = c(rng.gen_range(-5.0..5.0), rng.gen_range(-1.0..1.0));
        let a = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let dom = SiteBox::centered(d, 4);
        let u = random_function(&mut rng, dom.clone());
        let w = random_function(&mut rng, dom.clone());
        let comb = LatticeFunction::from_fn(dom, |n| a * u.get(n) + w.get(n));
        let lhs = eigen_residual(&v, &imp, lam, &comb)?;
        let ru = eigen_residual(&v, &imp, lam, &u)?;
        let rw = eigen_residual(&v, &imp, lam, &w)?;
        for (n, val) in lhs.iter() {
            let want = a * ru.get(&n) + rw.get(&n);
            worst = worst.max((val - want).norm() / want.norm().max(1.0));
        }
    }
    Ok((
        worst < 1e-12,
        format!("max relative defect = {}", sci(worst)),
    ))
}

fn dft_round_trip(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(3);
    let mut worst = 0.0f64;
    for trial in 0..30 {
        let v = random_potential(&mut rng, 1 + trial % 2, 3);
        let back = inverse_potential_dft(v.periods(), &potential_dft(&v));
        for (x, &y) in back.iter().zip(v.values()) {
            worst = worst.max((x - c(y, 0.0)).norm());
        }
    }
    Ok((
        worst < 1e-12,
        format!("30 potentials, max error = {}", sci(worst)),
    ))
}

fn decay_amplitude_invariance(_: &Context<'_>) -> Outcome {
    let mut worst = 0.0f64;
    for d in [1, 2] {
        for amp in [1e-6, 1.0, 1e6] {
            for beta in [0.3, 1.7] {
                for norm in [Norm::L1, Norm::Max] {
                    let u = LatticeFunction::from_fn(SiteBox::centered(d, 10), |n| {
                        c(amp * (-beta * norm.of(n) as f64).exp(), 0.0)
                    });
                    let fit = decay_rate_estimate(&u, norm, 1..=9, 0.0)?;
                    worst = worst.max((fit.slope + beta).abs());
                }
            }
        }
    }
    Ok((worst < 1e-6, format!("max |slope + beta| = {}", sci(worst))))
}

fn plancherel(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(5);
    let (mut norm_err, mut inner_err, mut trip_err) = (0.0f64, 0.0f64, 0.0f64);
    for trial in 0..50 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 3);
        let dom = SiteBox::centered(d, 2 + trial % 3);
        let u = random_function(&mut rng, dom.clone());
        let w = random_function(&mut rng, dom.clone());
        let grid = DualGrid::uniform(v.periods(), dom.extent(0) + 2)?;
        let fu = FloquetField::sample(&u, grid.clone())?;
        let fw = FloquetField::sample(&w, grid)?;
        norm_err = norm_err.max((fu.inner(&fu).re - u.norm_sqr()).abs() / u.norm_sqr());
        inner_err = inner_err.max((fu.inner(&fw) - u.inner(&w)).norm());
        let back = inverse_floquet_box(&fu, &dom)?;
        for (n, val) in back.iter() {
            trip_err = trip_err.max((val - u.get(&n)).norm());
        }
    }
    let ok = norm_err < 1e-10 && inner_err < 1e-10 && trip_err < 1e-10;
    Ok((
        ok,
        format!(
            "50 vectors: norm {}, inner {}, round trip {}",
            sci(norm_err),
            sci(inner_err),
            sci(trip_err)
        ),
    ))
}

fn permuted(m: &CMatrix, sigma: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.dim(), |a, b| m[(sigma[a], sigma[b])])
}

fn dual_periodicity(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(6);
    let (mut integer, mut restr, mut perm) = (0.0f64, 0.0f64, 0.0f64);
    for trial in 0..20 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 3);
        let x: Vec<Complex64> = (0..d)
            .map(|_| c(rng.gen_range(0.0..1.0), rng.gen_range(-0.1..0.1)))
            .collect();
        let xm = QuasiMomentum(x.clone());
        let f = fiber_matrix(&v, &xm, None)?.matrix;
        let r = restriction_matrix(&v, &xm)?;
        for axis in 0..d {
            let mut xi = x.clone();
            xi[axis] += 1.0;
            integer = integer.max(
                f.sub(&fiber_matrix(&v, &QuasiMomentum(xi), None)?.matrix)
                    .max_abs(),
            );
            let mut xq = x.clone();
            xq[axis] += 1.0 / v.periods()[axis] as f64;
            let xq = QuasiMomentum(xq);
            restr = restr.max(r.sub(&restriction_matrix(&v, &xq)?).max_abs());
            let sigma = dual_shift_permutation(v.periods(), axis);
            let shifted = fiber_matrix(&v, &xq, None)?.matrix;
            perm = perm.max(shifted.sub(&permuted(&f, &sigma)).max_abs());
        }
    }
    let ok = integer < 1e-12 && restr < 1e-12 && perm < 1e-12;
    Ok((
        ok,
        format!(
            "integer shift {}, restriction 1/q shift {}, fiber permutation {}",
            sci(integer),
            sci(restr),
            sci(perm)
        ),
    ))
}

fn fiber_hermiticity(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(7);
    let (mut defect, mut imag) = (0.0f64, 0.0f64);
    for trial in 0..30 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 3);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
        let f = fiber_matrix(&v, &QuasiMomentum::real(&x), None)?.matrix;
        defect = defect.max(f.hermiticity_defect());
        for z in eigenvalues(&f)? {
            imag = imag.max(z.im.abs());
        }
    }
    Ok((
        defect < 1e-12 && imag < 1e-12,
        format!("defect {}, max |Im eigenvalue| {}", sci(defect), sci(imag)),
    ))
}

/// Spectra of the restriction and fiber matrices at random complex `x`.
pub fn fiber_equivalence_trials(rng: &mut ChaCha8Rng, trials: usize) -> Result<f64, Error> {
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let d = 1 + trial % 2;
        let v = random_potential(rng, d, 3);
        let x: Vec<Complex64> = (0..d)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..0.2)))
            .collect();
        let x = QuasiMomentum(x);
        let a = eigenvalues(&restriction_matrix(&v, &x)?)?;
        let b = eigenvalues(&fiber_matrix(&v, &x, None)?.matrix)?;
        worst = worst.max(multiset_distance(&a, &b));
    }
    Ok(worst)
}

fn fiber_equivalence(ctx: &Context<'_>) -> Outcome {
    let worst = fiber_equivalence_trials(&mut ctx.rng(8), 100)?;
    Ok((
        worst < 1e-10,
        format!("100 instances, max spectral distance = {}", sci(worst)),
    ))
}

fn laurent_degree(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(9);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 3);
        let q = v.cell_size();
        let lam = c(rng.gen_range(-4.0..4.0), rng.gen_range(-1.0..1.0));
        let x: Vec<Complex64> = (0..d).map(|_| c(rng.gen_range(0.0..1.0), 0.0)).collect();
        let axis = trial % d;
        let coeffs = laurent_coefficients(&v, &QuasiMomentum(x.clone()), lam, axis)?;
        if coeffs.len() != 2 * q + 1 {
            return Ok((false, format!("{} coefficients for Q = {q}", coeffs.len())));
        }
        let mut xs = x;
        xs[axis] = c(rng.gen_range(0.0..1.0), rng.gen_range(-0.2..0.2));
        let w = (c(0.0, std::f64::consts::TAU) * xs[axis]).exp();
        let interp: Complex64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * w.powi(k as i32 - q as i32))
            .sum();
        let direct = char_det(&v, &QuasiMomentum(xs), lam)?;
        worst = worst.max((interp - direct).norm() / direct.norm().max(1.0));
    }
    Ok((
        worst < 1e-9,
        format!("degree <= Q interpolant vs direct: {}", sci(worst)),
    ))
}

fn free_bands(_: &Context<'_>) -> Outcome {
    let mut worst = 0.0f64;
    for (d, grid) in [(1, 256), (2, 64)] {
        let union = band_structure(&PeriodicPotential::free(d), grid)?.union();
        let edge = 2.0 * d as f64;
        if union.len() != 1 {
            return Ok((false, format!("d={d}: {} components", union.len())));
        }
        worst = worst
            .max((union[0].0 + edge).abs())
            .max((union[0].1 - edge).abs());
    }
    Ok((worst < 1e-4, format!("max endpoint error = {}", sci(worst))))
}

fn dimer_bands(_: &Context<'_>) -> Outcome {
    let v = PeriodicPotential::new(vec![2], vec![0.0, 2.0])?;
    let bs = band_structure(&v, 256)?;
    let s5 = 5f64.sqrt();
    let want = [(1.0 - s5, 0.0), (2.0, 1.0 + s5)];
    let union = bs.union();
    if union.len() != 2 {
        return Ok((false, format!("{} components", union.len())));
    }
    let worst = union
        .iter()
        .zip(&want)
        .map(|(g, w)| (g.0 - w.0).abs().max((g.1 - w.1).abs()))
        .fold(0.0, f64::max);
    Ok((worst < 1e-4, format!("max endpoint error = {}", sci(worst))))
}

fn band_continuity(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(12);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let v = random_potential(&mut rng, 1, 3);
        let coarse = band_structure(&v, 32)?.max_adjacent_jump();
        let fine = band_structure(&v, 64)?.max_adjacent_jump();
        worst = worst.max(fine / coarse);
    }
    Ok((
        worst <= 0.6,
        format!("worst jump ratio under halving = {worst:.4}"),
    ))
}

fn shift_invariance(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(13);
    let mut worst = 0.0f64;
    for trial in 0..10 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 2);
        let shift = rng.gen_range(-3.0..3.0);
        let a = band_structure(&v, 32)?.union();
        let b = band_structure(&v.shifted(shift), 32)?.union();
        if a.len() != b.len() {
            return Ok((
                false,
                "component count changed under a constant shift".into(),
            ));
        }
        for (x, y) in a.iter().zip(&b) {
            worst = worst
                .max((x.0 + shift - y.0).abs())
                .max((x.1 + shift - y.1).abs());
        }
    }
    Ok((worst < 1e-5, format!("max endpoint drift = {}", sci(worst))))
}

/// `ln((|λ| + √(λ² − 4))/2)`.
pub fn free_rate_1d(lambda: f64) -> f64 {
    ((lambda.abs() + (lambda * lambda - 4.0).sqrt()) / 2.0).ln()
}

fn free_exact(_: &Context<'_>) -> Outcome {
    let v = PeriodicPotential::free(1);
    let bands = band_structure(&v, 64)?;
    let mut worst = 0.0f64;
    for lam in [3.0, 5.0, 10.0, 100.0] {
        let r = rate_upper_with_bands(&v, c(lam, 0.0), &RateOptions::default(), &bands)?;
        worst = worst.max((r.r_upper - free_rate_1d(lam)).abs());
    }
    Ok((
        worst < 1e-6,
        format!("lambda in {{3,5,10,100}}: max error = {}", sci(worst)),
    ))
}

fn conjugation_symmetry(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(15);
    let mut worst = 0.0f64;
    for trial in 0..6 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 2);
        let bands = band_structure(&v, 32)?;
        let top = bands.union().last().map_or(0.0, |b| b.1);
        let lam = c(top + rng.gen_range(0.5..4.0), 0.0);
        let r = rate_upper_with_bands(&v, lam, &RateOptions::default(), &bands)?;
        let conj = QuasiMomentum(r.minimizer.as_slice().iter().map(|z| z.conj()).collect());
        let rel = char_det(&v, &conj, lam)?.norm() / det_scale(&v, &conj, lam)?;
        worst = worst.max(rel);
    }
    Ok((
        worst < 1e-10,
        format!("max relative |P(conj x)| = {}", sci(worst)),
    ))
}

fn dual_shift_rate(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(16);
    let mut worst = 0.0f64;
    let mut drift = 0.0f64;
    for trial in 0..6 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 2);
        let bands = band_structure(&v, 32)?;
        let top = bands.union().last().map_or(0.0, |b| b.1);
        let lam = c(top + rng.gen_range(0.5..4.0), rng.gen_range(-0.5..0.5));
        let r = rate_upper_with_bands(&v, lam, &RateOptions::default(), &bands)?;
        for axis in 0..d {
            let mut x = r.minimizer.0.clone();
            x[axis] += 1.0;
            let x = QuasiMomentum(x);
            worst = worst.max(char_det(&v, &x, lam)?.norm() / det_scale(&v, &x, lam)?);
            drift = drift.max((std::f64::consts::TAU * x.imag_norm() - r.r_upper).abs());
        }
    }
    Ok((
        worst < 1e-9 && drift < 1e-12,
        format!(
            "shifted witness residual {}, rate drift {}",
            sci(worst),
            sci(drift)
        ),
    ))
}

fn in_band_zero(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(17);
    for trial in 0..8 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 2);
        let bands = band_structure(&v, 32)?;
        let m = rng.gen_range(0..bands.intervals().len());
        let (a, b) = bands.intervals()[m];
        let lam = a + rng.gen_range(0.05..0.95) * (b - a);
        let r = rate_upper_with_bands(&v, c(lam, 0.0), &RateOptions::default(), &bands)?;
        if r.r_upper != 0.0 || !r.minimizer.is_real() {
            return Ok((
                false,
                format!("lambda {lam:.6}: r_upper {}", sci(r.r_upper)),
            ));
        }
    }
    Ok((true, "8 in-band energies: r = 0 with real witness".into()))
}

fn bracket_validity(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(18);
    let mut min_gap = f64::INFINITY;
    for trial in 0..10 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 2);
        let bands = band_structure(&v, 32)?;
        let lam = c(rng.gen_range(-12.0..12.0), rng.gen_range(0.1..3.0));
        let r = rate_upper_with_bands(&v, lam, &RateOptions::default(), &bands)?;
        min_gap = min_gap.min(r.r_upper - r.r_lower);
    }
    Ok((
        min_gap >= 0.0,
        format!("min r_upper - r_lower = {}", sci(min_gap)),
    ))
}

pub const SYMMETRIC_SLICE_D2_L10: f64 = 2.2158;
pub const SINGLE_SLICE_D2_L10: f64 = 2.29243;

fn multi_coordinate(_: &Context<'_>) -> Outcome {
    let v = PeriodicPotential::free(2);
    let bands = band_structure(&v, 64)?;
    let r = rate_upper_with_bands(&v, c(10.0, 0.0), &RateOptions::default(), &bands)?;
    let symmetric = r.r_upper <= SYMMETRIC_SLICE_D2_L10 + 1e-4;
    let beats_single_slice = r.r_upper < SINGLE_SLICE_D2_L10;
    let ok = symmetric && beats_single_slice;
    Ok((
        ok,
        format!("free d=2, lambda=10: r_upper = {:.10}", r.r_upper),
    ))
}

/// Ratio bracket check for free `d ∈ {1,2}`, `λ ∈ {10², 10³, 10⁴}`.
pub fn asymptotic_rows(d: usize) -> Result<Vec<(f64, f64, f64)>, Error> {
    let v = PeriodicPotential::free(d);
    let bands = band_structure(&v, 64)?;
    [1e2, 1e3, 1e4]
        .iter()
        .map(|&lam| {
            let r = rate_upper_with_bands(&v, c(lam, 0.0), &RateOptions::default(), &bands)?;
            Ok((lam, r.r_lower / lam.ln(), r.r_upper / lam.ln()))
        })
        .collect()
}

pub fn asymptotic_rows_ok(d: usize, rows: &[(f64, f64, f64)]) -> bool {
    let in_window = rows.iter().all(|&(lam, lo, hi)| {
        let floor = 1.0 - (2.0 * d as f64).ln() / lam.ln() - 0.02;
        [lo, hi].iter().all(|&t| t >= floor && t <= 1.05)
    });
    let widths: Vec<f64> = rows.iter().map(|r| r.2 - r.1).collect();
    in_window && widths.windows(2).all(|w| w[1] < w[0])
}

fn asymptotics(_: &Context<'_>) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for d in [1, 2] {
        let rows = asymptotic_rows(d)?;
        ok &= asymptotic_rows_ok(d, &rows);
        let last = rows.last().expect("three rows");
        detail.push(format!("d={d} at 1e4: [{:.4}, {:.4}]", last.1, last.2));
    }
    Ok((ok, detail.join("; ")))
}

fn green_closed_forms(_: &Context<'_>) -> Outcome {
    let v = PeriodicPotential::free(1);
    let opts = GreenOptions {
        tol: 1e-12,
        ..GreenOptions::default()
    };
    let mut worst = 0.0f64;
    for lam in [3.0f64, 10.0] {
        let s = (lam * lam - 4.0).sqrt();
        let z = (s - lam) / 2.0;
        for n in 0..=6i64 {
            let g = green(&v, c(lam, 0.0), &[n], &[0], &opts)?.entries[0].2;
            let want = -z.powi(n as i32) / s;
            worst = worst.max((g - c(want, 0.0)).norm());
        }
    }
    Ok((
        worst < 1e-7,
        format!("max error vs closed form = {}", sci(worst)),
    ))
}

fn herglotz(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(22);
    let mut min_im = f64::INFINITY;
    for trial in 0..6 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 2);
        let origin = vec![0; d];
        for re in [-6.0, -1.0, 0.5, 4.0] {
            for im in [0.25, 1.0, 3.0] {
                let g =
                    green(&v, c(re, im), &origin, &origin, &GreenOptions::default())?.entries[0].2;
                min_im = min_im.min(g.im);
            }
        }
    }
    Ok((
        min_im > 0.0,
        format!(
            "min Im G(0,0) over the upper half-plane grid = {}",
            sci(min_im)
        ),
    ))
}

fn green_conjugation(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(23);
    let opts = GreenOptions {
        tol: 1e-12,
        ..GreenOptions::default()
    };
    let mut worst = 0.0f64;
    for trial in 0..6 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 2);
        let lam = c(rng.gen_range(-6.0..6.0), rng.gen_range(0.5..2.0));
        let m: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
        let a = green(&v, lam, &m, &vec![0; d], &opts)?.entries[0].2;
        let b = green(&v, lam.conj(), &m, &vec![0; d], &opts)?.entries[0].2;
        worst = worst.max((a.conj() - b).norm());
    }
    Ok((
        worst < 1e-10,
        format!("max |conj G(l) - G(conj l)| = {}", sci(worst)),
    ))
}

/// Smallest `L` whose Combes–Thomas bound at distance `L − spread`, optimised
/// over admissible `μ`, is below `target`.
pub fn oracle_half_width(dim: usize, gamma: f64, spread: u64, target: f64) -> Option<usize> {
    let mus = admissible_mu_grid(dim, gamma, 0.01);
    (spread as usize + 2..=1000).find(|&l| {
        mus.iter().any(|&mu| {
            combes_thomas_bound(dim, gamma, mu, l as u64 - spread).is_ok_and(|b| b < target)
        })
    })
}

/// Quadrature vs truncated-lattice solve over `‖m − n‖₁ ≤ 6`.
pub fn green_oracle_gap(
    v: &PeriodicPotential,
    lambda: Complex64,
    bands: &BandStructure,
) -> Result<f64, Error> {
    let d = v.dim();
    let res = Resolvent::new(v, lambda, bands)?;
    let spread = 6u64;
    let l = oracle_half_width(d, res.gamma(), spread, 1e-8).ok_or_else(|| {
        Error::Domain(format!(
            "no admissible Combes–Thomas decay at gamma = {}",
            res.gamma()
        ))
    })?;
    let op = truncated_matrix(v, &Impurity::None, l)?;
    let origin = vec![0i64; d];
    let col = truncated_resolvent_solve(
        &op,
        lambda,
        &LatticeFunction::delta(SiteBox::centered(d, 0), &origin),
    )?;
    let pairs: Vec<(Vec<i64>, Vec<i64>)> = SiteBox::centered(d, spread as usize)
        .sites()
        .filter(|m| Norm::L1.of(m) <= spread)
        .map(|m| (m, origin.clone()))
        .collect();
    let table = res.table(
        &pairs,
        &GreenOptions {
            tol: 1e-10,
            ..GreenOptions::default()
        },
    )?;
    Ok(table
        .entries
        .iter()
        .map(|(m, _, g)| (g - col.get(m)).norm())
        .fold(0.0, f64::max))
}

fn green_vs_oracle(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(24);
    let mut worst = 0.0f64;
    for trial in 0..6 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 2);
        let bands = band_structure(&v, 32)?;
        let top = bands.union().last().map_or(0.0, |b| b.1);
        // γ must exceed 2d for a Combes–Thomas tail estimate
        let margin = 2.0 * d as f64 + 1.0;
        let lam = if trial < 4 {
            c(top + margin + rng.gen_range(0.0..3.0), 0.0)
        } else {
            c(rng.gen_range(-3.0..3.0), margin + rng.gen_range(0.0..2.0))
        };
        worst = worst.max(green_oracle_gap(&v, lam, &bands)?);
    }
    Ok((
        worst < 1e-6,
        format!("max |quadrature - truncated solve| = {}", sci(worst)),
    ))
}

/// Combes–Thomas on a `0.1` grid of admissible `μ` for one `(V, λ)`.
pub fn combes_thomas_instance(
    v: &PeriodicPotential,
    lambda: Complex64,
    bands: &BandStructure,
) -> Result<(bool, usize), Error> {
    let d = v.dim();
    let res = Resolvent::new(v, lambda, bands)?;
    let radius = if d == 1 { 10 } else { 4 };
    let origin = vec![0i64; d];
    let pairs: Vec<(Vec<i64>, Vec<i64>)> = SiteBox::centered(d, radius)
        .sites()
        .map(|m| (m, origin.clone()))
        .collect();
    let table = res.table(&pairs, &GreenOptions::default())?;
    let mut holds = true;
    let grid = admissible_mu_grid(d, res.gamma(), 0.1);
    for &mu in &grid {
        holds &= combes_thomas_check(res.gamma(), mu, &table)?.holds;
    }
    Ok((holds, grid.len()))
}

fn combes_thomas(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(25);
    let mut all = true;
    let mut tested = 0;
    for trial in 0..20 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 2);
        let bands = band_structure(&v, 32)?;
        let top = bands.union().last().map_or(0.0, |b| b.1);
        let lam = c(top + rng.gen_range(1.5..20.0), rng.gen_range(-1.0..1.0));
        if spectrum_distance(lam, &bands) <= 1.0 {
            continue;
        }
        let (holds, n) = combes_thomas_instance(&v, lam, &bands)?;
        all &= holds;
        tested += n;
    }
    Ok((all, format!("{tested} (instance, mu) pairs checked")))
}

fn sharp_construction(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(26);
    let (mut residual, mut imag, mut dominance) = (0.0f64, 0.0f64, true);
    let mut built = 0;
    for trial in 0..8 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 3);
        let bands = band_structure(&v, 32)?;
        let union = bands.union();
        let lam = if trial % 3 == 0 {
            union[0].0 - rng.gen_range(0.6..5.0)
        } else {
            union.last().expect("nonempty").1 + rng.gen_range(0.6..5.0)
        };
        let half = if d == 1 { 24 } else { 8 };
        let ex = match construct_sharp_example(
            &v,
            c(lam, 0.0),
            &SiteBox::centered(d, half),
            &bands,
            &GreenOptions::default(),
        ) {
            Err(Error::ExceptionalLambda { .. }) => continue,
            r => r?,
        };
        residual = residual.max(ex.residual_max);
        imag = imag.max(ex.coupling().im.abs());
        let rep = verify_sharp_example(&ex, &v, &bands, &RateOptions::default())?;
        dominance &= rep.dominance_ok;
        built += 1;
    }
    let ok = residual < 1e-8 && imag < 1e-10 && dominance && built > 0;
    Ok((
        ok,
        format!(
            "{built} examples: residual {}, |Im v(0)| {}, dominance {dominance}",
            sci(residual),
            sci(imag)
        ),
    ))
}

pub fn free_example(lambda: f64, half: usize) -> Result<(SharpExample, BandStructure), Error> {
    let v = PeriodicPotential::free(1);
    let bands = band_structure(&v, 64)?;
    let ex = construct_sharp_example(
        &v,
        c(lambda, 0.0),
        &SiteBox::centered(1, half),
        &bands,
        &GreenOptions::default(),
    )?;
    Ok((ex, bands))
}

fn sharp_free_match(_: &Context<'_>) -> Outcome {
    let mut worst = 0.0f64;
    for lam in [3.0, 10.0, 100.0] {
        let (ex, bands) = free_example(lam, 30)?;
        let rep = verify_sharp_example(
            &ex,
            &PeriodicPotential::free(1),
            &bands,
            &RateOptions::default(),
        )?;
        let rel = ((-rep.slope - free_rate_1d(lam)) / free_rate_1d(lam)).abs();
        worst = worst.max(rel);
        if !rep.passed() {
            return Ok((false, format!("lambda {lam}: report failed")));
        }
    }
    Ok((
        worst < 0.02,
        format!("max relative slope error = {}", sci(worst)),
    ))
}

fn sharp_asymptotic(_: &Context<'_>) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for lam in [100.0f64, 1000.0] {
        let (ex, bands) = free_example(lam, 12)?;
        let rep = verify_sharp_example(
            &ex,
            &PeriodicPotential::free(1),
            &bands,
            &RateOptions::default(),
        )?;
        let t = -rep.slope / lam.ln();
        ok &= t >= 1.0 - 2f64.ln() / lam.ln() - 0.02 && t <= 1.02;
        parts.push(format!("lambda {lam}: -s/ln = {t:.5}"));
    }
    Ok((ok, parts.join("; ")))
}

/// Fraction identity at 20 random real momenta for each example in a fixed corpus.
pub fn fraction_corpus(rng: &mut ChaCha8Rng) -> Result<(f64, usize), Error> {
    let cases: Vec<(PeriodicPotential, f64, usize)> = vec![
        (PeriodicPotential::free(1), 3.0, 30),
        (PeriodicPotential::new(vec![2], vec![0.0, 2.0])?, 1.0, 60),
        (
            PeriodicPotential::new(vec![3], vec![0.5, -1.0, 1.5])?,
            5.0,
            30,
        ),
        (PeriodicPotential::free(2), 12.0, 14),
        (
            PeriodicPotential::new(vec![2, 1], vec![0.0, 1.0])?,
            -10.0,
            14,
        ),
    ];
    let mut worst = 0.0f64;
    let mut count = 0;
    for (v, lam, half) in cases {
        let bands = band_structure(&v, 32)?;
        let ex = construct_sharp_example(
            &v,
            c(lam, 0.0),
            &SiteBox::centered(v.dim(), half),
            &bands,
            &GreenOptions::default(),
        )?;
        let xs: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..v.dim()).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let rep = fraction_representation_check(&ex, &v, &xs)?;
        worst = worst.max(rep.max_error);
        count += 1;
    }
    Ok((worst, count))
}

fn fraction_identity(ctx: &Context<'_>) -> Outcome {
    let (worst, n) = fraction_corpus(&mut ctx.rng(29))?;
    Ok((
        worst < 1e-6,
        format!("{n} examples x 20 momenta: max error = {}", sci(worst)),
    ))
}

/// Recovers coefficients of a corpus of decay-certified sequences from
/// their strip evaluations. Returns `(max error, max C₃)`.
pub fn analyticity_corpus() -> Result<(f64, f64), Error> {
    let tau = std::f64::consts::TAU;
    let mut worst = 0.0f64;
    let mut c3_max = 0.0f64;
    let one_sided = |n: &[i64]| {
        if n[0] >= 0 {
            c(0.5f64.powi(n[0] as i32), 0.0)
        } else {
            c(0.0, 0.0)
        }
    };
    let two_sided = |n: &[i64]| {
        (-0.9 * n[0].abs() as f64).exp() * if n[0] < 0 { c(0.0, -0.5) } else { c(0.8, 0.0) }
    };
    let super_exp = |n: &[i64]| c((-(n[0] as f64).powi(2) * 0.5).exp(), 0.0);
    type Seq = Box<dyn Fn(&[i64]) -> Complex64>;
    let one_d: Vec<(Seq, f64, f64)> = vec![
        (Box::new(one_sided), 1.0, 2f64.ln()),
        (Box::new(two_sided), 1.0, 0.9),
        (Box::new(super_exp), 7.5, 2.0),
    ];
    for (f, c1, c2) in &one_d {
        let seq = CoefficientSeq::from_fn(1, *c1, *c2, f)?;
        let eval = |z: &[Complex64]| {
            coeffs_to_strip_eval(&seq, z, 16)
                .map(|e| e.value)
                .unwrap_or(c(f64::NAN, 0.0))
        };
        for n in [-6i64, -2, -1, 0, 1, 3, 6] {
            let cb = strip_to_coeff_bound(&eval, 1, c2 / tau, Some(0.2 * c2 / tau), &[n])?;
            worst = worst.max((cb.coeff - f(&[n])).norm());
            c3_max = c3_max.max(cb.c3);
        }
    }
    let table = vec![
        (vec![0, 0], c(1.0, 0.0)),
        (vec![1, 0], c(0.3, 0.1)),
        (vec![-1, 2], c(0.0, -0.2)),
        (vec![2, -2], c(0.1, 0.0)),
    ];
    let seq = CoefficientSeq::from_table(2, 1.0, 0.5, table.clone())?;
    let eval = |z: &[Complex64]| {
        coeffs_to_strip_eval(&seq, z, 3)
            .map(|e| e.value)
            .unwrap_or(c(f64::NAN, 0.0))
    };
    for (n, want) in &table {
        let cb = strip_to_coeff_bound(&eval, 2, 0.5 / tau, Some(0.1 / tau), n)?;
        worst = worst.max((cb.coeff - want).norm());
        c3_max = c3_max.max(cb.c3);
    }
    Ok((worst, c3_max))
}

fn analyticity_round_trip(_: &Context<'_>) -> Outcome {
    let (worst, c3) = analyticity_corpus()?;
    Ok((
        worst < 1e-8 && c3 <= 1.0 + 1e-9,
        format!("max error {}, max C3 = {c3:.6}", sci(worst)),
    ))
}

fn truncated_hermiticity(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(31);
    let mut worst = 0.0f64;
    for trial in 0..6 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 3);
        let imp = Impurity::single_site(d, c(rng.gen_range(-3.0..3.0), 0.0));
        let op = truncated_matrix(&v, &imp, 3)?;
        let n = op.dim();
        let dense = CMatrix::from_fn(n, |i, j| op.matrix().get(i, j));
        for z in eigenvalues(&dense)? {
            worst = worst.max(z.im.abs());
        }
    }
    Ok((
        worst < 1e-12,
        format!("max |Im eigenvalue| = {}", sci(worst)),
    ))
}

fn truncated_bracketing(ctx: &Context<'_>) -> Outcome {
    let mut rng = ctx.rng(32);
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..8 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 3);
        let imp = Impurity::exponential(c(rng.gen_range(-3.0..3.0), 0.0), rng.gen_range(0.2..2.0))?;
        let op = truncated_matrix(&v, &imp, if d == 1 { 30 } else { 6 })?;
        let union = band_structure(&v, 32)?.union();
        let (lo, hi) = (
            union[0].0 - imp.sup_norm(),
            union.last().expect("nonempty").1 + imp.sup_norm(),
        );
        for e in op.eigenvalues()? {
            worst = worst.max(lo - e).max(e - hi);
        }
    }
    Ok((
        worst <= 1e-9,
        format!("max excursion outside the bracket = {}", sci(worst)),
    ))
}

/// Boundary-mass probe for `v(n) = 5e^{−‖n‖²}` on the free chain.
pub fn superexp_probe() -> Result<sharpdecay_core::oracle::ProbeReport, Error> {
    let imp = Impurity::super_exponential(c(5.0, 0.0), 1.0, 2.0)?;
    embedded_eigenvalue_probe(
        &PeriodicPotential::free(1),
        &imp,
        (-2.0, 2.0),
        &[20, 40, 80],
        PROBE_THRESHOLD,
    )
}

fn probe_superexp(_: &Context<'_>) -> Outcome {
    let rep = superexp_probe()?;
    let min = rep
        .min_in_band
        .iter()
        .filter_map(|m| m.1)
        .fold(f64::INFINITY, f64::min);
    Ok((
        rep.flagged.is_empty(),
        format!("min in-band boundary mass = {}", sci(min)),
    ))
}

/// Potential and impurity of the gap bound-state contrast case.
pub fn gap_contrast_problem() -> Result<(PeriodicPotential, Impurity), Error> {
    let v = PeriodicPotential::new(vec![2], vec![0.0, 6.0])?;
    let g00 = green(
        &v,
        c(3.0, 0.0),
        &[0],
        &[0],
        &GreenOptions {
            tol: 1e-12,
            ..GreenOptions::default()
        },
    )?
    .entries[0]
        .2;
    Ok((v, Impurity::single_site(1, c(-1.0 / g00.re, 0.0))))
}

/// Per `L`, the smallest boundary mass of an eigenvector with eigenvalue in the gap.
pub fn gap_contrast_masses() -> Result<Vec<(usize, f64)>, Error> {
    let (v, imp) = gap_contrast_problem()?;
    let rep = embedded_eigenvalue_probe(&v, &imp, (2.5, 3.5), &[20, 40, 80], PROBE_THRESHOLD)?;
    Ok(rep
        .min_in_band
        .iter()
        .map(|&(l, m)| (l, m.unwrap_or(f64::INFINITY)))
        .collect())
}

fn probe_gap_contrast(_: &Context<'_>) -> Outcome {
    let masses = gap_contrast_masses()?;
    let ok = masses.iter().all(|&(l, m)| m < (-(l as f64) / 2.0).exp());
    let parts: Vec<String> = masses
        .iter()
        .map(|(l, m)| format!("L={l}: {}", sci(*m)))
        .collect();
    Ok((ok, parts.join(", ")))
}

fn problem<'a>(ctx: &Context<'a>) -> &'a Problem {
    ctx.problem.expect("problem checks run only with a problem")
}

fn config_bands(ctx: &Context<'_>) -> Outcome {
    let p = problem(ctx);
    let d = p.dim() as f64;
    let grid = if p.dim() == 1 { 256 } else { 64 };
    let bs = band_structure(&p.potential, grid)?;
    let union = bs.union();
    let vmin = p
        .potential
        .values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let vmax = p
        .potential
        .values()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let ok = union[0].0 >= vmin - 2.0 * d - 1e-12
        && union.last().expect("nonempty").1 <= vmax + 2.0 * d + 1e-12;
    let parts: Vec<String> = union
        .iter()
        .map(|(a, b)| format!("[{a:.5}, {b:.5}]"))
        .collect();
    Ok((ok, parts.join(" U ")))
}

fn config_fiber_equivalence(ctx: &Context<'_>) -> Outcome {
    let p = problem(ctx);
    let mut rng = ctx.rng(101);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x: Vec<Complex64> = (0..p.dim())
            .map(|_| c(rng.gen_range(0.0..1.0), rng.gen_range(-0.2..0.2)))
            .collect();
        let x = QuasiMomentum(x);
        let a = eigenvalues(&restriction_matrix(&p.potential, &x)?)?;
        let b = eigenvalues(&fiber_matrix(&p.potential, &x, None)?.matrix)?;
        worst = worst.max(multiset_distance(&a, &b));
    }
    Ok((
        worst < 1e-10,
        format!("max spectral distance = {}", sci(worst)),
    ))
}

fn config_sharp_example(ctx: &Context<'_>) -> Outcome {
    let p = problem(ctx);
    let d = p.dim();
    let bands = band_structure(&p.potential, 32)?;
    let top = bands.union().last().expect("nonempty").1;
    let lam = c(top + 2.0, 0.0);
    let half = if d == 1 { 24 } else { 8 };
    let ex = construct_sharp_example(
        &p.potential,
        lam,
        &SiteBox::centered(d, half),
        &bands,
        &GreenOptions::default(),
    )?;
    let rep = verify_sharp_example(&ex, &p.potential, &bands, &RateOptions::default())?;
    let bound = rate_lower(lam, p.potential.sup_norm(), d);
    let ok = rep.passed() && rep.rate.r_lower == bound;
    Ok((
        ok,
        format!(
            "lambda = max(spectrum) + 2: residual {}, slope {:.6}, mu0 {:.6}",
            sci(ex.residual_max),
            rep.slope,
            rep.mu0
        ),
    ))
}

fn config_truncation(ctx: &Context<'_>) -> Outcome {
    let p = problem(ctx);
    if !p.impurity.is_real() {
        return Ok((
            true,
            "complex impurity: truncated operator is not Hermitian, probe skipped".into(),
        ));
    }
    let d = p.dim();
    let half = if d == 1 { 30 } else { 8 };
    let op = truncated_matrix(&p.potential, &p.impurity, half)?;
    let bands = band_structure(&p.potential, 32)?;
    let union = bands.union();
    let (lo, hi) = (
        union[0].0 - p.impurity.sup_norm(),
        union.last().expect("nonempty").1 + p.impurity.sup_norm(),
    );
    let mut excursion = f64::NEG_INFINITY;
    for e in op.eigenvalues()? {
        excursion = excursion.max(lo - e).max(e - hi);
    }
    let sizes: &[usize] = if d == 1 { &[20, 40] } else { &[6, 8] };
    let mut flagged = 0;
    for &(a, b) in &union {
        let pad = 0.05 * (b - a);
        let rep = embedded_eigenvalue_probe(
            &p.potential,
            &p.impurity,
            (a + pad, b - pad),
            sizes,
            PROBE_THRESHOLD,
        )?;
        flagged += rep.flagged.len();
    }
    Ok((
        excursion <= 1e-9 && flagged == 0,
        format!(
            "bracket excursion {}, in-band states below threshold: {flagged}",
            sci(excursion)
        ),
    ))
}
