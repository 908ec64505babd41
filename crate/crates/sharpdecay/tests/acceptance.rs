//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sharpdecay::verify::{
    analyticity_corpus, asymptotic_rows, asymptotic_rows_ok, combes_thomas_instance,
    fiber_equivalence_trials, fraction_corpus, free_rate_1d, gap_contrast_masses, green_oracle_gap,
    random_potential, run_suite, superexp_probe, Context, SINGLE_SLICE_D2_L10,
    SYMMETRIC_SLICE_D2_L10,
};
use sharpdecay_core::dispersion::{rate_upper_with_bands, RateOptions};
use sharpdecay_core::lattice::PeriodicPotential;
use sharpdecay_core::resolvent::{green, GreenOptions};
use sharpdecay_core::spectrum::{band_structure, spectrum_distance};
use sharpdecay_core::{Complex64, Error};

type Outcome = Result<(bool, String), Error>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Runs the named `verify` checks and folds them into one outcome.
fn suite(prefix: &str) -> Outcome {
    let rep = run_suite(&Context {
        seed: 0,
        problem: None,
        only: Some(prefix),
    });
    let detail: Vec<String> = rep
        .checks
        .iter()
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    Ok((!rep.checks.is_empty() && rep.passed(), detail.join("; ")))
}

fn within(limit: Duration, started: Instant, (ok, detail): (bool, String)) -> (bool, String) {
    let t = started.elapsed();
    (
        ok && t < limit,
        format!(
            "{detail} ({:.2} s, limit {} s)",
            t.as_secs_f64(),
            limit.as_secs()
        ),
    )
}

fn bands() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (d, grid) in [(1, 256), (2, 64)] {
        let union = band_structure(&PeriodicPotential::free(d), grid)?.union();
        let e = 2.0 * d as f64;
        if union.len() != 1 {
            return Ok((false, format!("free d={d}: {} components", union.len())));
        }
        worst = worst
            .max((union[0].0 + e).abs())
            .max((union[0].1 - e).abs());
    }
    let s5 = 5f64.sqrt();
    let union = band_structure(&PeriodicPotential::new(vec![2], vec![0.0, 2.0])?, 256)?.union();
    if union.len() != 2 {
        return Ok((false, format!("dimer: {} components", union.len())));
    }
    for (g, w) in union.iter().zip([(1.0 - s5, 0.0), (2.0, 1.0 + s5)]) {
        worst = worst.max((g.0 - w.0).abs()).max((g.1 - w.1).abs());
    }
    Ok(within(
        Duration::from_secs(5),
        start,
        (worst < 1e-4, format!("max endpoint error {worst:.3e}")),
    ))
}

fn fiber_equivalence() -> Outcome {
    let start = Instant::now();
    let worst = fiber_equivalence_trials(&mut ChaCha8Rng::seed_from_u64(2), 100)?;
    Ok(within(
        Duration::from_secs(10),
        start,
        (
            worst < 1e-10,
            format!("100 instances, max distance {worst:.3e}"),
        ),
    ))
}

fn free_rate() -> Outcome {
    let start = Instant::now();
    let v = PeriodicPotential::free(1);
    let b = band_structure(&v, 64)?;
    let mut worst = 0.0f64;
    for lam in [3.0, 5.0, 10.0, 100.0] {
        let r = rate_upper_with_bands(&v, c(lam, 0.0), &RateOptions::default(), &b)?;
        worst = worst.max((r.r_upper - free_rate_1d(lam)).abs());
    }
    Ok(within(
        Duration::from_secs(30),
        start,
        (worst < 1e-6, format!("max error {worst:.3e}")),
    ))
}

fn asymptotics() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [1, 2] {
        let rows = asymptotic_rows(d)?;
        ok &= asymptotic_rows_ok(d, &rows);
        let widths: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.2 - r.1)).collect();
        parts.push(format!("d={d} normalized widths {}", widths.join(" > ")));
    }
    Ok((ok, parts.join("; ")))
}

fn multi_coordinate() -> Outcome {
    let v = PeriodicPotential::free(2);
    let r = rate_upper_with_bands(
        &v,
        c(10.0, 0.0),
        &RateOptions::default(),
        &band_structure(&v, 64)?,
    )?;
    let symmetric = r.r_upper <= SYMMETRIC_SLICE_D2_L10 + 1e-4;
    let beats_single_slice = r.r_upper < SINGLE_SLICE_D2_L10;
    let ok = symmetric && beats_single_slice;
    Ok((
        ok,
        format!(
            "r_upper {:.6} vs single slice {SINGLE_SLICE_D2_L10}",
            r.r_upper
        ),
    ))
}

fn green_function() -> Outcome {
    let v = PeriodicPotential::free(1);
    let opts = GreenOptions {
        tol: 1e-12,
        ..GreenOptions::default()
    };
    let mut closed = 0.0f64;
    for lam in [3.0f64, 10.0] {
        let s = (lam * lam - 4.0).sqrt();
        let z = (s - lam) / 2.0;
        for n in 0..=6i64 {
            let g = green(&v, c(lam, 0.0), &[n], &[0], &opts)?.entries[0].2;
            closed = closed.max((g - c(-z.powi(n as i32) / s, 0.0)).norm());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut oracle = 0.0f64;
    for trial in 0..6 {
        let d = 1 + trial % 2;
        let v = random_potential(&mut rng, d, 2);
        let b = band_structure(&v, 32)?;
        let top = b.union().last().map_or(0.0, |x| x.1);
        let margin = 2.0 * d as f64 + 1.0;
        let lam = if trial < 4 {
            c(top + margin + rng.gen_range(0.0..3.0), 0.0)
        } else {
            c(rng.gen_range(-3.0..3.0), margin + rng.gen_range(0.0..2.0))
        };
        oracle = oracle.max(green_oracle_gap(&v, lam, &b)?);
    }
    Ok((
        closed < 1e-7 && oracle < 1e-6,
        format!("closed forms {closed:.3e}, truncated oracle {oracle:.3e}"),
    ))
}

fn combes_thomas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut instances, mut pairs, mut all) = (0, 0, true);
    while instances < 20 {
        let d = 1 + instances % 2;
        let v = random_potential(&mut rng, d, 2);
        let b = band_structure(&v, 32)?;
        let top = b.union().last().map_or(0.0, |x| x.1);
        let lam = c(top + rng.gen_range(1.5..20.0), rng.gen_range(-1.0..1.0));
        if spectrum_distance(lam, &b) <= 1.0 {
            continue;
        }
        let (holds, n) = combes_thomas_instance(&v, lam, &b)?;
        all &= holds;
        pairs += n;
        instances += 1;
    }
    Ok((
        all,
        format!("{instances} instances, {pairs} admissible mu values"),
    ))
}

fn analyticity() -> Outcome {
    let (worst, c3) = analyticity_corpus()?;
    Ok((
        worst < 1e-8 && c3.is_finite() && c3 <= 1.0,
        format!("max error {worst:.3e}, max C3 {c3:.6}"),
    ))
}

fn probe() -> Outcome {
    let rep = superexp_probe()?;
    let all_sizes = rep.min_in_band.iter().all(|m| m.1.is_some());
    let min = rep
        .min_in_band
        .iter()
        .filter_map(|m| m.1)
        .fold(f64::INFINITY, f64::min);
    let masses = gap_contrast_masses()?;
    let contrast = masses.iter().all(|&(l, m)| m < (-(l as f64) / 2.0).exp());
    let parts: Vec<String> = masses
        .iter()
        .map(|(l, m)| format!("L={l} {m:.2e}"))
        .collect();
    Ok((
        rep.flagged.is_empty() && all_sizes && contrast,
        format!(
            "super-exponential min mass {min:.3e}; gap contrast {}",
            parts.join(", ")
        ),
    ))
}

fn run_verify(args: &[&str]) -> Result<(Vec<u8>, Option<i32>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sharpdecay"))
        .arg("verify")
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.stdout, out.status.code()))
}

fn determinism() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for args in [
        &[][..],
        &["--config", "configs/dimer.toml"],
        &["--config", "configs/free2d.toml", "--seed", "7"],
    ] {
        let (a, b) = match (run_verify(args), run_verify(args)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return Ok((false, format!("cannot run the binary: {e}"))),
        };
        let same = a.0 == b.0 && !a.0.is_empty();
        ok &= same && a.1 == Some(0) && b.1 == Some(0);
        parts.push(format!(
            "[{}] identical {same}, exit {:?}",
            args.join(" "),
            a.1
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("1 band structure", bands),
        ("2 fiber equivalence", fiber_equivalence),
        ("3 plancherel", || suite("floquet.plancherel")),
        ("4 free rate", free_rate),
        ("5 asymptotics", asymptotics),
        ("6 multi-coordinate optimum", multi_coordinate),
        ("7 green function", green_function),
        ("8 combes-thomas", combes_thomas),
        ("9 sharp example", || suite("sharpness.")),
        ("10 fraction identity", || {
            let (worst, n) = fraction_corpus(&mut ChaCha8Rng::seed_from_u64(10))?;
            Ok((
                worst < 1e-6,
                format!("{n} examples x 20 momenta, max error {worst:.3e}"),
            ))
        }),
        ("11 decay and analyticity", analyticity),
        ("12 embedded-eigenvalue probe", probe),
        ("13 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!(
            "{} criterion {name}: {detail} [{:.2} s]",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} criteria, {failed} failed", criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
