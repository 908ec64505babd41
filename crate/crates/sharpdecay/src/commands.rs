//! Subcommand implementations. Each returns its artifacts as strings/bytes;
//! the binary decides where they go.

use rayon::prelude::*;

use sharpdecay_core::dispersion::{asymptotic_ratio_sweep, rate_with_bands, RateOptions};
use sharpdecay_core::lattice::SiteBox;
use sharpdecay_core::oracle::{
    embedded_eigenvalue_probe, ProbeReport, PROBE_HEADER, PROBE_THRESHOLD,
};
use sharpdecay_core::resolvent::{GreenOptions, Resolvent};
use sharpdecay_core::sharpness::{construct_sharp_example, verify_sharp_example};
use sharpdecay_core::spectrum::band_structure;
use sharpdecay_core::{Complex64, Error};

use crate::config::{ConfigError, Problem};
use crate::output;
use crate::verify::{run_suite, Context};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("{failed} of {total} checks failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    /// 2 config, 3 spectral proximity, 4 search failure, 5 verify failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Core(Error::SpectralProximity { .. }) => 3,
            CliError::Core(Error::SearchFailure { .. }) => 4,
            CliError::VerifyFailed { .. } => 5,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// What a subcommand produced: a text report and optionally a CSV table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub report: String,
    pub table: Option<Vec<u8>>,
}

/// `RE` or `RE,IM`.
pub fn parse_lambda(s: &str) -> CliResult<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("--lambda: `{t}` is not a number")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(CliError::Usage(format!(
            "--lambda expects RE or RE,IM, got `{s}`"
        ))),
    }
}

/// `START:STOP:COUNT`, logarithmically spaced on the real axis.
pub fn parse_sweep(s: &str) -> CliResult<Vec<Complex64>> {
    let bad = || {
        CliError::Usage(format!(
            "--lambda-sweep expects START:STOP:COUNT, got `{s}`"
        ))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || a == 0.0 || b == 0.0 || a.signum() != b.signum() {
        return Err(CliError::Usage(
            "--lambda-sweep needs COUNT ≥ 1 and nonzero endpoints of equal sign".into(),
        ));
    }
    let (la, lb) = (a.abs().ln(), b.abs().ln());
    Ok((0..n)
        .map(|i| {
            // endpoints exact, interior nodes log-spaced
            let x = match i {
                0 => a,
                _ if i == n - 1 => b,
                _ => a.signum() * (la + i as f64 / (n - 1) as f64 * (lb - la)).exp(),
            };
            Complex64::new(x, 0.0)
        })
        .collect())
}

pub fn parse_interval(s: &str) -> CliResult<(f64, f64)> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--interval expects A,B, got `{s}`")))?;
    match v.as_slice() {
        [a, b] if a < b => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!(
            "--interval expects A,B with A < B, got `{s}`"
        ))),
    }
}

pub fn parse_sizes(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().ok().filter(|&l| l >= 1))
        .collect::<Option<Vec<_>>>()
        .filter(|v| !v.is_empty())
        .ok_or_else(|| {
            CliError::Usage(format!(
                "--sizes expects a list of positive integers, got `{s}`"
            ))
        })
}

/// Nodes per axis used when `--grid` is absent.
pub fn default_grid(dim: usize) -> usize {
    if dim == 1 {
        256
    } else {
        64
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn bands(p: &Problem, grid: Option<usize>) -> CliResult<Artifacts> {
    let grid = grid.unwrap_or_else(|| default_grid(p.dim()));
    let bs = band_structure(&p.potential, grid)?;
    let table = csv_bytes(|b| output::write_bands(b, &bs, p.potential.periods()))?;
    Ok(Artifacts {
        report: output::bands_summary(&bs),
        table: Some(table),
    })
}

pub fn rate_options(p: &Problem, grid: Option<usize>, seed: u64) -> RateOptions {
    RateOptions {
        seed,
        band_grid: grid.unwrap_or_else(|| default_grid(p.dim())),
        ..RateOptions::default()
    }
}

pub fn rate(
    p: &Problem,
    lambda: Complex64,
    grid: Option<usize>,
    seed: u64,
) -> CliResult<Artifacts> {
    let opts = rate_options(p, grid, seed);
    let bands = band_structure(&p.potential, opts.band_grid)?;
    let r = rate_with_bands(&p.potential, lambda, &opts, &bands)?;
    Ok(Artifacts {
        report: output::rate_report(&r),
        table: None,
    })
}

pub fn sweep(
    p: &Problem,
    lambdas: &[Complex64],
    grid: Option<usize>,
    seed: u64,
) -> CliResult<Artifacts> {
    let opts = rate_options(p, grid, seed);
    let rows = lambdas
        .par_iter()
        .map(|&l| asymptotic_ratio_sweep(&p.potential, &[l], &opts).map(|mut r| r.remove(0)))
        .collect::<Result<Vec<_>, _>>()?;
    let table = csv_bytes(|b| output::write_sweep(b, &rows))?;
    Ok(Artifacts {
        report: format!("{} energies\n", rows.len()),
        table: Some(table),
    })
}

fn green_options(tol: f64, grid: Option<usize>) -> GreenOptions {
    GreenOptions {
        tol,
        cap: grid,
        ..GreenOptions::default()
    }
}

/// `G₀(m, 0; λ)` for every `m` in the box of half-width `half`.
pub fn green(
    p: &Problem,
    lambda: Complex64,
    half: usize,
    tol: f64,
    grid: Option<usize>,
) -> CliResult<Artifacts> {
    let opts = green_options(tol, grid);
    let bands = band_structure(&p.potential, opts.band_grid)?;
    let res = Resolvent::new(&p.potential, lambda, &bands)?;
    let origin = vec![0i64; p.dim()];
    let pairs: Vec<(Vec<i64>, Vec<i64>)> = SiteBox::centered(p.dim(), half)
        .sites()
        .map(|m| (m, origin.clone()))
        .collect();
    let table = res.table(&pairs, &opts)?;
    if !table.converged {
        return Err(Error::Accuracy {
            what: "Brillouin-zone quadrature",
            estimate: table.error_estimate,
        }
        .into());
    }
    let bytes = csv_bytes(|b| output::write_green(b, &table))?;
    let report = format!(
        "{} entries, gamma = {}, grid = {}, error_estimate = {}\n",
        table.entries.len(),
        output::num(res.gamma()),
        table.nodes,
        output::num(table.error_estimate)
    );
    Ok(Artifacts {
        report,
        table: Some(bytes),
    })
}

pub fn example(
    p: &Problem,
    lambda: Complex64,
    half: usize,
    tol: f64,
    grid: Option<usize>,
    seed: u64,
) -> CliResult<Artifacts> {
    let bands = band_structure(&p.potential, 64)?;
    let ex = construct_sharp_example(
        &p.potential,
        lambda,
        &SiteBox::centered(p.dim(), half),
        &bands,
        &green_options(tol, grid),
    )?;
    let rep = verify_sharp_example(
        &ex,
        &p.potential,
        &bands,
        &RateOptions {
            seed,
            ..RateOptions::default()
        },
    )?;
    let table = csv_bytes(|b| output::write_function(b, &ex.u))?;
    Ok(Artifacts {
        report: output::example_report(&ex, &rep),
        table: Some(table),
    })
}

/// Runs the probe with one task per box size and merges in input order.
pub fn probe(p: &Problem, interval: Option<(f64, f64)>, sizes: &[usize]) -> CliResult<Artifacts> {
    let interval = match interval {
        Some(iv) => iv,
        None => band_structure(&p.potential, 64)?.union()[0],
    };
    let parts = sizes
        .par_iter()
        .map(|&l| {
            embedded_eigenvalue_probe(&p.potential, &p.impurity, interval, &[l], PROBE_THRESHOLD)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut merged = ProbeReport {
        header: PROBE_HEADER,
        interval,
        rows: Vec::new(),
        min_in_band: Vec::new(),
        flagged: Vec::new(),
        threshold: PROBE_THRESHOLD,
    };
    for part in parts {
        merged.rows.extend(part.rows);
        merged.min_in_band.extend(part.min_in_band);
        merged.flagged.extend(part.flagged);
    }
    let table = csv_bytes(|b| output::write_probe(b, &merged))?;
    Ok(Artifacts {
        report: output::probe_summary(&merged),
        table: Some(table),
    })
}

/// The invariant suite; the report is returned even when checks fail.
pub fn verify(p: Option<&Problem>, seed: u64, only: Option<&str>) -> (Artifacts, CliResult<()>) {
    let rep = run_suite(&Context {
        seed,
        problem: p,
        only,
    });
    let status = if rep.passed() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed {
            failed: rep.failures(),
            total: rep.checks.len(),
        })
    };
    (
        Artifacts {
            report: rep.render(),
            table: None,
        },
        status,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free1() -> Problem {
        Problem::from_toml("dim = 1\nperiods = [1]\nvalues = [0.0]\n").unwrap()
    }

    #[test]
    fn lambda_forms() {
        assert_eq!(parse_lambda("3").unwrap(), Complex64::new(3.0, 0.0));
        assert_eq!(parse_lambda("3,-0.5").unwrap(), Complex64::new(3.0, -0.5));
        assert_eq!(parse_lambda("x").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn sweep_is_log_spaced() {
        let v = parse_sweep("10:1000:3").unwrap();
        assert!((v[1].re - 100.0).abs() < 1e-9);
        assert!(parse_sweep("-1:5:3").is_err());
    }

    #[test]
    fn free_chain_summary() {
        let a = bands(&free1(), None).unwrap();
        assert!(a.report.contains("[-2.00000, 2.00000]"), "{}", a.report);
    }

    #[test]
    fn free_chain_rate_at_three() {
        let a = rate(&free1(), Complex64::new(3.0, 0.0), None, 0).unwrap();
        assert!(
            a.report.contains("r_upper (5 dp) = 0.96242"),
            "{}",
            a.report
        );
    }

    #[test]
    fn exit_codes_by_class() {
        let e = green(&free1(), Complex64::new(0.5, 0.0), 2, 1e-8, None).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let e = CliError::from(Error::SearchFailure { best_residual: 1.0 });
        assert_eq!(e.exit_code(), 4);
    }
}
