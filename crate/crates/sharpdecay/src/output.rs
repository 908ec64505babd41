//! CSV tables and plain-text reports.
//!
//! Floats are written as `{:.16e}` (17 significant digits, no locale), so
//! identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::io::Write;

use sharpdecay_core::dispersion::{RateResult, SweepRow};
use sharpdecay_core::lattice::LatticeFunction;
use sharpdecay_core::oracle::ProbeReport;
use sharpdecay_core::resolvent::GreenTable;
use sharpdecay_core::sharpness::{SharpExample, SharpReport};
use sharpdecay_core::spectrum::BandStructure;
use sharpdecay_core::Complex64;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn coords(prefix: &str, d: usize) -> impl Iterator<Item = String> + '_ {
    (1..=d).map(move |j| format!("{prefix}{j}"))
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().flexible(false).from_writer(out)
}

/// `k_1..k_d, lambda_1..lambda_Q`, one row per grid node, with `k = x/q`.
pub fn write_bands<W: Write>(out: W, bands: &BandStructure, periods: &[usize]) -> csv::Result<()> {
    let d = periods.len();
    let q = bands.bands().first().map_or(0, Vec::len);
    let mut w = writer(out);
    w.write_record(coords("k_", d).chain(coords("lambda_", q)))?;
    for (i, vals) in bands.bands().iter().enumerate() {
        let x = bands.grid().point(i);
        let row = x
            .iter()
            .zip(periods)
            .map(|(xj, &p)| num(xj / p as f64))
            .chain(vals.iter().map(|&v| num(v)));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn interval(a: f64, b: f64) -> String {
    format!("[{a:.5}, {b:.5}]")
}

pub fn bands_summary(bands: &BandStructure) -> String {
    let mut s = String::new();
    for (m, &(a, b)) in bands.intervals().iter().enumerate() {
        let _ = writeln!(s, "band {}: {}", m + 1, interval(a, b));
    }
    let union: Vec<String> = bands.union().iter().map(|&(a, b)| interval(a, b)).collect();
    let _ = writeln!(s, "spectrum: {}", union.join(" U "));
    s
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record([
        "lambda_re",
        "lambda_im",
        "r_lower",
        "r_upper",
        "ratio_lower",
        "ratio_upper",
        "residual",
    ])?;
    for r in rows {
        w.write_record(
            [
                r.lambda.re,
                r.lambda.im,
                r.r_lower,
                r.r_upper,
                r.ratio_lower,
                r.ratio_upper,
                r.residual,
            ]
            .map(num),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn complex(z: Complex64) -> String {
    format!("{} {}", num(z.re), num(z.im))
}

pub fn rate_report(r: &RateResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lambda = {}", complex(r.lambda));
    let _ = writeln!(s, "r_lower = {} ({})", num(r.r_lower), r.lower_method);
    let _ = writeln!(s, "r_upper = {} ({})", num(r.r_upper), r.upper_method);
    let _ = writeln!(s, "r_upper (5 dp) = {:.5}", r.r_upper);
    let x: Vec<String> = r.minimizer.as_slice().iter().map(|&z| complex(z)).collect();
    let _ = writeln!(s, "minimizer = {}", x.join(" ; "));
    let _ = writeln!(s, "residual = {}", num(r.residual));
    let _ = writeln!(s, "relative_residual = {}", num(r.relative_residual));
    s
}

/// `m_1..m_d, n_1..n_d, re, im` preceded by `#` header lines.
pub fn write_green<W: Write>(mut out: W, t: &GreenTable) -> csv::Result<()> {
    let d = t.dim();
    writeln!(out, "# lambda = {}", complex(t.lambda))?;
    writeln!(out, "# grid = {}", t.nodes)?;
    writeln!(out, "# error_estimate = {}", num(t.error_estimate))?;
    writeln!(out, "# converged = {}", t.converged)?;
    let mut w = writer(out);
    w.write_record(
        coords("m_", d)
            .chain(coords("n_", d))
            .chain(["re".into(), "im".into()]),
    )?;
    for (m, n, g) in &t.entries {
        let row = m
            .iter()
            .chain(n)
            .map(|v| v.to_string())
            .chain([num(g.re), num(g.im)]);
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `n_1..n_d, re, im` over the function's box.
pub fn write_function<W: Write>(out: W, u: &LatticeFunction) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(coords("n_", u.dim()).chain(["re".into(), "im".into()]))?;
    for (n, v) in u.iter() {
        w.write_record(
            n.iter()
                .map(|c| c.to_string())
                .chain([num(v.re), num(v.im)]),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn example_report(ex: &SharpExample, rep: &SharpReport) -> String {
    let mut s = String::new();
    let yes = |b: Option<bool>| b.map_or("n/a", |b| if b { "yes" } else { "no" });
    let _ = writeln!(s, "lambda = {}", complex(ex.lambda));
    let _ = writeln!(s, "g00 = {}", complex(ex.g00));
    let _ = writeln!(s, "v(0) = {}", complex(ex.coupling()));
    let _ = writeln!(s, "gamma = {}", num(ex.gamma));
    let _ = writeln!(s, "residual_max = {}", num(ex.residual_max));
    let _ = writeln!(s, "quadrature_error = {}", num(ex.quadrature_error));
    let _ = writeln!(s, "decay_slope = {}", num(rep.slope));
    let _ = writeln!(s, "fit_shells_used = {}", rep.fit.used);
    let _ = writeln!(s, "mu0 = {}", num(rep.mu0));
    let _ = writeln!(s, "log_lambda_rate = {}", num(rep.log_lambda_rate));
    let _ = writeln!(
        s,
        "rate_bracket = [{}, {}]",
        num(rep.rate.r_lower),
        num(rep.rate.r_upper)
    );
    let _ = writeln!(s, "sharpness_ratio = {}", num(rep.sharpness_ratio));
    let _ = writeln!(s, "dominance_ok = {}", rep.dominance_ok);
    let _ = writeln!(s, "free_match = {}", yes(rep.free_match));
    let _ = writeln!(s, "real_coupling = {}", yes(rep.real_coupling));
    let _ = writeln!(s, "passed = {}", rep.passed());
    s
}

/// `L, eigenvalue, boundary_mass_ratio, in_band` preceded by the report header.
pub fn write_probe<W: Write>(mut out: W, r: &ProbeReport) -> csv::Result<()> {
    writeln!(out, "# {}", r.header)?;
    writeln!(
        out,
        "# interval = ({}, {})",
        num(r.interval.0),
        num(r.interval.1)
    )?;
    let mut w = writer(out);
    w.write_record(["L", "eigenvalue", "boundary_mass_ratio", "in_band"])?;
    for row in &r.rows {
        w.write_record([
            row.half_width.to_string(),
            num(row.eigenvalue),
            num(row.boundary_mass),
            u8::from(row.in_band).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn probe_summary(r: &ProbeReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", r.header);
    for (l, m) in &r.min_in_band {
        match m {
            Some(m) => {
                let _ = writeln!(s, "L = {l}: min in-band boundary mass = {}", num(*m));
            }
            None => {
                let _ = writeln!(s, "L = {l}: no eigenvalue in the interval");
            }
        }
    }
    let _ = writeln!(
        s,
        "flagged below {} = {}",
        num(r.threshold),
        r.flagged.len()
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
