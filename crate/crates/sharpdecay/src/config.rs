//! Problem files: a periodic potential plus an optional impurity, in TOML.
//!
//! ```toml
//! dim = 1
//! periods = [2]
//! values = [0.0, 2.0]
//!
//! [impurity]
//! support = [[0, 1.5, 0.0]]          # site..., re, im
//!
//! # or a parametric profile
//! [impurity.family]
//! type = "superexp"                  # exp | superexp
//! amplitude = 5.0                    # or [re, im]
//! rate = 1.0
//! gamma = 2.0
//! ```

use std::path::Path;

use serde::Deserialize;
use sharpdecay_core::lattice::{Impurity, PeriodicPotential};
use sharpdecay_core::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("field `{field}`: {message}")]
    Field {
        field: &'static str,
        message: String,
    },
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    dim: usize,
    periods: Vec<usize>,
    values: Vec<f64>,
    impurity: Option<RawImpurity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImpurity {
    support: Option<Vec<Vec<f64>>>,
    family: Option<RawFamily>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    #[serde(rename = "type")]
    kind: FamilyKind,
    amplitude: Amplitude,
    rate: f64,
    gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FamilyKind {
    Exp,
    Superexp,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

/// A validated problem: `H = −Δ + V + v` on `ℤ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub potential: PeriodicPotential,
    pub impurity: Impurity,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawProblem = toml::from_str(text)?;
        raw.validate()
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }
}

impl RawProblem {
    fn validate(self) -> Result<Problem, ConfigError> {
        if self.dim == 0 {
            return Err(field("dim", "must be at least 1"));
        }
        if self.periods.len() != self.dim {
            return Err(field(
                "periods",
                format!(
                    "expected {} entries, found {}",
                    self.dim,
                    self.periods.len()
                ),
            ));
        }
        if self.periods.contains(&0) {
            return Err(field("periods", "periods must be positive"));
        }
        let q: usize = self.periods.iter().product();
        if self.values.len() != q {
            return Err(field(
                "values",
                format!(
                    "expected {q} values (one per cell site), found {}",
                    self.values.len()
                ),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(field("values", "values must be finite"));
        }
        let potential = PeriodicPotential::new(self.periods, self.values)
            .map_err(|e| field("values", e.to_string()))?;
        let impurity = match self.impurity {
            None => Impurity::None,
            Some(raw) => raw.validate(self.dim)?,
        };
        Ok(Problem {
            potential,
            impurity,
        })
    }
}

impl RawImpurity {
    fn validate(self, dim: usize) -> Result<Impurity, ConfigError> {
        match (self.support, self.family) {
            (Some(_), Some(_)) => Err(field(
                "impurity",
                "give either `support` or `family`, not both",
            )),
            (None, None) => Ok(Impurity::None),
            (Some(rows), None) => {
                let mut entries = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != dim + 2 {
                        return Err(field(
                            "impurity.support",
                            format!("entry {i}: expected {dim} site coordinates then re, im ({} numbers)", dim + 2),
                        ));
                    }
                    let mut site = Vec::with_capacity(dim);
                    for &s in &row[..dim] {
                        if s.fract() != 0.0 || !s.is_finite() {
                            return Err(field(
                                "impurity.support",
                                format!("entry {i}: site coordinate {s} is not an integer"),
                            ));
                        }
                        site.push(s as i64);
                    }
                    entries.push((site, Complex64::new(row[dim], row[dim + 1])));
                }
                Impurity::finite(entries).map_err(|e| field("impurity.support", e.to_string()))
            }
            (None, Some(f)) => {
                let amplitude = match f.amplitude {
                    Amplitude::Real(a) => Complex64::new(a, 0.0),
                    Amplitude::Complex([re, im]) => Complex64::new(re, im),
                };
                let built = match f.kind {
                    FamilyKind::Exp => {
                        if f.gamma.is_some() {
                            return Err(field("impurity.family.gamma", "only used by `superexp`"));
                        }
                        Impurity::exponential(amplitude, f.rate)
                    }
                    FamilyKind::Superexp => {
                        let gamma = f.gamma.ok_or_else(|| {
                            field("impurity.family.gamma", "required for `superexp`")
                        })?;
                        Impurity::super_exponential(amplitude, f.rate, gamma)
                    }
                };
                built.map_err(|e| field("impurity.family", e.to_string()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimer_with_site_impurity() {
        let p = Problem::from_toml(
            "dim = 1\nperiods = [2]\nvalues = [0.0, 2.0]\n[impurity]\nsupport = [[0, 1.5, 0.0]]\n",
        )
        .unwrap();
        assert_eq!(p.potential.values(), &[0.0, 2.0]);
        assert_eq!(p.impurity.value(&[0]), Complex64::new(1.5, 0.0));
    }

    #[test]
    fn family_with_complex_amplitude() {
        let p = Problem::from_toml(
            "dim = 2\nperiods = [1, 1]\nvalues = [0.0]\n[impurity.family]\ntype = \"exp\"\namplitude = [1.0, -0.5]\nrate = 0.4\n",
        )
        .unwrap();
        assert!(!p.impurity.is_real());
        assert!((p.impurity.certified_rate() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn wrong_value_count_names_the_field() {
        let err = Problem::from_toml("dim = 1\nperiods = [3]\nvalues = [0.0, 1.0]\n").unwrap_err();
        assert!(err.to_string().starts_with("field `values`"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = Problem::from_toml("dim = 1\nperiods = [1\nvalues = [0.0]\n").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err =
            Problem::from_toml("dim = 1\nperiods = [1]\nvalues = [0.0]\nperiod = 2\n").unwrap_err();
        assert!(err.to_string().contains("period"), "{err}");
    }
}
