//! Lattice geometry, periodic potentials, impurities and direct application
//! of `H = −Δ + V + v` on finite boxes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::{cis, Error, Result, TAU};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Lattice norms used for shells and decay rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    /// `|n|₁ = Σ|n_j|`, the adjacency distance.
    L1,
    /// `‖n‖_max = max|n_j|`.
    #[default]
    Max,
}

impl Norm {
    pub fn of(self, n: &[i64]) -> u64 {
        match self {
            Norm::L1 => n.iter().map(|x| x.unsigned_abs()).sum(),
            Norm::Max => n.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0),
        }
    }
}

/// Axis-aligned box of sites `lo ≤ n ≤ hi` (inclusive), enumerated
/// lexicographically with the first axis slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl SiteBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Domain(format!(
                "box corners must share a positive dimension ({} vs {})",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Domain("box has an empty axis".into()));
        }
        Ok(SiteBox { lo, hi })
    }

    /// `{‖n‖_max ≤ half}` in dimension `dim`.
    pub fn centered(dim: usize, half: usize) -> Self {
        let h = half as i64;
        SiteBox {
            lo: vec![-h; dim],
            hi: vec![h; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn volume(&self) -> usize {
        (0..self.dim()).map(|a| self.extent(a)).product()
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        site.len() == self.dim()
            && site
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(s, (a, b))| a <= s && s <= b)
    }

    pub fn index_of(&self, site: &[i64]) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let mut idx = 0usize;
        for (axis, &s) in site.iter().enumerate() {
            idx = idx * self.extent(axis) + (s - self.lo[axis]) as usize;
        }
        Some(idx)
    }

    pub fn site_at(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut site = vec![0i64; d];
        for axis in (0..d).rev() {
            let e = self.extent(axis);
            site[axis] = self.lo[axis] + (idx % e) as i64;
            idx /= e;
        }
        site
    }

    pub fn sites(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.volume()).map(move |i| self.site_at(i))
    }

    /// The box with `margin` layers removed on every side, if non-empty.
    pub fn shrink(&self, margin: usize) -> Option<SiteBox> {
        let m = margin as i64;
        let lo: Vec<i64> = self.lo.iter().map(|a| a + m).collect();
        let hi: Vec<i64> = self.hi.iter().map(|b| b - m).collect();
        SiteBox::new(lo, hi).ok()
    }
}

/// `Γ`-periodic real potential, `Γ = q₁ℤ ⊕ … ⊕ q_dℤ`, stored on the
/// fundamental cell `W = ℤ^d ∩ Π[0, q_j)` in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPotential {
    periods: Vec<usize>,
    values: Vec<f64>,
}

impl PeriodicPotential {
    pub fn new(periods: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if periods.is_empty() || periods.contains(&0) {
            return Err(Error::Domain("periods must be positive and d ≥ 1".into()));
        }
        let q: usize = periods.iter().product();
        if values.len() != q {
            return Err(Error::Domain(format!(
                "potential needs {q} values on the fundamental cell, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("potential values must be finite".into()));
        }
        Ok(PeriodicPotential { periods, values })
    }

    /// `V ≡ 0` with period 1 in every direction.
    pub fn free(dim: usize) -> Self {
        PeriodicPotential {
            periods: vec![1; dim],
            values: vec![0.0],
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        PeriodicPotential {
            periods: vec![1; dim],
            values: vec![c],
        }
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[usize] {
        &self.periods
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Q = q₁⋯q_d`.
    pub fn cell_size(&self) -> usize {
        self.values.len()
    }

    pub fn cell_box(&self) -> SiteBox {
        SiteBox {
            lo: vec![0; self.dim()],
            hi: self.periods.iter().map(|&q| q as i64 - 1).collect(),
        }
    }

    /// Sites of `W` in storage order.
    pub fn cell_sites(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        let cell = self.cell_box();
        (0..self.cell_size()).map(move |i| cell.site_at(i))
    }

    /// Splits `n = j + m⊙q` with `j ∈ W`; returns (index of `j`, `m`).
    pub fn reduce(&self, site: &[i64]) -> (usize, Vec<i64>) {
        let mut idx = 0usize;
        let mut cell = Vec::with_capacity(self.dim());
        for (&s, &q) in site.iter().zip(&self.periods) {
            let q = q as i64;
            let j = s.rem_euclid(q);
            cell.push((s - j) / q);
            idx = idx * q as usize + j as usize;
        }
        (idx, cell)
    }

    pub fn at(&self, site: &[i64]) -> f64 {
        self.values[self.reduce(site).0]
    }

    pub fn shifted(&self, c: f64) -> Self {
        PeriodicPotential {
            periods: self.periods.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// `max|V|`, which is also the spectral norm of the fiber block `B`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Parametric impurity profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpurityFamily {
    /// `A·e^{−rate·‖n‖_max}`
    Exponential,
    /// `A·e^{−rate·‖n‖_max^γ}` with `γ > 1`
    SuperExponential,
}

/// Decaying, possibly complex perturbation `v`.
#[derive(Debug, Clone, PartialEq)]
pub enum Impurity {
    None,
    FiniteSupport(Vec<(Vec<i64>, Complex64)>),
    Parametric {
        family: ImpurityFamily,
        amplitude: Complex64,
        rate: f64,
        gamma: f64,
    },
}

impl Impurity {
    pub fn finite(entries: Vec<(Vec<i64>, Complex64)>) -> Result<Self> {
        for (i, (a, va)) in entries.iter().enumerate() {
            if !(va.re.is_finite() && va.im.is_finite()) {
                return Err(Error::Domain("impurity values must be finite".into()));
            }
            if entries[..i].iter().any(|(b, _)| b == a) {
                return Err(Error::Domain(format!("impurity site {a:?} listed twice")));
            }
        }
        Ok(Impurity::FiniteSupport(entries))
    }

    pub fn single_site(dim: usize, value: Complex64) -> Self {
        Impurity::FiniteSupport(vec![(vec![0; dim], value)])
    }

    pub fn exponential(amplitude: Complex64, rate: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::Domain("exponential impurity needs rate > 0".into()));
        }
        Ok(Impurity::Parametric {
            family: ImpurityFamily::Exponential,
            amplitude,
            rate,
            gamma: 1.0,
        })
    }

    pub fn super_exponential(amplitude: Complex64, rate: f64, gamma: f64) -> Result<Self> {
        if !(rate > 0.0 && gamma > 1.0) {
            return Err(Error::Domain(
                "super-exponential impurity needs rate > 0 and γ > 1".into(),
            ));
        }
        Ok(Impurity::Parametric {
            family: ImpurityFamily::SuperExponential,
            amplitude,
            rate,
            gamma,
        })
    }

    pub fn value(&self, site: &[i64]) -> Complex64 {
        match self {
            Impurity::None => ZERO,
            Impurity::FiniteSupport(entries) => entries
                .iter()
                .find(|(s, _)| s.as_slice() == site)
                .map(|(_, v)| *v)
                .unwrap_or(ZERO),
            Impurity::Parametric {
                family,
                amplitude,
                rate,
                gamma,
            } => {
                let r = Norm::Max.of(site) as f64;
                let e = match family {
                    ImpurityFamily::Exponential => rate * r,
                    ImpurityFamily::SuperExponential => rate * r.powf(*gamma),
                };
                amplitude * (-e).exp()
            }
        }
    }

    /// Certified `β` with `|v(n)| ≤ C e^{−β‖n‖_max}`; `∞` means every `β`.
    pub fn certified_rate(&self) -> f64 {
        match self {
            Impurity::Parametric {
                family: ImpurityFamily::Exponential,
                rate,
                ..
            } => *rate,
            _ => f64::INFINITY,
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Impurity::None => true,
            Impurity::FiniteSupport(entries) => entries.iter().all(|(_, v)| v.im == 0.0),
            Impurity::Parametric { amplitude, .. } => amplitude.im == 0.0,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Impurity::None => 0.0,
            Impurity::FiniteSupport(entries) => {
                entries.iter().fold(0.0, |m, (_, v)| m.max(v.norm()))
            }
            Impurity::Parametric { amplitude, .. } => amplitude.norm(),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if let Impurity::FiniteSupport(entries) = self {
            if let Some((s, _)) = entries.iter().find(|(s, _)| s.len() != dim) {
                return Err(Error::Domain(format!(
                    "impurity site {s:?} is not {dim}-dimensional"
                )));
            }
        }
        Ok(())
    }
}

/// Complex samples of a lattice function on a box; zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction {
    domain: SiteBox,
    data: Vec<Complex64>,
}

impl LatticeFunction {
    pub fn new(domain: SiteBox, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != domain.volume() {
            return Err(Error::Domain(format!(
                "box holds {} sites but {} values were given",
                domain.volume(),
                data.len()
            )));
        }
        if data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain(
                "lattice function values must be finite".into(),
            ));
        }
        Ok(LatticeFunction { domain, data })
    }

    pub fn zeros(domain: SiteBox) -> Self {
        let n = domain.volume();
        LatticeFunction {
            domain,
            data: vec![ZERO; n],
        }
    }

    pub fn from_fn(domain: SiteBox, mut f: impl FnMut(&[i64]) -> Complex64) -> Self {
        let data = domain.sites().map(|s| f(&s)).collect();
        LatticeFunction { domain, data }
    }

    pub fn delta(domain: SiteBox, at: &[i64]) -> Self {
        Self::from_fn(domain, |s| {
            if s == at {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        })
    }

    pub fn domain(&self) -> &SiteBox {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn get(&self, site: &[i64]) -> Complex64 {
        self.domain
            .index_of(site)
            .map(|i| self.data[i])
            .unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        self.domain.sites().zip(self.data.iter().copied())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `⟨self, other⟩` over the union of supports.
    pub fn inner(&self, other: &LatticeFunction) -> Complex64 {
        self.iter().map(|(s, a)| a.conj() * other.get(&s)).sum()
    }
}

/// `(Δu)(n) = Σ_{|n′−n|₁=1} u(n′)` on the interior of `u`'s box.
pub fn adjacency(u: &LatticeFunction) -> Result<LatticeFunction> {
    let interior = interior_of(u)?;
    let mut nb = vec![0i64; u.dim()];
    Ok(LatticeFunction::from_fn(interior, |n| {
        nb.copy_from_slice(n);
        neighbor_sum(u, &mut nb)
    }))
}

fn neighbor_sum(u: &LatticeFunction, nb: &mut [i64]) -> Complex64 {
    let mut acc = ZERO;
    for axis in 0..nb.len() {
        nb[axis] += 1;
        acc += u.get(nb);
        nb[axis] -= 2;
        acc += u.get(nb);
        nb[axis] += 1;
    }
    acc
}

fn interior_of(u: &LatticeFunction) -> Result<SiteBox> {
    u.domain.shrink(1).ok_or_else(|| {
        Error::Domain("box needs at least one interior site (extent ≥ 3 on every axis)".into())
    })
}

/// `r(n) = −(Δu)(n) + V(n)u(n) + v(n)u(n) − λu(n)` on the interior sub-box.
pub fn eigen_residual(
    potential: &PeriodicPotential,
    impurity: &Impurity,
    lambda: Complex64,
    u: &LatticeFunction,
) -> Result<LatticeFunction> {
    if potential.dim() != u.dim() {
        return Err(Error::Domain(format!(
            "potential is {}-dimensional, lattice function {}-dimensional",
            potential.dim(),
            u.dim()
        )));
    }
    impurity.check_dim(u.dim())?;
    let interior = interior_of(u)?;
    let mut nb = vec![0i64; u.dim()];
    Ok(LatticeFunction::from_fn(interior, |n| {
        nb.copy_from_slice(n);
        let un = u.get(n);
        -neighbor_sum(u, &mut nb) + un * (potential.at(n) + impurity.value(n) - lambda)
    }))
}

/// `V̂(l) = Q^{−1/2} Σ_{n∈W} V(n) e^{−2πi l·n}` for `l ∈ W*`, with `W*`
/// enumerated like `W` (entry `k` is `l = k/q`).
pub fn potential_dft(potential: &PeriodicPotential) -> Vec<Complex64> {
    let q = potential.periods();
    let cell = potential.cell_box();
    let norm = 1.0 / (potential.cell_size() as f64).sqrt();
    cell.sites()
        .map(|k| {
            potential
                .cell_sites()
                .zip(potential.values())
                .map(|(n, &v)| cis(-TAU * dot_over_q(&k, &n, q)) * v)
                .sum::<Complex64>()
                * norm
        })
        .collect()
}

/// `V(n) = Q^{−1/2} Σ_l V̂(l) e^{2πi l·n}` on `W`.
pub fn inverse_potential_dft(periods: &[usize], spectrum: &[Complex64]) -> Vec<Complex64> {
    let q: usize = periods.iter().product();
    assert_eq!(spectrum.len(), q, "spectrum size must equal the cell size");
    let cell = SiteBox {
        lo: vec![0; periods.len()],
        hi: periods.iter().map(|&p| p as i64 - 1).collect(),
    };
    let norm = 1.0 / (q as f64).sqrt();
    cell.sites()
        .map(|n| {
            cell.sites()
                .zip(spectrum)
                .map(|(k, &vh)| vh * cis(TAU * dot_over_q(&k, &n, periods)))
                .sum::<Complex64>()
                * norm
        })
        .collect()
}

/// `Σ_j k_j n_j / q_j`, reduced mod 1 per term for accuracy.
pub(crate) fn dot_over_q(k: &[i64], n: &[i64], q: &[usize]) -> f64 {
    k.iter()
        .zip(n)
        .zip(q)
        .map(|((&a, &b), &p)| (a * b).rem_euclid(p as i64) as f64 / p as f64)
        .sum()
}

/// Per-shell maximum of `|u|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellStat {
    pub radius: u64,
    pub max_abs: f64,
    pub sites: usize,
}

/// Least-squares decay fit of `ln max_{‖n‖=s}|u(n)|` against `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub norm: Norm,
    /// Estimates `−β`.
    pub slope: f64,
    pub intercept: f64,
    /// Slope between the last two usable shells.
    pub last_slope: f64,
    /// Every shell in the requested range, including unusable ones.
    pub shells: Vec<ShellStat>,
    pub used: usize,
}

/// Fits the exponential decay of `u` over the shell radii in `shells`.
///
/// Shells whose maximum is zero, or below `floor·max|u|` when `floor > 0`,
/// are excluded.
pub fn decay_rate_estimate(
    u: &LatticeFunction,
    norm: Norm,
    shells: RangeInclusive<u64>,
    floor: f64,
) -> Result<DecayFit> {
    let (s0, s1) = (*shells.start(), *shells.end());
    let mut stats: Vec<ShellStat> = (s0..=s1)
        .map(|radius| ShellStat {
            radius,
            max_abs: 0.0,
            sites: 0,
        })
        .collect();
    for (site, value) in u.iter() {
        let r = norm.of(&site);
        if r < s0 || r > s1 {
            continue;
        }
        let st = &mut stats[(r - s0) as usize];
        st.sites += 1;
        st.max_abs = st.max_abs.max(value.norm());
    }
    let threshold = if floor > 0.0 {
        floor * u.max_abs()
    } else {
        0.0
    };
    let pts: Vec<(f64, f64)> = stats
        .iter()
        .filter(|s| s.max_abs > 0.0 && s.max_abs > threshold)
        .map(|s| (s.radius as f64, s.max_abs.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            usable: pts.len(),
            needed: 3,
        });
    }
    let (slope, intercept) = least_squares(&pts);
    let (a, b) = (pts[pts.len() - 2], pts[pts.len() - 1]);
    let last_slope = (b.1 - a.1) / (b.0 - a.0);
    Ok(DecayFit {
        norm,
        slope,
        intercept,
        last_slope,
        used: pts.len(),
        shells: stats,
    })
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
