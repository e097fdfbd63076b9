//! Singular-value models `s_1 ≥ s_2 ≥ … → 0` and counting
//! `N(τ) = #{j : s_j > τ}`.
//!
//! Analytic models count in closed form and switch to a logarithmic
//! representation once the count exceeds the enumeration cap. Tensor-product
//! models count by pruned lattice enumeration and materialize individual
//! values by best-first search.

mod lattice;
mod univariate;

use std::fmt;
use std::path::Path;

use serde::Serialize;

pub use lattice::tensor_rearrange;
pub use univariate::Univariate;

use crate::error::{argument, capacity, domain, Result};
use lattice::{count_lattice, monotone_last_true};

/// Default enumeration cap for counting.
pub const DEFAULT_COUNT_CAP: u64 = 1_000_000_000;
/// Default number of tensor-product values that may be materialized.
pub const DEFAULT_MATERIALIZE_LIMIT: usize = 1_000_000;

static INTEGRATION: Univariate = Univariate::Integration;

/// Leading term `c(t)` of a power-decay family, evaluated at `t = 1/d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LeadingConstant {
    /// `c(t) = c̄`.
    Constant(f64),
    /// `c(t) = c̄·t`.
    Linear(f64),
    /// `c(t) = t^q` with `0 < q < 1`.
    SublinearPower(f64),
}

impl LeadingConstant {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            LeadingConstant::Constant(c) => c,
            LeadingConstant::Linear(c) => c * t,
            LeadingConstant::SublinearPower(q) => t.powf(q),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LeadingConstant::Constant(c) | LeadingConstant::Linear(c) if !(c.is_finite() && c > 0.0) => {
                Err(domain(format!("leading constant c̄ = {c} must be positive")))
            }
            LeadingConstant::SublinearPower(q) if !(q > 0.0 && q < 1.0) => {
                Err(domain(format!("sublinear exponent q = {q} must lie in (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for LeadingConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeadingConstant::Constant(c) => write!(f, "constant(c_bar={c})"),
            LeadingConstant::Linear(c) => write!(f, "linear(c_bar={c})"),
            LeadingConstant::SublinearPower(q) => write!(f, "sublinear(q={q})"),
        }
    }
}

/// A count that is either exact or, when it is astronomically large, known
/// through its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Count {
    Exact(u64),
    LogScale(f64),
}

/// Result of a counting query.
///
/// `cap_hit` is set when the true count exceeds the enumeration cap. Analytic
/// models then report `LogScale(log N)`; enumerative models report
/// `Exact(cap)`, a lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CountResult {
    pub count: Count,
    pub cap_hit: bool,
}

impl CountResult {
    pub fn exact(n: u64) -> Self {
        CountResult {
            count: Count::Exact(n),
            cap_hit: false,
        }
    }

    pub fn log_scale(log_n: f64) -> Self {
        CountResult {
            count: Count::LogScale(log_n),
            cap_hit: true,
        }
    }

    pub(crate) fn truncated(cap: u64) -> Self {
        CountResult {
            count: Count::Exact(cap),
            cap_hit: true,
        }
    }

    /// The exact value, if it is known and below the cap.
    pub fn exact_value(&self) -> Option<u64> {
        match self.count {
            Count::Exact(n) if !self.cap_hit => Some(n),
            _ => None,
        }
    }

    /// Natural logarithm of the count; `-∞` for zero.
    pub fn ln(&self) -> f64 {
        match self.count {
            Count::Exact(0) => f64::NEG_INFINITY,
            Count::Exact(n) => (n as f64).ln(),
            Count::LogScale(l) => l,
        }
    }

    pub fn is_log_scale(&self) -> bool {
        matches!(self.count, Count::LogScale(_))
    }

    /// Applies a lower floor to exact counts.
    pub fn at_least(self, floor: u64) -> Self {
        match self.count {
            Count::Exact(n) if n < floor => CountResult {
                count: Count::Exact(floor),
                ..self
            },
            _ => self,
        }
    }
}

impl fmt::Display for CountResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.count, self.cap_hit) {
            (Count::Exact(n), false) => write!(f, "{n}"),
            (Count::Exact(n), true) => write!(f, ">{n}"),
            (Count::LogScale(l), _) => write!(f, "exp({l})"),
        }
    }
}

/// Power-type decay `s_j = c(1/d)·j^(-a/d)`.
///
/// `m` and `big_m` are the bracketing constants of the two-sided model
/// `m·c(1/d)·j^(-a/d) ≤ s_j ≤ M·c(1/d)·j^(-a/d)`; the values themselves use
/// the baseline scaling one, so `m ≤ 1 ≤ M`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerDecay {
    pub a: f64,
    pub d: u32,
    pub leading: LeadingConstant,
    pub m: f64,
    pub big_m: f64,
}

impl PowerDecay {
    pub fn new(a: f64, d: u32, leading: LeadingConstant) -> Self {
        PowerDecay {
            a,
            d,
            leading,
            m: 1.0,
            big_m: 1.0,
        }
    }

    pub fn with_bounds(mut self, m: f64, big_m: f64) -> Self {
        self.m = m;
        self.big_m = big_m;
        self
    }

    /// `c(1/d)`.
    pub fn leading_value(&self) -> f64 {
        self.leading.eval(1.0 / self.d as f64)
    }

    fn exponent(&self) -> f64 {
        self.a / self.d as f64
    }

    /// Two-sided bracket for `k*` given the threshold `Θ⁻¹(δ)`:
    /// `(m²c²/Θ⁻¹(δ))^(d/2a) - 1 ≤ k* ≤ (M²c²/Θ⁻¹(δ))^(d/2a) + 1`.
    pub fn kstar_bracket(&self, theta_inv: f64) -> (f64, f64) {
        let c = self.leading_value();
        let p = self.d as f64 / (2.0 * self.a);
        let lo = (self.m * self.m * c * c / theta_inv).powf(p) - 1.0;
        let hi = (self.big_m * self.big_m * c * c / theta_inv).powf(p) + 1.0;
        (lo, hi)
    }

    fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(domain(format!("decay power a = {} must be positive", self.a)));
        }
        if self.d == 0 {
            return Err(domain("dimension d must be at least 1"));
        }
        self.leading.validate()?;
        if !(self.m > 0.0 && self.m <= 1.0 && self.big_m >= 1.0 && self.big_m.is_finite()) {
            return Err(domain(format!(
                "bracketing constants must satisfy 0 < m ≤ 1 ≤ M, got m = {}, M = {}",
                self.m, self.big_m
            )));
        }
        Ok(())
    }
}

/// The singular-value models.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumKind {
    PowerDecay(PowerDecay),
    /// `s_j = 1/log(j+1)`.
    LogDecay,
    /// Non-increasing rearrangement of `{∏_{i=1}^d σ_{k_i}}`.
    TensorProduct {
        univariate: Univariate,
        d: u32,
    },
    /// The `d`-variate mixed integration operator on the unit cube, the tensor
    /// power of `σ_j = 2/((2j-1)π)`.
    MixedIntegration {
        d: u32,
    },
    /// `s_j = c̄·(e/(d-1))^(d-1)·log^(d-1)(j)/j`, held at its maximum for
    /// indices before the peak near `e^(d-1)` so the sequence is non-increasing.
    LowerBoundSpeed {
        c_bar: f64,
        d: u32,
    },
    /// A finite non-increasing list. With `zero_tail` the operator has finite
    /// rank; otherwise values beyond the list are unknown.
    Explicit {
        values: Vec<f64>,
        zero_tail: bool,
    },
}

/// A validated singular-value sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    kind: SpectrumKind,
    materialize_limit: usize,
    // Integer maximizer of log^(d-1)(j)/j, LowerBoundSpeed only.
    peak: u64,
}

impl Spectrum {
    pub fn new(kind: SpectrumKind) -> Result<Self> {
        let mut peak = 1;
        match &kind {
            SpectrumKind::PowerDecay(p) => p.validate()?,
            SpectrumKind::LogDecay => {}
            SpectrumKind::TensorProduct { univariate, d } => {
                univariate.validate()?;
                if *d == 0 {
                    return Err(domain("dimension d must be at least 1"));
                }
            }
            SpectrumKind::MixedIntegration { d } => {
                if *d == 0 {
                    return Err(domain("dimension d must be at least 1"));
                }
            }
            SpectrumKind::LowerBoundSpeed { c_bar, d } => {
                if !(c_bar.is_finite() && *c_bar > 0.0) {
                    return Err(domain(format!("c̄ = {c_bar} must be positive")));
                }
                if *d < 2 {
                    return Err(domain("the lower-bound model needs d ≥ 2"));
                }
                peak = lower_bound_peak(*d);
            }
            SpectrumKind::Explicit { values, .. } => univariate::check_non_increasing(values)?,
        }
        Ok(Spectrum {
            kind,
            materialize_limit: DEFAULT_MATERIALIZE_LIMIT,
            peak,
        })
    }

    pub fn power_decay(a: f64, d: u32, leading: LeadingConstant) -> Result<Self> {
        Self::new(SpectrumKind::PowerDecay(PowerDecay::new(a, d, leading)))
    }

    pub fn log_decay() -> Self {
        Self::new(SpectrumKind::LogDecay).unwrap()
    }

    pub fn tensor_product(univariate: Univariate, d: u32) -> Result<Self> {
        Self::new(SpectrumKind::TensorProduct { univariate, d })
    }

    pub fn mixed_integration(d: u32) -> Result<Self> {
        Self::new(SpectrumKind::MixedIntegration { d })
    }

    pub fn lower_bound_speed(c_bar: f64, d: u32) -> Result<Self> {
        Self::new(SpectrumKind::LowerBoundSpeed { c_bar, d })
    }

    pub fn explicit(values: Vec<f64>, zero_tail: bool) -> Result<Self> {
        Self::new(SpectrumKind::Explicit { values, zero_tail })
    }

    /// Reads an explicit spectrum from a one-column CSV file. A non-numeric
    /// first row is treated as a header.
    pub fn explicit_from_csv(path: impl AsRef<Path>, zero_tail: bool) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        let mut values = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let field = rec.get(0).unwrap_or("");
            match field.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if i == 0 => continue,
                Err(_) => {
                    return Err(crate::Error::Config(format!(
                        "{}: row {} is not a number: {field:?}",
                        path.as_ref().display(),
                        i + 1
                    )))
                }
            }
        }
        Self::explicit(values, zero_tail)
    }

    pub fn with_materialize_limit(mut self, limit: usize) -> Self {
        self.materialize_limit = limit;
        self
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    pub fn materialize_limit(&self) -> usize {
        self.materialize_limit
    }

    /// `true` for an explicit list with a zero tail.
    pub fn has_finite_rank(&self) -> bool {
        matches!(self.kind, SpectrumKind::Explicit { zero_tail: true, .. })
    }

    fn tensor_parts(&self) -> Option<(&Univariate, u32)> {
        match &self.kind {
            SpectrumKind::TensorProduct { univariate, d } => Some((univariate, *d)),
            SpectrumKind::MixedIntegration { d } => Some((&INTEGRATION, *d)),
            _ => None,
        }
    }

    /// Closed-form value for the analytic models.
    fn analytic_value(&self, j: u64) -> Option<f64> {
        match &self.kind {
            SpectrumKind::PowerDecay(p) => Some(p.leading_value() * (j as f64).powf(-p.exponent())),
            SpectrumKind::LogDecay => Some(1.0 / (j as f64).ln_1p()),
            SpectrumKind::LowerBoundSpeed { c_bar, d } => {
                let jj = j.max(self.peak) as f64;
                Some(lower_bound_log(*c_bar, *d, jj.ln()).exp())
            }
            _ => None,
        }
    }

    /// `ln s(e^u)` for the continuous extension of the analytic models.
    fn analytic_log_value(&self, u: f64) -> Option<f64> {
        match &self.kind {
            SpectrumKind::PowerDecay(p) => Some(p.leading_value().ln() - p.exponent() * u),
            SpectrumKind::LogDecay => Some(-(u + (-u).exp().ln_1p()).ln()),
            SpectrumKind::LowerBoundSpeed { c_bar, d } => {
                Some(lower_bound_log(*c_bar, *d, u.max((self.peak as f64).ln())))
            }
            _ => None,
        }
    }

    /// The `j`-th singular value, `j ≥ 1`.
    pub fn singular_value(&self, j: u64) -> Result<f64> {
        if j == 0 {
            return Err(argument("singular values are indexed from 1"));
        }
        if let Some(v) = self.analytic_value(j) {
            return Ok(v);
        }
        if let Some((u, d)) = self.tensor_parts() {
            if j > self.materialize_limit as u64 {
                return Err(capacity(format!(
                    "index {j} beyond the materialization limit {}; use count_above",
                    self.materialize_limit
                )));
            }
            let v = tensor_rearrange(u, d, j as usize, self.materialize_limit)?;
            return Ok(v.get(j as usize - 1).copied().unwrap_or(0.0));
        }
        match &self.kind {
            SpectrumKind::Explicit { values, zero_tail } => match values.get(j as usize - 1) {
                Some(&v) => Ok(v),
                None if *zero_tail => Ok(0.0),
                None => Err(capacity(format!(
                    "explicit spectrum is only known up to index {}",
                    values.len()
                ))),
            },
            _ => unreachable!(),
        }
    }

    /// The first `n` singular values.
    pub fn prefix(&self, n: usize) -> Result<Vec<f64>> {
        if let Some((u, d)) = self.tensor_parts() {
            let mut v = tensor_rearrange(u, d, n, self.materialize_limit)?;
            v.resize(n, 0.0);
            return Ok(v);
        }
        (1..=n as u64).map(|j| self.singular_value(j)).collect()
    }

    /// `#{j : s_j > τ}`.
    pub fn count_above(&self, tau: f64, cap: u64) -> Result<CountResult> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(domain(format!("threshold τ = {tau} must be positive and finite")));
        }
        let res = match &self.kind {
            SpectrumKind::PowerDecay(p) => {
                let c = p.leading_value();
                let log_x = (c / tau).ln() / p.exponent();
                // s_j > τ  ⟺  j < x
                self.closed_form_count(log_x, |x| (x.ceil() as u64).saturating_sub(1), tau, cap)
            }
            SpectrumKind::LogDecay => {
                // 1/log(j+1) > τ  ⟺  j < e^(1/τ) - 1
                let inv = 1.0 / tau;
                let log_x = inv + (-(-inv).exp_m1()).ln();
                let guess = |_x: f64| (inv.exp().floor() as u64).saturating_sub(1);
                self.closed_form_count(log_x, guess, tau, cap)
            }
            SpectrumKind::LowerBoundSpeed { .. } => {
                if self.analytic_value(1).unwrap() <= tau {
                    CountResult::exact(0)
                } else {
                    let log_tau = tau.ln();
                    let u = self.continuous_root(|l| l > log_tau, cap);
                    self.closed_form_count(u, |x| x.floor() as u64, tau, cap)
                }
            }
            SpectrumKind::TensorProduct { .. } | SpectrumKind::MixedIntegration { .. } => {
                let (u, d) = self.tensor_parts().unwrap();
                let c = count_lattice(u, d, &|v| v > tau, cap);
                if c.cap_hit {
                    CountResult::truncated(cap)
                } else {
                    CountResult::exact(c.count)
                }
            }
            SpectrumKind::Explicit { values, zero_tail } => explicit_count(values, *zero_tail, |s| s > tau, cap),
        };
        Ok(res)
    }

    /// Counts the initial segment of indices whose singular value satisfies a
    /// monotone predicate (`pred(s)` and `s' ≥ s` imply `pred(s')`), by direct
    /// evaluation of the values rather than through a threshold.
    pub fn count_satisfying(&self, pred: impl Fn(f64) -> bool, cap: u64) -> Result<CountResult> {
        if let Some((u, d)) = self.tensor_parts() {
            let c = count_lattice(u, d, &pred, cap);
            return Ok(if c.cap_hit {
                CountResult::truncated(cap)
            } else {
                CountResult::exact(c.count)
            });
        }
        if let SpectrumKind::Explicit { values, zero_tail } = &self.kind {
            return Ok(explicit_count(values, *zero_tail, &pred, cap));
        }
        let holds = |k: u64| pred(self.analytic_value(k).unwrap());
        match monotone_last_true(holds, Some(cap.saturating_add(1))) {
            Some(n) if n <= cap => Ok(CountResult::exact(n)),
            _ => {
                let u = self.continuous_root(|l| pred(l.exp()), cap);
                Ok(CountResult::log_scale(u))
            }
        }
    }

    /// Largest `u ≥ ln(cap)` with `holds(ln s(e^u))`, by bisection on the
    /// continuous extension. The analytic models are decreasing there.
    fn continuous_root(&self, holds: impl Fn(f64) -> bool, cap: u64) -> f64 {
        let f = |u: f64| holds(self.analytic_log_value(u).unwrap());
        let mut lo = 0.0f64;
        if let SpectrumKind::LowerBoundSpeed { .. } = self.kind {
            lo = (self.peak as f64).ln();
        }
        let start = (cap as f64).ln().max(lo);
        if f(start) {
            lo = start;
        }
        let mut hi = lo.max(1.0) * 2.0;
        while f(hi) {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Shared tail of the analytic counts: `log_x` is the log of the
    /// continuous crossing point and `guess` maps it to an integer estimate
    /// that is corrected by evaluating the values around it.
    fn closed_form_count(&self, log_x: f64, guess: impl Fn(f64) -> u64, tau: f64, cap: u64) -> CountResult {
        if !(log_x > f64::NEG_INFINITY) || log_x.is_nan() {
            return CountResult::exact(0);
        }
        if log_x > ((cap as f64) + 3.0).ln() {
            return CountResult::log_scale(log_x);
        }
        let sv = |j: u64| self.analytic_value(j).unwrap();
        let mut n = if log_x <= 0.0 { 0 } else { guess(log_x.exp()) };
        while n >= 1 && sv(n) <= tau {
            n -= 1;
        }
        while sv(n + 1) > tau {
            n += 1;
        }
        if n > cap {
            CountResult::log_scale((n as f64).ln())
        } else {
            CountResult::exact(n)
        }
    }

    /// `-log(s_j)/log(j)`, whose limit is the degree of ill-posedness.
    pub fn ill_posedness_ratio(&self, j: u64) -> Result<f64> {
        if j < 2 {
            return Err(argument("the ill-posedness ratio needs j ≥ 2"));
        }
        Ok(-self.singular_value(j)?.ln() / (j as f64).ln())
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpectrumKind::PowerDecay(p) => write!(
                f,
                "power_decay(a={}, d={}, c={}, m={}, M={})",
                p.a, p.d, p.leading, p.m, p.big_m
            ),
            SpectrumKind::LogDecay => write!(f, "log_decay"),
            SpectrumKind::TensorProduct { univariate, d } => {
                write!(f, "tensor_product({}, d={d})", univariate.name())
            }
            SpectrumKind::MixedIntegration { d } => write!(f, "mixed_integration(d={d})"),
            SpectrumKind::LowerBoundSpeed { c_bar, d } => {
                write!(f, "lower_bound_speed(c_bar={c_bar}, d={d})")
            }
            SpectrumKind::Explicit { values, zero_tail } => {
                write!(f, "explicit({} values, zero_tail={zero_tail})", values.len())
            }
        }
    }
}

fn explicit_count(values: &[f64], zero_tail: bool, pred: impl Fn(f64) -> bool, cap: u64) -> CountResult {
    let n = values.partition_point(|&s| pred(s)) as u64;
    if n > cap || (n == values.len() as u64 && !zero_tail) {
        CountResult::truncated(n.min(cap))
    } else {
        CountResult::exact(n)
    }
}

/// `ln( c̄·(e/(d-1))^(d-1)·log^(d-1)(x)/x )` at `ln x = lx`.
fn lower_bound_log(c_bar: f64, d: u32, lx: f64) -> f64 {
    let k = (d - 1) as f64;
    c_bar.ln() + k * (1.0 - k.ln()) + k * lx.ln() - lx
}

fn lower_bound_peak(d: u32) -> u64 {
    let k = (d - 1) as f64;
    let g = |j: u64| k * (j as f64).ln().ln() - (j as f64).ln();
    let x = k.exp();
    let lo = (x.floor() as u64).max(2);
    let hi = (x.ceil() as u64).max(2);
    if g(hi) > g(lo) {
        hi
    } else {
        lo
    }
}

/// Sample statistics of `s_j·j/log^(d-1)(j)` for the mixed integration
/// spectrum, an empirical estimate of the leading constant `C(d)`.
///
/// Convergence in `j` is logarithmic, so the spread is reported alongside the
/// median instead of a single converged value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeadingConstantEstimate {
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

pub fn estimate_leading_constant(d: u32, j_min: u64, j_max: u64) -> Result<LeadingConstantEstimate> {
    if d == 0 {
        return Err(argument("dimension d must be at least 1"));
    }
    if j_min == 0 || (d >= 2 && j_min < 2) {
        return Err(argument("j_min must be ≥ 1, and ≥ 2 when d ≥ 2 (log 1 = 0)"));
    }
    if j_max < j_min || j_max - j_min + 1 < 10 {
        return Err(argument(format!(
            "range [{j_min}, {j_max}] has fewer than 10 sample points"
        )));
    }
    let spec = Spectrum::mixed_integration(d)?;
    if j_max > spec.materialize_limit as u64 {
        return Err(capacity(format!(
            "j_max = {j_max} beyond the materialization limit {}",
            spec.materialize_limit
        )));
    }
    let values = spec.prefix(j_max as usize)?;
    let mut samples: Vec<f64> = (j_min..=j_max)
        .map(|j| {
            let s = values[j as usize - 1];
            s * j as f64 / (j as f64).ln().powi(d as i32 - 1)
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let q = |p: f64| samples[((samples.len() - 1) as f64 * p).round() as usize];
    Ok(LeadingConstantEstimate {
        median: median_sorted(&samples),
        lower_quartile: q(0.25),
        upper_quartile: q(0.75),
        min: samples[0],
        max: *samples.last().unwrap(),
        samples: samples.len(),
    })
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// The asymptotic constant `C(d) = 1/((d-1)!·π^d)` of the mixed integration
/// spectrum.
pub fn mixed_integration_constant(d: u32) -> f64 {
    let fact: f64 = (1..d).map(f64::from).product();
    1.0 / (fact * std::f64::consts::PI.powi(d as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn scan(spec: &Spectrum, tau: f64, limit: u64) -> u64 {
        (1..=limit).filter(|&j| spec.singular_value(j).unwrap() > tau).count() as u64
    }

    #[test]
    fn power_decay_values_and_counts() {
        let s = Spectrum::power_decay(1.0, 1, LeadingConstant::Constant(1.0)).unwrap();
        assert_eq!(s.singular_value(4).unwrap(), 0.25);
        assert_eq!(s.count_above(0.1, DEFAULT_COUNT_CAP).unwrap(), CountResult::exact(9));
        assert_eq!(scan(&s, 0.1, 20), 9);
    }

    #[test]
    fn log_decay_count() {
        let s = Spectrum::log_decay();
        assert_eq!(s.count_above(0.2, DEFAULT_COUNT_CAP).unwrap(), CountResult::exact(147));
        assert_eq!(scan(&s, 0.2, 400), 147);
    }

    #[test]
    fn log_decay_log_scale() {
        let s = Spectrum::log_decay();
        let c = s.count_above(0.01, DEFAULT_COUNT_CAP).unwrap();
        assert!(c.cap_hit);
        assert!((c.ln() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn tensor_examples() {
        let s = Spectrum::tensor_product(Univariate::geometric(0.5).unwrap(), 2).unwrap();
        assert_eq!(s.prefix(6).unwrap(), vec![1.0, 0.5, 0.5, 0.25, 0.25, 0.25]);
        assert_eq!(s.count_above(0.3, 100).unwrap(), CountResult::exact(3));
        let m = Spectrum::mixed_integration(1).unwrap();
        assert!((m.singular_value(1).unwrap() - 2.0 / PI).abs() < 1e-15);
        let m2 = Spectrum::mixed_integration(2).unwrap();
        let v = m2.prefix(3).unwrap();
        let (a, b) = (2.0 / PI, 2.0 / (3.0 * PI));
        assert!((v[0] - a * a).abs() < 1e-16);
        assert!((v[1] - a * b).abs() < 1e-16);
        assert_eq!(v[1], v[2]);
    }

    #[test]
    fn tensor_capacity() {
        let s = Spectrum::mixed_integration(2).unwrap().with_materialize_limit(10);
        assert!(matches!(s.singular_value(11), Err(crate::Error::Capacity(_))));
        assert!(s.singular_value(10).is_ok());
    }

    #[test]
    fn lower_bound_speed_is_monotone_and_dominates() {
        for d in 2..=6 {
            let s = Spectrum::lower_bound_speed(1.0, d).unwrap();
            let k = (d - 1) as f64;
            let raw = |j: u64| (E / k).powf(k) * (j as f64).ln().powf(k) / j as f64;
            let mut prev = f64::INFINITY;
            for j in 1..3000 {
                let v = s.singular_value(j).unwrap();
                assert!(v <= prev);
                if j >= 2 {
                    assert!(v >= raw(j) * (1.0 - 1e-12), "d={d} j={j}");
                }
                prev = v;
            }
        }
    }

    #[test]
    fn lower_bound_speed_counts() {
        let s = Spectrum::lower_bound_speed(1.0, 4).unwrap();
        for &tau in &[0.5, 0.2, 0.05, 0.01] {
            let c = s.count_above(tau, DEFAULT_COUNT_CAP).unwrap();
            assert_eq!(c.exact_value().unwrap(), scan(&s, tau, 200_000), "tau = {tau}");
        }
        let big = s.count_above(1e-9, 1000).unwrap();
        assert!(big.is_log_scale() && big.cap_hit);
    }

    #[test]
    fn explicit_counts() {
        let s = Spectrum::explicit(vec![1.0, 0.5, 0.25], true).unwrap();
        assert_eq!(s.count_above(0.3, 10).unwrap(), CountResult::exact(2));
        assert_eq!(s.count_above(0.1, 10).unwrap(), CountResult::exact(3));
        assert_eq!(s.singular_value(5).unwrap(), 0.0);
        let open = Spectrum::explicit(vec![1.0, 0.5, 0.25], false).unwrap();
        let c = open.count_above(0.1, 10).unwrap();
        assert!(c.cap_hit);
        assert!(open.singular_value(4).is_err());
        assert!(Spectrum::explicit(vec![0.5, 1.0], false).is_err());
    }

    #[test]
    fn explicit_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "s\n1.0\n0.5\n0.1\n").unwrap();
        let s = Spectrum::explicit_from_csv(&path, true).unwrap();
        assert_eq!(s.prefix(3).unwrap(), vec![1.0, 0.5, 0.1]);
        std::fs::write(&path, "1.0\nabc\n").unwrap();
        assert!(Spectrum::explicit_from_csv(&path, true).is_err());
    }

    #[test]
    fn invalid_threshold() {
        let s = Spectrum::log_decay();
        assert!(s.count_above(0.0, 10).is_err());
        assert!(s.count_above(f64::NAN, 10).is_err());
        assert!(s.singular_value(0).is_err());
    }

    #[test]
    fn invalid_models() {
        assert!(Spectrum::power_decay(0.0, 1, LeadingConstant::Constant(1.0)).is_err());
        assert!(Spectrum::power_decay(1.0, 0, LeadingConstant::Constant(1.0)).is_err());
        assert!(Spectrum::power_decay(1.0, 1, LeadingConstant::SublinearPower(1.5)).is_err());
        assert!(Spectrum::lower_bound_speed(1.0, 1).is_err());
        let bad = PowerDecay::new(1.0, 1, LeadingConstant::Constant(1.0)).with_bounds(2.0, 3.0);
        assert!(Spectrum::new(SpectrumKind::PowerDecay(bad)).is_err());
    }

    #[test]
    fn leading_constant_estimate() {
        let e = estimate_leading_constant(1, 100, 1000).unwrap();
        assert!((e.median * PI - 1.0).abs() < 0.02);
        assert!((e.min * PI - 1.0).abs() < 0.02 && (e.max * PI - 1.0).abs() < 0.02);
        assert!(estimate_leading_constant(1, 50, 50).is_err());
        assert!(estimate_leading_constant(2, 1, 100).is_err());
    }

    #[test]
    fn constant_values() {
        assert!((mixed_integration_constant(1) - 1.0 / PI).abs() < 1e-15);
        assert!((mixed_integration_constant(2) - 1.0 / (PI * PI)).abs() < 1e-15);
        assert!((mixed_integration_constant(3) - 1.0 / (2.0 * PI.powi(3))).abs() < 1e-15);
    }
}
