//! Discretization levels `k*(δ,d)`, the quotient `Q(δ,d)` and empirical
//! tractability verdicts over `(δ,d)` grids.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{argument, domain, Error, Result};
use crate::index_fn::IndexFunction;
use crate::spectrum::{
    CountResult, LeadingConstant, PowerDecay, Spectrum, SpectrumKind, Univariate, DEFAULT_MATERIALIZE_LIMIT,
};

/// Relative width of the threshold sandwich used to detect values that sit
/// on the `k*` boundary within the accuracy of `Θ⁻¹`.
const BOUNDARY_REL: f64 = 1.0e-9;

/// Companion values within this relative distance above `δ` count as ties
/// and do not exceed it, so that exact ties such as `Θ(0.1²) = 0.01` are not
/// decided by rounding.
pub const TIE_REL: f64 = 1.0e-10;

/// Dimension-indexed singular-value model, `d ↦ A_d`.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumModel {
    PowerDecay {
        a: f64,
        leading: LeadingConstant,
        m: f64,
        big_m: f64,
    },
    /// The same logarithmic spectrum for every `d`.
    LogDecay,
    TensorProduct {
        univariate: Univariate,
    },
    MixedIntegration,
    LowerBoundSpeed {
        c_bar: f64,
    },
    /// The same explicit list for every `d`.
    Explicit {
        values: Vec<f64>,
        zero_tail: bool,
    },
}

impl SpectrumModel {
    pub fn power_decay(a: f64, leading: LeadingConstant) -> Self {
        SpectrumModel::PowerDecay {
            a,
            leading,
            m: 1.0,
            big_m: 1.0,
        }
    }

    /// Smallest dimension the model is defined for.
    pub fn min_dim(&self) -> u32 {
        match self {
            SpectrumModel::LowerBoundSpeed { .. } => 2,
            _ => 1,
        }
    }

    /// The spectrum of `A_d`.
    pub fn at(&self, d: u32) -> Result<Spectrum> {
        let kind = match self {
            SpectrumModel::PowerDecay { a, leading, m, big_m } => {
                SpectrumKind::PowerDecay(PowerDecay::new(*a, d, *leading).with_bounds(*m, *big_m))
            }
            SpectrumModel::LogDecay => SpectrumKind::LogDecay,
            SpectrumModel::TensorProduct { univariate } => SpectrumKind::TensorProduct {
                univariate: univariate.clone(),
                d,
            },
            SpectrumModel::MixedIntegration => SpectrumKind::MixedIntegration { d },
            SpectrumModel::LowerBoundSpeed { c_bar } => SpectrumKind::LowerBoundSpeed { c_bar: *c_bar, d },
            SpectrumModel::Explicit { values, zero_tail } => SpectrumKind::Explicit {
                values: values.clone(),
                zero_tail: *zero_tail,
            },
        };
        Spectrum::new(kind)
    }
}

impl fmt::Display for SpectrumModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumModel::PowerDecay { a, leading, m, big_m } => {
                write!(f, "power_decay(a={a}, c={leading}, m={m}, M={big_m})")
            }
            SpectrumModel::LogDecay => write!(f, "log_decay"),
            SpectrumModel::TensorProduct { univariate } => write!(f, "tensor_product({})", univariate.name()),
            SpectrumModel::MixedIntegration => write!(f, "mixed_integration"),
            SpectrumModel::LowerBoundSpeed { c_bar } => write!(f, "lower_bound_speed(c_bar={c_bar})"),
            SpectrumModel::Explicit { values, zero_tail } => {
                write!(f, "explicit({} values, zero_tail={zero_tail})", values.len())
            }
        }
    }
}

/// How a power smoothness exponent `p` is turned into an index function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothnessConvention {
    /// `φ(t) = t^p`, smoothness measured against `A*A`.
    Operator,
    /// `φ(t) = t^(p/(2a))`, Sobolev smoothness `p` for an operator that
    /// smooths by `a`; needs a power-decay model.
    Sobolev,
    /// Any other index function, used as given.
    General,
}

impl fmt::Display for SmoothnessConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SmoothnessConvention::Operator => "operator",
            SmoothnessConvention::Sobolev => "sobolev",
            SmoothnessConvention::General => "general",
        })
    }
}

/// A family of operators `A_d` with one shared smoothness `φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFamily {
    model: SpectrumModel,
    phi: IndexFunction,
    convention: SmoothnessConvention,
    materialize_limit: usize,
}

impl ProblemFamily {
    /// A family with an arbitrary index function. Finite-rank models are
    /// rejected.
    pub fn new(model: SpectrumModel, phi: IndexFunction) -> Result<Self> {
        Self::with_convention(model, phi, SmoothnessConvention::General)
    }

    /// A family with power smoothness `p` in the given convention.
    pub fn with_power_smoothness(model: SpectrumModel, p: f64, convention: SmoothnessConvention) -> Result<Self> {
        let exponent = match (convention, &model) {
            (SmoothnessConvention::Operator, _) => p,
            (SmoothnessConvention::Sobolev, SpectrumModel::PowerDecay { a, .. }) => p / (2.0 * a),
            (SmoothnessConvention::Sobolev, _) => {
                return Err(argument("the sobolev convention needs a power_decay spectrum"))
            }
            (SmoothnessConvention::General, _) => {
                return Err(argument("power smoothness needs the operator or sobolev convention"))
            }
        };
        Self::with_convention(model, IndexFunction::power(exponent)?, convention)
    }

    fn with_convention(model: SpectrumModel, phi: IndexFunction, convention: SmoothnessConvention) -> Result<Self> {
        if let SpectrumModel::Explicit { zero_tail: true, .. } = model {
            return Err(domain(
                "a problem family needs operators of infinite rank; zero-tail spectra are rejected",
            ));
        }
        model.at(model.min_dim())?;
        Ok(ProblemFamily {
            model,
            phi,
            convention,
            materialize_limit: DEFAULT_MATERIALIZE_LIMIT,
        })
    }

    pub fn with_materialize_limit(mut self, limit: usize) -> Self {
        self.materialize_limit = limit;
        self
    }

    pub fn model(&self) -> &SpectrumModel {
        &self.model
    }

    pub fn phi(&self) -> &IndexFunction {
        &self.phi
    }

    pub fn convention(&self) -> SmoothnessConvention {
        self.convention
    }

    /// The spectrum of `A_d`.
    pub fn spectrum(&self, d: u32) -> Result<Spectrum> {
        if d == 0 {
            return Err(domain("dimension d must be at least 1"));
        }
        Ok(self.model.at(d)?.with_materialize_limit(self.materialize_limit))
    }

    /// `Θ(s²)` with the argument clamped to the evaluation range of `φ`. The
    /// clamp keeps the map monotone, and every admissible noise level lies
    /// below `Θ(domain_max)`.
    pub(crate) fn theta_of_square(&self, s: f64) -> f64 {
        let t = (s * s).min(self.phi.domain_max());
        self.phi.theta(t).expect("clamped into the domain")
    }

    /// `k*(δ,d) = max{k : Θ(s_k²) > δ}`, or 1 when the set is empty.
    ///
    /// Counts singular values above `√Θ⁻¹(δ)`. When some value lies within
    /// the inversion accuracy of that threshold the count is settled by
    /// evaluating `Θ(s_k²)` directly. Both paths treat companion values within
    /// [`TIE_REL`] of `δ` as ties.
    pub fn k_star(&self, delta: f64, d: u32, cap: u64) -> Result<CountResult> {
        check_level(delta)?;
        let spec = self.spectrum(d)?;
        let level = delta * (1.0 + TIE_REL);
        if self.theta_of_square(spec.singular_value(1)?) <= level {
            return Ok(CountResult::exact(1));
        }
        let tau = self.phi.invert_theta(level)?.sqrt();
        let inner = spec.count_above(tau * (1.0 + BOUNDARY_REL), cap)?;
        let outer = spec.count_above(tau * (1.0 - BOUNDARY_REL), cap)?;
        let n = if inner == outer || inner.cap_hit {
            spec.count_above(tau, cap)?
        } else {
            spec.count_satisfying(|s| self.theta_of_square(s) > level, cap)?
        };
        Ok(n.at_least(1))
    }

    /// `n(ε,d) = max{k : Θ(s_k²) > ε}`, the information complexity of the
    /// companion problem, with value 0 for the empty set. Computed from
    /// `Θ(s_k²)` directly, without inverting `Θ`.
    pub fn info_complexity(&self, eps: f64, d: u32, cap: u64) -> Result<CountResult> {
        check_level(eps)?;
        let level = eps * (1.0 + TIE_REL);
        self.spectrum(d)?
            .count_satisfying(|s| self.theta_of_square(s) > level, cap)
    }

    /// `φ(Θ⁻¹(δ))`, the best possible accuracy of any reconstruction.
    pub fn optimal_rate(&self, delta: f64) -> Result<f64> {
        self.phi.phi(self.phi.invert_theta(delta)?)
    }
}

impl fmt::Display for ProblemFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} with φ = {} ({} convention)",
            self.model, self.phi, self.convention
        )
    }
}

fn check_level(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(domain(format!("noise level {delta} must be positive and finite")));
    }
    Ok(())
}

/// `#{k : s_k > ε}`, the information complexity of the direct problem.
pub fn direct_info_complexity(spec: &Spectrum, eps: f64, cap: u64) -> Result<CountResult> {
    check_level(eps)?;
    spec.count_above(eps, cap)
}

/// `Q(δ,d) = log k*/(d + 1/δ)`.
pub fn q_quotient(k_star: &CountResult, delta: f64, d: u32) -> f64 {
    let l = k_star.ln();
    if l <= 0.0 {
        return 0.0;
    }
    l / (d as f64 + 1.0 / delta)
}

/// `log(a·k* + b)/(d + 1/δ)`.
pub fn affine_q(k_star: &CountResult, delta: f64, d: u32, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(domain(format!("scale a = {a} must be positive")));
    }
    let l = k_star.ln();
    let log_value = if k_star.is_log_scale() {
        // a·k + b = a·k·(1 + b/(a·k)) with k astronomically large.
        a.ln() + l + (b / a * (-l).exp()).ln_1p()
    } else {
        let k = match k_star.count {
            crate::spectrum::Count::Exact(n) => n as f64,
            crate::spectrum::Count::LogScale(_) => unreachable!(),
        };
        let v = a * k + b;
        if !(v > 0.0) {
            return Err(domain(format!("a·k* + b = {v} must be positive")));
        }
        v.ln()
    };
    Ok(log_value / (d as f64 + 1.0 / delta))
}

/// One `(δ,d)` grid point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridRecord {
    pub delta: f64,
    pub d: u32,
    pub k_star: CountResult,
    pub log_k_star: f64,
    pub q: f64,
}

impl GridRecord {
    pub fn new(delta: f64, d: u32, k_star: CountResult) -> Self {
        let log_k_star = k_star.ln().max(0.0);
        GridRecord {
            delta,
            d,
            k_star,
            log_k_star,
            q: q_quotient(&k_star, delta, d),
        }
    }

    /// `T = d + 1/δ`.
    pub fn scale(&self) -> f64 {
        self.d as f64 + 1.0 / self.delta
    }

    /// `true` when the count was not enumerated exactly.
    pub fn is_enormous(&self) -> bool {
        self.k_star.cap_hit || self.k_star.is_log_scale()
    }
}

/// A grid point that could not be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridFailure {
    pub delta: f64,
    pub d: u32,
    pub message: String,
}

/// Probe thresholds for the verdict heuristics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    /// `Q` at or above this value counts as bounded away from zero.
    pub q_tol: f64,
    /// Number of trailing points or shells a verdict needs.
    pub min_shells: usize,
    /// Fastest decay `Q ∝ T^(-max_decay)`, with `T = d + 1/δ`, still read as
    /// levelling off between consecutive points of a run. Slower decay is
    /// what a quotient approaching a positive limit looks like; quotients
    /// tending to zero decay like a power of `T`.
    pub max_decay: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            q_tol: 0.05,
            min_shells: 3,
            max_decay: 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    TractableEvidence,
    IntractableInDelta,
    IntractableInD,
    IntractableJoint,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::TractableEvidence => "tractable-evidence",
            Verdict::IntractableInDelta => "intractable-in-delta",
            Verdict::IntractableInD => "intractable-in-d",
            Verdict::IntractableJoint => "intractable-joint",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "tractable-evidence" => Verdict::TractableEvidence,
            "intractable-in-delta" => Verdict::IntractableInDelta,
            "intractable-in-d" => Verdict::IntractableInD,
            "intractable-joint" => Verdict::IntractableJoint,
            "inconclusive" => Verdict::Inconclusive,
            other => return Err(argument(format!("unknown verdict {other:?}"))),
        })
    }
}

/// Dyadic shell `2^index ≤ d + 1/δ < 2^(index+1)` and the largest `Q` in it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Shell {
    pub index: i32,
    pub t_lo: f64,
    pub t_hi: f64,
    pub max_q: f64,
    pub argmax: GridRecord,
    /// Some record in the shell has an enormous `k*`.
    pub enormous: bool,
}

/// Records of a sweep together with the frontier and the verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TractabilityReport {
    pub family: String,
    pub convention: SmoothnessConvention,
    pub cap: u64,
    pub thresholds: Thresholds,
    pub records: Vec<GridRecord>,
    pub failures: Vec<GridFailure>,
    pub frontier_max_q: Vec<Shell>,
    pub verdict: Verdict,
    pub witness: Vec<GridRecord>,
}

/// Evaluates `k*` over the Cartesian grid, ordered by `d` and then by the
/// order of `deltas`.
pub fn sweep(
    family: &ProblemFamily,
    deltas: &[f64],
    dims: &[u32],
    cap: u64,
    thresholds: Thresholds,
) -> Result<TractabilityReport> {
    if deltas.is_empty() || dims.is_empty() {
        return Err(argument("sweep grids must be non-empty"));
    }
    let points: Vec<(f64, u32)> = dims.iter().flat_map(|&d| deltas.iter().map(move |&x| (x, d))).collect();
    sweep_points(family, &points, cap, thresholds)
}

/// Evaluates `k*` at the given `(δ, d)` points, in order. Failing points are
/// recorded and skipped.
pub fn sweep_points(
    family: &ProblemFamily,
    points: &[(f64, u32)],
    cap: u64,
    thresholds: Thresholds,
) -> Result<TractabilityReport> {
    if points.is_empty() {
        return Err(argument("sweep grids must be non-empty"));
    }
    let mut records = Vec::with_capacity(points.len());
    let mut failures = Vec::new();
    for &(delta, d) in points {
        check_level(delta)?;
        if d == 0 {
            return Err(domain("dimension d must be at least 1"));
        }
        match family.k_star(delta, d, cap) {
            Ok(k) => records.push(GridRecord::new(delta, d, k)),
            Err(e) => failures.push(GridFailure {
                delta,
                d,
                message: e.to_string(),
            }),
        }
    }
    let outcome = classify_records(&records, &thresholds);
    Ok(TractabilityReport {
        family: family.to_string(),
        convention: family.convention(),
        cap,
        thresholds,
        records,
        failures,
        frontier_max_q: outcome.frontier,
        verdict: outcome.verdict,
        witness: outcome.witness,
    })
}

/// Verdict, witness records and frontier of a set of records.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub witness: Vec<GridRecord>,
    pub frontier: Vec<Shell>,
}

/// Classifies records by their quotient `Q`.
pub fn classify_records(records: &[GridRecord], th: &Thresholds) -> Classification {
    classify_with(records, th, |r| r.q)
}

/// Classifies records with a caller-supplied quotient, checked in the order
/// intractable-in-d, intractable-in-delta, intractable-joint,
/// tractable-evidence.
///
/// A run is intractable along a line of the grid when its trailing
/// `min_shells` points all have quotient at least `q_tol` and the quotient
/// falls no faster than `T^(-max_decay)` between them. The lines are
/// fixed-δ columns ordered by `d`, fixed-`d` rows ordered by `1/δ`, and the
/// diagonal made of the record nearest to `δ = 1/d` for each `d`, within a
/// factor of two. Tractable evidence needs the per-shell maxima to decrease
/// strictly over the last `min_shells` shells, to end below `q_tol`, and no
/// enormous count in those shells.
pub fn classify_with(records: &[GridRecord], th: &Thresholds, q: impl Fn(&GridRecord) -> f64) -> Classification {
    let frontier = frontier_with(records, &q);
    let done = |verdict, witness| Classification {
        verdict,
        witness,
        frontier: frontier.clone(),
    };
    let min = th.min_shells.max(1);

    let mut columns: BTreeMap<u64, Vec<&GridRecord>> = BTreeMap::new();
    let mut rows: BTreeMap<u32, Vec<&GridRecord>> = BTreeMap::new();
    for r in records {
        columns.entry(r.delta.to_bits()).or_default().push(r);
        rows.entry(r.d).or_default().push(r);
    }

    let trailing_run = |mut line: Vec<&GridRecord>, key: &dyn Fn(&GridRecord) -> f64| -> Option<Vec<GridRecord>> {
        line.sort_by(|a, b| key(a).total_cmp(&key(b)));
        if line.len() < min {
            return None;
        }
        let tail = &line[line.len() - min..];
        let high = tail.iter().all(|r| q(r) >= th.q_tol);
        let level = tail
            .windows(2)
            .all(|w| q(w[1]) >= q(w[0]) * (w[0].scale() / w[1].scale()).powf(th.max_decay));
        (high && level).then(|| tail.iter().map(|r| (*r).clone()).collect())
    };

    for line in columns.values() {
        if let Some(w) = trailing_run(line.clone(), &|r| r.d as f64) {
            return done(Verdict::IntractableInD, w);
        }
    }
    for line in rows.values() {
        if let Some(w) = trailing_run(line.clone(), &|r| 1.0 / r.delta) {
            return done(Verdict::IntractableInDelta, w);
        }
    }
    let diagonal: Vec<&GridRecord> = rows
        .values()
        .filter_map(|row| {
            row.iter()
                .map(|r| (r, (r.delta * r.d as f64).ln().abs()))
                .filter(|(_, dev)| *dev <= std::f64::consts::LN_2)
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(r, _)| *r)
        })
        .collect();
    if let Some(w) = trailing_run(diagonal, &|r| r.d as f64) {
        return done(Verdict::IntractableJoint, w);
    }

    if frontier.len() >= min {
        let tail = &frontier[frontier.len() - min..];
        let decreasing = tail.windows(2).all(|w| w[1].max_q < w[0].max_q);
        let small = tail[min - 1].max_q < th.q_tol;
        let exact = tail.iter().all(|s| !s.enormous);
        if decreasing && small && exact {
            let witness = tail.iter().map(|s| s.argmax.clone()).collect();
            return done(Verdict::TractableEvidence, witness);
        }
    }
    done(Verdict::Inconclusive, Vec::new())
}

/// Per-shell maxima of `Q`, ordered by shell.
pub fn frontier(records: &[GridRecord]) -> Vec<Shell> {
    frontier_with(records, &|r: &GridRecord| r.q)
}

fn frontier_with(records: &[GridRecord], q: &impl Fn(&GridRecord) -> f64) -> Vec<Shell> {
    let mut shells: BTreeMap<i32, Shell> = BTreeMap::new();
    for r in records {
        let index = r.scale().log2().floor() as i32;
        let value = q(r);
        let shell = shells.entry(index).or_insert_with(|| Shell {
            index,
            t_lo: 2f64.powi(index),
            t_hi: 2f64.powi(index + 1),
            max_q: value,
            argmax: r.clone(),
            enormous: false,
        });
        if value > shell.max_q {
            shell.max_q = value;
            shell.argmax = r.clone();
        }
        shell.enormous |= r.is_enormous();
    }
    shells.into_values().collect()
}

/// Log-spaced grid from `start` to `stop` with `points` entries, both ends
/// included.
pub fn log_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0) || points == 0 {
        return Err(argument("log grid needs positive endpoints and at least one point"));
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    let (a, b) = (start.log10(), stop.log10());
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| match i {
            0 => start,
            i if i == points - 1 => stop,
            i => 10f64.powf(a + step * i as f64),
        })
        .collect())
}
