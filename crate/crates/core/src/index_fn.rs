//! Index functions describing solution smoothness, their companions
//! `Θ(t) = √t·φ(t)` and monotone inversion of the companion.
//!
//! An index function is continuous, non-decreasing and vanishes at zero.
//! The companion is then strictly increasing wherever `φ > 0`, which is what
//! makes the inversion by bisection well posed.

use std::fmt;

use crate::error::{domain, Error, Result};

/// Default evaluation range for the closed-form kinds.
pub const DEFAULT_DOMAIN_MAX: f64 = 1.0e4;

/// Relative residual tolerance of the companion inversion.
pub const INVERT_REL_TOL: f64 = 1.0e-12;
/// Absolute residual tolerance of the companion inversion.
pub const INVERT_ABS_TOL: f64 = 1.0e-300;
/// Iteration limit of the companion inversion.
pub const INVERT_MAX_ITER: usize = 200;

/// The shape of an index function.
#[derive(Clone, Debug, PartialEq)]
pub enum IndexKind {
    /// `φ(t) = t^p`.
    Power { p: f64 },
    /// `φ(t) = log(1 + 1/t)^(-ν)`, the logarithmic smoothness profile.
    LogPower { nu: f64 },
    /// `φ(t) = C^(1/(2q))·t^((1-q)/(2q))`, the benchmark smoothness matched to a
    /// leading constant `c(t) = t^q`. The scale `C` defaults to one.
    SublinearBenchmark { q: f64, scale: f64 },
    /// Monotone interpolation of sampled values.
    Tabulated(Table),
}

/// Strictly increasing sample grid of `(t, φ(t))` pairs.
///
/// Between samples the function is interpolated linearly in log-log
/// coordinates, which is monotone and exact for pure powers. Below the first
/// sample it decays linearly to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    t: Vec<f64>,
    phi: Vec<f64>,
}

impl Table {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(domain("a tabulated index function needs at least two samples"));
        }
        for (i, &(t, v)) in points.iter().enumerate() {
            if !(t.is_finite() && t > 0.0) {
                return Err(domain(format!("sample {i}: t = {t} must be positive and finite")));
            }
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("sample {i}: φ = {v} must be positive and finite")));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(domain(format!(
                    "samples {i} and {}: t must be strictly increasing ({} then {})",
                    i + 1,
                    w[0].0,
                    w[1].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(domain(format!(
                    "samples {i} and {}: φ must be non-decreasing ({} then {})",
                    i + 1,
                    w[0].1,
                    w[1].1
                )));
            }
        }
        if points[0].1 >= 1.0e-6 {
            return Err(domain(format!(
                "first sample φ = {} must be below 1e-6 so that φ vanishes at zero",
                points[0].1
            )));
        }
        Ok(Table {
            t: points.iter().map(|p| p.0).collect(),
            phi: points.iter().map(|p| p.1).collect(),
        })
    }

    /// Samples a closed-form function on a log-spaced grid.
    pub fn sample(f: impl Fn(f64) -> f64, t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(t_min > 0.0 && t_max > t_min) {
            return Err(domain("sampling needs 0 < t_min < t_max and at least two points"));
        }
        let (lo, hi) = (t_min.ln(), t_max.ln());
        let pts: Vec<(f64, f64)> = (0..points)
            .map(|i| {
                let t = if i + 1 == points {
                    t_max
                } else {
                    (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp()
                };
                (t, f(t))
            })
            .collect();
        Table::new(&pts)
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.phi.iter().copied())
    }

    fn t_max(&self) -> f64 {
        *self.t.last().unwrap()
    }

    fn eval(&self, t: f64) -> f64 {
        let (t0, p0) = (self.t[0], self.phi[0]);
        if t <= t0 {
            return p0 * (t / t0);
        }
        let i = self.t.partition_point(|&x| x <= t);
        if i >= self.t.len() {
            return *self.phi.last().unwrap();
        }
        let (ta, tb) = (self.t[i - 1], self.t[i]);
        let (pa, pb) = (self.phi[i - 1], self.phi[i]);
        if t == ta {
            return pa;
        }
        let w = (t / ta).ln() / (tb / ta).ln();
        ((1.0 - w) * pa.ln() + w * pb.ln()).exp().clamp(pa, pb)
    }
}

/// An index function `φ` on `(0, domain_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexFunction {
    kind: IndexKind,
    domain_max: f64,
}

impl IndexFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(domain(format!("power exponent p = {p} must be positive")));
        }
        Ok(IndexFunction {
            kind: IndexKind::Power { p },
            domain_max: DEFAULT_DOMAIN_MAX,
        })
    }

    pub fn log_power(nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(domain(format!("logarithmic exponent ν = {nu} must be positive")));
        }
        Ok(IndexFunction {
            kind: IndexKind::LogPower { nu },
            domain_max: DEFAULT_DOMAIN_MAX,
        })
    }

    pub fn sublinear_benchmark(q: f64) -> Result<Self> {
        Self::sublinear_benchmark_scaled(q, 1.0)
    }

    pub fn sublinear_benchmark_scaled(q: f64, scale: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(domain(format!("benchmark exponent q = {q} must lie in (0, 1)")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(domain(format!("benchmark scale C = {scale} must be positive")));
        }
        Ok(IndexFunction {
            kind: IndexKind::SublinearBenchmark { q, scale },
            domain_max: DEFAULT_DOMAIN_MAX,
        })
    }

    pub fn tabulated(table: Table) -> Self {
        let domain_max = table.t_max();
        IndexFunction {
            kind: IndexKind::Tabulated(table),
            domain_max,
        }
    }

    /// Changes the evaluation range. Tabulated functions cannot be extended
    /// beyond their last sample.
    pub fn with_domain_max(mut self, domain_max: f64) -> Result<Self> {
        if !(domain_max.is_finite() && domain_max > 0.0) {
            return Err(domain(format!("domain_max = {domain_max} must be positive and finite")));
        }
        if let IndexKind::Tabulated(table) = &self.kind {
            if domain_max > table.t_max() {
                return Err(domain(format!(
                    "domain_max = {domain_max} exceeds the last tabulated sample {}",
                    table.t_max()
                )));
            }
        }
        self.domain_max = domain_max;
        Ok(self)
    }

    pub fn kind(&self) -> &IndexKind {
        &self.kind
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    /// Coefficient and exponent when `φ(t) = coef·t^exp`.
    fn power_law(&self) -> Option<(f64, f64)> {
        match self.kind {
            IndexKind::Power { p } => Some((1.0, p)),
            IndexKind::SublinearBenchmark { q, scale } => Some((scale.powf(1.0 / (2.0 * q)), (1.0 - q) / (2.0 * q))),
            _ => None,
        }
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.domain_max) {
            return Err(domain(format!(
                "t = {t} outside the evaluation range [0, {}]",
                self.domain_max
            )));
        }
        Ok(())
    }

    // Caller guarantees 0 <= t.
    fn phi_raw(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match &self.kind {
            IndexKind::Power { .. } | IndexKind::SublinearBenchmark { .. } => {
                let (coef, e) = self.power_law().unwrap();
                coef * t.powf(e)
            }
            IndexKind::LogPower { nu } => (1.0 / t).ln_1p().powf(-nu),
            IndexKind::Tabulated(table) => table.eval(t),
        }
    }

    fn theta_raw(&self, t: f64) -> f64 {
        t.sqrt() * self.phi_raw(t)
    }

    /// Evaluates `φ(t)`.
    pub fn phi(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.phi_raw(t))
    }

    /// Evaluates the companion `Θ(t) = √t·φ(t)`.
    pub fn theta(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.theta_raw(t))
    }

    /// Largest companion value, `Θ(domain_max)`.
    pub fn theta_max(&self) -> f64 {
        self.theta_raw(self.domain_max)
    }

    /// Solves `Θ(t) = δ`.
    ///
    /// Power laws use the closed form. The other kinds bisect geometrically on
    /// `[max(1e-300·domain_max, MIN_POSITIVE), domain_max]` until the residual
    /// is within `max(1e-12·δ, 1e-300)`.
    pub fn invert_theta(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(domain(format!("noise level δ = {delta} must be positive and finite")));
        }
        let max = self.theta_max();
        if delta > max {
            return Err(Error::OutOfRange { value: delta, max });
        }
        if let Some((coef, e)) = self.power_law() {
            return Ok((delta / coef).powf(1.0 / (e + 0.5)).min(self.domain_max));
        }
        self.bisect_theta(delta)
    }

    fn bisect_theta(&self, delta: f64) -> Result<f64> {
        let tol = (INVERT_REL_TOL * delta).max(INVERT_ABS_TOL);
        let mut lo = (1.0e-300 * self.domain_max).max(f64::MIN_POSITIVE);
        let mut hi = self.domain_max;
        let r_lo = self.theta_raw(lo) - delta;
        if r_lo.abs() <= tol {
            return Ok(lo);
        }
        if r_lo > 0.0 {
            return Err(Error::Numeric(format!(
                "δ = {delta} lies below the resolvable range Θ({lo}) = {}",
                r_lo + delta
            )));
        }
        let mut best = (hi, (self.theta_raw(hi) - delta).abs());
        for _ in 0..INVERT_MAX_ITER {
            let mid = (0.5 * (lo.ln() + hi.ln())).exp().clamp(lo, hi);
            let r = self.theta_raw(mid) - delta;
            if r.abs() < best.1 {
                best = (mid, r.abs());
            }
            if r.abs() <= tol {
                return Ok(mid);
            }
            if r > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
        }
        Ok(best.0)
    }

    pub fn companion(&self) -> Companion<'_> {
        Companion { base: self }
    }
}

impl fmt::Display for IndexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            IndexKind::Power { p } => write!(f, "power(p={p})"),
            IndexKind::LogPower { nu } => write!(f, "log_power(nu={nu})"),
            IndexKind::SublinearBenchmark { q, scale } => {
                write!(f, "sublinear_benchmark(q={q}, scale={scale})")
            }
            IndexKind::Tabulated(t) => write!(f, "tabulated({} samples)", t.t.len()),
        }
    }
}

/// The companion `Θ(t) = √t·φ(t)` of an index function.
#[derive(Clone, Copy, Debug)]
pub struct Companion<'a> {
    base: &'a IndexFunction,
}

impl Companion<'_> {
    pub fn base(&self) -> &IndexFunction {
        self.base
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.base.theta(t)
    }

    pub fn inverse(&self, delta: f64) -> Result<f64> {
        self.base.invert_theta(delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tabulated_power(p: f64) -> IndexFunction {
        IndexFunction::tabulated(Table::sample(|t| t.powf(p), 1e-14, 1e4, 400).unwrap())
    }

    #[test]
    fn phi_examples() {
        let f = IndexFunction::power(0.5).unwrap();
        assert_relative_eq!(f.phi(0.04).unwrap(), 0.2, max_relative = 1e-15);
        assert_eq!(IndexFunction::power(1.0).unwrap().phi(0.0).unwrap(), 0.0);
        let b = IndexFunction::sublinear_benchmark(0.5).unwrap();
        assert_relative_eq!(b.phi(0.25).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn theta_examples() {
        let f = IndexFunction::power(0.5).unwrap();
        assert_relative_eq!(f.theta(0.01).unwrap(), 0.01, max_relative = 1e-14);
        assert_eq!(f.theta(1.0).unwrap(), 1.0);
        let tab = tabulated_power(1.0);
        assert_relative_eq!(tab.theta(0.25).unwrap(), 0.125, max_relative = 1e-12);
    }

    #[test]
    fn invert_examples() {
        let f = IndexFunction::power(0.5).unwrap();
        assert_relative_eq!(f.invert_theta(0.01).unwrap(), 0.01, max_relative = 1e-14);
        let g = IndexFunction::power(1.0).unwrap();
        assert_relative_eq!(g.invert_theta(0.001).unwrap(), 0.01, max_relative = 1e-13);
        let tab = tabulated_power(1.0);
        assert_relative_eq!(tab.invert_theta(0.001).unwrap(), 0.01, max_relative = 1e-9);
    }

    #[test]
    fn domain_errors() {
        let f = IndexFunction::power(1.0).unwrap();
        assert!(matches!(f.phi(-1.0), Err(Error::Domain(_))));
        assert!(matches!(f.phi(2.0 * DEFAULT_DOMAIN_MAX), Err(Error::Domain(_))));
        assert!(matches!(f.theta(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(f.invert_theta(0.0), Err(Error::Domain(_))));
        assert!(matches!(f.invert_theta(-1.0), Err(Error::Domain(_))));
        let big = 2.0 * f.theta_max();
        assert!(matches!(f.invert_theta(big), Err(Error::OutOfRange { .. })));
        assert!(IndexFunction::power(0.0).is_err());
        assert!(IndexFunction::sublinear_benchmark(1.0).is_err());
    }

    #[test]
    fn vanishing_at_zero() {
        assert!(IndexFunction::power(0.25).unwrap().phi(1e-300).unwrap() < 1e-6);
        assert!(IndexFunction::log_power(1.0).unwrap().phi(1e-300).unwrap() < 1e-2);
    }

    #[test]
    fn table_rejections() {
        assert!(Table::new(&[(1.0, 1e-7)]).is_err());
        // equal t values
        assert!(Table::new(&[(0.1, 1e-7), (0.1, 1e-6)]).is_err());
        // decreasing φ
        assert!(Table::new(&[(0.1, 1e-7), (0.2, 1e-8)]).is_err());
        // does not vanish at zero
        assert!(Table::new(&[(0.1, 0.5), (0.2, 0.6)]).is_err());
        assert!(Table::new(&[(0.0, 1e-9), (0.2, 0.6)]).is_err());
        // equal φ values are fine, √t breaks the tie in Θ
        let t = Table::new(&[(0.1, 1e-7), (0.2, 1e-7), (0.4, 0.5)]).unwrap();
        let f = IndexFunction::tabulated(t);
        assert!(f.theta(0.2).unwrap() > f.theta(0.1).unwrap());
        let x = f.invert_theta(f.theta(0.15).unwrap()).unwrap();
        assert_relative_eq!(x, 0.15, max_relative = 1e-9);
    }

    #[test]
    fn tabulated_domain_is_capped() {
        let f = tabulated_power(1.0);
        assert_eq!(f.domain_max(), 1e4);
        assert!(f.clone().with_domain_max(2e4).is_err());
        assert!(f.with_domain_max(10.0).is_ok());
    }

    #[test]
    fn log_power_round_trip() {
        let f = IndexFunction::log_power(1.5).unwrap();
        for &t in &[1e-200, 1e-12, 1e-3, 0.5, 7.0, 9000.0] {
            let d = f.theta(t).unwrap();
            assert_relative_eq!(f.invert_theta(d).unwrap(), t, max_relative = 1e-9);
        }
    }

    #[test]
    fn companion_matches_theta() {
        let f = IndexFunction::sublinear_benchmark_scaled(0.25, 3.0).unwrap();
        let c = f.companion();
        assert_eq!(c.eval(0.3).unwrap(), f.theta(0.3).unwrap());
        assert_relative_eq!(c.inverse(c.eval(0.3).unwrap()).unwrap(), 0.3, max_relative = 1e-13);
    }
}
