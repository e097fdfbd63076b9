//! Spectral cut-off reconstruction in singular-value coordinates.
//!
//! A problem stores a prefix `s_1, …, s_N` of the spectrum, source
//! coefficients `v` with `x_j = φ(s_j²)·v_j`, and noise coefficients `ξ`, so
//! that the data are `y_j = s_j·x_j + δ·ξ_j`. The source is supported on the
//! prefix; tails beyond it are not represented.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{argument, capacity, domain, Result};
use crate::index_fn::IndexFunction;
use crate::spectrum::{Spectrum, SpectrumKind};
use crate::tract::ProblemFamily;

/// Slack allowed on the unit-ball constraints for rounding in normalization.
const NORM_SLACK: f64 = 1.0e-12;

/// Relative slack on the comparison with `φ(Θ⁻¹(δ))`, covering the tie
/// tolerance of `k*` and the accuracy of `Θ⁻¹`.
const RATE_SLACK: f64 = 1.0e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionProblem {
    s: Vec<f64>,
    v: Vec<f64>,
    x: Vec<f64>,
    xi: Vec<f64>,
    delta: f64,
    phi_of_s2: Vec<f64>,
}

/// Error of a cut-off at level `n` and the bound `φ(s_{n+1}²) + δ/s_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReconResult {
    pub n: usize,
    pub error: f64,
    /// `(Σ_{j>n} x_j²)^(1/2)`.
    pub bias: f64,
    /// `(Σ_{j≤n} (δξ_j/s_j)²)^(1/2)`.
    pub noise: f64,
    pub bound: f64,
    pub ratio: f64,
}

impl ReconstructionProblem {
    /// Builds a problem. `v` and `xi` may be shorter than `s` and are padded
    /// with zeros.
    pub fn new(s: Vec<f64>, phi: &IndexFunction, v: Vec<f64>, xi: Vec<f64>, delta: f64) -> Result<Self> {
        if s.is_empty() {
            return Err(argument("the spectrum prefix must not be empty"));
        }
        if s.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || s.windows(2).any(|w| w[1] > w[0]) {
            return Err(domain("the spectrum prefix must be non-negative and non-increasing"));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(domain(format!("noise level δ = {delta} must be non-negative")));
        }
        let pad = |mut w: Vec<f64>, name: &str| -> Result<Vec<f64>> {
            if w.len() > s.len() {
                return Err(argument(format!(
                    "{name} has {} entries, prefix has {}",
                    w.len(),
                    s.len()
                )));
            }
            let norm = norm2(&w);
            if !(norm <= 1.0 + NORM_SLACK) {
                return Err(domain(format!("‖{name}‖ = {norm} exceeds one")));
            }
            w.resize(s.len(), 0.0);
            Ok(w)
        };
        let v = pad(v, "v")?;
        let xi = pad(xi, "ξ")?;
        let phi_of_s2 = s.iter().map(|&x| phi.phi(x * x)).collect::<Result<Vec<_>>>()?;
        let x = phi_of_s2.iter().zip(&v).map(|(p, v)| p * v).collect();
        Ok(ReconstructionProblem {
            s,
            v,
            x,
            xi,
            delta,
            phi_of_s2,
        })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    pub fn source(&self) -> &[f64] {
        &self.v
    }

    pub fn noise(&self) -> &[f64] {
        &self.xi
    }

    pub fn solution(&self) -> &[f64] {
        &self.x
    }

    /// `y_j = s_j·x_j + δ·ξ_j`.
    pub fn data(&self) -> Vec<f64> {
        (0..self.len())
            .map(|j| self.s[j] * self.x[j] + self.delta * self.xi[j])
            .collect()
    }

    /// Cut-off estimate `x̂_j = y_j/s_j` for `j ≤ n`, zero beyond.
    pub fn estimate(&self, n: usize) -> Result<Vec<f64>> {
        self.check_level(n)?;
        let y = self.data();
        Ok((0..self.len())
            .map(|j| if j < n { y[j] / self.s[j] } else { 0.0 })
            .collect())
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n == 0 || n >= self.len() {
            return Err(argument(format!(
                "truncation level {n} must lie in [1, {}] for a prefix of length {}",
                self.len() - 1,
                self.len()
            )));
        }
        if !(self.s[n - 1] > 0.0) {
            return Err(domain(format!("s_{n} = 0, the cut-off is undefined")));
        }
        Ok(())
    }

    /// Error of the cut-off at level `n`, evaluated coordinatewise as
    /// `Σ_{j≤n} (δξ_j/s_j)² + Σ_{j>n} x_j²`.
    pub fn spectral_cutoff(&self, n: usize) -> Result<ReconResult> {
        self.check_level(n)?;
        let noise = norm2_iter((0..n).map(|j| self.delta * self.xi[j] / self.s[j]));
        let bias = norm2(&self.x[n..]);
        let error = noise.hypot(bias);
        let bound = self.phi_of_s2[n] + self.delta / self.s[n - 1];
        let ratio = if bound > 0.0 { error / bound } else { 0.0 };
        Ok(ReconResult {
            n,
            error,
            bias,
            noise,
            bound,
            ratio,
        })
    }
}

fn norm2(w: &[f64]) -> f64 {
    norm2_iter(w.iter().copied())
}

fn norm2_iter(w: impl Iterator<Item = f64>) -> f64 {
    w.map(|x| x * x).sum::<f64>().sqrt()
}

/// Prefix length used for a cut-off at level `n`: `max(4n, 64)`, shortened to
/// the list length for explicit spectra that are unknown beyond it.
pub fn prefix_len(spec: &Spectrum, n: usize) -> Result<usize> {
    let want = (4 * n).max(64);
    let len = match spec.kind() {
        SpectrumKind::Explicit {
            values,
            zero_tail: false,
        } => want.min(values.len()),
        _ => want,
    };
    if n + 1 > len {
        return Err(argument(format!(
            "level {n} needs s_{} but only {len} values are known",
            n + 1
        )));
    }
    Ok(len)
}

/// The instance `v = e_{n+1}`, `ξ = e_n` attaining both terms of the bound:
/// its cut-off error at level `n` satisfies `error² = φ(s_{n+1}²)² + (δ/s_n)²`.
pub fn adversarial_instance(
    spec: &Spectrum,
    phi: &IndexFunction,
    delta: f64,
    n: usize,
) -> Result<ReconstructionProblem> {
    if n == 0 {
        return Err(argument("the cut-off level must be at least 1"));
    }
    let s = spec.prefix(prefix_len(spec, n)?)?;
    ReconstructionProblem::new(s, phi, unit(n + 1), unit(n), delta)
}

fn unit(j: usize) -> Vec<f64> {
    let mut e = vec![0.0; j];
    e[j - 1] = 1.0;
    e
}

/// Random instance with `v` and `ξ` drawn uniformly from unit spheres and
/// scaled by independent uniform factors in `(0, 1]`. The source is
/// supported on the first `support` coordinates, the noise on the whole
/// prefix.
pub fn random_instance<R: Rng>(
    s: Vec<f64>,
    phi: &IndexFunction,
    delta: f64,
    support: usize,
    rng: &mut R,
) -> Result<ReconstructionProblem> {
    let n = s.len();
    if support == 0 || support > n {
        return Err(argument(format!("source support {support} must lie in [1, {n}]")));
    }
    let v = random_ball_point(support, rng);
    let xi = random_ball_point(n, rng);
    ReconstructionProblem::new(s, phi, v, xi, delta)
}

fn random_ball_point<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = norm2(&w);
    let scale = (1.0 - rng.random::<f64>()) / norm;
    for x in &mut w {
        *x *= scale;
    }
    w
}

/// Outcome of the order-optimality check at `k*`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalityCheck {
    pub k_star: u64,
    /// `true` when no singular value passes the threshold and the zero
    /// reconstruction is used.
    pub degenerate: bool,
    pub error_at_kstar: f64,
    /// `2·φ(s_{k*}²)`.
    pub two_phi_bound: f64,
    /// `2·φ(Θ⁻¹(δ))`.
    pub rate_bound: f64,
    /// `φ(s_{k*+1}²)`, or `φ(s_1²)` in the degenerate case.
    pub phi_next: f64,
    /// `φ(Θ⁻¹(δ))`.
    pub phi_threshold: f64,
}

impl OptimalityCheck {
    /// `error ≤ 2φ(s_{k*}²)` and `φ(s_{k*+1}²) ≤ φ(Θ⁻¹(δ))`.
    pub fn holds(&self) -> bool {
        self.error_at_kstar <= self.two_phi_bound && self.phi_next <= self.phi_threshold * (1.0 + RATE_SLACK)
    }
}

/// Runs the adversarial instance at `n = k*(δ,d)`.
///
/// When even `Θ(s_1²)` does not exceed `δ` the order-optimal reconstruction
/// is zero; the check then uses `v = e_1` with error `φ(s_1²)`.
pub fn optimality_check(family: &ProblemFamily, delta: f64, d: u32, cap: u64) -> Result<OptimalityCheck> {
    let k = family.k_star(delta, d, cap)?;
    let k_star = k.exact_value().ok_or_else(|| {
        capacity(format!(
            "k* = {k} is not enumerable; the optimality check needs an exact level"
        ))
    })?;
    let phi = family.phi();
    let spec = family.spectrum(d)?;
    let phi_threshold = family.optimal_rate(delta)?;
    let n_hat = family.info_complexity(delta, d, cap)?;
    if n_hat.exact_value() == Some(0) {
        let s1 = spec.singular_value(1)?;
        let p = ReconstructionProblem::new(vec![s1], phi, vec![1.0], vec![], delta)?;
        let error = norm2(p.solution());
        let phi1 = phi.phi(s1 * s1)?;
        return Ok(OptimalityCheck {
            k_star,
            degenerate: true,
            error_at_kstar: error,
            two_phi_bound: 2.0 * phi1,
            rate_bound: 2.0 * phi_threshold,
            phi_next: phi1,
            phi_threshold,
        });
    }
    let n = k_star as usize;
    let problem = adversarial_instance(&spec, phi, delta, n)?;
    let r = problem.spectral_cutoff(n)?;
    let s = problem.singular_values();
    Ok(OptimalityCheck {
        k_star,
        degenerate: false,
        error_at_kstar: r.error,
        two_phi_bound: 2.0 * phi.phi(s[n - 1] * s[n - 1])?,
        rate_bound: 2.0 * phi_threshold,
        phi_next: phi.phi(s[n] * s[n])?,
        phi_threshold,
    })
}

/// `φ(s_{j+1}²)`, the lower bound on the worst-case error of any method that
/// uses `j` pieces of information.
pub fn lower_bound_reference(spec: &Spectrum, phi: &IndexFunction, j: u64) -> Result<f64> {
    if j == 0 {
        return Err(argument("j must be at least 1"));
    }
    let s = spec.singular_value(j + 1)?;
    phi.phi(s * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::LeadingConstant;
    use crate::tract::{SmoothnessConvention, SpectrumModel};
    use std::f64::consts::PI;

    fn harmonic(n: usize) -> Vec<f64> {
        (1..=n).map(|j| 1.0 / j as f64).collect()
    }

    fn sqrt_phi() -> IndexFunction {
        IndexFunction::power(0.5).unwrap()
    }

    #[test]
    fn bias_only() {
        let p = ReconstructionProblem::new(harmonic(10), &sqrt_phi(), unit(4), vec![], 0.0).unwrap();
        let r = p.spectral_cutoff(3).unwrap();
        assert!((r.error - 0.25).abs() < 1e-15);
    }

    #[test]
    fn noise_only() {
        let p = ReconstructionProblem::new(harmonic(10), &sqrt_phi(), vec![], unit(3), 0.01).unwrap();
        let r = p.spectral_cutoff(3).unwrap();
        assert!((r.error - 0.03).abs() < 1e-15);
        let p = ReconstructionProblem::new(harmonic(10), &sqrt_phi(), vec![], vec![], 0.0).unwrap();
        assert_eq!(p.spectral_cutoff(3).unwrap().error, 0.0);
    }

    #[test]
    fn adversarial() {
        let spec = Spectrum::power_decay(1.0, 1, LeadingConstant::Constant(1.0)).unwrap();
        let p = adversarial_instance(&spec, &sqrt_phi(), 0.0, 3).unwrap();
        let r = p.spectral_cutoff(3).unwrap();
        assert!((r.error - 0.25).abs() < 1e-15 && (r.bound - 0.25).abs() < 1e-15);
        let p = adversarial_instance(&spec, &sqrt_phi(), 0.01, 3).unwrap();
        let r = p.spectral_cutoff(3).unwrap();
        assert!((r.error - (0.0625f64 + 0.0009).sqrt()).abs() < 1e-15);
        assert!((r.bound - 0.28).abs() < 1e-15);
        assert!(adversarial_instance(&spec, &sqrt_phi(), 0.01, 0).is_err());
    }

    #[test]
    fn optimality_example() {
        let model = SpectrumModel::power_decay(1.0, LeadingConstant::Constant(1.0));
        let f = ProblemFamily::with_power_smoothness(model, 0.5, SmoothnessConvention::Operator).unwrap();
        let c = optimality_check(&f, 0.01, 1, 1_000_000).unwrap();
        assert_eq!(c.k_star, 9);
        assert!((c.two_phi_bound - 2.0 / 9.0).abs() < 1e-15);
        assert!((c.error_at_kstar - (0.01f64 + 0.0081).sqrt()).abs() < 1e-12);
        assert!(c.holds());
        let c = optimality_check(&f, 5.0, 1, 1_000_000).unwrap();
        assert!(c.degenerate && c.holds());
    }

    #[test]
    fn lower_bound_values() {
        let spec = Spectrum::power_decay(1.0, 1, LeadingConstant::Constant(1.0)).unwrap();
        assert!((lower_bound_reference(&spec, &sqrt_phi(), 9).unwrap() - 0.1).abs() < 1e-15);
        let m = Spectrum::mixed_integration(1).unwrap();
        let v = lower_bound_reference(&m, &sqrt_phi(), 1).unwrap();
        assert!((v - 2.0 / (3.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn invalid_problems() {
        assert!(ReconstructionProblem::new(harmonic(4), &sqrt_phi(), vec![1.0, 1.0], vec![], 0.1).is_err());
        let p = ReconstructionProblem::new(harmonic(4), &sqrt_phi(), vec![], vec![], 0.1).unwrap();
        assert!(p.spectral_cutoff(0).is_err());
        assert!(p.spectral_cutoff(4).is_err());
    }
}
