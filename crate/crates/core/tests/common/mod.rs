//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use rand::Rng;
use tractability::index_fn::{IndexFunction, Table};
use tractability::spectrum::{LeadingConstant, Univariate};
use tractability::tract::{ProblemFamily, SpectrumModel};

/// All products `∏ σ_{k_i}` of a finite list, sorted non-increasingly.
pub fn brute_force_products(values: &[f64], d: u32) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..d {
        out = out.iter().flat_map(|p| values.iter().map(move |v| p * v)).collect();
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Random non-increasing positive list.
pub fn random_sequence<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(1e-3..1.0)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// One of each spectrum model, chosen by `kind` modulo 6.
pub fn random_model<R: Rng>(rng: &mut R, kind: usize) -> SpectrumModel {
    match kind % 6 {
        0 => {
            let a = rng.random_range(0.3..3.0);
            let leading = match rng.random_range(0..3) {
                0 => LeadingConstant::Constant(rng.random_range(0.5..2.0)),
                1 => LeadingConstant::Linear(rng.random_range(0.5..2.0)),
                _ => LeadingConstant::SublinearPower(rng.random_range(0.1..0.9)),
            };
            SpectrumModel::power_decay(a, leading)
        }
        1 => SpectrumModel::LogDecay,
        2 => {
            let univariate = match rng.random_range(0..3) {
                0 => Univariate::geometric(rng.random_range(0.1..0.9)).unwrap(),
                1 => Univariate::power(rng.random_range(0.5..3.0)).unwrap(),
                _ => {
                    let len = rng.random_range(2..40);
                    Univariate::table(random_sequence(rng, len)).unwrap()
                }
            };
            SpectrumModel::TensorProduct { univariate }
        }
        3 => SpectrumModel::MixedIntegration,
        4 => SpectrumModel::LowerBoundSpeed {
            c_bar: rng.random_range(0.5..2.0),
        },
        _ => {
            let len = rng.random_range(5..300);
            SpectrumModel::Explicit {
                values: random_sequence(rng, len),
                zero_tail: false,
            }
        }
    }
}

/// A random index function from each of the supported shapes.
pub fn random_phi<R: Rng>(rng: &mut R) -> IndexFunction {
    match rng.random_range(0..4) {
        0 => IndexFunction::power(rng.random_range(0.1..2.0)).unwrap(),
        1 => IndexFunction::log_power(rng.random_range(0.5..3.0)).unwrap(),
        2 => IndexFunction::sublinear_benchmark_scaled(rng.random_range(0.2..0.8), rng.random_range(1.0..3.0)).unwrap(),
        _ => {
            let p = rng.random_range(0.2..1.5);
            let t_min = 1e-8f64.powf(1.0 / p);
            let table = Table::sample(|t| t.powf(p) / (1.0 + t.powf(p)), t_min, 100.0, 400).unwrap();
            IndexFunction::tabulated(table)
        }
    }
}

/// A random `(family, δ, d)` probe of model `kind`.
pub fn random_probe<R: Rng>(rng: &mut R, kind: usize) -> (ProblemFamily, f64, u32) {
    let model = random_model(rng, kind);
    let phi = random_phi(rng);
    let d = rng.random_range(model.min_dim()..=5);
    let delta = log_uniform(rng, 1e-3, 0.5);
    (ProblemFamily::new(model, phi).unwrap(), delta, d)
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
