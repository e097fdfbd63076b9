mod common;

use proptest::prelude::*;
use tractability::index_fn::{IndexFunction, Table};

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp().min(hi))
        .collect()
}

fn tabulated(p: f64) -> IndexFunction {
    let t_min = 1e-8f64.powf(1.0 / p);
    IndexFunction::tabulated(Table::sample(|t| t.powf(p) / (1.0 + t.powf(p)), t_min, 100.0, 300).unwrap())
}

#[test]
fn round_trip_on_log_grid() {
    let mut functions: Vec<IndexFunction> = [0.1, 0.5, 1.0, 2.0]
        .iter()
        .map(|&p| IndexFunction::power(p).unwrap())
        .collect();
    functions.push(tabulated(0.5));
    functions.push(tabulated(1.2));
    for f in &functions {
        for t in log_grid(1e-12, f.domain_max(), 200) {
            let back = f.invert_theta(f.theta(t).unwrap()).unwrap();
            assert!((back / t - 1.0).abs() <= 1e-9, "{f}: t = {t}, back = {back}");
        }
    }
}

#[test]
fn companion_bounded_by_phi_times_root_domain() {
    for f in [
        IndexFunction::power(0.5).unwrap(),
        IndexFunction::log_power(2.0).unwrap(),
        tabulated(0.7),
    ] {
        let root = f.domain_max().sqrt();
        for t in log_grid(1e-10, f.domain_max(), 100) {
            assert!(f.theta(t).unwrap() <= f.phi(t).unwrap() * root);
        }
    }
}

#[test]
fn threshold_dominates_squared_noise_level_eventually() {
    let deltas = log_grid(1e-12, 0.5, 120);
    for c0 in [1.0, 10.0, 100.0] {
        for p in [0.25, 0.5, 1.0, 2.0] {
            let f = IndexFunction::power(p).unwrap();
            // Largest grid index from which the inequality holds for all smaller δ.
            let holds: Vec<bool> = deltas
                .iter()
                .map(|&d| c0 * c0 * d * d <= f.invert_theta(d).unwrap())
                .collect();
            let run = holds.iter().take_while(|&&h| h).count();
            assert!(run > 0, "C0 = {c0}, p = {p}: no δ₀ found");
        }
    }
}

proptest! {
    #[test]
    fn power_round_trip(p in 0.05f64..3.0, lt in -27.0f64..9.0) {
        let f = IndexFunction::power(p).unwrap();
        let t = lt.exp();
        let back = f.invert_theta(f.theta(t).unwrap()).unwrap();
        prop_assert!((back / t - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn phi_non_decreasing_and_positive(seed in any::<u64>(), a in -25.0f64..9.0, b in -25.0f64..9.0) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = common::random_phi(&mut rng);
        let (lo, hi) = (a.min(b).exp().min(f.domain_max()), a.max(b).exp().min(f.domain_max()));
        let (x, y) = (f.phi(lo).unwrap(), f.phi(hi).unwrap());
        prop_assert!(x > 0.0 && x <= y);
        prop_assert!(f.theta(lo).unwrap() <= f.theta(hi).unwrap());
    }
}
