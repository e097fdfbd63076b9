mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tractability::index_fn::IndexFunction;
use tractability::recon::{adversarial_instance, optimality_check, prefix_len, random_instance, ReconstructionProblem};
use tractability::spectrum::Count;
use tractability::tract::{ProblemFamily, SmoothnessConvention, SpectrumModel};

const CAP: u64 = 1_000_000;

/// A random family, a noise level it resolves, an exact `k*` and a prefix.
fn setup(kind: usize, seed: u64) -> Option<(ProblemFamily, f64, u32, usize, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (f, _, d) = common::random_probe(&mut rng, kind);
    let spec = f.spectrum(d).ok()?;
    let s1 = spec.singular_value(1).ok()?;
    let top = f.phi().theta((s1 * s1).min(f.phi().domain_max())).ok()?;
    if !(top > 2e-3) {
        return None;
    }
    let delta = rng.random_range((1e-3f64).ln()..(top / 2.0).ln()).exp();
    let k = match f.k_star(delta, d, CAP).ok()?.count {
        Count::Exact(k) if k <= 2000 => k as usize,
        _ => return None,
    };
    let len = prefix_len(&spec, 2 * k).ok()?;
    let s = spec.prefix(len).ok()?;
    Some((f, delta, d, k, s))
}

fn levels(s: &[f64]) -> impl Iterator<Item = usize> + '_ {
    let positive = s.iter().take_while(|&&v| v > 0.0).count();
    1..positive.min(s.len() - 1) + 1
}

#[test]
fn mixed_integration_is_order_optimal() {
    let f = ProblemFamily::with_power_smoothness(SpectrumModel::MixedIntegration, 0.5, SmoothnessConvention::Operator)
        .unwrap();
    let c = optimality_check(&f, 0.05, 2, CAP).unwrap();
    assert!(!c.degenerate);
    assert!(c.holds(), "{c:?}");
    assert!(c.error_at_kstar <= c.rate_bound);
}

#[test]
fn zero_noise_is_exact() {
    let s: Vec<f64> = (1..=40).map(|j| 1.0 / j as f64).collect();
    let phi = IndexFunction::power(0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..40 {
        let p = random_instance(s.clone(), &phi, 0.0, n, &mut rng).unwrap();
        let r = p.spectral_cutoff(n).unwrap();
        assert_eq!(r.error, 0.0);
        for (a, b) in p.estimate(n).unwrap().iter().zip(p.solution()) {
            assert!((a - b).abs() <= 1e-15 * b.abs());
        }
    }
}

#[test]
fn explicit_solution_and_data() {
    let phi = IndexFunction::power(1.0).unwrap();
    let p = ReconstructionProblem::new(vec![1.0, 0.5, 0.25], &phi, vec![0.6, 0.8], vec![0.0, 0.0, 1.0], 0.1).unwrap();
    // x = φ(s²)v, y = s·x + δξ.
    assert_eq!(p.solution(), &[0.6, 0.2, 0.0]);
    assert_eq!(p.data(), vec![0.6, 0.1, 0.1]);
    let r = p.spectral_cutoff(2).unwrap();
    assert_eq!(r.bias, 0.0);
    assert_eq!(r.noise, 0.0);
    let r = p.spectral_cutoff(1).unwrap();
    assert!((r.bias - 0.2).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn error_within_bound(kind in 0usize..6, seed in any::<u64>()) {
        let Some((f, delta, _, _, s)) = setup(kind, seed) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let len = s.len();
        let p = random_instance(s.clone(), f.phi(), delta, len, &mut rng).unwrap();
        for n in levels(&s) {
            let r = p.spectral_cutoff(n).unwrap();
            prop_assert!(r.error <= r.bound + 1e-12, "n = {}: {} > {}", n, r.error, r.bound);
            prop_assert!(r.ratio <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn adversarial_sandwich(kind in 0usize..6, seed in any::<u64>()) {
        let Some((f, delta, d, k, s)) = setup(kind, seed) else { return Ok(()) };
        let spec = f.spectrum(d).unwrap();
        for n in levels(&s).filter(|n| *n <= 2 * k) {
            let r = adversarial_instance(&spec, f.phi(), delta, n).unwrap().spectral_cutoff(n).unwrap();
            prop_assert!(r.error <= r.bound);
            prop_assert!(r.error >= r.bound / std::f64::consts::SQRT_2 * (1.0 - 1e-12));
        }
    }

    #[test]
    fn bias_falls_and_noise_grows_with_level(kind in 0usize..6, seed in any::<u64>()) {
        let Some((f, delta, _, _, s)) = setup(kind, seed) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
        let len = s.len();
        let p = random_instance(s.clone(), f.phi(), delta, len, &mut rng).unwrap();
        let results: Vec<_> = levels(&s).map(|n| p.spectral_cutoff(n).unwrap()).collect();
        for w in results.windows(2) {
            prop_assert!(w[1].bias <= w[0].bias);
            prop_assert!(w[1].noise >= w[0].noise);
        }
    }

    #[test]
    fn optimal_at_k_star(kind in 0usize..6, seed in any::<u64>()) {
        let Some((f, delta, d, _, _)) = setup(kind, seed) else { return Ok(()) };
        let c = optimality_check(&f, delta, d, CAP).unwrap();
        prop_assert!(c.holds(), "{:?}", c);
        prop_assert!(c.error_at_kstar <= c.rate_bound * (1.0 + 1e-9), "{:?}", c);
    }
}
