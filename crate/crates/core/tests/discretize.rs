mod common;

use std::f64::consts::PI;

use tractability::discretize::{build_volterra, numeric_singular_values, tensor_volterra, validate_asymptotics};
use tractability::Error;

fn classical(j: usize) -> f64 {
    2.0 / ((2 * j - 1) as f64 * PI)
}

#[test]
fn one_dimensional_values_match_closed_form() {
    let rows = validate_asymptotics(1, 2000, 10).unwrap();
    for r in &rows {
        assert!((r.numeric / classical(r.j) - 1.0).abs() < 0.01, "{r:?}");
        assert!((r.ratio_model - 1.0).abs() < 0.01);
    }
}

#[test]
fn refinement_reduces_error() {
    let grids = [250, 500, 1000, 2000];
    let values: Vec<Vec<f64>> = grids
        .iter()
        .map(|&n| numeric_singular_values(&build_volterra(n).unwrap(), 10).unwrap())
        .collect();
    for j in 1..=10 {
        let errors: Vec<f64> = values.iter().map(|v| (v[j - 1] - classical(j)).abs()).collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "j = {j}: {errors:?}");
    }
}

#[test]
fn kronecker_consistency_and_ordering() {
    for n in [8, 20, 32] {
        let one = numeric_singular_values(&build_volterra(n).unwrap(), n).unwrap();
        let two = numeric_singular_values(&tensor_volterra(n).unwrap(), n * n / 4).unwrap();
        let products = common::brute_force_products(&one, 2);
        for (a, b) in two.iter().zip(&products) {
            assert!((a / b - 1.0).abs() <= 1e-10, "n = {n}: {a} vs {b}");
        }
        assert!(one.iter().chain(&two).all(|&v| v > 0.0));
        assert!(one.windows(2).all(|w| w[1] <= w[0]));
        assert!(two.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn two_dimensional_values_track_the_model() {
    // The 64-point grid resolves the bivariate spectrum to within 10% up to
    // j = 62; further out, discretization error dominates.
    let rows = validate_asymptotics(2, 64, 200).unwrap();
    for r in rows.iter().filter(|r| (50..=62).contains(&r.j)) {
        assert!((0.9..=1.1).contains(&r.ratio_model), "{r:?}");
    }
    assert!(rows[0].asymptotic.is_none());
    assert!(rows[1..].iter().all(|r| r.asymptotic.is_some()));
}

#[test]
fn out_of_scope_and_range() {
    assert!(matches!(validate_asymptotics(3, 10, 5), Err(Error::OutOfScope(_))));
    assert!(validate_asymptotics(1, 100, 11).is_err());
    assert!(validate_asymptotics(1, 100, 0).is_err());
}
