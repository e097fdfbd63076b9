use std::f64::consts::PI;

use crate::error::{domain, Result};

/// A non-increasing positive sequence `σ_1 ≥ σ_2 ≥ … → 0`, the factor whose
/// tensor powers make up a product spectrum.
#[derive(Clone, Debug, PartialEq)]
pub enum Univariate {
    /// Singular values of the Volterra integration operator on `L²(0,1)`,
    /// `σ_j = 2/((2j-1)π)`.
    Integration,
    /// `σ_j = r^(j-1)`.
    Geometric { ratio: f64 },
    /// `σ_j = j^(-e)`.
    Power { exponent: f64 },
    /// A finite list, zero beyond its end.
    Table(Vec<f64>),
}

impl Univariate {
    pub fn geometric(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(domain(format!("geometric ratio {ratio} must lie in (0, 1)")));
        }
        Ok(Univariate::Geometric { ratio })
    }

    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(domain(format!("decay exponent {exponent} must be positive")));
        }
        Ok(Univariate::Power { exponent })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        check_non_increasing(&values)?;
        Ok(Univariate::Table(values))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            Univariate::Integration => Ok(()),
            Univariate::Geometric { ratio } => Self::geometric(*ratio).map(drop),
            Univariate::Power { exponent } => Self::power(*exponent).map(drop),
            Univariate::Table(v) => check_non_increasing(v),
        }
    }

    /// `σ_j` for `j ≥ 1`.
    pub fn value(&self, j: u64) -> f64 {
        debug_assert!(j >= 1);
        match self {
            Univariate::Integration => 2.0 / ((2.0 * j as f64 - 1.0) * PI),
            Univariate::Geometric { ratio } => ratio.powf((j - 1) as f64),
            Univariate::Power { exponent } => (j as f64).powf(-exponent),
            Univariate::Table(v) => v.get((j - 1) as usize).copied().unwrap_or(0.0),
        }
    }

    /// Number of non-zero terms, `None` when the sequence is infinite.
    pub fn len(&self) -> Option<u64> {
        match self {
            Univariate::Table(v) => Some(v.len() as u64),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn first(&self) -> f64 {
        self.value(1)
    }

    pub fn name(&self) -> String {
        match self {
            Univariate::Integration => "integration".into(),
            Univariate::Geometric { ratio } => format!("geometric(ratio={ratio})"),
            Univariate::Power { exponent } => format!("power(exponent={exponent})"),
            Univariate::Table(v) => format!("table({} values)", v.len()),
        }
    }
}

pub(crate) fn check_non_increasing(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(domain("a singular value list must not be empty"));
    }
    for (i, &v) in values.iter().enumerate() {
        if !(v.is_finite() && v > 0.0) {
            return Err(domain(format!("value {} = {v} must be positive and finite", i + 1)));
        }
    }
    if let Some(i) = values.windows(2).position(|w| w[1] > w[0]) {
        return Err(domain(format!(
            "values must be non-increasing, but s_{} = {} < s_{} = {}",
            i + 1,
            values[i],
            i + 2,
            values[i + 1]
        )));
    }
    Ok(())
}
