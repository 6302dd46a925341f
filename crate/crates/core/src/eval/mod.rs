//! Covariate inference for fitted models: sign-based q-values, odds effects,
//! covariate scans and posterior predictive goodness of fit.

mod gof;
mod scan;

pub use gof::{gof_posterior_predictive, Band, GofConfig, GofStatistic, GofSummary, ScalarBand};
pub use scan::{covariate_scan, ScanMode, ScanOptions, ScanResult, ScanRow};

use crate::error::{Error, Result};

/// `2 min(P(beta > 0), P(beta < 0))` from empirical draw frequencies. Draws
/// equal to zero count in neither tail.
pub fn q_value(draws: &[f64]) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::Validation("q-value needs at least one draw".into()));
    }
    let pos = draws.iter().filter(|&&b| b > 0.0).count();
    let neg = draws.iter().filter(|&&b| b < 0.0).count();
    Ok((2.0 * pos.min(neg) as f64 / draws.len() as f64).min(1.0))
}

/// Percent change in the odds of a success when the covariate moves by
/// `delta`: `100 (exp(beta delta) - 1)`.
pub fn odds_effect(coefficient: f64, delta: f64) -> f64 {
    100.0 * (coefficient * delta).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_value_examples() {
        assert_eq!(q_value(&[0.1, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(q_value(&[1.0, -1.0, 2.0, -2.0]).unwrap(), 1.0);
        let mut d = vec![-1.0; 9];
        d.push(0.5);
        assert!((q_value(&d).unwrap() - 0.2).abs() < 1e-15);
        assert!(q_value(&[]).is_err());
        // Zeros sit in neither tail.
        assert_eq!(q_value(&[0.0, 0.0, 1.0, -1.0]).unwrap(), 0.5);
    }

    #[test]
    fn odds_examples() {
        assert!((odds_effect(-1.523, 1.0) + 78.194).abs() < 1e-3);
        assert!((odds_effect(-0.368, 1.0) + 30.788).abs() < 1e-3);
        assert!((odds_effect(-0.860, 1.0) + 57.684).abs() < 1e-3);
        assert_eq!(odds_effect(0.7, 0.0), 0.0);
    }
}
