//! Theoretical per-iteration contraction factors for the Kaczmarz variants.

use crate::error::{Error, Result};
use crate::linalg::scaled_condition_number;
use crate::matrix::DenseMatrix;

/// Expected-error contraction factor `q = 1 - 1 / kappa^2(c)` of the
/// randomized Kaczmarz iteration on a consistent system.
pub fn rate_rka(c: &DenseMatrix) -> Result<f64> {
    let kappa = scaled_condition_number(c)?;
    Ok(1.0 - 1.0 / (kappa * kappa))
}

/// Contraction factor `1 - (2 lambda - lambda^2) / kappa^2(c)` of the relaxed
/// Motzkin iteration; minimized at `lambda = 1`, where it equals [`rate_rka`].
pub fn rate_skm(c: &DenseMatrix, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 2.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    let kappa = scaled_condition_number(c)?;
    Ok(1.0 - (2.0 * lambda - lambda * lambda) / (kappa * kappa))
}

/// Tighter bound for row-normalized systems:
/// `1 - sigma_min^2 (2 lambda - lambda^2) / L` with
/// `L = max(m - s_i, m - gamma)`, where `s_i` counts the constraints
/// satisfied after iteration `i` and `gamma` is the Motzkin sample size.
///
/// The denominator is taken to be `L` itself; the bound's source leaves the
/// normalizing quantity otherwise undefined.
pub fn rate_skm_tight(
    sigma_min: f64,
    lambda: f64,
    m: usize,
    s_i: usize,
    gamma: usize,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 2.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    if s_i > m || gamma == 0 || gamma > m {
        return Err(Error::InvalidConfig(format!(
            "need s_i <= m and 1 <= gamma <= m, got s_i={s_i}, gamma={gamma}, m={m}"
        )));
    }
    let l = (m - s_i).max(m - gamma);
    if l == 0 {
        return Err(Error::DivisionByZero(
            "all constraints satisfied and gamma = m leave an empty sample".into(),
        ));
    }
    Ok(1.0 - sigma_min * sigma_min * (2.0 * lambda - lambda * lambda) / l as f64)
}
