//! Recovery metrics: normalized mean squared error and the sign-data
//! log-likelihood diagnostic.

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix, Vector};

/// `||x* - x^||^2 / ||x*||^2`; zero exactly on perfect recovery.
pub fn nmse_vector(x_star: &Vector, x_hat: &Vector) -> Result<f64> {
    let denom = dot(x_star.as_slice(), x_star.as_slice());
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff = x_star.sub(x_hat)?;
    Ok(dot(diff.as_slice(), diff.as_slice()) / denom)
}

/// Frobenius-norm analogue of [`nmse_vector`] for matrix targets.
pub fn nmse_matrix(x_star: &DenseMatrix, x_hat: &DenseMatrix) -> Result<f64> {
    if (x_star.rows(), x_star.cols()) != (x_hat.rows(), x_hat.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            x_star.rows(),
            x_star.cols(),
            x_hat.rows(),
            x_hat.cols()
        )));
    }
    let denom: f64 = x_star.as_slice().iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num: f64 = x_star
        .as_slice()
        .iter()
        .zip(x_hat.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(num / denom)
}

/// Gaussian CDF with configurable mean and standard deviation.
///
/// Uses West's double-precision rational approximation, accurate to full
/// precision down to the far tails.
#[derive(Debug, Clone, Copy)]
pub struct GaussianCdf {
    pub mean: f64,
    pub std: f64,
}

impl GaussianCdf {
    pub fn standard() -> Self {
        Self {
            mean: 0.0,
            std: 1.0,
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        standard_normal_cdf((v - self.mean) / self.std)
    }
}

fn standard_normal_cdf(x: f64) -> f64 {
    let z = x.abs();
    let tail = if z > 37.0 {
        0.0
    } else {
        let e = (-z * z / 2.0).exp();
        if z < 7.071_067_811_865_475 {
            let b = 3.526_249_659_989_11e-2 * z + 0.700_383_064_443_688;
            let b = b * z + 6.373_962_203_531_65;
            let b = b * z + 33.912_866_078_383;
            let b = b * z + 112.079_291_497_871;
            let b = b * z + 221.213_596_169_931;
            let b = b * z + 220.206_867_912_376;
            let d = 8.838_834_764_831_84e-2 * z + 1.755_667_163_182_64;
            let d = d * z + 16.064_177_579_207;
            let d = d * z + 86.780_732_202_946_1;
            let d = d * z + 296.564_248_779_674;
            let d = d * z + 637.333_633_378_831;
            let d = d * z + 793.826_512_519_948;
            let d = d * z + 440.413_735_824_752;
            e * b / d
        } else {
            let b = z + 0.65;
            let b = z + 4.0 / b;
            let b = z + 3.0 / b;
            let b = z + 2.0 / b;
            let b = z + 1.0 / b;
            e / (b * 2.506_628_274_631_000_5)
        }
    };
    if x <= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Log-likelihood of sign data `r` under threshold CDF `cdf`:
/// `sum log Phi(a_i x)` over `+1` rows plus `sum log(1 - Phi(a_i x))` over
/// `-1` rows. Probabilities are clamped at `1e-300` (with a warning) so the
/// sum stays finite in the far tails.
pub fn one_bit_log_likelihood(
    a: &DenseMatrix,
    r: &Vector,
    x: &Vector,
    cdf: &GaussianCdf,
) -> Result<f64> {
    if r.len() != a.rows() || x.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix {}x{}, signs {}, x {}",
            a.rows(),
            a.cols(),
            r.len(),
            x.len()
        )));
    }
    if r.as_slice().iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidConfig(
            "sign vector entries must be +-1".into(),
        ));
    }

    let mut clamped = 0usize;
    let mut total = 0.0;
    for i in 0..a.rows() {
        let z = dot(a.row(i), x.as_slice());
        let p_plus = cdf.eval(z);
        let p = if r.get(i) > 0.0 { p_plus } else { 1.0 - p_plus };
        let p = if p < 1e-300 {
            clamped += 1;
            1e-300
        } else {
            p
        };
        total += p.ln();
    }
    if clamped > 0 {
        eprintln!("one_bit_log_likelihood: clamped {clamped} underflowing probabilities at 1e-300");
    }
    if !total.is_finite() {
        return Err(Error::NonFinite(format!("log-likelihood is {total}")));
    }
    Ok(total)
}
