//! Convergence diagnostics for one-bit recovery: hyperplane distances, the
//! truncated moment-generating function of their average, the Chernoff lower
//! bound on capturing the signal in a finite volume, and the rational
//! (Pad\u{e9}) sample-size penalty that augments the contraction bound.

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix, Vector};
use crate::onebit::OneBitCapture;

/// Squared distances between a point and every stacked one-bit hyperplane.
#[derive(Debug, Clone)]
pub struct DistanceSample {
    pub values: Vec<f64>,
    pub m_prime: usize,
}

/// Rational-penalty model built from the first two distance moments.
///
/// The coefficients satisfy `a0 = e^u * b0` and `a1, b1` complete the
/// `[1/1]` Pad\u{e9} approximant of the truncated MGF in `1/m`.
#[derive(Debug, Clone)]
pub struct PenaltyModel {
    pub mu1: f64,
    pub mu2: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
}

/// Squared distance `(a_j x* - tau_j^(l))^2` for every stacked row, in the
/// same sequence-major order the polyhedron uses. The `+-1` sign of the row
/// vanishes under the square.
pub fn hyperplane_distances(
    a: &DenseMatrix,
    x_star: &Vector,
    capture: &OneBitCapture,
) -> Result<DistanceSample> {
    let n = a.rows();
    if x_star.len() != a.cols() || capture.gamma.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix {}x{}, x {}, capture {} rows",
            n,
            a.cols(),
            x_star.len(),
            capture.gamma.rows()
        )));
    }
    let m = capture.gamma.cols();
    let ax: Vec<f64> = (0..n).map(|j| dot(a.row(j), x_star.as_slice())).collect();
    let mut values = Vec::with_capacity(m * n);
    for l in 0..m {
        for (j, axj) in ax.iter().enumerate() {
            let diff = axj - capture.gamma.get(j, l);
            values.push(diff * diff);
        }
    }
    Ok(DistanceSample {
        m_prime: values.len(),
        values,
    })
}

/// Arithmetic mean of the distance sample.
pub fn average_distance(sample: &DistanceSample) -> f64 {
    sample.values.iter().sum::<f64>() / sample.values.len() as f64
}

/// Raw sample moments of orders `1..=order`.
pub fn empirical_moments(sample: &DistanceSample, order: usize) -> Vec<f64> {
    assert!(order >= 1, "moment order must be at least 1");
    let n = sample.values.len() as f64;
    let mut sums = vec![0.0_f64; order];
    for &v in &sample.values {
        let mut p = 1.0;
        for s in sums.iter_mut() {
            p *= v;
            *s += p;
        }
    }
    sums.iter().map(|s| s / n).collect()
}

/// Truncated moment-generating function of the averaged distances,
///
/// `Psi_T = (1 + t mu_1 / m' + ... + t^k mu_k / (k! m'^k))^{m'}`,
///
/// with the Taylor remainder dropped. Evaluated in log space so large `m'`
/// survives; overflow reports `NonFinite`.
pub fn mgf_truncated(mu: &[f64], t: f64, m_prime: usize, order: usize) -> Result<f64> {
    if order > mu.len() {
        return Err(Error::InvalidConfig(format!(
            "order {order} exceeds the {} supplied moments",
            mu.len()
        )));
    }
    if t < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "t must be non-negative, got {t}"
        )));
    }
    let mp = m_prime as f64;
    let mut series = 1.0;
    let mut factorial = 1.0;
    let mut power = 1.0;
    for (k, &muk) in mu.iter().take(order).enumerate() {
        factorial *= (k + 1) as f64;
        power *= t / mp;
        series += power * muk / factorial;
    }
    if !(series > 0.0) {
        return Err(Error::NonFinite(format!("truncated series is {series}")));
    }
    let value = (mp * series.ln()).exp();
    if !value.is_finite() {
        return Err(Error::NonFinite("MGF overflow".into()));
    }
    Ok(value)
}

/// Pad\u{e9} coefficients of the sample-size penalty, from the first two
/// distance moments and the exponent `t`:
///
/// `u = mu1 t`, `v = mu2 t^2 / 2`, and
///
/// ```text
/// a0 = e^u (12u^2 - 24v)             b0 = 12u^2 - 24v
/// a1 = e^u (-3u^4 + 8u^3 + 12u^2 v - 24uv - 12v^2)
/// b1 = 3u^4 + 8u^3 - 12u^2 v - 24uv + 12v^2
/// ```
pub fn pade_penalty_coefficients(mu1: f64, mu2: f64, t: f64) -> Result<PenaltyModel> {
    if t <= 0.0 {
        return Err(Error::InvalidConfig(format!("t must be positive, got {t}")));
    }
    let u = mu1 * t;
    let v = mu2 * t * t / 2.0;
    let eu = u.exp();
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u2 * u2;

    let b0 = 12.0 * u2 - 24.0 * v;
    let b1 = 3.0 * u4 + 8.0 * u3 - 12.0 * u2 * v - 24.0 * u * v + 12.0 * v * v;
    let a0 = eu * b0;
    let a1 = eu * (-3.0 * u4 + 8.0 * u3 + 12.0 * u2 * v - 24.0 * u * v - 12.0 * v * v);

    if b0.abs() < 1e-12 && b1.abs() < 1e-12 {
        return Err(Error::DegeneratePade);
    }
    Ok(PenaltyModel {
        mu1,
        mu2,
        t,
        u,
        v,
        a0,
        a1,
        b0,
        b1,
    })
}

/// Penalty `Upsilon(m) = (a0 + a1/m) / (b0 + b1/m) - a0/b0`, which decays to
/// zero as the number of threshold sequences grows.
pub fn penalty_value(model: &PenaltyModel, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidConfig("m must be at least 1".into()));
    }
    if model.b0 == 0.0 {
        return Err(Error::DivisionByZero("b0 vanishes".into()));
    }
    let mf = m as f64;
    let den = model.b0 + model.b1 / mf;
    if den == 0.0 {
        return Err(Error::DivisionByZero(format!("pole at m = {m}")));
    }
    Ok((model.a0 + model.a1 / mf) / den - model.a0 / model.b0)
}

/// Logarithmic grid on `[1e-3, 1e3]` with 200 points, the default search
/// domain for the Chernoff infimum.
pub fn default_t_grid() -> Vec<f64> {
    let points = 200;
    (0..points)
        .map(|i| {
            let frac = i as f64 / (points - 1) as f64;
            10f64.powf(-3.0 + 6.0 * frac)
        })
        .collect()
}

/// Chernoff lower bound `Pr(T_ave <= a) >= 1 - min_t Psi_T(t) / e^{t a}`,
/// evaluated on a grid of non-negative `t` and clamped to `[0, 1]`.
///
/// The truncated series undershoots the true MGF once `t / m'` leaves the
/// expansion's trust region, which would make the claimed bound exceed the
/// true probability. Grid points are therefore only used while the
/// second-order term stays subordinate, `t <= m' mu_1 / mu_2`.
pub fn chernoff_lower_bound(mu: &[f64], m_prime: usize, a: f64, t_grid: &[f64]) -> f64 {
    let t_max = match mu {
        [mu1, mu2, ..] if *mu2 > 0.0 => m_prime as f64 * mu1 / mu2,
        [mu1, ..] if *mu1 > 0.0 => m_prime as f64 / (2.0 * mu1),
        _ => f64::INFINITY,
    };
    let mut best = 1.0_f64; // t = 0 always gives ratio 1 (vacuous bound)
    for &t in t_grid {
        if !(t >= 0.0) || t > t_max {
            continue;
        }
        if let Ok(psi) = mgf_truncated(mu, t, m_prime, mu.len()) {
            // psi / e^{ta} in log space to dodge overflow of either side.
            let log_ratio = psi.ln() - t * a;
            if log_ratio.is_finite() || log_ratio == f64::NEG_INFINITY {
                best = best.min(log_ratio.exp());
            }
        }
    }
    (1.0 - best).clamp(0.0, 1.0)
}

/// Contraction-plus-penalty bound on the expected squared error after `i`
/// iterations with `m` threshold sequences:
/// `(1 - (2 lambda - lambda^2) / kappa^2)^i h0 + Upsilon(m)`.
pub fn augmented_convergence_bound(
    kappa_a: f64,
    lambda: f64,
    i: usize,
    h0: f64,
    model: &PenaltyModel,
    m: usize,
) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 2.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    if h0 < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "h0 must be non-negative, got {h0}"
        )));
    }
    if kappa_a < 1.0 {
        return Err(Error::InvalidConfig(format!(
            "scaled condition numbers are at least 1, got {kappa_a}"
        )));
    }
    let q = 1.0 - (2.0 * lambda - lambda * lambda) / (kappa_a * kappa_a);
    Ok(q.powi(i as i32) * h0 + penalty_value(model, m)?)
}
