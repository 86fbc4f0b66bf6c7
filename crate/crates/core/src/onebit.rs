//! One-bit quantization with time-varying Gaussian thresholds and the
//! overdetermined feasibility polyhedron it induces.
//!
//! Measuring `y` against `m` independent threshold sequences yields sign
//! data `r^(l) = sgn(y - tau^(l))`. Each sign pins `x` to one side of a
//! hyperplane, and stacking all `m * n` inequalities (negated into `<=`
//! form) produces a polyhedron that contains the generating signal by
//! construction and shrinks as `m` grows.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::feasibility::{solve, FeasibilityProblem, RowSense, SolveReport, SolverConfig};
use crate::matrix::{DenseMatrix, Vector};

/// `m` Gaussian threshold sequences of length `n`, one per column.
#[derive(Debug, Clone)]
pub struct ThresholdEnsemble {
    /// `n x m`; column `l` is the sequence used in the `l`-th comparison.
    pub gamma: DenseMatrix,
    pub mean: f64,
    pub seed: u64,
}

impl ThresholdEnsemble {
    pub fn num_measurements(&self) -> usize {
        self.gamma.rows()
    }

    pub fn num_sequences(&self) -> usize {
        self.gamma.cols()
    }
}

/// Sign matrix and the thresholds that produced it, both `n x m`.
#[derive(Debug, Clone)]
pub struct OneBitCapture {
    pub r: DenseMatrix,
    pub gamma: DenseMatrix,
}

/// The stacked one-bit feasibility region. All rows are `<=` constraints
/// (the sign inequalities are negated into that form), grouped in
/// `block_rows = n` blocks, one per threshold sequence.
#[derive(Debug, Clone)]
pub struct OneBitPolyhedron {
    pub problem: FeasibilityProblem,
    pub block_rows: usize,
}

/// Sign of `y - tau`, with ties mapped to `+1` so the capture is
/// deterministic.
pub fn quantize_one_bit(y: &Vector, tau: &Vector) -> Result<Vector> {
    if y.len() != tau.len() {
        return Err(Error::DimensionMismatch(format!(
            "signal length {} and threshold length {} differ",
            y.len(),
            tau.len()
        )));
    }
    let signs = y
        .as_slice()
        .iter()
        .zip(tau.as_slice())
        .map(|(yk, tk)| if yk - tk >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    Vector::from_vec(signs)
}

/// Draw an `n x m` ensemble of i.i.d. `N(mean, 1)` thresholds,
/// reproducible from `seed`.
///
/// Sequences are drawn one column at a time, so ensembles sharing a seed are
/// nested: the first `m` sequences of a larger ensemble coincide with the
/// whole of a smaller one. Growing `m` then only adds constraints to the
/// same polyhedron, which keeps recovery-versus-m comparisons paired.
pub fn generate_thresholds(n: usize, m: usize, mean: f64, seed: u64) -> ThresholdEnsemble {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gamma = DenseMatrix::zeros(n, m);
    for l in 0..m {
        for j in 0..n {
            gamma.set(j, l, mean + rng.sample::<f64, _>(StandardNormal));
        }
    }
    ThresholdEnsemble { gamma, mean, seed }
}

fn column(m: &DenseMatrix, j: usize) -> Vector {
    Vector::from_vec((0..m.rows()).map(|i| m.get(i, j)).collect())
        .expect("columns of finite matrices are finite")
}

/// Build the stacked one-bit polyhedron for `y = a x` measured against every
/// threshold sequence in `ensemble`.
///
/// The pre-negation system is `r_j^(l) a_j x >= r_j^(l) tau_j^(l)`; rows are
/// stored negated as `<=` constraints in sequence-major order, so the
/// generating signal satisfies every row exactly.
pub fn build_polyhedron(
    a: &DenseMatrix,
    y: &Vector,
    ensemble: &ThresholdEnsemble,
) -> Result<(OneBitPolyhedron, OneBitCapture)> {
    let n = a.rows();
    let d = a.cols();
    if y.len() != n || ensemble.gamma.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but y has {} and thresholds {}",
            n,
            y.len(),
            ensemble.gamma.rows()
        )));
    }
    let m = ensemble.gamma.cols();

    let mut signs = DenseMatrix::zeros(n, m);
    let mut c_data = Vec::with_capacity(m * n * d);
    let mut b_data = Vec::with_capacity(m * n);
    for l in 0..m {
        let tau = column(&ensemble.gamma, l);
        let r = quantize_one_bit(y, &tau)?;
        for j in 0..n {
            let rj = r.get(j);
            signs.set(j, l, rj);
            c_data.extend(a.row(j).iter().map(|v| -rj * v));
            b_data.push(-rj * tau.get(j));
        }
    }

    let c = DenseMatrix::from_vec(m * n, d, c_data)?;
    let b = Vector::from_vec(b_data)?;
    let problem =
        FeasibilityProblem::with_uniform_sense(c, b, RowSense::LessEq)?.with_block_rows(n)?;

    Ok((
        OneBitPolyhedron {
            problem,
            block_rows: n,
        },
        OneBitCapture {
            r: signs,
            gamma: ensemble.gamma.clone(),
        },
    ))
}

/// One-bit recovery: generate thresholds, build the polyhedron and solve it
/// from the origin. `seed` drives the threshold draws; `cfg.seed` drives the
/// solver. Thresholds are zero-mean.
pub fn orka_recover(
    a: &DenseMatrix,
    y: &Vector,
    m: usize,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<SolveReport> {
    let ensemble = generate_thresholds(a.rows(), m, 0.0, seed);
    let (poly, _) = build_polyhedron(a, y, &ensemble)?;
    solve(&poly.problem, cfg, &Vector::zeros(a.cols()))
}

/// One-bit recovery with adaptively refined thresholds.
///
/// Each outer round solves the current polyhedron, measures the slack
/// `eps = r .* (a x - tau)` of its solution, moves every threshold to the
/// midpoint `(a_j x + tau_j) / 2` (which halves the slack), refreshes the
/// signs against `y`, and rebuilds. Stops when every sequence moves by at
/// most `delta` in Euclidean norm, or after `max_outer` rounds (reported via
/// `converged = false`, not an error).
///
/// The returned report carries the final inner solve's residual trace, the
/// total inner iteration count, and the accumulated wall time; the ensemble
/// holds the refined thresholds.
pub fn adaptive_threshold_recover(
    a: &DenseMatrix,
    y: &Vector,
    m: usize,
    cfg: &SolverConfig,
    delta: f64,
    max_outer: usize,
    seed: u64,
) -> Result<(SolveReport, ThresholdEnsemble)> {
    if delta <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if max_outer == 0 {
        return Err(Error::InvalidConfig("max_outer must be at least 1".into()));
    }
    let n = a.rows();
    let d = a.cols();

    let mut ensemble = generate_thresholds(n, m, 0.0, seed);
    let mut x = Vector::zeros(d);
    let mut total_iterations = 0usize;
    let mut total_wall = 0.0;
    let mut last_report: Option<SolveReport> = None;
    let mut thresholds_converged = false;

    for _round in 0..max_outer {
        let (poly, capture) = build_polyhedron(a, y, &ensemble)?;
        // Warm start from the previous round's solution.
        let report = solve(&poly.problem, cfg, &x)?;
        total_iterations += report.iterations;
        total_wall += report.wall_time_s;
        x = report.x.clone();
        last_report = Some(report);

        // Slack of the solution against the current thresholds, and the
        // midpoint update tau' = r .* (r .* (a x) - eps / 2) = (a x + tau)/2.
        let ax = a.mul_vec(&x)?;
        let mut next = ensemble.gamma.clone();
        let mut max_move_sq = 0.0_f64;
        for l in 0..m {
            let mut move_sq = 0.0;
            for j in 0..n {
                let rj = capture.r.get(j, l);
                let tau_jl = ensemble.gamma.get(j, l);
                let eps = rj * (ax.get(j) - tau_jl);
                let tau_next = rj * (rj * ax.get(j) - eps / 2.0);
                next.set(j, l, tau_next);
                let dl = tau_next - tau_jl;
                move_sq += dl * dl;
            }
            max_move_sq = max_move_sq.max(move_sq);
        }
        ensemble = ThresholdEnsemble {
            gamma: next,
            mean: ensemble.mean,
            seed,
        };

        if max_move_sq.sqrt() <= delta {
            thresholds_converged = true;
            break;
        }
    }

    let mut report = last_report.expect("max_outer >= 1 guarantees at least one solve");
    report.iterations = total_iterations;
    report.wall_time_s = total_wall;
    report.converged = thresholds_converged;
    Ok((report, ensemble))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{positive_residual, Method};
    use rand::Rng;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        DenseMatrix::from_vec(rows, cols, data).unwrap()
    }

    fn gaussian_vec(len: usize, seed: u64) -> Vector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Vector::from_vec(
            (0..len)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn quantize_basic_and_ties() {
        let y = Vector::from_vec(vec![0.5, -0.2]).unwrap();
        let tau = Vector::zeros(2);
        assert_eq!(quantize_one_bit(&y, &tau).unwrap().as_slice(), &[1.0, -1.0]);

        // Exact ties map to +1.
        let y = Vector::from_vec(vec![1.0, 2.0, 3.0]).unwrap();
        let tau = Vector::from_vec(vec![2.0, 2.0, 2.0]).unwrap();
        assert_eq!(
            quantize_one_bit(&y, &tau).unwrap().as_slice(),
            &[-1.0, 1.0, 1.0]
        );
        assert_eq!(
            quantize_one_bit(&y, &y).unwrap().as_slice(),
            &[1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn quantize_rejects_mismatched_lengths() {
        let y = Vector::zeros(3);
        let tau = Vector::zeros(2);
        assert!(quantize_one_bit(&y, &tau).is_err());
    }

    #[test]
    fn threshold_moments_and_determinism() {
        let e = generate_thresholds(1000, 1000, 0.0, 5);
        let data = e.gamma.as_slice();
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        assert!(mean.abs() < 0.005, "sample mean {mean}");
        let var = data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!((var - 1.0).abs() < 0.01, "sample variance {var}");

        let e2 = generate_thresholds(1000, 1000, 0.0, 5);
        assert_eq!(e.gamma.as_slice(), e2.gamma.as_slice());

        let shifted = generate_thresholds(500, 100, 3.0, 6);
        let mean3 =
            shifted.gamma.as_slice().iter().sum::<f64>() / shifted.gamma.as_slice().len() as f64;
        assert!((mean3 - 3.0).abs() < 0.02, "shifted mean {mean3}");
    }

    #[test]
    fn polyhedron_identity_signs() {
        // a = I2, y = (1, -1), single zero threshold sequence: the pre-negation
        // rows are x1 >= 0 and -x2 >= 0.
        let a = DenseMatrix::identity(2);
        let y = Vector::from_vec(vec![1.0, -1.0]).unwrap();
        let ensemble = ThresholdEnsemble {
            gamma: DenseMatrix::zeros(2, 1),
            mean: 0.0,
            seed: 0,
        };
        let (poly, capture) = build_polyhedron(&a, &y, &ensemble).unwrap();
        assert_eq!(capture.r.as_slice(), &[1.0, -1.0]);
        // Stored negated: -x1 <= 0 and x2 <= 0.
        assert_eq!(poly.problem.matrix().row(0), &[-1.0, -0.0]);
        assert_eq!(poly.problem.matrix().row(1), &[0.0, 1.0]);
        assert_eq!(poly.problem.rhs().as_slice(), &[-0.0, 0.0]);
    }

    #[test]
    fn truth_is_exactly_feasible() {
        let a = gaussian(20, 5, 77);
        let x_true = gaussian_vec(5, 78);
        let y = a.mul_vec(&x_true).unwrap();
        let ensemble = generate_thresholds(20, 4, 0.0, 79);
        let (poly, capture) = build_polyhedron(&a, &y, &ensemble).unwrap();

        let res = positive_residual(&poly.problem, &x_true).unwrap();
        assert!(
            res.as_slice().iter().all(|&v| v == 0.0),
            "positive residual not exactly zero"
        );

        // Sign consistency r .* (y - tau) >= 0, entrywise.
        for l in 0..4 {
            for j in 0..20 {
                let v = capture.r.get(j, l) * (y.get(j) - capture.gamma.get(j, l));
                assert!(v >= 0.0);
            }
        }

        // Shape bookkeeping: m * n rows, d columns.
        assert_eq!(poly.problem.num_rows(), 80);
        assert_eq!(poly.problem.dim(), 5);
        assert_eq!(poly.block_rows, 20);
    }

    #[test]
    fn polyhedron_matches_reference_dimensions() {
        let a = gaussian(200, 25, 1);
        let x_true = gaussian_vec(25, 2);
        let y = a.mul_vec(&x_true).unwrap();
        let ensemble = generate_thresholds(200, 10, 0.0, 3);
        let (poly, _) = build_polyhedron(&a, &y, &ensemble).unwrap();
        assert_eq!(poly.problem.num_rows(), 2000);
        assert_eq!(poly.problem.dim(), 25);
    }

    #[test]
    fn orka_toy_recovery_in_two_dimensions() {
        let a = DenseMatrix::identity(2);
        let x_true = Vector::from_vec(vec![0.3, -0.7]).unwrap();
        let y = a.mul_vec(&x_true).unwrap();
        let mut cfg = SolverConfig::new(Method::BlockSkm);
        cfg.max_iters = 20_000;
        cfg.tol = 1e-13;
        cfg.seed = 5;
        let report = orka_recover(&a, &y, 200, &cfg, 17).unwrap();
        let err = report.x.sub(&x_true).unwrap().norm2();
        assert!(err < 0.05, "recovery error {err}");
    }

    #[test]
    fn orka_pipeline_is_deterministic() {
        let a = gaussian(30, 4, 10);
        let x_true = gaussian_vec(4, 11);
        let y = a.mul_vec(&x_true).unwrap();
        let mut cfg = SolverConfig::new(Method::PrSkm);
        cfg.max_iters = 3_000;
        cfg.seed = 12;
        let r1 = orka_recover(&a, &y, 6, &cfg, 13).unwrap();
        let r2 = orka_recover(&a, &y, 6, &cfg, 13).unwrap();
        assert_eq!(r1.x.as_slice(), r2.x.as_slice());
        assert_eq!(r1.iterations, r2.iterations);
    }

    #[test]
    fn adaptive_round_halves_slack_and_fixes_exact_solutions() {
        let a = gaussian(15, 3, 20);
        let x_true = gaussian_vec(3, 21);
        let y = a.mul_vec(&x_true).unwrap();
        let ensemble = generate_thresholds(15, 2, 0.0, 22);
        let (_, capture) = build_polyhedron(&a, &y, &ensemble).unwrap();

        // Apply one threshold update at an arbitrary point x and check the
        // residual against the new thresholds is exactly half the old slack
        // (before any sign refresh).
        let x = gaussian_vec(3, 23);
        let ax = a.mul_vec(&x).unwrap();
        for l in 0..2 {
            for j in 0..15 {
                let rj = capture.r.get(j, l);
                let tau = capture.gamma.get(j, l);
                let eps = rj * (ax.get(j) - tau);
                let tau_next = rj * (rj * ax.get(j) - eps / 2.0);
                let new_slack = rj * (ax.get(j) - tau_next);
                assert!((new_slack - eps / 2.0).abs() <= 1e-12 * eps.abs().max(1.0));
            }
        }

        // A solution lying exactly on every hyperplane (eps = 0) leaves the
        // thresholds unchanged: tau' = (a x + tau) / 2 = tau.
        for l in 0..2 {
            for j in 0..15 {
                let tau = capture.gamma.get(j, l);
                let eps = 0.0;
                let rj = capture.r.get(j, l);
                // eps = 0 forces a x = tau on this row.
                let tau_next = rj * (rj * tau - eps / 2.0);
                assert_eq!(tau_next, tau);
            }
        }
    }

    #[test]
    fn adaptive_recovery_tightens_toward_truth() {
        let a = gaussian(40, 6, 30);
        let x_true = gaussian_vec(6, 31);
        let y = a.mul_vec(&x_true).unwrap();
        let mut cfg = SolverConfig::new(Method::BlockSkm);
        cfg.max_iters = 4_000;
        cfg.tol = 1e-13;
        cfg.seed = 32;

        let plain = orka_recover(&a, &y, 4, &cfg, 33).unwrap();
        let (adaptive, ensemble) =
            adaptive_threshold_recover(&a, &y, 4, &cfg, 1e-9, 40, 33).unwrap();

        let err_plain = plain.x.sub(&x_true).unwrap().norm2();
        let err_adaptive = adaptive.x.sub(&x_true).unwrap().norm2();
        assert!(
            err_adaptive < err_plain / 20.0,
            "adaptive {err_adaptive} vs random {err_plain}"
        );
        assert!(err_adaptive < 1e-3, "adaptive error {err_adaptive}");

        // Threshold movement stayed finite and the ensemble kept its shape.
        assert!(ensemble.gamma.as_slice().iter().all(|v| v.is_finite()));
        assert_eq!(ensemble.gamma.rows(), 40);
        assert_eq!(ensemble.gamma.cols(), 4);
    }
}
