//! Behavioral properties of the Kaczmarz solvers: per-step geometry,
//! expected-error contraction, Motzkin progress on the reference inequality
//! system, and preconditioned-rate identities.

use proptest::prelude::*;

use orka_core::experiments::{gen_gaussian_matrix, gen_gaussian_vector, nmse_vector};
use orka_core::feasibility::{
    rate_rka, solve, solve_skm, FeasibilityProblem, Method, RowSense, SolverConfig,
};
use orka_core::linalg::{householder_qr, invert_upper_triangular, scaled_condition_number};
use orka_core::matrix::{dot, DenseMatrix, Vector};
use orka_core::onebit::{build_polyhedron, generate_thresholds};

fn one_row_problem(row: Vec<f64>, b: f64, sense: RowSense) -> FeasibilityProblem {
    FeasibilityProblem::new(
        DenseMatrix::from_rows(&[row]).unwrap(),
        Vector::from_vec(vec![b]).unwrap(),
        vec![sense],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Fejer monotonicity: a relaxed projection never moves away from any
    // point satisfying the projected row.
    #[test]
    fn relaxed_step_is_fejer_monotone(
        row in prop::collection::vec(-3.0f64..3.0, 2..6),
        b in -2.0f64..2.0,
        x0 in prop::collection::vec(-3.0f64..3.0, 6),
        xf in prop::collection::vec(-3.0f64..3.0, 6),
        lambda in 0.05f64..1.95,
        eq in any::<bool>(),
    ) {
        let d = row.len();
        let norm_sq: f64 = row.iter().map(|v| v * v).sum();
        prop_assume!(norm_sq > 1e-2);
        let sense = if eq { RowSense::Equality } else { RowSense::LessEq };
        let p = one_row_problem(row.clone(), b, sense);

        // Project xf onto the row's feasible set.
        let mut xf = xf[..d].to_vec();
        let raw = dot(&row, &xf) - b;
        let needs_projection = match sense {
            RowSense::Equality => raw != 0.0,
            RowSense::LessEq => raw > 0.0,
        };
        if needs_projection {
            for (v, r) in xf.iter_mut().zip(&row) {
                *v -= raw / norm_sq * r;
            }
        }

        let x0 = Vector::from_vec(x0[..d].to_vec()).unwrap();
        let mut cfg = SolverConfig::new(Method::Skm);
        cfg.gamma = Some(1);
        cfg.lambda = lambda;
        cfg.max_iters = 1;
        cfg.tol = 0.0;
        let x1 = solve_skm(&p, &cfg, &x0).unwrap().x;

        let dist = |x: &[f64]| -> f64 {
            x.iter().zip(&xf).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        };
        prop_assert!(dist(x1.as_slice()) <= dist(x0.as_slice()) + 1e-12);
    }
}

#[test]
fn expected_error_contracts_at_the_theoretical_rate() {
    // Reduced version of the acceptance envelope: 50 runs, i in {10, 100}.
    let a = gen_gaussian_matrix(100, 10, 7);
    let x_star = gen_gaussian_vector(10, 8);
    let b = a.mul_vec(&x_star).unwrap();
    let q = rate_rka(&a).unwrap();
    let p = FeasibilityProblem::with_uniform_sense(a, b, RowSense::Equality).unwrap();
    let h0 = dot(x_star.as_slice(), x_star.as_slice());

    for i in [10usize, 100] {
        let mut total = 0.0;
        for seed in 0..50 {
            let mut cfg = SolverConfig::new(Method::Rka);
            cfg.max_iters = i;
            cfg.tol = 0.0;
            cfg.seed = seed;
            let r = solve(&p, &cfg, &Vector::zeros(10)).unwrap();
            let d = r.x.sub(&x_star).unwrap();
            total += dot(d.as_slice(), d.as_slice());
        }
        let mean = total / 50.0;
        let bound = 1.25 * q.powi(i as i32) * h0;
        assert!(mean <= bound, "mean {mean} above envelope {bound} at i={i}");
    }
}

#[test]
fn skm_progress_is_monotone_on_the_reference_inequality_system() {
    // m = 40 threshold sequences over a 100x10 system; windows of 100
    // iterations, seed-averaged over 15 trials: the positive-residual norm
    // never rises and the satisfied-constraint count never falls.
    let windows = 12;
    let mut window_residuals = vec![0.0f64; windows + 1];
    let mut satisfied = [0.0f64; 4];
    let checkpoints = [300usize, 600, 900, 1200];

    for trial in 0..15u64 {
        let a = gen_gaussian_matrix(100, 10, 8100 + trial);
        let x = gen_gaussian_vector(10, 8200 + trial);
        let y = a.mul_vec(&x).unwrap();
        let ensemble = generate_thresholds(100, 40, 0.0, 8300 + trial);
        let (poly, _) = build_polyhedron(&a, &y, &ensemble).unwrap();

        let mut cfg = SolverConfig::new(Method::Skm);
        cfg.max_iters = windows * 100;
        cfg.tol = 0.0;
        cfg.seed = 8400 + trial;

        // History is logged every ceil(1200/1000) = 2 iterations, so window
        // boundaries sit at multiples of 50 in the log.
        let report = solve_skm(&poly.problem, &cfg, &Vector::zeros(10)).unwrap();
        let stride = 2;
        for w in 0..=windows {
            let idx = (w * 100 / stride).min(report.residual_history.len() - 1);
            window_residuals[w] += report.residual_history[idx];
        }

        // Satisfied counts via deterministic trajectory prefixes.
        for (slot, &budget) in checkpoints.iter().enumerate() {
            let mut prefix_cfg = cfg.clone();
            prefix_cfg.max_iters = budget;
            let r = solve_skm(&poly.problem, &prefix_cfg, &Vector::zeros(10)).unwrap();
            let count = (0..poly.problem.num_rows())
                .filter(|&j| poly.problem.row_residual(j, r.x.as_slice()) <= 0.0)
                .count();
            satisfied[slot] += count as f64;
        }
    }

    for w in 1..=windows {
        assert!(
            window_residuals[w] <= window_residuals[w - 1] + 1e-9,
            "mean residual rose at window {w}: {} -> {}",
            window_residuals[w - 1],
            window_residuals[w]
        );
    }
    for s in 1..satisfied.len() {
        assert!(
            satisfied[s] + 1e-9 >= satisfied[s - 1],
            "mean satisfied count fell between checkpoints {s}",
        );
    }
}

#[test]
fn block_solver_reaches_target_error_in_fewest_iterations() {
    // Iterations to NMSE <= 1e-6 on the blocked equality system, quantized
    // to a budget ladder via deterministic trajectory prefixes.
    let budgets = [5usize, 10, 20, 40, 80, 160, 320, 640];
    let first_budget = |method: Method, trial: u64| -> usize {
        let a = gen_gaussian_matrix(1000, 10, 8500 + trial);
        let x = gen_gaussian_vector(10, 8600 + trial);
        let b = a.mul_vec(&x).unwrap();
        let p = FeasibilityProblem::with_uniform_sense(a, b, RowSense::Equality)
            .unwrap()
            .with_block_rows(10)
            .unwrap();
        for (idx, &budget) in budgets.iter().enumerate() {
            let mut cfg = SolverConfig::new(method);
            cfg.max_iters = budget;
            cfg.tol = 0.0;
            cfg.seed = 8700 + trial;
            let r = solve(&p, &cfg, &Vector::zeros(10)).unwrap();
            if nmse_vector(&x, &r.x).unwrap() <= 1e-6 {
                return idx;
            }
        }
        budgets.len()
    };

    for method in [Method::Rka, Method::Skm, Method::PrSkm] {
        let mut block_total = 0usize;
        let mut other_total = 0usize;
        for trial in 0..5 {
            block_total += first_budget(Method::BlockSkm, trial);
            other_total += first_budget(method, trial);
        }
        assert!(
            block_total < other_total,
            "block budget index {block_total} not below {other_total} for {:?}",
            method
        );
    }
}

#[test]
fn preconditioned_system_attains_rate_identities() {
    // H = C R^{-1} attains kappa = sqrt(d), hence the preconditioned rate
    // constant is (d - 1) / d.
    let c = gen_gaussian_matrix(200, 10, 901);
    let f = householder_qr(&c).unwrap();
    let m_inv = invert_upper_triangular(&f.r).unwrap();
    let h = c.matmul(&m_inv).unwrap();

    let kappa = scaled_condition_number(&h).unwrap();
    assert!((kappa - 10.0f64.sqrt()).abs() < 1e-8, "kappa(H) = {kappa}");

    let q = rate_rka(&h).unwrap();
    assert!((q - 0.9).abs() < 1e-8, "preconditioned rate {q}");
}
