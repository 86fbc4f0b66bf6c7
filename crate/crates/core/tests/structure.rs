//! Structural identities of the stacked one-bit system: singular-value
//! scaling, condition-number preservation, and exact feasibility of the
//! generating signal.

use orka_core::analysis::{average_distance, empirical_moments, hyperplane_distances};
use orka_core::experiments::{gen_gaussian_matrix, gen_gaussian_vector};
use orka_core::feasibility::{positive_residual, Method, SolverConfig};
use orka_core::linalg::{scaled_condition_number, singular_values};
use orka_core::matrix::DenseMatrix;
use orka_core::onebit::{adaptive_threshold_recover, build_polyhedron, generate_thresholds};

#[test]
fn stacked_gram_is_m_times_signal_gram() {
    for seed in 0..5 {
        let a = gen_gaussian_matrix(20, 5, 300 + seed);
        let x = gen_gaussian_vector(5, 400 + seed);
        let y = a.mul_vec(&x).unwrap();
        let m = 4;
        let ensemble = generate_thresholds(20, m, 0.0, 500 + seed);
        let (poly, _) = build_polyhedron(&a, &y, &ensemble).unwrap();

        let p = poly.problem.matrix();
        let ptp = p.gram();
        let ata = a.gram();
        let mut diff = 0.0;
        let mut scale = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                let target = m as f64 * ata.get(i, j);
                diff += (ptp.get(i, j) - target) * (ptp.get(i, j) - target);
                scale += target * target;
            }
        }
        assert!(
            diff.sqrt() / scale.sqrt() < 1e-9,
            "relative Frobenius error too large"
        );
    }
}

#[test]
fn stacked_singular_values_scale_with_sqrt_m() {
    let a = gen_gaussian_matrix(20, 5, 17);
    let x = gen_gaussian_vector(5, 18);
    let y = a.mul_vec(&x).unwrap();
    let sv_a = singular_values(&a);
    for m in [2usize, 4, 9] {
        let ensemble = generate_thresholds(20, m, 0.0, 19);
        let (poly, _) = build_polyhedron(&a, &y, &ensemble).unwrap();
        let sv_p = singular_values(poly.problem.matrix());
        for i in 0..5 {
            let target = (m as f64).sqrt() * sv_a.get(i);
            assert!(
                (sv_p.get(i) - target).abs() / target < 1e-8,
                "sigma_{i} mismatch at m={m}"
            );
        }
        // The scaled condition number is m-independent.
        let kp = scaled_condition_number(poly.problem.matrix()).unwrap();
        let ka = scaled_condition_number(&a).unwrap();
        assert!((kp - ka).abs() / ka < 1e-8, "kappa drifted: {kp} vs {ka}");
    }
}

#[test]
fn identity_signal_matrix_attains_condition_infimum() {
    // With a = I the stacked sign matrix has kappa = sqrt(n).
    for n in [5usize, 20] {
        let a = DenseMatrix::identity(n);
        let y = gen_gaussian_vector(n, 600 + n as u64);
        let ensemble = generate_thresholds(n, 6, 0.0, 700 + n as u64);
        let (poly, _) = build_polyhedron(&a, &y, &ensemble).unwrap();
        let kappa = scaled_condition_number(poly.problem.matrix()).unwrap();
        assert!(
            (kappa - (n as f64).sqrt()).abs() < 1e-9,
            "kappa {kappa} at n={n}"
        );
    }
}

#[test]
fn generating_signal_is_exactly_feasible_with_consistent_signs() {
    for seed in 0..25u64 {
        let n = 10 + (seed as usize % 4) * 7;
        let d = 2 + (seed as usize % 5);
        let m = 1 + (seed as usize % 6);
        let a = gen_gaussian_matrix(n, d, 1000 + seed);
        let x = gen_gaussian_vector(d, 2000 + seed);
        let y = a.mul_vec(&x).unwrap();
        let ensemble = generate_thresholds(n, m, 0.0, 3000 + seed);
        let (poly, capture) = build_polyhedron(&a, &y, &ensemble).unwrap();

        let res = positive_residual(&poly.problem, &x).unwrap();
        assert!(
            res.as_slice().iter().all(|&v| v == 0.0),
            "nonzero residual at seed {seed}"
        );

        for l in 0..m {
            for j in 0..n {
                let v = capture.r.get(j, l) * (y.get(j) - capture.gamma.get(j, l));
                assert!(v >= 0.0, "sign inconsistency at seed {seed}");
            }
        }
    }
}

#[test]
fn adaptive_thresholds_shrink_hyperplane_distances() {
    // Mean first moment of the squared hyperplane distances drops strictly
    // after adaptive refinement, seed-averaged over 15 trials.
    let mut initial_sum = 0.0;
    let mut refined_sum = 0.0;
    for trial in 0..15u64 {
        let a = gen_gaussian_matrix(60, 6, 4000 + trial);
        let x_true = gen_gaussian_vector(6, 4100 + trial);
        let y = a.mul_vec(&x_true).unwrap();
        let m = 4;
        let seed = 4200 + trial;

        let ensemble0 = generate_thresholds(60, m, 0.0, seed);
        let (_, capture0) = build_polyhedron(&a, &y, &ensemble0).unwrap();
        let d0 = hyperplane_distances(&a, &x_true, &capture0).unwrap();
        initial_sum += empirical_moments(&d0, 1)[0];

        let mut cfg = SolverConfig::new(Method::BlockSkm);
        cfg.max_iters = 2_000;
        cfg.tol = 1e-13;
        cfg.seed = 4300 + trial;
        let (_, refined) = adaptive_threshold_recover(&a, &y, m, &cfg, 1e-10, 30, seed).unwrap();
        let (_, capture1) = build_polyhedron(&a, &y, &refined).unwrap();
        let d1 = hyperplane_distances(&a, &x_true, &capture1).unwrap();
        refined_sum += average_distance(&d1);
    }
    let initial = initial_sum / 15.0;
    let refined = refined_sum / 15.0;
    assert!(
        refined < initial,
        "refined mean distance {refined} not below initial {initial}"
    );
}
