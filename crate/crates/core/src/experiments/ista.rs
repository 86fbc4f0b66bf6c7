//! Iterative soft-thresholding baseline for the penalized l1 problem
//! `min 0.5 ||y - A x||^2 + lambda ||x||_1`.

use crate::linalg::singular_values;
use crate::matrix::{dot, DenseMatrix, Vector};

#[inline]
fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Run `iters` ISTA steps from the origin with the classical step size
/// `1 / ||A^T A||_2`, under which the penalized objective is non-increasing.
pub fn ista_l1_baseline(a: &DenseMatrix, y: &Vector, lambda_reg: f64, iters: usize) -> Vector {
    assert!(lambda_reg > 0.0, "lambda_reg must be positive");
    assert_eq!(
        y.len(),
        a.rows(),
        "measurement length must match the matrix"
    );

    let smax = singular_values(a).get(0);
    let step = 1.0 / (smax * smax);
    let n = a.cols();
    let mut x = vec![0.0_f64; n];
    let mut residual = vec![0.0_f64; a.rows()];
    let mut grad = vec![0.0_f64; n];

    for _ in 0..iters {
        for (i, slot) in residual.iter_mut().enumerate() {
            *slot = dot(a.row(i), &x) - y.get(i);
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (i, &ri) in residual.iter().enumerate() {
            if ri == 0.0 {
                continue;
            }
            for (g, aij) in grad.iter_mut().zip(a.row(i)) {
                *g += aij * ri;
            }
        }
        for (xj, gj) in x.iter_mut().zip(&grad) {
            *xj = soft_threshold(*xj - step * gj, step * lambda_reg);
        }
    }

    Vector::from_vec(x).expect("ISTA iterates stay finite under the 1/L step")
}
