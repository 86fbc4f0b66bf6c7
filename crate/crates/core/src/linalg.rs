//! Dense linear-algebra kernels: thin QR, triangular inversion, wide
//! pseudo-inverse, singular values and scaled condition numbers.
//!
//! Singular values come from a cyclic Jacobi eigendecomposition of the Gram
//! matrix (the smaller of `a^T a` / `a a^T`), which is accurate and
//! dependency-free at the problem sizes handled here.

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix, Vector};

/// Relative rank tolerance used uniformly by the kernels.
pub const RANK_TOL: f64 = 1e-12;

/// Thin QR factors of a tall matrix: `q` has orthonormal columns, `r` is
/// upper triangular with positive diagonal.
#[derive(Debug, Clone)]
pub struct QrFactors {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

/// Householder QR of a tall full-column-rank matrix (`rows >= cols`).
///
/// The sign convention fixes a positive diagonal of `r`, which makes the
/// factors unique and therefore testable.
pub fn householder_qr(a: &DenseMatrix) -> Result<QrFactors> {
    let m = a.rows();
    let n = a.cols();
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "QR expects rows >= cols, got {m}x{n}"
        )));
    }
    let scale = a.frobenius_norm();

    // Work buffer holds R in the upper triangle and the Householder vectors
    // below the diagonal (v_0 is stored implicitly as 1 via `betas`).
    let mut work = a.clone();
    let mut betas = vec![0.0_f64; n];

    for k in 0..n {
        let mut norm_sq = 0.0;
        for i in k..m {
            let v = work.get(i, k);
            norm_sq += v * v;
        }
        let norm = norm_sq.sqrt();
        if norm < RANK_TOL * scale {
            return Err(Error::RankDeficient(format!(
                "column {k} is numerically dependent (pivot {norm:.3e})"
            )));
        }
        let akk = work.get(k, k);
        let alpha = if akk >= 0.0 { -norm } else { norm };
        let v0 = akk - alpha;
        // beta = 2 / (v^T v) with v = (v0, a[k+1..m, k])
        let v_norm_sq = v0 * v0 + (norm_sq - akk * akk);
        let beta = if v_norm_sq == 0.0 {
            0.0
        } else {
            2.0 / v_norm_sq
        };
        work.set(k, k, v0);

        // Apply H = I - beta v v^T to the trailing columns.
        for j in (k + 1)..n {
            let mut proj = 0.0;
            for i in k..m {
                proj += work.get(i, k) * work.get(i, j);
            }
            proj *= beta;
            for i in k..m {
                let w = work.get(i, j) - proj * work.get(i, k);
                work.set(i, j, w);
            }
        }
        betas[k] = beta;
        // Stash the diagonal of R where the update loop no longer looks.
        work.set(k, k, alpha);
        // Normalize the reflector so v_0 = 1 is implicit.
        if v0 != 0.0 {
            for i in (k + 1)..m {
                work.set(i, k, work.get(i, k) / v0);
            }
            betas[k] = beta * v0 * v0;
        }
    }

    // Extract R (n x n upper triangle).
    let mut r = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r.set(i, j, work.get(i, j));
        }
    }

    // Form the thin Q by applying the reflectors in reverse to I_{m x n}.
    let mut q = DenseMatrix::zeros(m, n);
    for j in 0..n {
        q.set(j, j, 1.0);
    }
    for k in (0..n).rev() {
        let beta = betas[k];
        if beta == 0.0 {
            continue;
        }
        for j in 0..n {
            // proj = beta * v^T q[:, j], with v = (1, work[k+1..m, k])
            let mut proj = q.get(k, j);
            for i in (k + 1)..m {
                proj += work.get(i, k) * q.get(i, j);
            }
            proj *= beta;
            let w = q.get(k, j) - proj;
            q.set(k, j, w);
            for i in (k + 1)..m {
                let w = q.get(i, j) - proj * work.get(i, k);
                q.set(i, j, w);
            }
        }
    }

    // Enforce the positive-diagonal convention.
    for k in 0..n {
        if r.get(k, k) < 0.0 {
            for j in k..n {
                let v = -r.get(k, j);
                r.set(k, j, v);
            }
            for i in 0..m {
                let v = -q.get(i, k);
                q.set(i, k, v);
            }
        }
    }

    // Rank check against the uniform relative tolerance.
    for k in 0..n {
        if r.get(k, k) < RANK_TOL * scale {
            return Err(Error::RankDeficient(format!(
                "diagonal {k} of R is {:.3e}, below {:.3e}",
                r.get(k, k),
                RANK_TOL * scale
            )));
        }
    }

    Ok(QrFactors { q, r })
}

/// Invert a square upper-triangular matrix by back substitution.
pub fn invert_upper_triangular(r: &DenseMatrix) -> Result<DenseMatrix> {
    let n = r.rows();
    if r.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "triangular inverse expects a square matrix, got {}x{}",
            n,
            r.cols()
        )));
    }
    let scale = r.frobenius_norm();
    for k in 0..n {
        if r.get(k, k).abs() < RANK_TOL * scale {
            return Err(Error::Singular(format!(
                "diagonal entry {k} is {:.3e}",
                r.get(k, k)
            )));
        }
    }

    let mut inv = DenseMatrix::zeros(n, n);
    // Solve R x = e_j column by column, exploiting the triangular shape.
    for j in 0..n {
        inv.set(j, j, 1.0 / r.get(j, j));
        for i in (0..j).rev() {
            let mut acc = 0.0;
            for k in (i + 1)..=j {
                acc += r.get(i, k) * inv.get(k, j);
            }
            inv.set(i, j, -acc / r.get(i, i));
        }
    }
    Ok(inv)
}

/// Cholesky factor `L` of a symmetric positive-definite matrix, with pivots
/// checked against the uniform relative rank tolerance.
pub(crate) fn cholesky_factor(g: &DenseMatrix) -> Result<DenseMatrix> {
    let k = g.rows();
    debug_assert_eq!(k, g.cols());
    let g_scale = g.frobenius_norm();
    let mut l = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let mut acc = g.get(i, j);
            for p in 0..j {
                acc -= l.get(i, p) * l.get(j, p);
            }
            if i == j {
                if acc < RANK_TOL * g_scale {
                    return Err(Error::RankDeficient(format!(
                        "Cholesky pivot {i} is {acc:.3e}, below {:.3e}",
                        RANK_TOL * g_scale
                    )));
                }
                l.set(i, i, acc.sqrt());
            } else {
                l.set(i, j, acc / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solve `L L^T y = rhs` in place given the Cholesky factor `L`.
pub(crate) fn cholesky_solve_in_place(l: &DenseMatrix, rhs: &mut [f64]) {
    let k = l.rows();
    debug_assert_eq!(rhs.len(), k);
    for i in 0..k {
        let mut acc = rhs[i];
        for p in 0..i {
            acc -= l.get(i, p) * rhs[p];
        }
        rhs[i] = acc / l.get(i, i);
    }
    for i in (0..k).rev() {
        let mut acc = rhs[i];
        for p in (i + 1)..k {
            acc -= l.get(p, i) * rhs[p];
        }
        rhs[i] = acc / l.get(i, i);
    }
}

/// Moore-Penrose pseudo-inverse `b^T (b b^T)^{-1}` of a wide full-row-rank
/// matrix (`rows < cols`).
pub fn pseudo_inverse_wide(b: &DenseMatrix) -> Result<DenseMatrix> {
    let k = b.rows();
    let d = b.cols();
    if k >= d {
        return Err(Error::DimensionMismatch(format!(
            "wide pseudo-inverse expects rows < cols, got {k}x{d}"
        )));
    }

    // Gram matrix G = b b^T, k x k symmetric positive definite.
    let mut g = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = dot(b.row(i), b.row(j));
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    let l = cholesky_factor(&g)
        .map_err(|_| Error::RankDeficient("b b^T is numerically singular".into()))?;

    // Solve G Y = b column by column; the pseudo-inverse is Y^T.
    let mut pinv = DenseMatrix::zeros(d, k);
    let mut y = vec![0.0_f64; k];
    for col in 0..d {
        for (i, slot) in y.iter_mut().enumerate() {
            *slot = b.get(i, col);
        }
        cholesky_solve_in_place(&l, &mut y);
        for i in 0..k {
            pinv.set(col, i, y[i]);
        }
    }
    Ok(pinv)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
fn symmetric_eigenvalues(g: &DenseMatrix) -> Vec<f64> {
    let n = g.rows();
    debug_assert_eq!(n, g.cols());
    let mut a = g.clone();

    let off = |a: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a.get(i, j) * a.get(i, j);
            }
        }
        s.sqrt()
    };

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;
    for _sweep in 0..64 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

/// All singular values of `a`, descending.
pub fn singular_values(a: &DenseMatrix) -> Vector {
    let gram = if a.rows() >= a.cols() {
        a.gram()
    } else {
        a.transpose().gram()
    };
    let eig = symmetric_eigenvalues(&gram);
    let svals: Vec<f64> = eig.into_iter().map(|l| l.max(0.0).sqrt()).collect();
    Vector::from_vec(svals).expect("singular values of a finite matrix are finite")
}

/// Scaled condition number `||a||_F / sigma_min(a)` of a full-column-rank
/// matrix. Never smaller than `sqrt(cols)`, with equality exactly for scaled
/// orthonormal matrices.
pub fn scaled_condition_number(a: &DenseMatrix) -> Result<f64> {
    if a.rows() < a.cols() {
        return Err(Error::RankDeficient(format!(
            "a {}x{} matrix cannot have full column rank",
            a.rows(),
            a.cols()
        )));
    }
    let sv = singular_values(a);
    let smax = sv.get(0);
    let smin = sv.get(sv.len() - 1);
    if smax == 0.0 || smin < RANK_TOL * smax {
        return Err(Error::RankDeficient(format!(
            "sigma_min {smin:.3e} below {:.3e}",
            RANK_TOL * smax
        )));
    }
    Ok(a.frobenius_norm() / smin)
}
