use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_factor, cholesky_solve_in_place, householder_qr, invert_upper_triangular,
};
use crate::matrix::{dot, DenseMatrix, Vector};

use super::problem::{
    residual_norm, FeasibilityProblem, Method, RowSampler, RowSense, SolveReport, SolverConfig,
};

/// Dispatch on `cfg.method`.
pub fn solve(p: &FeasibilityProblem, cfg: &SolverConfig, x0: &Vector) -> Result<SolveReport> {
    match cfg.method {
        Method::Rka => solve_rka(p, cfg, x0),
        Method::Skm => solve_skm(p, cfg, x0),
        Method::PrSkm => solve_prskm(p, cfg, x0),
        Method::BlockSkm => solve_block_skm(p, cfg, x0),
    }
}

/// Shared iteration driver. Runs `step` up to `max_iters` times, logging the
/// clamped residual norm every `ceil(max_iters / 1000)` iterations (which is
/// also the stopping-test cadence) and flagging non-finite iterates.
fn drive<F>(
    p: &FeasibilityProblem,
    cfg: &SolverConfig,
    x0: &Vector,
    mut step: F,
) -> Result<SolveReport>
where
    F: FnMut(&mut Vec<f64>, &mut ChaCha8Rng) -> Result<()>,
{
    if x0.len() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "x0 has length {} but the problem dimension is {}",
            x0.len(),
            p.dim()
        )));
    }
    let start = Instant::now();
    let stride = cfg.max_iters.div_ceil(1000).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x: Vec<f64> = x0.as_slice().to_vec();

    let r0 = residual_norm(p, &x);
    let mut history = vec![r0];
    if r0 <= cfg.tol {
        return Ok(SolveReport {
            x: x0.clone(),
            iterations: 0,
            residual_history: history,
            converged: true,
            seed: cfg.seed,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }

    let mut iterations = 0;
    let mut converged = false;
    for i in 1..=cfg.max_iters {
        step(&mut x, &mut rng)?;
        iterations = i;
        if i % stride == 0 || i == cfg.max_iters {
            let r = residual_norm(p, &x);
            if !r.is_finite() {
                return Err(Error::NonFinite(format!(
                    "residual diverged to {r} at iteration {i}"
                )));
            }
            history.push(r);
            if r <= cfg.tol {
                converged = true;
                break;
            }
        }
    }

    Ok(SolveReport {
        x: Vector::from_vec(x)
            .map_err(|_| Error::NonFinite("final iterate left the finite range".into()))?,
        iterations,
        residual_history: history,
        converged,
        seed: cfg.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Randomized Kaczmarz for mixed feasibility: rows are drawn with squared-norm
/// probabilities and the iterate is projected onto the violated hyperplane or
/// halfspace.
pub fn solve_rka(p: &FeasibilityProblem, cfg: &SolverConfig, x0: &Vector) -> Result<SolveReport> {
    if cfg.method != Method::Rka {
        return Err(Error::InvalidConfig("config method is not RKA".into()));
    }
    cfg.validate(p)?;
    let sampler = RowSampler::new(p);
    let row_norm_sq: Vec<f64> = (0..p.num_rows())
        .map(|j| p.matrix().row_norm_sq(j))
        .collect();

    drive(p, cfg, x0, |x, rng| {
        let j = sampler.sample(rng);
        let beta = p.row_residual(j, x);
        if beta != 0.0 {
            let coef = beta / row_norm_sq[j];
            for (xi, cij) in x.iter_mut().zip(p.matrix().row(j)) {
                *xi -= coef * cij;
            }
        }
        Ok(())
    })
}

/// Violation used to rank rows under the Motzkin selection: clamped for `<=`
/// rows, absolute for equality rows.
#[inline]
fn violation(sense: RowSense, raw: f64) -> f64 {
    match sense {
        RowSense::LessEq => raw.max(0.0),
        RowSense::Equality => raw.abs(),
    }
}

/// Sampling Kaczmarz-Motzkin: draw `gamma` rows uniformly without
/// replacement, project onto the most violated one (ties break to the lowest
/// row index) with relaxation `lambda`.
pub fn solve_skm(p: &FeasibilityProblem, cfg: &SolverConfig, x0: &Vector) -> Result<SolveReport> {
    if cfg.method != Method::Skm {
        return Err(Error::InvalidConfig("config method is not SKM".into()));
    }
    cfg.validate(p)?;
    let rows = p.num_rows();
    let gamma = cfg.effective_gamma(rows);
    let lambda = cfg.lambda;
    let row_norm_sq: Vec<f64> = (0..rows).map(|j| p.matrix().row_norm_sq(j)).collect();

    drive(p, cfg, x0, |x, rng| {
        let mut picked = rand::seq::index::sample(rng, rows, gamma).into_vec();
        picked.sort_unstable();

        let mut best_j = picked[0];
        let mut best_violation = -1.0;
        let mut best_beta = 0.0;
        for &j in &picked {
            let beta = p.row_residual(j, x);
            let v = violation(p.senses()[j], beta);
            if v > best_violation {
                best_violation = v;
                best_beta = beta;
                best_j = j;
            }
        }
        if best_violation > 0.0 {
            let coef = lambda * best_beta / row_norm_sq[best_j];
            for (xi, cij) in x.iter_mut().zip(p.matrix().row(best_j)) {
                *xi -= coef * cij;
            }
        }
        Ok(())
    })
}

/// Preconditioned SKM: factor `C = Q R`, run SKM on `H = C R^{-1}` (whose
/// scaled condition number attains the `sqrt(dim)` infimum), then map the
/// solution back through `x = R^{-1} z`.
///
/// The reported residual history is measured in the preconditioned system.
pub fn solve_prskm(p: &FeasibilityProblem, cfg: &SolverConfig, x0: &Vector) -> Result<SolveReport> {
    if cfg.method != Method::PrSkm {
        return Err(Error::InvalidConfig("config method is not PrSKM".into()));
    }
    cfg.validate(p)?;
    let start = Instant::now();

    let factors = householder_qr(p.matrix())?;
    let m_inv = invert_upper_triangular(&factors.r)?;
    let h = p.matrix().matmul(&m_inv)?;
    let hp = FeasibilityProblem::new(h, p.rhs().clone(), p.senses().to_vec())?;

    // z0 = R x0 keeps the starting point fixed under the change of variables.
    let z0 = factors.r.mul_vec(x0)?;
    let mut inner_cfg = cfg.clone();
    inner_cfg.method = Method::Skm;
    let inner = solve_skm(&hp, &inner_cfg, &z0)?;

    let x_star = m_inv.mul_vec(&inner.x)?;
    Ok(SolveReport {
        x: x_star,
        iterations: inner.iterations,
        residual_history: inner.residual_history,
        converged: inner.converged,
        seed: cfg.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Block SKM over a problem with declared row blocks.
///
/// Each iteration samples a block with Frobenius-weighted probability, ranks
/// its rows by violation, keeps the top `k'` *violated* rows as a
/// sub-problem, and applies the relaxed pseudo-inverse correction
/// `x <- x - lambda * B'^+ (B' x - b')^+`.
///
/// Satisfied rows never enter the sub-block: their clamped residual is zero,
/// and keeping them would constrain the correction to preserve their margins,
/// which both stalls progress near the boundary and degrades the conditioning
/// of `B' B'^T` as `k'` approaches the dimension.
pub fn solve_block_skm(
    p: &FeasibilityProblem,
    cfg: &SolverConfig,
    x0: &Vector,
) -> Result<SolveReport> {
    if cfg.method != Method::BlockSkm {
        return Err(Error::InvalidConfig(
            "config method is not Block SKM".into(),
        ));
    }
    cfg.validate(p)?;
    let block_rows = p.block_rows().ok_or_else(|| {
        Error::DimensionMismatch("block solver needs a declared block structure".into())
    })?;
    let num_blocks = p.num_rows() / block_rows;
    let dim = p.dim();
    let k_sub = cfg.effective_block_k(dim, block_rows);
    if k_sub > block_rows {
        return Err(Error::InvalidConfig(format!(
            "block_k {k_sub} exceeds the {block_rows} rows available per block"
        )));
    }

    // Frobenius-weighted block sampling distribution.
    let mut cumulative = Vec::with_capacity(num_blocks);
    let mut acc = 0.0;
    for blk in 0..num_blocks {
        for j in blk * block_rows..(blk + 1) * block_rows {
            acc += p.matrix().row_norm_sq(j);
        }
        cumulative.push(acc);
    }
    let total = acc;

    let lambda = cfg.lambda;
    let mut raw = vec![0.0_f64; block_rows];
    let mut order: Vec<usize> = Vec::with_capacity(block_rows);
    let mut sub = DenseMatrix::zeros(k_sub, dim);
    let mut beta = vec![0.0_f64; k_sub];

    drive(p, cfg, x0, |x, rng| {
        let u: f64 = rng.random::<f64>() * total;
        let blk = match cumulative.binary_search_by(|v| v.total_cmp(&u)) {
            Ok(i) => (i + 1).min(num_blocks - 1),
            Err(i) => i.min(num_blocks - 1),
        };
        let base = blk * block_rows;

        // Residuals of the block, ranked by violation (descending, ties to
        // the lowest row index).
        for (r, slot) in raw.iter_mut().enumerate() {
            *slot = dot(p.matrix().row(base + r), x) - p.rhs().get(base + r);
        }
        order.clear();
        order.extend(0..block_rows);
        let senses = p.senses();
        order.sort_by(|&a, &b| {
            let va = violation(senses[base + a], raw[a]);
            let vb = violation(senses[base + b], raw[b]);
            vb.total_cmp(&va).then(a.cmp(&b))
        });

        let mut k_eff = 0;
        for &r in order[..k_sub].iter() {
            let j = base + r;
            if violation(senses[j], raw[r]) == 0.0 {
                break;
            }
            sub.row_mut(k_eff).copy_from_slice(p.matrix().row(j));
            beta[k_eff] = match senses[j] {
                RowSense::LessEq => raw[r].max(0.0),
                RowSense::Equality => raw[r],
            };
            k_eff += 1;
        }
        if k_eff == 0 {
            return Ok(());
        }

        // Solve (B' B'^T) z = beta and apply x -= lambda * B'^T z, which is
        // the Moore-Penrose correction without materializing the inverse.
        let mut gram = DenseMatrix::zeros(k_eff, k_eff);
        for a in 0..k_eff {
            for b in a..k_eff {
                let v = dot(sub.row(a), sub.row(b));
                gram.set(a, b, v);
                gram.set(b, a, v);
            }
        }
        let l = cholesky_factor(&gram).map_err(|_| {
            Error::RankDeficient(format!(
                "sub-block of block {blk} has a numerically singular Gram matrix"
            ))
        })?;
        let mut z = beta[..k_eff].to_vec();
        cholesky_solve_in_place(&l, &mut z);
        for (s, zs) in z.iter().enumerate() {
            if *zs == 0.0 {
                continue;
            }
            let coef = lambda * zs;
            for (xi, bij) in x.iter_mut().zip(sub.row(s)) {
                *xi -= coef * bij;
            }
        }
        Ok(())
    })
}
