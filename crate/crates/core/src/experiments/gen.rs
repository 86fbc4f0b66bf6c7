//! Seed-deterministic instance generators.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{DenseMatrix, Vector};

/// Matrix of i.i.d. standard normal entries, drawn in row-major order.
pub fn gen_gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    DenseMatrix::from_vec(rows, cols, data).expect("Gaussian draws are finite")
}

/// Vector of i.i.d. standard normal entries.
pub fn gen_gaussian_vector(len: usize, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Vector::from_vec(
        (0..len)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
    .expect("Gaussian draws are finite")
}

/// Symmetric positive semi-definite target `X = K K^T` with `K` an
/// `n1 x rank` Gaussian matrix, so `rank(X) = rank` almost surely.
pub fn gen_low_rank_target(n1: usize, rank: usize, seed: u64) -> DenseMatrix {
    assert!(rank >= 1 && rank <= n1, "rank must lie in 1..={n1}");
    let k = gen_gaussian_matrix(n1, rank, seed);
    let mut x = DenseMatrix::zeros(n1, n1);
    for i in 0..n1 {
        for j in i..n1 {
            let v = crate::matrix::dot(k.row(i), k.row(j));
            x.set(i, j, v);
            x.set(j, i, v);
        }
    }
    x
}

/// Vector with exactly `k` non-zeros at uniformly chosen positions and
/// Gaussian values.
pub fn gen_sparse_target(n: usize, k: usize, seed: u64) -> Vector {
    assert!(k >= 1 && k <= n, "sparsity must lie in 1..={n}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = rand::seq::index::sample(&mut rng, n, k);
    let mut data = vec![0.0_f64; n];
    for idx in support {
        let mut value: f64 = rng.sample(StandardNormal);
        // A zero draw would silently lower the sparsity order.
        while value == 0.0 {
            value = rng.sample(StandardNormal);
        }
        data[idx] = value;
    }
    Vector::from_vec(data).expect("Gaussian draws are finite")
}
