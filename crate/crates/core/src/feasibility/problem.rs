use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix, Vector};

/// Sense of a single constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    /// `c_j x = b_j`
    Equality,
    /// `c_j x <= b_j`
    LessEq,
}

/// A linear feasibility problem `(C x - b)^+ = 0` over mixed senses.
///
/// Rows may optionally be grouped into equal-sized blocks (`block_rows` rows
/// per block), which the block solver exploits.
#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    c: DenseMatrix,
    b: Vector,
    senses: Vec<RowSense>,
    block_rows: Option<usize>,
}

impl FeasibilityProblem {
    pub fn new(c: DenseMatrix, b: Vector, senses: Vec<RowSense>) -> Result<Self> {
        if b.len() != c.rows() || senses.len() != c.rows() {
            return Err(Error::DimensionMismatch(format!(
                "constraint matrix has {} rows but rhs has {} and senses {}",
                c.rows(),
                b.len(),
                senses.len()
            )));
        }
        for j in 0..c.rows() {
            if c.row_norm_sq(j) == 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "row {j} of the constraint matrix is zero"
                )));
            }
        }
        Ok(Self {
            c,
            b,
            senses,
            block_rows: None,
        })
    }

    /// Convenience constructor for a uniform sense.
    pub fn with_uniform_sense(c: DenseMatrix, b: Vector, sense: RowSense) -> Result<Self> {
        let n = c.rows();
        Self::new(c, b, vec![sense; n])
    }

    /// Declare a block structure of `block_rows` rows per block.
    pub fn with_block_rows(mut self, block_rows: usize) -> Result<Self> {
        if block_rows == 0 || self.c.rows() % block_rows != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} rows do not divide into blocks of {block_rows}",
                self.c.rows()
            )));
        }
        self.block_rows = Some(block_rows);
        Ok(self)
    }

    #[inline]
    pub fn matrix(&self) -> &DenseMatrix {
        &self.c
    }

    #[inline]
    pub fn rhs(&self) -> &Vector {
        &self.b
    }

    #[inline]
    pub fn senses(&self) -> &[RowSense] {
        &self.senses
    }

    #[inline]
    pub fn num_rows(&self) -> usize {
        self.c.rows()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.c.cols()
    }

    #[inline]
    pub fn block_rows(&self) -> Option<usize> {
        self.block_rows
    }

    /// Residual of row `j` at `x`: clamped at zero for `<=` rows, signed for
    /// equality rows.
    #[inline]
    pub fn row_residual(&self, j: usize, x: &[f64]) -> f64 {
        let raw = dot(self.c.row(j), x) - self.b.get(j);
        match self.senses[j] {
            RowSense::LessEq => raw.max(0.0),
            RowSense::Equality => raw,
        }
    }
}

/// Per-row projection coefficients at `x`: `(c_j x - b_j)^+` on `<=` rows and
/// the signed `c_j x - b_j` on equality rows.
pub fn positive_residual(p: &FeasibilityProblem, x: &Vector) -> Result<Vector> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "x has length {} but the problem dimension is {}",
            x.len(),
            p.dim()
        )));
    }
    let xs = x.as_slice();
    let data: Vec<f64> = (0..p.num_rows()).map(|j| p.row_residual(j, xs)).collect();
    Vector::from_vec(data)
}

/// Euclidean norm of the clamped residual at `x` (the stopping quantity).
pub fn residual_norm(p: &FeasibilityProblem, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..p.num_rows() {
        let r = p.row_residual(j, x);
        acc += r * r;
    }
    acc.sqrt()
}

/// Samples row indices with probability `||c_k||^2 / ||C||_F^2`.
#[derive(Debug, Clone)]
pub struct RowSampler {
    cumulative: Vec<f64>,
}

impl RowSampler {
    pub fn new(p: &FeasibilityProblem) -> Self {
        let mut cumulative = Vec::with_capacity(p.num_rows());
        let mut acc = 0.0;
        for j in 0..p.num_rows() {
            acc += p.matrix().row_norm_sq(j);
            cumulative.push(acc);
        }
        Self { cumulative }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self
            .cumulative
            .last()
            .expect("problems have at least one row");
        let u: f64 = rng.random::<f64>() * total;
        match self.cumulative.binary_search_by(|v| v.total_cmp(&u)) {
            Ok(i) => (i + 1).min(self.cumulative.len() - 1),
            Err(i) => i.min(self.cumulative.len() - 1),
        }
    }
}

/// One-shot draw of a row index with the squared-norm distribution.
pub fn sample_row_index<R: Rng>(p: &FeasibilityProblem, rng: &mut R) -> usize {
    RowSampler::new(p).sample(rng)
}

/// Solver selection for [`solve`](crate::feasibility::solve).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rka,
    Skm,
    PrSkm,
    BlockSkm,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rka => "rka",
            Method::Skm => "skm",
            Method::PrSkm => "prskm",
            Method::BlockSkm => "blockskm",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "rka" => Some(Method::Rka),
            "skm" => Some(Method::Skm),
            "prskm" => Some(Method::PrSkm),
            "blockskm" => Some(Method::BlockSkm),
            _ => None,
        }
    }
}

/// Configuration shared by the four solvers.
///
/// `gamma` (sample-set size for the Motzkin selection) and `block_k`
/// (sub-block row count) fall back to `ceil(rows / 10)` and
/// `ceil(dim / 2)` respectively when left unset.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    pub lambda: f64,
    pub gamma: Option<usize>,
    pub block_k: Option<usize>,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            lambda: 1.0,
            gamma: None,
            block_k: None,
            max_iters: 10_000,
            tol: 1e-10,
            seed: 0,
        }
    }

    pub fn validate(&self, p: &FeasibilityProblem) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 2.0) {
            return Err(Error::InvalidLambda(self.lambda));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be non-negative, got {}",
                self.tol
            )));
        }
        if let Some(g) = self.gamma {
            if g == 0 || g > p.num_rows() {
                return Err(Error::InvalidConfig(format!(
                    "gamma {} outside 1..={}",
                    g,
                    p.num_rows()
                )));
            }
        }
        if let Some(k) = self.block_k {
            if k == 0 || k >= p.dim() {
                return Err(Error::InvalidConfig(format!(
                    "block_k {} outside 1..{}",
                    k,
                    p.dim()
                )));
            }
        }
        Ok(())
    }

    pub fn effective_gamma(&self, rows: usize) -> usize {
        self.gamma
            .unwrap_or_else(|| rows.div_ceil(10))
            .clamp(1, rows)
    }

    pub fn effective_block_k(&self, dim: usize, block_rows: usize) -> usize {
        self.block_k
            .unwrap_or_else(|| dim.div_ceil(2).min(block_rows))
            .min(dim.saturating_sub(1).max(1))
    }
}

/// Outcome of a solve: final iterate, iteration count, and the residual
/// trace at the logging stride.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vector,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub seed: u64,
    pub wall_time_s: f64,
}
