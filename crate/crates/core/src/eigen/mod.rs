//! Lowest eigenpairs of the pencil `A u = λ B u`.

mod dense;
mod halfline;
mod lobpcg;

pub use dense::{solve_dense, DENSE_LIMIT};
pub use halfline::solve_halfline_1d;
pub use lobpcg::{solve_iterative, solve_iterative_from};

use serde::{Deserialize, Serialize};

use crate::assembly::{dot, DiscreteOperator};
use crate::error::{Error, Result};

/// Settings of the iterative solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenConfig {
    /// Number of wanted eigenpairs.
    pub nev: usize,
    /// Extra vectors carried in the block to speed up convergence.
    pub block_extra: usize,
    /// Tolerance on `‖Au − λBu‖ / ‖Bu‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the random initial block.
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            nev: 1,
            block_extra: 5,
            tol: 1e-9,
            max_iter: 2000,
            seed: 42,
        }
    }
}

impl EigenConfig {
    pub fn with_nev(mut self, nev: usize) -> Self {
        self.nev = nev;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_block_extra(mut self, extra: usize) -> Self {
        self.block_extra = extra;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nev == 0 {
            return Err(Error::InvalidConfig("nev must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which solver computes the pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Iterative,
    /// Dense diagonalization, limited to [`DENSE_LIMIT`] unknowns.
    Dense,
}

/// Lowest `cfg.nev` pairs with the chosen method. `guess` seeds the
/// iterative solver and is ignored by the dense one.
pub fn solve(
    op: &DiscreteOperator,
    cfg: &EigenConfig,
    method: Method,
    guess: &[Vec<f64>],
) -> Result<EigenPairs> {
    match method {
        Method::Iterative => solve_iterative_from(op, cfg, guess),
        Method::Dense => {
            cfg.validate()?;
            Ok(solve_dense(op)?.truncated(cfg.nev))
        }
    }
}

/// Eigenpairs in ascending order with B-orthonormal vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `‖Au − λBu‖ / ‖Bu‖` per pair.
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    pub iterations: usize,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Largest deviation of `VᵀBV` from the identity.
    pub fn b_orthonormality_error(&self, op: &DiscreteOperator) -> f64 {
        let b = op.b();
        let mut worst: f64 = 0.0;
        for (i, u) in self.vectors.iter().enumerate() {
            for (j, v) in self.vectors.iter().enumerate().skip(i) {
                let g = b_dot(b, u, v);
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
        worst
    }

    /// Keeps only the lowest `count` pairs.
    pub fn truncated(mut self, count: usize) -> Self {
        self.values.truncate(count);
        self.vectors.truncate(count);
        self.residuals.truncate(count);
        self.converged.truncate(count);
        self
    }
}

/// `‖Au − λBu‖ / ‖Bu‖`.
pub fn residual(op: &DiscreteOperator, lambda: f64, u: &[f64]) -> Result<f64> {
    let au = op.apply(u)?;
    let b = op.b();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..u.len() {
        let bu = b[i] * u[i];
        let r = au[i] - lambda * bu;
        num += r * r;
        den += bu * bu;
    }
    Ok((num / den).sqrt())
}

pub(crate) fn b_dot(b: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..b.len() {
        acc += u[i] * b[i] * v[i];
    }
    acc
}

/// Flips `u` so that its entry of largest magnitude is positive.
pub(crate) fn fix_sign(u: &mut [f64]) {
    let mut best = 0.0_f64;
    let mut sign = 1.0;
    for &x in u.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
}

pub(crate) fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}
