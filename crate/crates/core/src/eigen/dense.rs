use nalgebra::{DMatrix, SymmetricEigen};

use super::{fix_sign, residual, EigenPairs};
use crate::assembly::DiscreteOperator;
use crate::error::{Error, Result};

/// Largest dimension the dense oracle accepts.
pub const DENSE_LIMIT: usize = 4000;

/// Full spectrum by dense diagonalization of `B^{-1/2} A B^{-1/2}`.
///
/// Eigenvectors are mapped back with `B^{-1/2}`, so they come out
/// B-orthonormal. Every pair is reported as converged.
pub fn solve_dense(op: &DiscreteOperator) -> Result<EigenPairs> {
    let n = op.dim();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: DENSE_LIMIT,
        });
    }
    let scale: Vec<f64> = op.b().iter().map(|b| 1.0 / b.sqrt()).collect();
    let mut c = DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        for (col, v) in op.a().row(r) {
            c[(r, col)] = scale[r] * v * scale[col];
        }
    }
    let eig = SymmetricEigen::new(c);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for &k in &order {
        let lambda = eig.eigenvalues[k];
        let mut u: Vec<f64> = eig
            .eigenvectors
            .column(k)
            .iter()
            .zip(&scale)
            .map(|(v, s)| v * s)
            .collect();
        fix_sign(&mut u);
        residuals.push(residual(op, lambda, &u)?);
        values.push(lambda);
        vectors.push(u);
    }
    Ok(EigenPairs {
        values,
        vectors,
        residuals,
        converged: vec![true; n],
        iterations: 0,
    })
}
