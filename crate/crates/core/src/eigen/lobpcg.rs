//! Locally optimal block preconditioned conjugate gradient iteration.
//!
//! Each step runs Rayleigh–Ritz on the span of the current block `X`, the
//! preconditioned residuals `W` of the unconverged columns, and the
//! previous search directions `P`. The basis `[X, P, W]` is B-orthonormalized
//! explicitly (modified Gram–Schmidt, twice for the new directions), so the
//! projected problem is a standard symmetric one. Converged columns stay in
//! `X` but stop contributing residual and search directions (soft locking).
//!
//! The preconditioner is an incomplete Cholesky factorization of `A + cB`
//! without fill, with the shift `c` raised until all pivots are positive.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{b_dot, fix_sign, norm, EigenConfig, EigenPairs};
use crate::assembly::{dot, DiscreteOperator};
use crate::error::{Error, Result};

/// A direction whose B-norm shrinks below this fraction during
/// orthogonalization is treated as linearly dependent.
const DROP_TOL: f64 = 1e-10;

/// Extra block vectors carried at least. With fewer, the Ritz vector of a
/// single column stalls at relative residuals around 1e-7.
const MIN_EXTRA: usize = 2;

/// Lowest `cfg.nev` eigenpairs from a random initial block.
pub fn solve_iterative(op: &DiscreteOperator, cfg: &EigenConfig) -> Result<EigenPairs> {
    solve_iterative_from(op, cfg, &[])
}

/// Lowest `cfg.nev` eigenpairs, seeding the block with `guess` (extra
/// columns are drawn at random from `cfg.seed`).
///
/// Non-convergence within `cfg.max_iter` is not an error: the pairs come back
/// with `converged` flags set accordingly.
pub fn solve_iterative_from(
    op: &DiscreteOperator,
    cfg: &EigenConfig,
    guess: &[Vec<f64>],
) -> Result<EigenPairs> {
    cfg.validate()?;
    let n = op.dim();
    if cfg.nev > n {
        return Err(Error::InvalidConfig(format!(
            "requested {} eigenpairs of a {n}-dimensional problem",
            cfg.nev
        )));
    }
    let m = (cfg.nev + cfg.block_extra.max(MIN_EXTRA)).min(n);
    let b = op.b();
    let precond = Preconditioner::new(op);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut x: Vec<Vec<f64>> = Vec::with_capacity(m);
    for g in guess.iter().take(m) {
        if g.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: g.len(),
            });
        }
        x.push(g.clone());
    }
    while x.len() < m {
        x.push(random_column(&mut rng, n));
    }
    let mut basis = Vec::with_capacity(m);
    extend_basis(&mut basis, x, b, 2);
    let mut attempts = 0;
    while basis.len() < m {
        attempts += 1;
        if attempts > 10 {
            return Err(Error::Breakdown(
                "could not build a B-orthonormal initial block".into(),
            ));
        }
        let fill = (basis.len()..m)
            .map(|_| random_column(&mut rng, n))
            .collect();
        extend_basis(&mut basis, fill, b, 2);
    }

    let ax = apply_all(op, &basis)?;
    let (mut theta, coeffs) = rayleigh_ritz(&basis, &ax, m);
    let mut x = combine(&basis, &coeffs, 0, 0..m);
    let mut ax = combine(&ax, &coeffs, 0, 0..m);
    let mut p: Vec<Vec<f64>> = Vec::new();

    let mut iterations = 0;
    let mut res = vec![0.0; m];
    let mut residual_vecs: Vec<Vec<f64>> = vec![vec![0.0; n]; m];
    loop {
        for i in 0..m {
            let r = &mut residual_vecs[i];
            let mut bx_sq = 0.0;
            for t in 0..n {
                let bx = b[t] * x[i][t];
                r[t] = ax[i][t] - theta[i] * bx;
                bx_sq += bx * bx;
            }
            res[i] = norm(r) / bx_sq.sqrt();
        }
        let converged: Vec<bool> = res.iter().map(|&r| r <= cfg.tol).collect();
        if converged[..cfg.nev].iter().all(|&c| c) || iterations >= cfg.max_iter {
            break;
        }
        iterations += 1;

        let active: Vec<usize> = (0..m).filter(|&i| !converged[i]).collect();
        let w: Vec<Vec<f64>> = active
            .iter()
            .map(|&i| precond.apply(&residual_vecs[i]))
            .collect();

        let mut s = Vec::with_capacity(3 * m);
        if extend_basis(&mut s, std::mem::take(&mut x), b, 1) < m {
            return Err(Error::Breakdown(format!(
                "block lost rank at iteration {iterations}"
            )));
        }
        extend_basis(&mut s, std::mem::take(&mut p), b, 2);
        let before_w = s.len();
        extend_basis(&mut s, w, b, 2);
        if s.len() == before_w && p.is_empty() && iterations > 1 {
            // no new direction survives: the iteration has stagnated
            s.truncate(m);
            x = s;
            break;
        }

        let as_ = apply_all(op, &s)?;
        let (t, c) = rayleigh_ritz(&s, &as_, m);
        theta = t;
        x = combine(&s, &c, 0, 0..m);
        ax = combine(&as_, &c, 0, 0..m);
        p = combine_cols(&s, &c, m, &active);
    }

    let nev = cfg.nev;
    let mut vectors: Vec<Vec<f64>> = x.into_iter().take(nev).collect();
    for v in &mut vectors {
        fix_sign(v);
    }
    Ok(EigenPairs {
        values: theta[..nev].to_vec(),
        vectors,
        residuals: res[..nev].to_vec(),
        converged: res[..nev].iter().map(|&r| r <= cfg.tol).collect(),
        iterations,
    })
}

/// Shifts tried for the incomplete factorization of `A + cB`.
const SHIFTS: [f64; 8] = [0.0, 1.0, 4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0];

enum Preconditioner {
    /// Incomplete `LDLᵀ` of `A + cB` on the pattern of `A`; `lower` holds
    /// the strict lower triangle of `L` row by row.
    Cholesky {
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        lower: Vec<f64>,
        pivots: Vec<f64>,
    },
    Jacobi(Vec<f64>),
}

impl Preconditioner {
    /// Incomplete Cholesky with the smallest shift that keeps every pivot
    /// positive, else the inverse diagonal.
    fn new(op: &DiscreteOperator) -> Self {
        SHIFTS
            .iter()
            .find_map(|&c| incomplete_cholesky(op, c))
            .unwrap_or_else(|| Self::Jacobi(jacobi(op)))
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        match self {
            Self::Jacobi(t) => r.iter().zip(t).map(|(r, t)| r * t).collect(),
            Self::Cholesky {
                row_ptr,
                cols,
                lower,
                pivots,
            } => {
                let n = r.len();
                let mut z = r.to_vec();
                for i in 0..n {
                    let mut acc = z[i];
                    for p in row_ptr[i]..row_ptr[i + 1] {
                        acc -= lower[p] * z[cols[p]];
                    }
                    z[i] = acc;
                }
                for i in 0..n {
                    z[i] /= pivots[i];
                }
                for i in (0..n).rev() {
                    let zi = z[i];
                    for p in row_ptr[i]..row_ptr[i + 1] {
                        z[cols[p]] -= lower[p] * zi;
                    }
                }
                z
            }
        }
    }
}

fn incomplete_cholesky(op: &DiscreteOperator, shift: f64) -> Option<Preconditioner> {
    let a = op.a();
    let b = op.b();
    let n = op.dim();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut lower = Vec::new();
    let mut pivots = vec![0.0; n];
    row_ptr.push(0);
    for i in 0..n {
        let start = cols.len();
        let mut diag = shift * b[i];
        for (c, v) in a.row(i) {
            if c < i {
                cols.push(c);
                lower.push(v);
            } else if c == i {
                diag += v;
            }
        }
        // l_ik d_k = a_ik − Σ_{j<k} l_ij l_kj d_j over the shared pattern
        for p in start..cols.len() {
            let k = cols[p];
            let mut acc = lower[p];
            let (mut q, mut r) = (start, row_ptr[k]);
            while q < p && r < row_ptr[k + 1] {
                match cols[q].cmp(&cols[r]) {
                    std::cmp::Ordering::Less => q += 1,
                    std::cmp::Ordering::Greater => r += 1,
                    std::cmp::Ordering::Equal => {
                        acc -= lower[q] * lower[r] * pivots[cols[q]];
                        q += 1;
                        r += 1;
                    }
                }
            }
            lower[p] = acc / pivots[k];
            diag -= lower[p] * lower[p] * pivots[k];
        }
        let scale = a.get(i, i).abs() + shift * b[i];
        if !(diag > 1e-10 * scale) {
            return None;
        }
        pivots[i] = diag;
        row_ptr.push(cols.len());
    }
    Some(Preconditioner::Cholesky {
        row_ptr,
        cols,
        lower,
        pivots,
    })
}

/// Inverse of a positive diagonal dominated by the stiffness diagonal.
fn jacobi(op: &DiscreteOperator) -> Vec<f64> {
    let a = op.a();
    (0..op.dim())
        .map(|r| {
            let mut diag = 0.0;
            let mut off = 0.0;
            for (c, v) in a.row(r) {
                if c == r {
                    diag = v;
                } else {
                    off += v.abs();
                }
            }
            let d = diag.max(off);
            if d > 0.0 {
                1.0 / d
            } else {
                1.0 / op.b()[r]
            }
        })
        .collect()
}

fn random_column(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn apply_all(op: &DiscreteOperator, cols: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    cols.iter().map(|c| op.apply(c)).collect()
}

/// Appends the B-orthonormalized part of `cols` to `basis`, dropping
/// directions that are (numerically) in the span already. Returns the number
/// of columns appended.
fn extend_basis(basis: &mut Vec<Vec<f64>>, cols: Vec<Vec<f64>>, b: &[f64], passes: usize) -> usize {
    let start = basis.len();
    for mut v in cols {
        let original = b_dot(b, &v, &v).sqrt();
        if !(original > 0.0) || !original.is_finite() {
            continue;
        }
        for _ in 0..passes {
            for q in basis.iter() {
                let c = b_dot(b, q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let len = b_dot(b, &v, &v).sqrt();
        if len <= DROP_TOL * original {
            continue;
        }
        let inv = 1.0 / len;
        v.iter_mut().for_each(|x| *x *= inv);
        basis.push(v);
    }
    basis.len() - start
}

/// Ritz values and coefficient vectors of the `keep` lowest Ritz pairs of the
/// B-orthonormal basis `s` with `as_ = A s`.
fn rayleigh_ritz(s: &[Vec<f64>], as_: &[Vec<f64>], keep: usize) -> (Vec<f64>, DMatrix<f64>) {
    let k = s.len();
    let mut g = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = 0.5 * (dot(&s[i], &as_[j]) + dot(&s[j], &as_[i]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let keep = keep.min(k);
    let values = order[..keep].iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut coeffs = DMatrix::<f64>::zeros(k, keep);
    for (col, &i) in order[..keep].iter().enumerate() {
        coeffs.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, coeffs)
}

/// Columns `cols` of `basis[from..] · coeffs[from.., ..]`.
fn combine(
    basis: &[Vec<f64>],
    coeffs: &DMatrix<f64>,
    from: usize,
    cols: std::ops::Range<usize>,
) -> Vec<Vec<f64>> {
    let cols: Vec<usize> = cols.collect();
    combine_cols(basis, coeffs, from, &cols)
}

fn combine_cols(
    basis: &[Vec<f64>],
    coeffs: &DMatrix<f64>,
    from: usize,
    cols: &[usize],
) -> Vec<Vec<f64>> {
    let n = basis.first().map_or(0, |v| v.len());
    cols.iter()
        .map(|&c| {
            let mut out = vec![0.0; n];
            for (r, v) in basis.iter().enumerate().skip(from) {
                let w = coeffs[(r, c)];
                if w != 0.0 {
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += w * x;
                    }
                }
            }
            out
        })
        .filter(|v| from == 0 || v.iter().any(|&x| x != 0.0))
        .collect()
}
