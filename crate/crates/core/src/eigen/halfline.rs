use crate::error::{Error, Result};

/// Lowest eigenvalue of `−d²/dx²` on `[0, l]` with `φ'(0) = −σ₀ φ(0)` and
/// `φ(l) = 0`, discretized with the same half-cell scheme as the plane
/// problem on `n` unknowns (`h = l/n`).
///
/// With constant σ the plane operator on the square is the Kronecker sum of
/// two copies of this one, so twice this value is its exact ground energy on
/// the same mesh. The continuum limit is `−σ₀²` for `σ₀ > 0`.
pub fn solve_halfline_1d(sigma0: f64, l: f64, n: usize) -> Result<f64> {
    if n < 10 {
        return Err(Error::Precondition(format!(
            "half-line oracle needs at least 10 unknowns, got {n}"
        )));
    }
    if !(l > 0.0 && l.is_finite() && sigma0.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "invalid half-line setup sigma0={sigma0} l={l}"
        )));
    }
    let h = l / n as f64;
    let h2 = h * h;
    // symmetric tridiagonal M^{-1/2} A M^{-1/2}
    let mut diag = vec![2.0 / h2; n];
    diag[0] = 2.0 / h2 - 2.0 * sigma0 / h;
    let mut off = vec![-1.0 / h2; n - 1];
    off[0] = -std::f64::consts::SQRT_2 / h2;

    let radius = |i: usize| {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..n)
        .map(|i| diag[i] - radius(i))
        .fold(f64::INFINITY, f64::min);
    let mut hi = (0..n)
        .map(|i| diag[i] + radius(i))
        .fold(f64::NEG_INFINITY, f64::max);

    // bisection on the Sturm count for the lowest eigenvalue
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(&diag, &off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Number of eigenvalues below `x` from the signs of the LDLᵀ pivots.
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        }
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_limit_without_interaction() {
        // σ₀ = 0 is Neumann at 0: lowest mode cos(πx/2l)
        let l = 3.0;
        let v = solve_halfline_1d(0.0, l, 3000).unwrap();
        let exact = (PI / (2.0 * l)).powi(2);
        assert!(v >= 0.0);
        assert!((v - exact).abs() < 1e-5);
    }

    #[test]
    fn bound_state_energy() {
        let v = solve_halfline_1d(1.0, 40.0, 8000).unwrap();
        assert!((v + 1.0).abs() < 1e-4, "{v}");
        let v = solve_halfline_1d(2.0, 20.0, 8000).unwrap();
        assert!((v + 4.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn matches_dense_diagonalization() {
        let (s, l, n) = (0.7, 5.0, 40);
        let h = l / n as f64;
        let mut t = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            t[(i, i)] = 2.0 / (h * h);
            if i + 1 < n {
                let e = if i == 0 { -(2f64).sqrt() } else { -1.0 } / (h * h);
                t[(i, i + 1)] = e;
                t[(i + 1, i)] = e;
            }
        }
        t[(0, 0)] -= 2.0 * s / h;
        let dense = t.symmetric_eigenvalues().min();
        let sturm = solve_halfline_1d(s, l, n).unwrap();
        assert!((dense - sturm).abs() < 1e-10 * dense.abs().max(1.0));
    }

    #[test]
    fn too_few_unknowns() {
        assert!(solve_halfline_1d(1.0, 1.0, 9).is_err());
    }
}
