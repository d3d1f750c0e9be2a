//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Absolute tolerance used by every profile integral.
pub const QUAD_TOL: f64 = 1e-10;
/// Maximum number of accepted subintervals.
pub const QUAD_MAX_INTERVALS: usize = 1_000_000;

/// Integrates `f` over `[a, b]` with adaptive Simpson refinement.
///
/// The tolerance is absolute and is split between subintervals in proportion
/// to their length. Fails with [`Error::Quadrature`] once more than
/// `max_intervals` pieces have been accepted.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64, max_intervals: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let flo = f(lo);
    let fhi = f(hi);
    let mid = 0.5 * (lo + hi);
    let fmid = f(mid);
    let whole = simpson(lo, hi, flo, fmid, fhi);

    // explicit stack instead of recursion: (a, b, fa, fm, fb, estimate, tol)
    let mut stack = vec![(lo, hi, flo, fmid, fhi, whole, tol)];
    let mut total = 0.0;
    let mut accepted = 0usize;
    while let Some((a, b, fa, fm, fb, est, tol)) = stack.pop() {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - est;
        // stop refining once the interval is at floating-point resolution
        let tiny = (b - a) <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);
        if delta.abs() <= 15.0 * tol || tiny {
            total += left + right + delta / 15.0;
            accepted += 1;
            if accepted > max_intervals {
                return Err(Error::Quadrature(max_intervals));
            }
        } else {
            stack.push((m, b, fm, frm, fb, right, 0.5 * tol));
            stack.push((a, m, fa, flm, fm, left, 0.5 * tol));
        }
    }
    Ok(sign * total)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12, 1000).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
        let v = adaptive_simpson(|x| x * x, 0.0, 3.0, 1e-12, 1000).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_tail() {
        let v = adaptive_simpson(|x| (-x).exp(), 0.0, 60.0, 1e-10, QUAD_MAX_INTERVALS).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = adaptive_simpson(|x| x.sin(), std::f64::consts::PI, 0.0, 1e-11, 10_000).unwrap();
        assert!((v + 2.0).abs() < 1e-10);
    }

    #[test]
    fn interval_cap_reported() {
        let r = adaptive_simpson(|x| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 10);
        assert_eq!(r, Err(Error::Quadrature(10)));
    }
}
