use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Richardson limit of a mesh sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    /// Observed order `p`; infinite when the data are already constant.
    pub order: f64,
    /// Distance from the limit to the finest computed value.
    pub error_estimate: f64,
}

/// Fits `λ(h) = λ₀ + C hᵖ` through the three finest of `values`, given as
/// `(h, λ)` with `h` decreasing in a common ratio.
pub fn extrapolate(values: &[(f64, f64)]) -> Result<Extrapolation> {
    if values.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "extrapolation needs at least 3 mesh sizes, got {}",
            values.len()
        )));
    }
    let ratios: Vec<f64> = values.windows(2).map(|w| w[0].0 / w[1].0).collect();
    let r = ratios[0];
    if !(r > 1.0 && r.is_finite()) || ratios.iter().any(|q| (q - r).abs() > 1e-9 * r) {
        return Err(Error::InvalidConfig(format!(
            "mesh sizes are not a decreasing geometric sequence: ratios {ratios:?}"
        )));
    }
    let tail = &values[values.len() - 3..];
    let (l1, l2, l3) = (tail[0].1, tail[1].1, tail[2].1);
    let d1 = l1 - l2;
    let d2 = l2 - l3;
    if d1 == 0.0 && d2 == 0.0 {
        return Ok(Extrapolation {
            limit: l3,
            order: f64::INFINITY,
            error_estimate: 0.0,
        });
    }
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return Err(Error::NoAsymptoticRegime(format!(
            "sequence {l1}, {l2}, {l3} is not monotone"
        )));
    }
    if d2.abs() >= d1.abs() {
        return Err(Error::NoAsymptoticRegime(format!(
            "differences {d1:e}, {d2:e} do not contract"
        )));
    }
    let order = (d1 / d2).ln() / r.ln();
    let limit = l3 - d2 / (r.powf(order) - 1.0);
    let error_estimate = (limit - l3).abs();
    if error_estimate > d2.abs() {
        return Err(Error::NoAsymptoticRegime(format!(
            "order {order:.3} puts the limit outside the bracket of the finest values"
        )));
    }
    Ok(Extrapolation {
        limit,
        order,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn recovers_quadratic_generator() {
        let e = extrapolate(&[(0.4, 1.16), (0.2, 1.04), (0.1, 1.01)]).unwrap();
        assert_relative_eq!(e.limit, 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.order, 2.0, epsilon = 1e-10);
        assert_relative_eq!(e.error_estimate, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn constant_data_gives_infinite_order() {
        let e = extrapolate(&[(0.4, 5.0), (0.2, 5.0), (0.1, 5.0)]).unwrap();
        assert_eq!(e.limit, 5.0);
        assert!(e.order.is_infinite());
        assert_eq!(e.error_estimate, 0.0);
    }

    #[test]
    fn uses_the_finest_three() {
        let f = |h: f64| -2.0 + 3.0 * h * h;
        let data: Vec<_> = [0.8, 0.4, 0.2, 0.1].iter().map(|&h| (h, f(h))).collect();
        let e = extrapolate(&data).unwrap();
        assert_relative_eq!(e.limit, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_sequences() {
        assert!(matches!(
            extrapolate(&[(0.4, 1.0), (0.2, 2.0), (0.1, 1.5)]),
            Err(Error::NoAsymptoticRegime(_))
        ));
        assert!(matches!(
            extrapolate(&[(0.4, 1.0), (0.2, 1.1), (0.1, 1.3)]),
            Err(Error::NoAsymptoticRegime(_))
        ));
        assert!(matches!(
            extrapolate(&[(0.1, 1.0), (0.1, 1.1), (0.1, 1.2)]),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            extrapolate(&[(0.4, 1.0), (0.2, 1.1), (0.05, 1.15)]),
            Err(Error::InvalidConfig(_))
        ));
        assert!(extrapolate(&[(0.2, 1.0), (0.1, 1.0)]).is_err());
    }

    proptest! {
        #[test]
        fn exact_power_laws(l0 in -5.0..5.0f64, c in 0.1..10.0f64, p in 1.0..4.0f64, sign in prop::bool::ANY) {
            let c = if sign { c } else { -c };
            let data: Vec<_> = [0.2, 0.1, 0.05].iter().map(|&h: &f64| (h, l0 + c * h.powf(p))).collect();
            let e = extrapolate(&data).unwrap();
            prop_assert!((e.limit - l0).abs() < 1e-9 * (1.0 + l0.abs()) + 1e-8 * c.abs());
            prop_assert!((e.order - p).abs() < 1e-6);
        }
    }
}
