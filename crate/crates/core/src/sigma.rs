//! Boundary interaction profiles σ(y).
//!
//! The profile enters the Hamiltonian only through the Robin condition on the
//! coordinate axes, `∂φ/∂n + σ φ = 0` with the inward normal. Positive σ is
//! attractive (it lowers the energy), negative σ is repulsive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, QUAD_MAX_INTERVALS, QUAD_TOL};

/// Shape of a profile, as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaKind {
    Constant {
        value: f64,
    },
    Exponential {
        amplitude: f64,
        rate: f64,
    },
    /// `values[i]` holds on `[breakpoints[i-1], breakpoints[i])`, with an
    /// implicit leading breakpoint at 0 and the last value extending to the
    /// end of the support.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Samples at `y = i * spacing`, linearly interpolated. The sup-norm of a
    /// tabulated profile is the maximum over samples, which is approximate
    /// only in the sense that the interpolant is what gets evaluated.
    Tabulated {
        spacing: f64,
        samples: Vec<f64>,
    },
}

/// Sign pattern of a profile over its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    Zero,
    /// σ ≥ 0 everywhere and somewhere positive.
    Attractive,
    /// σ ≤ 0 everywhere and somewhere negative.
    Repulsive,
    Mixed,
}

/// A validated boundary profile together with its domain `[0, support_limit)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaProfile {
    kind: SigmaKind,
    support_limit: f64,
}

impl SigmaProfile {
    pub fn new(kind: SigmaKind) -> Result<Self> {
        let support_limit = match &kind {
            SigmaKind::Constant { value } => {
                finite("constant value", *value)?;
                f64::INFINITY
            }
            SigmaKind::Exponential { amplitude, rate } => {
                finite("amplitude", *amplitude)?;
                finite("rate", *rate)?;
                if *rate < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "exponential rate must be non-negative, got {rate}"
                    )));
                }
                f64::INFINITY
            }
            SigmaKind::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::InvalidConfig(format!(
                        "piecewise profile needs {} values for {} breakpoints, got {}",
                        breakpoints.len() + 1,
                        breakpoints.len(),
                        values.len()
                    )));
                }
                let mut prev = 0.0;
                for &b in breakpoints {
                    finite("breakpoint", b)?;
                    if b <= prev {
                        return Err(Error::InvalidConfig(
                            "breakpoints must be positive and strictly increasing".into(),
                        ));
                    }
                    prev = b;
                }
                for &v in values {
                    finite("piecewise value", v)?;
                }
                f64::INFINITY
            }
            SigmaKind::Tabulated { spacing, samples } => {
                finite("spacing", *spacing)?;
                if *spacing <= 0.0 || samples.len() < 2 {
                    return Err(Error::InvalidConfig(
                        "tabulated profile needs positive spacing and at least two samples".into(),
                    ));
                }
                for &v in samples {
                    finite("sample", v)?;
                }
                // the last sample is included so that a table ending at d covers [0, d)
                *spacing * (samples.len() - 1) as f64 * (1.0 + 1e-12)
            }
        };
        Ok(Self {
            kind,
            support_limit,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(SigmaKind::Constant { value })
    }

    pub fn exponential(amplitude: f64, rate: f64) -> Result<Self> {
        Self::new(SigmaKind::Exponential { amplitude, rate })
    }

    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(SigmaKind::PiecewiseConstant {
            breakpoints,
            values,
        })
    }

    pub fn tabulated(spacing: f64, samples: Vec<f64>) -> Result<Self> {
        Self::new(SigmaKind::Tabulated { spacing, samples })
    }

    /// Restricts the profile to `[0, limit)`. A profile can be restricted but
    /// never extended beyond its natural domain.
    pub fn with_support(mut self, limit: f64) -> Result<Self> {
        if !(limit > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "support limit must be positive, got {limit}"
            )));
        }
        if limit > self.support_limit {
            return Err(Error::Domain(format!(
                "profile is defined on [0, {}) only, cannot extend to {limit}",
                self.support_limit
            )));
        }
        self.support_limit = limit;
        Ok(self)
    }

    pub fn kind(&self) -> &SigmaKind {
        &self.kind
    }

    pub fn support_limit(&self) -> f64 {
        self.support_limit
    }

    /// σ(y). Piecewise profiles are right-continuous at their breakpoints.
    pub fn evaluate(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0 && y < self.support_limit) {
            return Err(Error::Domain(format!(
                "y = {y} outside [0, {})",
                self.support_limit
            )));
        }
        Ok(self.eval_unchecked(y))
    }

    fn eval_unchecked(&self, y: f64) -> f64 {
        match &self.kind {
            SigmaKind::Constant { value } => *value,
            SigmaKind::Exponential { amplitude, rate } => amplitude * (-rate * y).exp(),
            SigmaKind::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let piece = breakpoints.partition_point(|&b| b <= y);
                values[piece]
            }
            SigmaKind::Tabulated { spacing, samples } => {
                let t = y / spacing;
                let i = (t.floor() as usize).min(samples.len() - 2);
                let frac = t - i as f64;
                samples[i] + frac * (samples[i + 1] - samples[i])
            }
        }
    }

    /// Essential supremum of |σ| over the support.
    pub fn sup_norm(&self) -> f64 {
        match &self.kind {
            SigmaKind::Constant { value } => value.abs(),
            SigmaKind::Exponential { amplitude, .. } => amplitude.abs(),
            SigmaKind::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let mut sup: f64 = values[0].abs();
                for (b, v) in breakpoints.iter().zip(&values[1..]) {
                    if *b < self.support_limit {
                        sup = sup.max(v.abs());
                    }
                }
                sup
            }
            SigmaKind::Tabulated { spacing, samples } => samples
                .iter()
                .enumerate()
                .filter(|(i, _)| (*i as f64) * spacing < self.support_limit)
                .fold(0.0_f64, |acc, (_, v)| acc.max(v.abs())),
        }
    }

    pub fn sign_class(&self) -> SignClass {
        let (mut pos, mut neg) = (false, false);
        let mut note = |v: f64| {
            pos |= v > 0.0;
            neg |= v < 0.0;
        };
        match &self.kind {
            SigmaKind::Constant { value } => note(*value),
            SigmaKind::Exponential { amplitude, .. } => note(*amplitude),
            SigmaKind::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                note(values[0]);
                for (b, v) in breakpoints.iter().zip(&values[1..]) {
                    if *b < self.support_limit {
                        note(*v);
                    }
                }
            }
            SigmaKind::Tabulated { samples, .. } => samples.iter().for_each(|v| note(*v)),
        }
        match (pos, neg) {
            (false, false) => SignClass::Zero,
            (true, false) => SignClass::Attractive,
            (false, true) => SignClass::Repulsive,
            (true, true) => SignClass::Mixed,
        }
    }

    /// The profile multiplied pointwise by `t`.
    pub fn scale(&self, t: f64) -> Result<Self> {
        let kind = match &self.kind {
            SigmaKind::Constant { value } => SigmaKind::Constant { value: t * value },
            SigmaKind::Exponential { amplitude, rate } => SigmaKind::Exponential {
                amplitude: t * amplitude,
                rate: *rate,
            },
            SigmaKind::PiecewiseConstant {
                breakpoints,
                values,
            } => SigmaKind::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| t * v).collect(),
            },
            SigmaKind::Tabulated { spacing, samples } => SigmaKind::Tabulated {
                spacing: *spacing,
                samples: samples.iter().map(|v| t * v).collect(),
            },
        };
        let scaled = Self::new(kind)?;
        if self.support_limit < scaled.support_limit {
            scaled.with_support(self.support_limit)
        } else {
            Ok(scaled)
        }
    }

    fn require_infinite_support(&self, what: &str) -> Result<()> {
        if self.support_limit.is_finite() {
            return Err(Error::Precondition(format!(
                "{what} requires a profile on the whole half-line, support ends at {}",
                self.support_limit
            )));
        }
        Ok(())
    }

    /// ∫₀^∞ σ(y) dy in closed form.
    pub fn integral(&self) -> Result<f64> {
        self.require_infinite_support("integral")?;
        match &self.kind {
            SigmaKind::Constant { value } if *value == 0.0 => Ok(0.0),
            SigmaKind::Constant { .. } => Err(Error::Precondition(
                "a nonzero constant profile is not integrable on the half-line".into(),
            )),
            SigmaKind::Exponential { amplitude, rate } => {
                if *rate > 0.0 {
                    Ok(amplitude / rate)
                } else if *amplitude == 0.0 {
                    Ok(0.0)
                } else {
                    Err(Error::Precondition(
                        "exponential profile with zero rate is not integrable".into(),
                    ))
                }
            }
            SigmaKind::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if *values.last().unwrap() != 0.0 {
                    return Err(Error::Precondition(
                        "piecewise profile must vanish after its last breakpoint to be integrable"
                            .into(),
                    ));
                }
                let mut start = 0.0;
                let mut sum = 0.0;
                for (b, v) in breakpoints.iter().zip(values) {
                    sum += v * (b - start);
                    start = *b;
                }
                Ok(sum)
            }
            // unreachable: tabulated profiles always have finite support
            SigmaKind::Tabulated { .. } => Err(Error::Precondition(
                "tabulated profiles have finite support".into(),
            )),
        }
    }

    /// ∫₀^∞ σ(y) dy by adaptive Simpson quadrature, independent of the closed
    /// forms used in [`Self::integral`].
    pub fn integral_quadrature(&self) -> Result<f64> {
        self.integral()?; // same integrability preconditions
        let pieces = self.quadrature_pieces(self.tail_cutoff());
        let mut sum = 0.0;
        let tol = QUAD_TOL / pieces.len() as f64;
        for (a, b) in pieces {
            sum += adaptive_simpson(|y| self.eval_unchecked(y), a, b, tol, QUAD_MAX_INTERVALS)?;
        }
        Ok(sum)
    }

    /// The weighted integral ∫₀^∞ [‖σ‖∞ − σ(y)] e^{−2‖σ‖∞ y} dy entering the
    /// upper ground-state bound, in closed form.
    pub fn bound_integral(&self) -> Result<f64> {
        let s = self.bound_norm()?;
        let value = match &self.kind {
            SigmaKind::Constant { value } => (s - value) / (2.0 * s),
            SigmaKind::Exponential { amplitude, rate } => 0.5 - amplitude / (2.0 * s + rate),
            SigmaKind::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let decay = |y: f64| (-2.0 * s * y).exp();
                let mut start = 0.0;
                let mut sub = 0.0;
                for (b, v) in breakpoints.iter().zip(values) {
                    sub += v * (decay(start) - decay(*b));
                    start = *b;
                }
                sub += values.last().unwrap() * decay(start);
                0.5 - sub / (2.0 * s)
            }
            SigmaKind::Tabulated { .. } => unreachable!("finite support rejected above"),
        };
        Ok(value.max(0.0))
    }

    /// Same weighted integral as [`Self::bound_integral`], by quadrature on
    /// `[0, 40/‖σ‖∞]` (the neglected tail is below e^{-80} relative).
    pub fn bound_integral_quadrature(&self) -> Result<f64> {
        let s = self.bound_norm()?;
        let pieces = self.quadrature_pieces(40.0 / s);
        let tol = QUAD_TOL / pieces.len() as f64;
        let mut sum = 0.0;
        for (a, b) in pieces {
            sum += adaptive_simpson(
                |y| (s - self.eval_unchecked(y)) * (-2.0 * s * y).exp(),
                a,
                b,
                tol,
                QUAD_MAX_INTERVALS,
            )?;
        }
        Ok(sum.max(0.0))
    }

    /// Ground-state energy bounds `(−2‖σ‖², −2‖σ‖² + 8‖σ‖² I)` for the model
    /// without binding potential, `I` being [`Self::bound_integral`].
    pub fn ground_state_bounds(&self) -> Result<(f64, f64)> {
        let s = self.bound_norm()?;
        let lower = -2.0 * s * s;
        let upper = lower + 8.0 * s * s * self.bound_integral()?;
        Ok((lower, upper.max(lower)))
    }

    fn bound_norm(&self) -> Result<f64> {
        self.require_infinite_support("ground-state bounds")?;
        let s = self.sup_norm();
        if s == 0.0 {
            return Err(Error::Precondition(
                "sup-norm of σ is zero, bounds degenerate to 0".into(),
            ));
        }
        Ok(s)
    }

    fn tail_cutoff(&self) -> f64 {
        match &self.kind {
            SigmaKind::Exponential { rate, .. } if *rate > 0.0 => 60.0 / rate,
            SigmaKind::PiecewiseConstant { breakpoints, .. } => {
                breakpoints.last().copied().unwrap_or(0.0)
            }
            _ => 0.0,
        }
    }

    /// Splits `[0, end]` at the profile's breakpoints so each piece is smooth.
    fn quadrature_pieces(&self, end: f64) -> Vec<(f64, f64)> {
        let mut cuts = vec![0.0];
        if let SigmaKind::PiecewiseConstant { breakpoints, .. } = &self.kind {
            cuts.extend(breakpoints.iter().copied().filter(|&b| b < end));
        }
        cuts.push(end);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// Short human-readable description for result files.
    pub fn describe(&self) -> String {
        match &self.kind {
            SigmaKind::Constant { value } => format!("constant({value})"),
            SigmaKind::Exponential { amplitude, rate } => {
                format!("exponential(amplitude={amplitude}, rate={rate})")
            }
            SigmaKind::PiecewiseConstant {
                breakpoints,
                values,
            } => format!("piecewise_constant({breakpoints:?}, {values:?})"),
            SigmaKind::Tabulated { spacing, samples } => {
                format!("tabulated(spacing={spacing}, {} samples)", samples.len())
            }
        }
    }
}

fn finite(what: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{what} must be finite, got {v}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        assert_eq!(SigmaProfile::constant(1.0).unwrap().evaluate(0.7), Ok(1.0));
        assert_eq!(
            SigmaProfile::exponential(1.0, 1.0).unwrap().evaluate(0.0),
            Ok(1.0)
        );
        let v = SigmaProfile::exponential(2.0, 1.0)
            .unwrap()
            .evaluate(2f64.ln())
            .unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn evaluate_outside_domain() {
        let p = SigmaProfile::constant(1.0)
            .unwrap()
            .with_support(1.0)
            .unwrap();
        assert!(matches!(p.evaluate(-0.1), Err(Error::Domain(_))));
        assert!(matches!(p.evaluate(1.0), Err(Error::Domain(_))));
        assert!(p.evaluate(0.999).is_ok());
        assert!(matches!(p.evaluate(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn piecewise_is_right_continuous() {
        let p = SigmaProfile::piecewise_constant(vec![1.0, 2.0], vec![0.5, -2.0, 3.0]).unwrap();
        assert_eq!(p.evaluate(0.999), Ok(0.5));
        assert_eq!(p.evaluate(1.0), Ok(-2.0));
        assert_eq!(p.evaluate(2.0), Ok(3.0));
    }

    #[test]
    fn tabulated_interpolates() {
        let p = SigmaProfile::tabulated(0.5, vec![0.0, 1.0, -1.0]).unwrap();
        assert_relative_eq!(p.evaluate(0.25).unwrap(), 0.5);
        assert_relative_eq!(p.evaluate(0.75).unwrap(), 0.0);
        assert_relative_eq!(p.evaluate(1.0).unwrap(), -1.0);
        assert!(p.evaluate(1.01).is_err());
        assert_eq!(p.sup_norm(), 1.0);
        assert!(p.clone().with_support(1.0).is_ok());
        assert!(p.with_support(2.0).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(SigmaProfile::constant(-3.0).unwrap().sup_norm(), 3.0);
        assert_eq!(SigmaProfile::exponential(1.0, 1.0).unwrap().sup_norm(), 1.0);
        let p = SigmaProfile::piecewise_constant(vec![1.0], vec![0.5, -2.0]).unwrap();
        assert_eq!(p.sup_norm(), 2.0);
        // restricting the support hides later pieces
        assert_eq!(p.with_support(1.0).unwrap().sup_norm(), 0.5);
    }

    #[test]
    fn integral_examples() {
        let e = SigmaProfile::exponential(1.0, 1.0).unwrap();
        assert_relative_eq!(e.integral().unwrap(), 1.0);
        let e = SigmaProfile::exponential(-2.0, 2.0).unwrap();
        assert_relative_eq!(e.integral().unwrap(), -1.0);
        let box_ = SigmaProfile::piecewise_constant(vec![1.0], vec![3.0, 0.0]).unwrap();
        assert_relative_eq!(box_.integral().unwrap(), 3.0);
    }

    #[test]
    fn integral_preconditions() {
        assert!(matches!(
            SigmaProfile::constant(1.0).unwrap().integral(),
            Err(Error::Precondition(_))
        ));
        let nonvanishing = SigmaProfile::piecewise_constant(vec![1.0], vec![3.0, 1.0]).unwrap();
        assert!(matches!(
            nonvanishing.integral(),
            Err(Error::Precondition(_))
        ));
        let finite = SigmaProfile::exponential(1.0, 1.0)
            .unwrap()
            .with_support(2.0)
            .unwrap();
        assert!(matches!(finite.integral(), Err(Error::Precondition(_))));
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let profiles = [
            SigmaProfile::exponential(1.0, 1.0).unwrap(),
            SigmaProfile::exponential(-2.0, 2.0).unwrap(),
            SigmaProfile::exponential(0.3, 0.05).unwrap(),
            SigmaProfile::piecewise_constant(vec![1.0, 2.5], vec![3.0, -1.0, 0.0]).unwrap(),
        ];
        for p in &profiles {
            let exact = p.integral().unwrap();
            let quad = p.integral_quadrature().unwrap();
            assert_relative_eq!(exact, quad, max_relative = 1e-10);
            let exact = p.bound_integral().unwrap();
            let quad = p.bound_integral_quadrature().unwrap();
            assert_relative_eq!(exact, quad, max_relative = 1e-10, epsilon = 1e-10);
        }
        let c = SigmaProfile::constant(-0.7).unwrap();
        assert_relative_eq!(
            c.bound_integral().unwrap(),
            c.bound_integral_quadrature().unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn bounds_examples() {
        let (lo, hi) = SigmaProfile::constant(1.0)
            .unwrap()
            .ground_state_bounds()
            .unwrap();
        assert_eq!((lo, hi), (-2.0, -2.0));
        let (lo, hi) = SigmaProfile::exponential(1.0, 1.0)
            .unwrap()
            .ground_state_bounds()
            .unwrap();
        assert_relative_eq!(lo, -2.0);
        assert_relative_eq!(hi, -2.0 / 3.0, max_relative = 1e-14);
        let (lo, hi) = SigmaProfile::constant(2.5)
            .unwrap()
            .ground_state_bounds()
            .unwrap();
        assert_relative_eq!(lo, -12.5);
        assert_relative_eq!(hi, -12.5);
    }

    #[test]
    fn bounds_reject_zero_norm() {
        assert!(matches!(
            SigmaProfile::constant(0.0).unwrap().ground_state_bounds(),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sign_classes() {
        assert_eq!(
            SigmaProfile::constant(0.0).unwrap().sign_class(),
            SignClass::Zero
        );
        assert_eq!(
            SigmaProfile::exponential(1.0, 1.0).unwrap().sign_class(),
            SignClass::Attractive
        );
        assert_eq!(
            SigmaProfile::constant(-1.0).unwrap().sign_class(),
            SignClass::Repulsive
        );
        let p = SigmaProfile::piecewise_constant(vec![1.0], vec![1.0, -1.0]).unwrap();
        assert_eq!(p.sign_class(), SignClass::Mixed);
    }

    #[test]
    fn config_shape() {
        let k: SigmaKind = serde_json::from_str(r#"{"kind":"constant","value":-1.5}"#).unwrap();
        assert_eq!(k, SigmaKind::Constant { value: -1.5 });
        let k: SigmaKind =
            serde_json::from_str(r#"{"kind":"exponential","amplitude":1.0,"rate":1.0}"#).unwrap();
        assert_eq!(
            k,
            SigmaKind::Exponential {
                amplitude: 1.0,
                rate: 1.0
            }
        );
    }

    fn any_profile() -> impl Strategy<Value = SigmaProfile> {
        prop_oneof![
            (-5.0..5.0f64).prop_map(|c| SigmaProfile::constant(c).unwrap()),
            (-5.0..5.0f64, 0.01..4.0f64)
                .prop_map(|(a, r)| SigmaProfile::exponential(a, r).unwrap()),
            (
                prop::collection::vec(0.1..2.0f64, 1..5),
                prop::collection::vec(-5.0..5.0f64, 5)
            )
                .prop_map(|(gaps, vals)| {
                    let mut b = Vec::new();
                    let mut acc = 0.0;
                    for g in gaps {
                        acc += g;
                        b.push(acc);
                    }
                    let v = vals[..b.len() + 1].to_vec();
                    SigmaProfile::piecewise_constant(b, v).unwrap()
                }),
        ]
    }

    proptest! {
        #[test]
        fn sup_norm_dominates_samples(p in any_profile()) {
            let s = p.sup_norm();
            for i in 0..2000 {
                let y = i as f64 * 0.005;
                prop_assert!(p.evaluate(y).unwrap().abs() <= s);
            }
        }

        #[test]
        fn sup_norm_is_homogeneous(p in any_profile(), t in -4.0..4.0f64) {
            let scaled = p.scale(t).unwrap().sup_norm();
            prop_assert!((scaled - t.abs() * p.sup_norm()).abs() <= 1e-12 * (1.0 + scaled));
        }

        #[test]
        fn bounds_are_ordered(p in any_profile()) {
            if p.sup_norm() > 0.0 {
                let (lo, hi) = p.ground_state_bounds().unwrap();
                prop_assert!(lo <= hi);
            }
        }
    }
}
