use serde::{Deserialize, Serialize};

use super::classify::stability_tolerance;
use super::SpectralResult;
use crate::domain::MoleculeSize;
use crate::error::{Error, Result};
use crate::sigma::{SigmaKind, SigmaProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsStatus {
    /// `∫σ ≤ 0`: nothing is claimed.
    NoPrediction,
    WithinBounds,
    /// The ground energy lies outside the bounds.
    Violation,
    /// A negative ground state is guaranteed but none was found.
    Inconsistent,
}

/// Ground-energy bounds of the model without binding potential, compared
/// with a computed spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// Whether `∫σ > 0`.
    pub hypothesis: bool,
    /// `∫σ`; `None` for a positive constant, whose integral diverges.
    pub integral: Option<f64>,
    pub negative_eigenvalue: bool,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Extrapolated when available, otherwise the raw ground energy.
    pub ground_energy: Option<f64>,
    /// Slack allowed on both sides of the bounds.
    pub tolerance: f64,
    pub status: BoundsStatus,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        matches!(
            self.status,
            BoundsStatus::NoPrediction | BoundsStatus::WithinBounds
        )
    }
}

/// Checks the hypothesis `∫σ > 0` and the bounds
/// `−2‖σ‖² ≤ E ≤ −2‖σ‖² + 8‖σ‖² ∫(‖σ‖ − σ) e^{−2‖σ‖y} dy` against `result`.
///
/// The slack is the extrapolation error estimate when `result` carries one,
/// otherwise the stability tolerance of the raw value.
pub fn check_ground_state_bounds(
    profile: &SigmaProfile,
    result: &SpectralResult,
) -> Result<BoundsReport> {
    if result.spec.size() != MoleculeSize::Infinite {
        return Err(Error::Precondition(
            "ground-state bounds hold only without binding potential".into(),
        ));
    }
    let (hypothesis, integral) = match profile.kind() {
        SigmaKind::Constant { value } if *value > 0.0 => (true, None),
        _ => {
            let i = profile.integral()?;
            (i > 0.0, Some(i))
        }
    };
    let (lower, upper) = if profile.sup_norm() > 0.0 {
        let (lo, up) = profile.ground_state_bounds()?;
        (Some(lo), Some(up))
    } else {
        (None, None)
    };

    let (ground_energy, tolerance) = match (&result.extrapolation, result.ground_energy) {
        (Some(e), _) => (Some(e.limit), e.error_estimate),
        (None, Some(e)) => (Some(e), stability_tolerance(result.tol) * e.abs()),
        (None, None) => (None, 0.0),
    };
    let negative_eigenvalue = result.ground_energy.is_some_and(|e| e < 0.0);

    let status = if !hypothesis {
        BoundsStatus::NoPrediction
    } else {
        match (ground_energy, lower, upper) {
            (Some(e), Some(lo), Some(up)) if negative_eigenvalue => {
                if e >= lo - tolerance && e <= up + tolerance {
                    BoundsStatus::WithinBounds
                } else {
                    BoundsStatus::Violation
                }
            }
            _ => BoundsStatus::Inconsistent,
        }
    };
    Ok(BoundsReport {
        hypothesis,
        integral,
        negative_eigenvalue,
        lower,
        upper,
        ground_energy,
        tolerance,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{classify, Extrapolation};
    use crate::domain::DomainSpec;
    use crate::eigen::EigenPairs;

    fn result_with(values: &[f64]) -> SpectralResult {
        let spec = DomainSpec::infinite(0.5, 5.0).unwrap();
        let p = EigenPairs {
            values: values.to_vec(),
            vectors: vec![vec![]; values.len()],
            residuals: vec![0.0; values.len()],
            converged: vec![true; values.len()],
            iterations: 1,
        };
        classify(&spec, "", &p, std::slice::from_ref(&p), 1e-9).unwrap()
    }

    #[test]
    fn exponential_inside_sandwich() {
        let p = SigmaProfile::exponential(1.0, 1.0).unwrap();
        let r = result_with(&[-0.82]);
        let rep = check_ground_state_bounds(&p, &r).unwrap();
        assert!(rep.hypothesis);
        assert_eq!(rep.integral, Some(1.0));
        assert!((rep.upper.unwrap() + 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(rep.lower, Some(-2.0));
        assert_eq!(rep.status, BoundsStatus::WithinBounds);
    }

    #[test]
    fn constant_bounds_coincide() {
        let p = SigmaProfile::constant(1.0).unwrap();
        let r = result_with(&[-1.98]).with_extrapolation(Extrapolation {
            limit: -2.00003,
            order: 2.0,
            error_estimate: 0.0013,
        });
        let rep = check_ground_state_bounds(&p, &r).unwrap();
        assert_eq!(rep.integral, None);
        assert_eq!(rep.status, BoundsStatus::WithinBounds);
        let off = result_with(&[-1.5]);
        assert_eq!(
            check_ground_state_bounds(&p, &off).unwrap().status,
            BoundsStatus::Violation
        );
    }

    #[test]
    fn repulsive_profile_gives_no_prediction() {
        let p = SigmaProfile::exponential(-1.0, 1.0).unwrap();
        let rep = check_ground_state_bounds(&p, &result_with(&[0.01])).unwrap();
        assert!(!rep.hypothesis);
        assert_eq!(rep.status, BoundsStatus::NoPrediction);
        assert!(rep.passed());
    }

    #[test]
    fn missing_ground_state_is_flagged() {
        let p = SigmaProfile::exponential(1.0, 1.0).unwrap();
        let rep = check_ground_state_bounds(&p, &result_with(&[0.02])).unwrap();
        assert_eq!(rep.status, BoundsStatus::Inconsistent);
        assert!(!rep.passed());
    }

    #[test]
    fn finite_molecule_rejected() {
        let spec = DomainSpec::finite(1.0, 2, 3.0).unwrap();
        let p = EigenPairs {
            values: vec![1.0],
            vectors: vec![vec![]],
            residuals: vec![0.0],
            converged: vec![true],
            iterations: 1,
        };
        let r = classify(&spec, "", &p, std::slice::from_ref(&p), 1e-9).unwrap();
        assert!(check_ground_state_bounds(&SigmaProfile::constant(1.0).unwrap(), &r).is_err());
    }
}
