use serde::{Deserialize, Serialize};

use super::{Extrapolation, Solver};
use crate::domain::DomainSpec;
use crate::eigen::EigenPairs;
use crate::error::{Error, Result};
use crate::sigma::SigmaProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub value: f64,
    pub residual: f64,
    pub converged: bool,
}

/// An eigenvalue below the threshold that is stable under doubling `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEigenvalue {
    pub index: usize,
    pub value: f64,
    /// `|λ(L/2) − λ(L)|` at the largest `L`.
    pub stability_drift: f64,
}

/// A computed value that does not qualify as a bound state: a box mode of the
/// continuum, or a sub-threshold value that still moves with `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub index: usize,
    pub value: f64,
    /// Value at half the truncation length.
    pub previous: f64,
    pub drift: f64,
    pub below_threshold: bool,
}

/// Classified spectrum of one physical setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    /// Geometry of the largest truncation.
    pub spec: DomainSpec,
    pub profile: String,
    /// Continuum bottom of the essential spectrum.
    pub threshold: f64,
    /// Bottom of the essential spectrum of the lattice operator; the
    /// classification compares against this one.
    pub grid_threshold: f64,
    pub eigenvalues: Vec<EigenSummary>,
    pub discrete: Vec<DiscreteEigenvalue>,
    pub artifacts: Vec<Artifact>,
    /// Indices left unclassified because a pair did not converge.
    pub refused: Vec<usize>,
    pub ground_energy: Option<f64>,
    pub l_sequence: Vec<f64>,
    pub tol: f64,
    pub extrapolation: Option<Extrapolation>,
}

impl SpectralResult {
    pub fn with_extrapolation(mut self, e: Extrapolation) -> Self {
        self.extrapolation = Some(e);
        self
    }

    pub fn all_converged(&self) -> bool {
        self.refused.is_empty()
    }
}

/// Relative drift under doubling `L` below which a value counts as stable.
pub(crate) fn stability_tolerance(tol: f64) -> f64 {
    1e-6_f64.max(10.0 * tol)
}

/// Classifies `pairs` computed on `spec` using `stability`, the pairs at
/// `2L`, `4L`, …; the decision uses the two largest truncations.
pub fn classify(
    spec: &DomainSpec,
    profile: &str,
    pairs: &EigenPairs,
    stability: &[EigenPairs],
    tol: f64,
) -> Result<SpectralResult> {
    let Some(last) = stability.last() else {
        return Err(Error::Precondition(
            "classification needs results at two truncation lengths".into(),
        ));
    };
    let before = if stability.len() >= 2 {
        &stability[stability.len() - 2]
    } else {
        pairs
    };
    let mut l_sequence = vec![spec.l()];
    let mut final_spec = spec.clone();
    for _ in stability {
        final_spec = final_spec.with_l(2.0 * final_spec.l())?;
        l_sequence.push(final_spec.l());
    }

    let grid_threshold = spec.grid_threshold();
    let rel = stability_tolerance(tol);
    let mut discrete = Vec::new();
    let mut artifacts = Vec::new();
    let mut refused = Vec::new();
    for index in 0..last.len().min(before.len()) {
        if !(last.converged[index] && before.converged[index]) {
            refused.push(index);
            continue;
        }
        let value = last.values[index];
        let previous = before.values[index];
        let drift = (previous - value).abs();
        let below = value < grid_threshold;
        if below && drift <= rel * value.abs() {
            discrete.push(DiscreteEigenvalue {
                index,
                value,
                stability_drift: drift,
            });
        } else {
            artifacts.push(Artifact {
                index,
                value,
                previous,
                drift,
                below_threshold: below,
            });
        }
    }
    let ground_energy = discrete.first().filter(|e| e.index == 0).map(|e| e.value);
    let eigenvalues = (0..last.len())
        .map(|i| EigenSummary {
            value: last.values[i],
            residual: last.residuals[i],
            converged: last.converged[i],
        })
        .collect();
    Ok(SpectralResult {
        spec: final_spec,
        profile: profile.to_string(),
        threshold: spec.threshold(),
        grid_threshold,
        eigenvalues,
        discrete,
        artifacts,
        refused,
        ground_energy,
        l_sequence,
        tol,
        extrapolation: None,
    })
}

/// Solves at `L` and `2L` (warm-starting the second run) and classifies.
pub fn compute_spectrum(
    spec: &DomainSpec,
    profile: &SigmaProfile,
    solver: &Solver,
) -> Result<SpectralResult> {
    let short = solver.run(spec, profile, None)?;
    let long = solver.run(&spec.with_l(2.0 * spec.l())?, profile, Some(&short))?;
    classify(
        spec,
        &profile.describe(),
        &short.pairs,
        &[long.pairs],
        solver.eigen.tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{EigenConfig, Method};

    fn pairs(values: &[f64], converged: &[bool]) -> EigenPairs {
        EigenPairs {
            values: values.to_vec(),
            vectors: vec![vec![]; values.len()],
            residuals: vec![0.0; values.len()],
            converged: converged.to_vec(),
            iterations: 1,
        }
    }

    #[test]
    fn splits_stable_from_drifting() {
        let spec = DomainSpec::finite(1.0, 4, 3.0).unwrap();
        let thr = spec.grid_threshold();
        let a = pairs(&[3.3, 4.0, thr + 1.0], &[true; 3]);
        let b = pairs(&[3.3, 3.9, thr + 0.3], &[true; 3]);
        let r = classify(&spec, "constant(0)", &a, &[b], 1e-9).unwrap();
        assert_eq!(r.discrete.len(), 1);
        assert_eq!(r.ground_energy, Some(3.3));
        assert_eq!(r.artifacts.len(), 2);
        assert!(r.artifacts[0].below_threshold);
        assert!(!r.artifacts[1].below_threshold);
        assert_eq!(r.l_sequence, vec![3.0, 6.0]);
        assert_eq!(r.spec.l(), 6.0);
    }

    #[test]
    fn refuses_unconverged_indices() {
        let spec = DomainSpec::finite(1.0, 4, 3.0).unwrap();
        let a = pairs(&[3.3, 3.5], &[false, true]);
        let b = pairs(&[3.3, 3.5], &[true, true]);
        let r = classify(&spec, "", &a, &[b], 1e-9).unwrap();
        assert_eq!(r.refused, vec![0]);
        assert_eq!(r.ground_energy, None);
        assert_eq!(r.discrete[0].index, 1);
    }

    #[test]
    fn needs_two_truncations() {
        let spec = DomainSpec::finite(1.0, 4, 3.0).unwrap();
        let a = pairs(&[3.3], &[true]);
        assert!(matches!(
            classify(&spec, "", &a, &[], 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn uses_two_largest_truncations() {
        let spec = DomainSpec::finite(1.0, 4, 3.0).unwrap();
        let a = pairs(&[3.0], &[true]);
        let b = pairs(&[2.5], &[true]);
        let c = pairs(&[2.5], &[true]);
        let r = classify(&spec, "", &a, &[b, c], 1e-9).unwrap();
        assert_eq!(r.discrete.len(), 1);
        assert_eq!(r.l_sequence, vec![3.0, 6.0, 12.0]);
    }

    #[test]
    fn bound_state_without_interaction() {
        let spec = DomainSpec::finite(1.0, 4, 10.0).unwrap();
        let solver = Solver::new(EigenConfig::default().with_nev(3)).with_method(Method::Dense);
        let r = compute_spectrum(&spec, &SigmaProfile::constant(0.0).unwrap(), &solver).unwrap();
        assert!(!r.discrete.is_empty());
        let e = r.ground_energy.unwrap();
        assert!(e >= 0.0 && e < r.grid_threshold);
        for d in &r.discrete {
            assert!(d.value < r.threshold);
        }
    }

    #[test]
    fn strong_repulsion_empties_the_list() {
        let spec = DomainSpec::finite(1.0, 4, 4.0).unwrap();
        let solver = Solver::new(EigenConfig::default().with_nev(2)).with_method(Method::Dense);
        let r = compute_spectrum(&spec, &SigmaProfile::constant(-10.0).unwrap(), &solver).unwrap();
        assert!(r.discrete.is_empty());
        assert_eq!(r.ground_energy, None);
    }
}
