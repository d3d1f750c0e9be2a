use serde::{Deserialize, Serialize};

use super::{extrapolate, Extrapolation, Solved, Solver};
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::sigma::SigmaProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub l: f64,
    pub lambda_min: f64,
    /// Order observed from this row and the two before it.
    pub order: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub profile: String,
    /// One row per mesh, coarsest first.
    pub rows: Vec<ConvergenceRow>,
    /// Coarsest mesh at twice the truncation length, when requested.
    pub l_check: Option<ConvergenceRow>,
    pub extrapolation: Extrapolation,
}

impl ConvergenceStudy {
    /// `|λ(L) − λ(2L)|` on the coarsest mesh.
    pub fn l_drift(&self) -> Option<f64> {
        self.l_check
            .as_ref()
            .map(|c| (c.lambda_min - self.rows[0].lambda_min).abs())
    }
}

/// Lowest eigenvalue on each of `specs` (same molecule and `L`, mesh sizes
/// decreasing geometrically), warm-starting each run from the previous one,
/// followed by Richardson extrapolation.
pub fn convergence_study(
    specs: &[DomainSpec],
    profile: &SigmaProfile,
    solver: &Solver,
    check_l: bool,
) -> Result<ConvergenceStudy> {
    if specs.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "a convergence study needs at least 3 meshes, got {}",
            specs.len()
        )));
    }
    let first = &specs[0];
    if specs
        .iter()
        .any(|s| s.size() != first.size() || (s.l() - first.l()).abs() > 1e-9 * first.l())
    {
        return Err(Error::InvalidConfig(
            "all meshes of a study must share molecule size and L".into(),
        ));
    }
    let hs: Vec<(f64, f64)> = specs.iter().map(|s| (s.h(), 0.0)).collect();
    // validates the geometric mesh sequence before any solve
    if let Err(Error::InvalidConfig(msg)) = extrapolate(&hs) {
        return Err(Error::InvalidConfig(msg));
    }

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(specs.len());
    let mut coarsest: Option<Solved> = None;
    let mut previous: Option<Solved> = None;
    for spec in specs {
        let solved = solver.run(spec, profile, previous.as_ref())?;
        require_converged(&solved, spec)?;
        let mut row = ConvergenceRow {
            h: spec.h(),
            l: spec.l(),
            lambda_min: solved.lowest(),
            order: None,
            iterations: solved.pairs.iterations,
        };
        if rows.len() >= 2 {
            let tail: Vec<(f64, f64)> = rows[rows.len() - 2..]
                .iter()
                .map(|r| (r.h, r.lambda_min))
                .chain(std::iter::once((row.h, row.lambda_min)))
                .collect();
            row.order = extrapolate(&tail).ok().map(|e| e.order);
        }
        rows.push(row);
        if coarsest.is_none() {
            coarsest = Some(solved.clone());
        }
        previous = Some(solved);
    }
    drop(previous);

    let l_check = if check_l {
        let spec = specs[0].with_l(2.0 * specs[0].l())?;
        let solved = solver.run(&spec, profile, coarsest.as_ref())?;
        require_converged(&solved, &spec)?;
        Some(ConvergenceRow {
            h: spec.h(),
            l: spec.l(),
            lambda_min: solved.lowest(),
            order: None,
            iterations: solved.pairs.iterations,
        })
    } else {
        None
    };

    let data: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.lambda_min)).collect();
    let extrapolation = extrapolate(&data)?;
    Ok(ConvergenceStudy {
        profile: profile.describe(),
        rows,
        l_check,
        extrapolation,
    })
}

/// `base` refined by 1, 2, 4, … for `levels` meshes.
pub fn mesh_sequence(base: &DomainSpec, levels: usize) -> Result<Vec<DomainSpec>> {
    (0..levels).map(|i| base.refined(1 << i)).collect()
}

pub(crate) fn require_converged(solved: &Solved, spec: &DomainSpec) -> Result<()> {
    if solved.pairs.converged.first().copied().unwrap_or(false) {
        Ok(())
    } else {
        Err(Error::NotConverged(format!(
            "lowest pair at h = {}, L = {} has residual {:e} after {} iterations",
            spec.h(),
            spec.l(),
            solved.pairs.residuals.first().copied().unwrap_or(f64::NAN),
            solved.pairs.iterations
        )))
    }
}
