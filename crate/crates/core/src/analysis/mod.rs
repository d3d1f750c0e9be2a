//! From raw eigenpairs to statements about the spectrum.

mod bounds;
mod classify;
mod convergence;
mod extrapolate;
mod sweep;

pub use bounds::{check_ground_state_bounds, BoundsReport, BoundsStatus};
pub use classify::{
    classify, compute_spectrum, Artifact, DiscreteEigenvalue, EigenSummary, SpectralResult,
};
pub use convergence::{convergence_study, mesh_sequence, ConvergenceRow, ConvergenceStudy};
pub use extrapolate::{extrapolate, Extrapolation};
pub use sweep::{sweep_critical_sigma, Evaluation, SweepResult, SweepStep};

use crate::assembly::assemble;
use crate::domain::{build_grid, DomainSpec, GridGeometry};
use crate::eigen::{solve, EigenConfig, EigenPairs, Method};
use crate::error::Result;
use crate::sigma::SigmaProfile;

/// Everything needed to turn a geometry and a profile into eigenpairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Solver {
    pub eigen: EigenConfig,
    pub method: Method,
    /// Row partitions of the sparse product.
    pub partitions: usize,
}

impl Solver {
    pub fn new(eigen: EigenConfig) -> Self {
        Self {
            eigen,
            method: Method::Iterative,
            partitions: 1,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_partitions(mut self, partitions: usize) -> Self {
        self.partitions = partitions.max(1);
        self
    }

    /// Builds and solves the problem on `spec`, seeding the iteration with
    /// `previous` transferred onto the new grid when the grids are related.
    pub fn run(
        &self,
        spec: &DomainSpec,
        profile: &SigmaProfile,
        previous: Option<&Solved>,
    ) -> Result<Solved> {
        let geometry = build_grid(spec)?;
        let op = assemble(&geometry, profile)?.with_partitions(self.partitions);
        let guess: Vec<Vec<f64>> = previous
            .and_then(|p| {
                p.pairs
                    .vectors
                    .iter()
                    .map(|v| geometry.transfer_from(&p.geometry, v))
                    .collect::<Result<Vec<_>>>()
                    .ok()
            })
            .unwrap_or_default();
        let pairs = solve(&op, &self.eigen, self.method, &guess)?;
        Ok(Solved { geometry, pairs })
    }
}

/// Eigenpairs together with the grid they live on.
#[derive(Debug, Clone)]
pub struct Solved {
    pub geometry: GridGeometry,
    pub pairs: EigenPairs,
}

impl Solved {
    pub fn lowest(&self) -> f64 {
        self.pairs.values[0]
    }
}
