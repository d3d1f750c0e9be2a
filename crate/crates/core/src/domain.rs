//! Configuration space and its lattice.
//!
//! For a molecule of size `d` the pair `(x, y)` lives in the strip
//! `{x, y ≥ 0, |x − y| ≤ d}`. The axes carry the Robin interaction, the lines
//! `|x − y| = d` are hard walls. The unbounded direction is cut at `x + y = L`
//! with a Dirichlet wall; without binding potential (`d = ∞`) the quadrant is
//! cut to the square `[0, L]²` instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Molecule size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MoleculeSize {
    Finite(f64),
    Infinite,
}

/// Physical extent and mesh of a computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    size: MoleculeSize,
    /// Truncation length.
    l: f64,
    /// Mesh size.
    h: f64,
    /// Grid intervals across the strip (finite `d` only, `h = d/k`).
    k: Option<usize>,
    /// `L / h`.
    m: usize,
}

/// Relative slack when checking that `L` is a multiple of `h`.
const GRID_SLACK: f64 = 1e-9;

impl DomainSpec {
    /// Strip of width `d` with `k` intervals across it, cut at `x + y = l`.
    pub fn finite(d: f64, k: usize, l: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "molecule size d must be positive, got {d}"
            )));
        }
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        let h = d / k as f64;
        let m = multiple_of(l, h)?;
        if m <= k {
            return Err(Error::TruncationInsideCorner { m, k });
        }
        Ok(Self {
            size: MoleculeSize::Finite(d),
            l,
            h,
            k: Some(k),
            m,
        })
    }

    /// Quadrant without binding potential, cut to the square `[0, l]²`.
    pub fn infinite(h: f64, l: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mesh size h must be positive, got {h}"
            )));
        }
        let m = multiple_of(l, h)?;
        Ok(Self {
            size: MoleculeSize::Infinite,
            l,
            h,
            k: None,
            m,
        })
    }

    pub fn size(&self) -> MoleculeSize {
        self.size
    }

    pub fn d(&self) -> Option<f64> {
        match self.size {
            MoleculeSize::Finite(d) => Some(d),
            MoleculeSize::Infinite => None,
        }
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    /// Number of mesh intervals along the truncated direction, `L/h`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Same molecule and mesh with truncation length `l`.
    pub fn with_l(&self, l: f64) -> Result<Self> {
        match self.size {
            MoleculeSize::Finite(d) => Self::finite(d, self.k.unwrap(), l),
            MoleculeSize::Infinite => Self::infinite(self.h, l),
        }
    }

    /// Same geometry with the mesh refined by `factor` (h → h/factor).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        match self.size {
            MoleculeSize::Finite(d) => Self::finite(d, self.k.unwrap() * factor, self.l),
            MoleculeSize::Infinite => Self::infinite(self.h / factor as f64, self.l),
        }
    }

    /// Bottom of the essential spectrum of the continuum operator:
    /// `π²/(2d²)` for finite `d` and `0` without binding potential.
    pub fn threshold(&self) -> f64 {
        match self.size {
            MoleculeSize::Finite(d) => PI * PI / (2.0 * d * d),
            MoleculeSize::Infinite => 0.0,
        }
    }

    /// Bottom of the essential spectrum of the *discrete* operator on the
    /// untruncated lattice, `8 sin²(π/4k)/h²`.
    ///
    /// Far from the origin the five-point stencil on the strip separates into
    /// a Bloch wave along `(1, 1)` and a transverse chain `t = i − j` with walls
    /// at `t = ±k`; the lowest transverse mode is `cos(πt/2k)`. The value lies
    /// below [`Self::threshold`] by a relative `O(1/k²)`.
    pub fn grid_threshold(&self) -> f64 {
        match self.size {
            MoleculeSize::Finite(_) => {
                let k = self.k.unwrap() as f64;
                let s = (PI / (4.0 * k)).sin();
                8.0 * s * s / (self.h * self.h)
            }
            MoleculeSize::Infinite => 0.0,
        }
    }

    /// Whether lattice node `(i, j)` is an unknown.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        match self.k {
            Some(k) => i.abs_diff(j) < k && i + j < self.m,
            None => i < self.m && j < self.m,
        }
    }
}

fn multiple_of(l: f64, h: f64) -> Result<usize> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "truncation length L must be positive, got {l}"
        )));
    }
    let ratio = l / h;
    let m = ratio.round();
    if (ratio - m).abs() > GRID_SLACK * ratio.max(1.0) || m < 1.0 {
        return Err(Error::InvalidConfig(format!(
            "L = {l} is not an integer multiple of h = {h}"
        )));
    }
    Ok(m as usize)
}

/// Role of a node with respect to the interaction boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Interior,
    /// On `x = 0`, away from the corner.
    RobinX,
    /// On `y = 0`, away from the corner.
    RobinY,
    RobinCorner,
}

impl NodeClass {
    fn of(i: usize, j: usize) -> Self {
        match (i, j) {
            (0, 0) => NodeClass::RobinCorner,
            (0, _) => NodeClass::RobinX,
            (_, 0) => NodeClass::RobinY,
            _ => NodeClass::Interior,
        }
    }
}

const NO_NODE: u32 = u32::MAX;

/// Enumeration of the lattice unknowns in lexicographic `(i, j)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    spec: DomainSpec,
    nodes: Vec<(usize, usize)>,
    classes: Vec<NodeClass>,
    /// Dense `side × side` lookup table, `NO_NODE` for excluded pairs.
    lookup: Vec<u32>,
    side: usize,
}

/// Lists the unknowns of `spec`.
pub fn build_grid(spec: &DomainSpec) -> Result<GridGeometry> {
    let side = spec.m();
    if side.checked_mul(side).is_none_or(|n| n >= NO_NODE as usize) {
        return Err(Error::InvalidConfig(format!(
            "grid with {side} nodes per side is too large"
        )));
    }
    let mut nodes = Vec::new();
    let mut classes = Vec::new();
    let mut lookup = vec![NO_NODE; side * side];
    for i in 0..side {
        let (lo, hi) = match spec.k() {
            Some(k) => (i.saturating_sub(k - 1), (i + k).min(side - i)),
            None => (0, side),
        };
        for j in lo..hi {
            debug_assert!(spec.contains(i, j));
            lookup[i * side + j] = nodes.len() as u32;
            nodes.push((i, j));
            classes.push(NodeClass::of(i, j));
        }
    }
    Ok(GridGeometry {
        spec: spec.clone(),
        nodes,
        classes,
        lookup,
        side,
    })
}

impl GridGeometry {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    pub fn class(&self, n: usize) -> NodeClass {
        self.classes[n]
    }

    /// Contiguous index of `(i, j)`, `None` for Dirichlet or out-of-grid pairs.
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.side || j >= self.side {
            return None;
        }
        match self.lookup[i * self.side + j] {
            NO_NODE => None,
            n => Some(n as usize),
        }
    }

    /// Index permutation induced by the particle exchange `(i, j) → (j, i)`.
    pub fn swap_permutation(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .map(|&(i, j)| self.index_of(j, i).expect("node set is swap invariant"))
            .collect()
    }

    /// Transfers nodal values from `coarse` onto this grid.
    ///
    /// The coarse mesh size must equal this one or be exactly twice it, with
    /// the same molecule size. Coarse nodes missing from `coarse` read as zero,
    /// matching the Dirichlet walls; fine nodes between coarse nodes are
    /// interpolated bilinearly.
    pub fn transfer_from(&self, coarse: &GridGeometry, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != coarse.len() {
            return Err(Error::Dimension {
                expected: coarse.len(),
                got: values.len(),
            });
        }
        if self.spec.size() != coarse.spec.size() {
            return Err(Error::Precondition(
                "grid transfer between different molecule sizes".into(),
            ));
        }
        let ratio = coarse.spec.h() / self.spec.h();
        let factor = ratio.round() as usize;
        if !(factor == 1 || factor == 2) || (ratio - factor as f64).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "grid transfer needs mesh ratio 1 or 2, got {ratio}"
            )));
        }
        let at = |i: usize, j: usize| coarse.index_of(i, j).map_or(0.0, |n| values[n]);
        let out = self
            .nodes
            .iter()
            .map(|&(i, j)| {
                if factor == 1 {
                    return at(i, j);
                }
                let (ci, ri) = (i / 2, i % 2);
                let (cj, rj) = (j / 2, j % 2);
                match (ri, rj) {
                    (0, 0) => at(ci, cj),
                    (1, 0) => 0.5 * (at(ci, cj) + at(ci + 1, cj)),
                    (0, 1) => 0.5 * (at(ci, cj) + at(ci, cj + 1)),
                    _ => 0.25 * (at(ci, cj) + at(ci + 1, cj) + at(ci, cj + 1) + at(ci + 1, cj + 1)),
                }
            })
            .collect();
        Ok(out)
    }
}
