//! Finite-volume discretization of the Hamiltonian.
//!
//! Every unknown owns the part of the square `h × h` cell around it that lies
//! in the quadrant: a full cell inside, a half cell on an axis and a quarter
//! cell at the origin. Integrating `−Δφ = λφ` over these cells gives the
//! symmetric pencil `A u = λ B u` with
//!
//! * `A` the stiffness: every lattice edge of weight `w` adds `w (u_p − u_q)²`
//!   to `⟨u, A u⟩`, with `w = 1/2` for edges running along an axis (their dual
//!   face is cut in half) and `w = 1` otherwise. Edges into a wall node keep
//!   only their diagonal part.
//! * the Robin term `−ℓ_p σ_p u_p²` on axis nodes, `ℓ_p = h` being the length
//!   of axis boundary owned by the cell (`h/2` on each axis at the origin);
//! * `B` the diagonal of cell areas `h²`, `h²/2`, `h²/4`.
//!
//! On the quadrant with constant σ this is exactly the Kronecker sum
//! `A₁ ⊗ M₁ + M₁ ⊗ A₁` of the one-dimensional half-line scheme.

use std::io::Write;

use crate::domain::{GridGeometry, NodeClass};
use crate::error::{Error, Result};
use crate::sigma::SigmaProfile;
use crate::sparse::CsrMatrix;

/// The pencil `(A, B)` together with the grid it was built on.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    a: CsrMatrix,
    b: Vec<f64>,
    /// `ℓ_p σ_p` per node, subtracted from the stiffness diagonal.
    robin: Vec<f64>,
    geometry: Option<GridGeometry>,
    partitions: usize,
}

/// The two parts of the discrete quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm {
    /// Discrete `∫|∇φ|²`, evaluated edge by edge.
    pub gradient: f64,
    /// Discrete `∫ σ |φ|²` over the axes.
    pub boundary: f64,
    /// `⟨u, A u⟩` from the assembled matrix.
    pub total: f64,
}

/// Assembles the operator on `geom` for the boundary profile `profile`.
pub fn assemble(geom: &GridGeometry, profile: &SigmaProfile) -> Result<DiscreteOperator> {
    let spec = geom.spec();
    let needed = spec.d().unwrap_or(f64::INFINITY);
    if profile.support_limit() < needed {
        return Err(Error::Domain(format!(
            "profile defined on [0, {}) but the interaction boundary extends to {needed}",
            profile.support_limit()
        )));
    }
    let h = spec.h();
    let n = geom.len();
    let mut rows = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut robin = Vec::with_capacity(n);

    for (p, &(i, j)) in geom.nodes().iter().enumerate() {
        let class = geom.class(p);
        let (area, boundary_len, y) = match class {
            NodeClass::Interior => (h * h, 0.0, 0.0),
            NodeClass::RobinX => (0.5 * h * h, h, j as f64 * h),
            NodeClass::RobinY => (0.5 * h * h, h, i as f64 * h),
            NodeClass::RobinCorner => (0.25 * h * h, h, 0.0),
        };
        let r = if boundary_len > 0.0 {
            boundary_len * profile.evaluate(y)?
        } else {
            0.0
        };

        // neighbours in increasing index order: (i-1,j) (i,j-1) (i,j+1) (i+1,j)
        let mut row = Vec::with_capacity(5);
        let mut diag = -r;
        let push = |ni: usize, nj: usize, row: &mut Vec<(usize, f64)>| -> f64 {
            let w = if (i == 0 && ni == 0) || (j == 0 && nj == 0) {
                0.5
            } else {
                1.0
            };
            if let Some(q) = geom.index_of(ni, nj) {
                row.push((q, -w));
            }
            w
        };
        if i > 0 {
            diag += push(i - 1, j, &mut row);
        }
        if j > 0 {
            diag += push(i, j - 1, &mut row);
        }
        let at = row.len();
        let upper_j = push(i, j + 1, &mut row);
        let upper_i = push(i + 1, j, &mut row);
        diag += upper_j + upper_i;
        row.insert(at, (p, diag));

        rows.push(row);
        b.push(area);
        robin.push(r);
    }

    Ok(DiscreteOperator {
        a: CsrMatrix::from_rows(rows)?,
        b,
        robin,
        geometry: Some(geom.clone()),
        partitions: 1,
    })
}

impl DiscreteOperator {
    /// A bare pencil without grid information, `b` holding the diagonal of `B`.
    pub fn from_parts(a: CsrMatrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.dim() {
            return Err(Error::Dimension {
                expected: a.dim(),
                got: b.len(),
            });
        }
        if b.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Precondition("B must be positive".into()));
        }
        let n = b.len();
        Ok(Self {
            a,
            b,
            robin: vec![0.0; n],
            geometry: None,
            partitions: 1,
        })
    }

    /// Row partitions used by [`Self::apply_into`].
    pub fn with_partitions(mut self, partitions: usize) -> Self {
        self.partitions = partitions.max(1);
        self
    }

    pub fn partitions(&self) -> usize {
        self.partitions
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &CsrMatrix {
        &self.a
    }

    /// Diagonal of `B`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn geometry(&self) -> Option<&GridGeometry> {
        self.geometry.as_ref()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// `A u`.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(u, &mut out)?;
        Ok(out)
    }

    /// `out = A u` without allocating.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dim(u.len())?;
        self.check_dim(out.len())?;
        self.a.mul_vec_into(u, out, self.partitions);
        Ok(())
    }

    /// The discrete form `⟨u, A u⟩`, split into gradient and boundary parts.
    pub fn quadratic_form(&self, u: &[f64]) -> Result<QuadraticForm> {
        let au = self.apply(u)?;
        let total = dot(u, &au);

        let mut gradient = 0.0;
        let mut boundary = 0.0;
        for p in 0..self.dim() {
            // diagonal of the σ-free stiffness minus interior edge weights
            // leaves the weight of edges into wall nodes
            let mut wall = self.a.get(p, p) + self.robin[p];
            for (q, v) in self.a.row(p) {
                if q == p {
                    continue;
                }
                wall += v;
                if q > p {
                    let du = u[p] - u[q];
                    gradient -= v * du * du;
                }
            }
            gradient += wall * u[p] * u[p];
            boundary += self.robin[p] * u[p] * u[p];
        }
        Ok(QuadraticForm {
            gradient,
            boundary,
            total,
        })
    }

    /// `⟨u, B u⟩`.
    pub fn mass(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u.len())?;
        Ok(u.iter().zip(&self.b).map(|(x, b)| b * x * x).sum())
    }

    /// `⟨u, A u⟩ / ⟨u, B u⟩`, an upper bound for the lowest eigenvalue.
    pub fn rayleigh_quotient(&self, u: &[f64]) -> Result<f64> {
        let m = self.mass(u)?;
        if m == 0.0 {
            return Err(Error::Precondition(
                "Rayleigh quotient of the zero vector".into(),
            ));
        }
        let au = self.apply(u)?;
        Ok(dot(u, &au) / m)
    }

    /// Samples `f(x, y)` at the grid nodes.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<Vec<f64>> {
        let geom = self
            .geometry
            .as_ref()
            .ok_or_else(|| Error::Precondition("operator has no grid".into()))?;
        let h = geom.spec().h();
        Ok(geom
            .nodes()
            .iter()
            .map(|&(i, j)| f(i as f64 * h, j as f64 * h))
            .collect())
    }

    /// Writes `A` and `B` in coordinate format.
    pub fn export<W: Write, V: Write>(&self, a_out: &mut W, b_out: &mut V) -> Result<()> {
        self.a.write_coordinate(a_out)?;
        let b = CsrMatrix::from_rows(
            self.b
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![(i, v)])
                .collect(),
        )?;
        b.write_coordinate(b_out)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
