use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::eigen::EigenConfig;
use crate::error::{Error, Result};
use crate::sigma::{SigmaKind, SigmaProfile};

/// A run as read from a JSON config file, after command-line overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default = "default_sigma")]
    pub sigma: SigmaKind,
    #[serde(default)]
    pub eigen: EigenConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub converge: ConvergeConfig,
    /// Row partitions of the sparse product.
    #[serde(default = "one")]
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainConfig::default(),
            sigma: default_sigma(),
            eigen: EigenConfig::default(),
            sweep: SweepConfig::default(),
            converge: ConvergeConfig::default(),
            threads: 1,
        }
    }
}

/// Geometry. `d: null` selects the model without binding potential, which is
/// meshed by `h`; otherwise the mesh is `h = d/k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default = "default_d")]
    pub d: Option<f64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(rename = "L", default = "default_l")]
    pub l: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            d: default_d(),
            k: None,
            h: None,
            l: default_l(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub bracket: (f64, f64),
    pub tol_sigma: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            bracket: (-10.0, 0.0),
            tol_sigma: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeConfig {
    /// Number of meshes when `mesh` is absent, each halving `h`.
    pub levels: usize,
    /// Explicit meshes: values of `k` with binding potential, of `h` without.
    pub mesh: Option<Vec<f64>>,
    /// Also solve the coarsest mesh at `2L`.
    pub check_l: bool,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            levels: 3,
            mesh: None,
            check_l: true,
        }
    }
}

fn default_sigma() -> SigmaKind {
    SigmaKind::Constant { value: 0.0 }
}

fn default_d() -> Option<f64> {
    Some(1.0)
}

fn default_l() -> f64 {
    12.0
}

fn one() -> usize {
    1
}

/// Mesh intervals across the strip when neither `k` nor `h` is given.
const DEFAULT_K: usize = 16;
/// Mesh size without binding potential when `h` is not given.
const DEFAULT_H: f64 = 0.1;

/// Scalar overrides from the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    /// `Some(None)` switches to the model without binding potential.
    pub d: Option<Option<f64>>,
    pub l: Option<f64>,
    pub k: Option<usize>,
    pub h: Option<f64>,
    pub sigma_const: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub nev: Option<usize>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = o.d {
            self.domain.d = d;
        }
        if let Some(l) = o.l {
            self.domain.l = l;
        }
        if let Some(k) = o.k {
            self.domain.k = Some(k);
            self.domain.h = None;
        }
        if let Some(h) = o.h {
            self.domain.h = Some(h);
            self.domain.k = None;
        }
        if let Some(s) = o.sigma_const {
            self.sigma = SigmaKind::Constant { value: s };
        }
        if let Some(seed) = o.seed {
            self.eigen.seed = seed;
        }
        if let Some(t) = o.threads {
            self.threads = t;
        }
        if let Some(nev) = o.nev {
            self.eigen.nev = nev;
        }
    }

    /// Checks every part of the config.
    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        self.profile()?;
        self.eigen.validate()?;
        if self.threads == 0 {
            return Err(Error::InvalidConfig("threads must be at least 1".into()));
        }
        if self.converge.levels < 3 && self.converge.mesh.is_none() {
            return Err(Error::InvalidConfig(
                "a convergence study needs at least 3 levels".into(),
            ));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<DomainSpec> {
        let dc = &self.domain;
        match dc.d {
            Some(d) => DomainSpec::finite(d, Self::k_for(d, dc.k, dc.h)?, dc.l),
            None => {
                if dc.k.is_some() {
                    return Err(Error::InvalidConfig(
                        "k is meaningless without binding potential; give h".into(),
                    ));
                }
                DomainSpec::infinite(dc.h.unwrap_or(DEFAULT_H), dc.l)
            }
        }
    }

    fn k_for(d: f64, k: Option<usize>, h: Option<f64>) -> Result<usize> {
        match (k, h) {
            (Some(k), _) => Ok(k),
            (None, Some(h)) => {
                let ratio = d / h;
                if !(h > 0.0) || ratio < 0.5 || (ratio - ratio.round()).abs() > 1e-9 * ratio {
                    return Err(Error::InvalidConfig(format!(
                        "h = {h} does not divide d = {d}"
                    )));
                }
                Ok(ratio.round() as usize)
            }
            (None, None) => Ok(DEFAULT_K),
        }
    }

    pub fn profile(&self) -> Result<SigmaProfile> {
        SigmaProfile::new(self.sigma.clone())
    }

    /// Meshes of a convergence study, coarsest first.
    pub fn convergence_specs(&self) -> Result<Vec<DomainSpec>> {
        let base = self.spec()?;
        match &self.converge.mesh {
            None => crate::analysis::mesh_sequence(&base, self.converge.levels),
            Some(mesh) => mesh
                .iter()
                .map(|&m| match base.d() {
                    Some(d) => {
                        if m < 1.0 || m.fract() != 0.0 {
                            return Err(Error::InvalidConfig(format!(
                                "mesh entries are values of k, got {m}"
                            )));
                        }
                        DomainSpec::finite(d, m as usize, base.l())
                    }
                    None => DomainSpec::infinite(m, base.l()),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::MoleculeSize;

    #[test]
    fn defaults_and_partial_documents() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        let spec = c.spec().unwrap();
        assert_eq!(spec.k(), Some(16));
        assert_eq!(spec.l(), 12.0);

        let c = RunConfig::from_json(
            r#"{"domain": {"d": null, "h": 0.2, "L": 8},
                "sigma": {"kind": "exponential", "amplitude": 1.0, "rate": 1.0},
                "eigen": {"nev": 2}}"#,
        )
        .unwrap();
        let spec = c.spec().unwrap();
        assert_eq!(spec.size(), MoleculeSize::Infinite);
        assert_eq!(spec.m(), 40);
        assert_eq!(c.eigen.nev, 2);
        assert_eq!(c.eigen.tol, EigenConfig::default().tol);
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(RunConfig::from_json(r#"{"domain": {"d": -1}}"#)
            .unwrap()
            .validate()
            .is_err());
        assert!(RunConfig::from_json(r#"{"domian": {}}"#).is_err());
        assert!(RunConfig::from_json("not json").is_err());
        assert!(RunConfig::from_json(r#"{"domain": {"d": 1, "h": 0.3}}"#)
            .unwrap()
            .validate()
            .is_err());
        assert!(RunConfig::from_json(r#"{"threads": 0}"#)
            .unwrap()
            .validate()
            .is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = RunConfig::from_json(r#"{"domain": {"d": 2, "k": 4, "L": 10}}"#).unwrap();
        c.apply(&Overrides {
            d: Some(Some(1.0)),
            h: Some(0.125),
            sigma_const: Some(-0.5),
            seed: Some(9),
            ..Default::default()
        });
        let spec = c.spec().unwrap();
        assert_eq!(spec.k(), Some(8));
        assert_eq!(c.eigen.seed, 9);
        assert_eq!(c.sigma, SigmaKind::Constant { value: -0.5 });
        c.apply(&Overrides {
            d: Some(None),
            h: Some(0.5),
            ..Default::default()
        });
        assert_eq!(c.spec().unwrap().size(), MoleculeSize::Infinite);
    }

    #[test]
    fn explicit_meshes() {
        let c = RunConfig::from_json(r#"{"converge": {"mesh": [4, 8, 16]}}"#).unwrap();
        let specs = c.convergence_specs().unwrap();
        assert_eq!(
            specs.iter().map(|s| s.k().unwrap()).collect::<Vec<_>>(),
            vec![4, 8, 16]
        );
        let c = RunConfig::from_json(r#"{"converge": {"mesh": [4.5]}}"#).unwrap();
        assert!(c.convergence_specs().is_err());
    }
}
