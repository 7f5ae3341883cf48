//! JSON run configuration with defaults for every field.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calculus::families::{standard_suite, TestFamily};
use crate::error::{ConeError, Result};
use crate::geometry::{ConeDomain, Variant};
use crate::grid::{GridKind, GridSpec, PolarGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub n: usize,
    pub omega: f64,
    pub variant: Variant,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { n: 2, omega: FRAC_PI_4, variant: Variant::Axial }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Number of rings; defaults to 600 unless `r_min` is given.
    pub radial: Option<usize>,
    pub angular: usize,
    pub q: f64,
    pub r_max: f64,
    /// Smallest radius to reach; sets the number of rings.
    pub r_min: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        let d = GridSpec::default();
        Self { radial: None, angular: d.angular, q: d.q, r_max: d.r_max, r_min: None }
    }
}

/// An exponent list where `"inf"` stands for `p = ∞`.
mod exponents {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(ps: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let reprs: Vec<Repr> = ps
            .iter()
            .map(|p| if p.is_infinite() { Repr::Text("inf".into()) } else { Repr::Number(*p) })
            .collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        let reprs = Vec::<Repr>::deserialize(d)?;
        reprs
            .into_iter()
            .map(|r| match r {
                Repr::Number(x) => Ok(x),
                Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
                Repr::Text(t) => Err(serde::de::Error::custom(format!("`{t}` is not an exponent"))),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweeps {
    /// Cutoff radii for the density tables.
    pub eps: Vec<f64>,
    /// Corrector exponents.
    pub k: Vec<f64>,
    /// Decomposition levels as fractions of `sup M`.
    pub alpha: Vec<f64>,
    /// K-functional scales.
    pub t: Vec<f64>,
    #[serde(with = "exponents")]
    pub p: Vec<f64>,
}

impl Default for Sweeps {
    fn default() -> Self {
        Self {
            eps: vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5],
            k: vec![2.0, 4.0, 8.0, 16.0],
            alpha: vec![0.5, 0.05, 5e-3, 5e-4, 5e-5],
            t: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0],
            p: vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub grid: GridConfig,
    pub suite: Vec<TestFamily>,
    pub sweeps: Sweeps,
    pub output: PathBuf,
    /// Per-check tolerance overrides, keyed by check id.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainConfig::default(),
            grid: GridConfig::default(),
            suite: standard_suite(),
            sweeps: Sweeps::default(),
            output: PathBuf::from("conelab-out"),
            tolerances: BTreeMap::new(),
        }
    }
}

fn bad(msg: impl Into<String>) -> ConeError {
    ConeError::Config(msg.into())
}

fn check_list(name: &str, xs: &[f64], ok: impl Fn(f64) -> bool, rule: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(bad(format!("sweep `{name}` must not be empty")));
    }
    if let Some(x) = xs.iter().find(|x| !ok(**x)) {
        return Err(bad(format!("sweep `{name}` has {x}; values must be {rule}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.domain()?;
        self.grid_spec()?;
        if self.suite.is_empty() {
            return Err(bad("suite must not be empty"));
        }
        let s = &self.sweeps;
        check_list("eps", &s.eps, |x| x > 0.0 && x < 1.0, "in (0, 1)")?;
        check_list("k", &s.k, |x| x >= 1.0 && x.is_finite(), "finite and ≥ 1")?;
        check_list("alpha", &s.alpha, |x| x > 0.0 && x.is_finite(), "positive")?;
        check_list("t", &s.t, |x| x > 0.0 && x.is_finite(), "positive")?;
        check_list("p", &s.p, |x| x >= 1.0, "≥ 1 or \"inf\"")?;
        for (k, v) in &self.tolerances {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(bad(format!("tolerance `{k}` = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<ConeDomain> {
        let d = &self.domain;
        ConeDomain::new(d.n, d.omega, d.variant).map_err(|e| bad(e.to_string()))
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let g = &self.grid;
        if !(g.q > 0.0 && g.q < 1.0) || !(g.r_max > 0.0 && g.r_max.is_finite()) {
            return Err(bad(format!("grid needs 0 < q < 1 and r_max > 0, got q = {}, r_max = {}", g.q, g.r_max)));
        }
        let spec = match (g.radial, g.r_min) {
            (Some(_), Some(_)) => return Err(bad("give either grid.radial or grid.r_min, not both")),
            (None, Some(r_min)) => {
                if !(r_min > 0.0 && r_min < g.r_max) {
                    return Err(bad(format!("grid.r_min = {r_min} must lie in (0, r_max)")));
                }
                GridSpec::reaching(r_min, g.q, g.r_max, g.angular)
            }
            (radial, None) => GridSpec {
                q: g.q,
                r_max: g.r_max,
                radial: radial.unwrap_or(GridSpec::default().radial),
                angular: g.angular,
            },
        };
        if spec.radial > 100_000 || spec.angular > 100_000 {
            return Err(bad("grid is too large"));
        }
        spec.validate().map_err(|e| bad(e.to_string()))?;
        Ok(spec)
    }

    pub fn grid(&self, kind: GridKind) -> Result<Arc<PolarGrid>> {
        Ok(Arc::new(PolarGrid::new(self.domain()?, kind, self.grid_spec()?)?))
    }

    /// Override for a check id, or the default.
    pub fn tolerance(&self, id: &str, default: f64) -> f64 {
        self.tolerances.get(id).copied().unwrap_or(default)
    }
}

/// Parses and validates a configuration. Blank text gives the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = if text.trim().is_empty() {
        RunConfig::default()
    } else {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))?
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}
