//! Versioned TOML experiment configuration and its validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSpec};
use crate::mixing::{TvMode, TRANSIENT_MAX_SITES};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Magnetization,
    Tm,
    Clusters,
    Zn,
    Tv,
    CutoffScan,
    MpCheck,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Magnetization => "magnetization",
            Kind::Tm => "tm",
            Kind::Clusters => "clusters",
            Kind::Zn => "zn",
            Kind::Tv => "tv",
            Kind::CutoffScan => "cutoff-scan",
            Kind::MpCheck => "mp-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    /// Largest replica count any single estimate may use.
    pub max_replicas: usize,
    /// Largest graph accepted.
    pub max_sites: usize,
    /// History length cap per site before declaring supercriticality.
    pub length_cap_per_site: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_replicas: 1 << 20,
            max_sites: 1 << 22,
            length_cap_per_site: crate::backward::DEFAULT_LENGTH_CAP_PER_SITE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: Kind,
    #[serde(default)]
    pub graph: Option<GraphSpec>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Observation times (magnetization, tv).
    #[serde(default)]
    pub times: Vec<f64>,
    /// Slab height for cluster and walk experiments.
    #[serde(default)]
    pub t_star: Option<f64>,
    /// Target width of the `t_m` confidence interval.
    #[serde(default)]
    pub precision: Option<f64>,
    #[serde(default)]
    pub mode: Option<TvMode>,
    /// Graph sizes for cutoff scans.
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Profile grid for cutoff scans, as offsets from `t̂_m`.
    #[serde(default)]
    pub offsets: Vec<f64>,
    /// Ground-set size for the L² lemma check.
    #[serde(default)]
    pub v_size: Option<usize>,
    /// Largest pair distance for same-cluster probabilities.
    #[serde(default)]
    pub max_distance: Option<usize>,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_replicas() -> usize {
    1000
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Build the configured graph, if the kind uses one.
    pub fn build_graph(&self) -> Result<Graph> {
        let spec = self
            .graph
            .as_ref()
            .ok_or_else(|| invalid(format!("kind {} needs a [graph] table", self.kind.name())))?;
        spec.build()
    }

    /// Check every parameter the experiment will touch. Nothing is written
    /// or simulated before this passes.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(invalid(format!("beta must be finite and ≥ 0, got {}", self.beta)));
        }
        if self.replicas == 0 || self.replicas > self.limits.max_replicas {
            return Err(invalid(format!(
                "replicas must lie in 1..={}, got {}",
                self.limits.max_replicas, self.replicas
            )));
        }
        if !(self.limits.length_cap_per_site > 0.0) {
            return Err(invalid("length_cap_per_site must be positive"));
        }
        let graph = match self.kind {
            Kind::MpCheck | Kind::CutoffScan => None,
            _ => Some(self.build_graph()?),
        };
        if let Some(g) = &graph {
            if g.n() > self.limits.max_sites {
                return Err(Error::Capacity(format!(
                    "graph has {} sites, limit {}",
                    g.n(),
                    self.limits.max_sites
                )));
            }
        }
        let times_ok = |ts: &[f64]| ts.iter().all(|t| t.is_finite() && *t >= 0.0);
        match self.kind {
            Kind::Magnetization => {
                if self.times.is_empty() || !times_ok(&self.times) {
                    return Err(invalid("magnetization needs nonempty nonnegative times"));
                }
            }
            Kind::Tm => {
                let p = self.precision.ok_or_else(|| invalid("tm needs precision"))?;
                if !(p > 0.0) {
                    return Err(invalid("precision must be positive"));
                }
                let g = graph.as_ref().expect("graph built");
                if self.beta * g.max_degree() as f64 >= 1.0 {
                    return Err(invalid("tm needs beta·d < 1"));
                }
            }
            Kind::Clusters | Kind::Zn => {
                let t = self.t_star.ok_or_else(|| invalid("t_star is required"))?;
                if !(t.is_finite() && t >= 0.0) {
                    return Err(invalid("t_star must be finite and ≥ 0"));
                }
                if self.kind == Kind::Zn {
                    if !matches!(self.graph, Some(GraphSpec::Cycle { .. })) {
                        return Err(invalid("zn needs a cycle graph"));
                    }
                    let n = graph.as_ref().expect("graph built").n();
                    if let Some(d) = self.max_distance {
                        if d == 0 || d > n / 2 {
                            return Err(invalid("max_distance must lie in 1..=n/2"));
                        }
                    }
                }
            }
            Kind::Tv => {
                if self.times.is_empty() || !times_ok(&self.times) {
                    return Err(invalid("tv needs nonempty nonnegative times"));
                }
                let g = graph.as_ref().expect("graph built");
                match self.mode.ok_or_else(|| invalid("tv needs mode"))? {
                    TvMode::Exact if g.n() > TRANSIENT_MAX_SITES => {
                        return Err(Error::Capacity(format!(
                            "exact mode supports at most {TRANSIENT_MAX_SITES} sites"
                        )))
                    }
                    TvMode::Statistical if self.replicas < 4 => {
                        return Err(invalid("statistical mode needs ≥ 4 replicas"))
                    }
                    _ => {}
                }
            }
            Kind::CutoffScan => {
                let spec = self.graph.as_ref().ok_or_else(|| invalid("cutoff-scan needs [graph]"))?;
                if self.sizes.is_empty() {
                    return Err(invalid("cutoff-scan needs sizes"));
                }
                for &s in &self.sizes {
                    let g = spec.with_size(s)?.build()?;
                    if g.n() > self.limits.max_sites {
                        return Err(Error::Capacity(format!("size {s} exceeds max_sites")));
                    }
                    if self.beta * g.max_degree() as f64 >= 1.0 {
                        return Err(invalid("cutoff-scan needs beta·d < 1"));
                    }
                }
                if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
                    return Err(invalid("eps must be nonempty with values in (0, 1)"));
                }
                if self.offsets.iter().any(|o| !o.is_finite()) {
                    return Err(invalid("offsets must be finite"));
                }
                if self.replicas < 4 {
                    return Err(invalid("cutoff-scan needs ≥ 4 replicas"));
                }
                if let Some(p) = self.precision {
                    if !(p > 0.0) {
                        return Err(invalid("precision must be positive"));
                    }
                }
            }
            Kind::MpCheck => {
                let v = self.v_size.ok_or_else(|| invalid("mp-check needs v_size"))?;
                if v == 0 || v > 4 {
                    return Err(invalid("v_size must lie in 1..=4"));
                }
            }
        }
        Ok(())
    }
}
