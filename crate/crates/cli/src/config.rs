//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use scv_core::bishop::ParameterGrid;
use scv_core::domains::DomainConfig;
use scv_core::wedge::EdgeConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Discs,
    Kobayashi,
    Regularity,
    DomainsAudit,
    Selftest,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Discs => "discs",
            Kind::Kobayashi => "kobayashi",
            Kind::Regularity => "regularity",
            Kind::DomainsAudit => "domains-audit",
            Kind::Selftest => "selftest",
        }
    }
}

/// Top-level config. Exactly the parameter block named by `kind` may appear.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discs: Option<DiscsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kobayashi: Option<KobayashiParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<RegularityParams>,
    #[serde(
        default,
        rename = "domains-audit",
        skip_serializing_if = "Option::is_none"
    )]
    pub domains_audit: Option<DomainsAuditParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscsParams {
    /// Must be `flat` or `perturbed-flat` (a graph over `iℝⁿ`).
    pub edge: EdgeConfig,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_circle_samples")]
    pub circle_samples: usize,
    #[serde(default)]
    pub grid: ParameterGrid,
    #[serde(default = "default_fill_samples")]
    pub fill_samples: usize,
    #[serde(default = "default_foliation_samples")]
    pub foliation_samples: usize,
    /// Defaults to `(0.2, 0.1, 0.1, …)`.
    #[serde(default)]
    pub t0: Option<Vec<f64>>,
    #[serde(default = "default_sigma_max")]
    pub sigma_max: f64,
    #[serde(default = "default_foliation_points")]
    pub foliation_points: usize,
    #[serde(default = "default_min_coverage")]
    pub min_coverage: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalCase {
    pub z: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
    pub degree: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KobayashiParams {
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_sandwich_samples")]
    pub samples: usize,
    /// Degree of the disc search run on every sandwich row (none by default).
    #[serde(default)]
    pub search_degree: Option<usize>,
    #[serde(default = "default_decreasing_samples")]
    pub decreasing_samples: usize,
    #[serde(default = "default_extremal")]
    pub extremal: Vec<ExtremalCase>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityParams {
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    /// Admit `θ ∈ (0, 1/2]` in the power check and schedule.
    #[serde(default)]
    pub extended: bool,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_rays")]
    pub rays: usize,
    #[serde(default = "default_ray_points")]
    pub ray_points: usize,
    #[serde(default = "default_s0")]
    pub s0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainsAuditParams {
    pub domains: Vec<DomainConfig>,
    #[serde(default = "default_audit_samples")]
    pub samples: usize,
}

fn default_delta() -> f64 {
    0.2
}
fn default_circle_samples() -> usize {
    256
}
fn default_fill_samples() -> usize {
    1000
}
fn default_foliation_samples() -> usize {
    200
}
fn default_sigma_max() -> f64 {
    0.2
}
fn default_foliation_points() -> usize {
    9
}
fn default_min_coverage() -> f64 {
    0.99
}
fn default_restarts() -> usize {
    4
}
fn default_dims() -> Vec<usize> {
    vec![1, 2]
}
fn default_sandwich_samples() -> usize {
    1000
}
fn default_decreasing_samples() -> usize {
    200
}
fn default_extremal() -> Vec<ExtremalCase> {
    vec![
        ExtremalCase {
            z: vec![[0.5, 0.0]],
            v: vec![[1.0, 0.0]],
            degree: 3,
            restarts: 4,
        },
        ExtremalCase {
            z: vec![[0.5, 0.0], [0.0, 0.0]],
            v: vec![[0.0, 0.0], [1.0, 0.0]],
            degree: 3,
            restarts: 4,
        },
    ]
}
fn default_thetas() -> Vec<f64> {
    vec![0.55, 0.65, 0.75, 0.85, 0.95]
}
fn default_n() -> usize {
    2
}
fn default_rays() -> usize {
    32
}
fn default_ray_points() -> usize {
    20
}
fn default_s0() -> f64 {
    0.1
}
fn default_audit_samples() -> usize {
    64
}

impl Default for DiscsParams {
    fn default() -> Self {
        serde_json::from_str(r#"{"edge": {"kind": "flat", "n": 2}}"#).expect("defaults parse")
    }
}

impl Default for KobayashiParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults parse")
    }
}

impl Default for RegularityParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults parse")
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.check_blocks()?;
        Ok(cfg)
    }

    /// The selftest kind needs no block; other kinds may omit theirs to take
    /// the defaults, but no foreign block may appear.
    fn check_blocks(&self) -> anyhow::Result<()> {
        let present = [
            (Kind::Discs, self.discs.is_some()),
            (Kind::Kobayashi, self.kobayashi.is_some()),
            (Kind::Regularity, self.regularity.is_some()),
            (Kind::DomainsAudit, self.domains_audit.is_some()),
        ];
        for (k, p) in present {
            if p && k != self.kind {
                bail!(
                    "block `{}` does not belong to a `{}` experiment",
                    k.name(),
                    self.kind.name()
                );
            }
        }
        if self.kind == Kind::DomainsAudit && self.domains_audit.is_none() {
            bail!("a domains-audit experiment needs a `domains-audit` block listing domains");
        }
        Ok(())
    }

    /// Resolves the seed: the command line wins, then the config. Every kind
    /// except `selftest` samples and therefore needs one.
    pub fn resolve_seed(&self, cli: Option<u64>) -> anyhow::Result<u64> {
        match (cli, self.seed, self.kind) {
            (Some(s), _, _) => Ok(s),
            (None, Some(s), _) => Ok(s),
            (None, None, Kind::Selftest) => Ok(0),
            (None, None, k) => bail!(
                "a `{}` experiment samples randomly and needs a seed",
                k.name()
            ),
        }
    }
}
