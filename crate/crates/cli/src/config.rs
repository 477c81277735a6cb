//! Experiment configuration: a TOML document with the market, mode, grid
//! sizes, quadrature/Monte Carlo settings, seed and output directory.

use collab_auction::dist::default_quartet;
use collab_auction::{BidderProfile, CollaborationMode, Family, McConfig, QuadConfig, TypeDistribution};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Points on θ grids (alpha-curve, audits).
    #[serde(default = "default_theta_grid")]
    pub theta_grid: usize,
    /// Granularity of the ζ sweep.
    #[serde(default = "default_zeta_step")]
    pub zeta_step: f64,
    /// Collaboration mode for simulate / ic-audit.
    #[serde(default)]
    pub mode: ModeSpec,
    /// Interdependence weight when `mode = "nested"`.
    #[serde(default)]
    pub zeta: Option<f64>,
    /// Winner's retained share in seller-pivotal auctions.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Monte Carlo draws for simulate / verify.
    #[serde(default = "default_n_draws")]
    pub n_draws: usize,
    #[serde(default)]
    pub quad: QuadSection,
    /// Bidders of the simulated market; the default quartet on [0,1]
    /// (one bidder each) when omitted.
    #[serde(default)]
    pub bidders: Vec<BidderSpec>,
}

fn default_seed() -> u64 {
    42
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_theta_grid() -> usize {
    200
}
fn default_zeta_step() -> f64 {
    0.01
}
fn default_epsilon() -> f64 {
    1e-3
}
fn default_n_draws() -> usize {
    10_000
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    #[default]
    WinnerPivotal,
    SellerPivotal,
    EffortSubstitution,
    Nested,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSection {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
}

fn default_rel_tol() -> f64 {
    1e-8
}
fn default_max_depth() -> usize {
    40
}

impl Default for QuadSection {
    fn default() -> Self {
        Self {
            rel_tol: default_rel_tol(),
            max_depth: default_max_depth(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidderSpec {
    pub family: String,
    #[serde(default)]
    pub lo: f64,
    #[serde(default = "one")]
    pub hi: f64,
    pub rate: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub k: Option<f64>,
}

fn one() -> f64 {
    1.0
}

/// Configuration error with enough context to diagnose the line.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl BidderSpec {
    pub fn build(&self) -> Result<TypeDistribution, ConfigError> {
        let family = match self.family.as_str() {
            "uniform" => Family::Uniform,
            "truncated-exponential" => Family::TruncatedExponential {
                rate: self.rate.ok_or_else(|| {
                    ConfigError("truncated-exponential needs `rate`".to_string())
                })?,
            },
            "truncated-normal" => Family::TruncatedNormal {
                mu: self
                    .mu
                    .ok_or_else(|| ConfigError("truncated-normal needs `mu`".to_string()))?,
                sigma: self
                    .sigma
                    .ok_or_else(|| ConfigError("truncated-normal needs `sigma`".to_string()))?,
            },
            "power" => Family::Power {
                k: self
                    .k
                    .ok_or_else(|| ConfigError("power needs `k`".to_string()))?,
            },
            other => {
                return Err(ConfigError(format!(
                    "unknown family `{other}` (expected uniform, truncated-exponential, \
                     truncated-normal or power)"
                )))
            }
        };
        TypeDistribution::new(family, self.lo, self.hi)
            .map_err(|e| ConfigError(format!("bidder family `{}`: {e}", self.family)))
    }
}

/// Parsed config plus derived objects.
pub struct Experiment {
    pub config: ExperimentConfig,
    /// Named distributions for curve/verify/sweep commands.
    pub distributions: Vec<(String, TypeDistribution)>,
    /// Bidders of the simulated market.
    pub bidders: Vec<BidderProfile>,
    pub config_hash: String,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let config: ExperimentConfig = toml::from_str(&raw)
            .map_err(|e| ConfigError(format!("{} — {e}", path.display())))?;
        if config.mode == ModeSpec::Nested {
            let z = config
                .zeta
                .ok_or_else(|| ConfigError("mode = \"nested\" needs `zeta`".to_string()))?;
            if !(0.0..=1.0).contains(&z) {
                return Err(ConfigError(format!("zeta {z} outside [0,1]")));
            }
        }
        let mut hasher = Sha256::new();
        hasher.update(raw.as_bytes());
        let config_hash = hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect::<String>();

        let (distributions, bidders) = if config.bidders.is_empty() {
            let quartet = default_quartet();
            let bidders = quartet
                .iter()
                .enumerate()
                .map(|(i, (_, d))| BidderProfile::new(i, *d))
                .collect();
            (quartet, bidders)
        } else {
            let mut dists = Vec::new();
            let mut bidders = Vec::new();
            for (i, spec) in config.bidders.iter().enumerate() {
                let d = spec.build()?;
                let report = d.validate();
                if !report.all_pass() {
                    return Err(ConfigError(format!(
                        "bidder {i} ({}) fails the distribution assumptions: {report:?}",
                        spec.family
                    )));
                }
                let name = format!("{}[{i}]", spec.family);
                dists.push((name, d));
                bidders.push(BidderProfile::new(i, d));
            }
            (dists, bidders)
        };
        Ok(Self {
            config,
            distributions,
            bidders,
            config_hash,
        })
    }

    pub fn mode(&self) -> CollaborationMode {
        match self.config.mode {
            ModeSpec::WinnerPivotal => CollaborationMode::WinnerPivotal,
            ModeSpec::SellerPivotal => CollaborationMode::SellerPivotal,
            ModeSpec::EffortSubstitution => CollaborationMode::EffortSubstitution,
            ModeSpec::Nested => CollaborationMode::Nested {
                zeta: self.config.zeta.unwrap_or(0.5),
            },
        }
    }

    pub fn quad(&self) -> QuadConfig {
        QuadConfig {
            rel_tol: self.config.quad.rel_tol,
            max_depth: self.config.quad.max_depth,
        }
    }

    pub fn mc(&self) -> McConfig {
        McConfig {
            n_draws: self.config.n_draws,
            seed: self.config.seed,
        }
    }
}
