//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adapt::OptimizerConfig;
use crate::divergence::{Estimator, NeighbourSearch};
use crate::models::{Model, ObservationSchedule, Spacing, DEFAULT_EVENT_CAP};
use crate::smc::{accepted_count, KernelSpec, PriorSpec, SmcSettings};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    Toy,
    Death,
    Dimerization,
    Diffusion,
}

impl ModelId {
    pub const ALL: [ModelId; 4] = [ModelId::Toy, ModelId::Death, ModelId::Dimerization, ModelId::Diffusion];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Toy => "toy",
            ModelId::Death => "death",
            ModelId::Dimerization => "dimerization",
            ModelId::Diffusion => "diffusion",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::validation("model", format!("unknown model `{s}`")))
    }
}

/// How the distance weights are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Adaptive,
    Uniform,
    Scaled,
    Semiauto,
    Subset,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Adaptive, Method::Uniform, Method::Scaled, Method::Semiauto, Method::Subset];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Adaptive => "adaptive",
            Method::Uniform => "uniform",
            Method::Scaled => "scaled",
            Method::Semiauto => "semiauto",
            Method::Subset => "subset",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::validation("method", format!("unknown method `{s}`")))
    }
}

fn default_first_fraction() -> f64 {
    1e-3
}

fn default_event_cap() -> u64 {
    DEFAULT_EVENT_CAP
}

fn default_true() -> bool {
    true
}

fn default_draws() -> usize {
    10
}

fn default_voxels() -> usize {
    8
}

fn default_per_voxel() -> u64 {
    10
}

/// Model choice and its data-generating settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub id: ModelId,
    /// Number of observation intervals `n` (ignored by the toy model).
    #[serde(default)]
    pub observations: usize,
    #[serde(default)]
    pub final_time: f64,
    #[serde(default)]
    pub spacing: Spacing,
    /// First nonzero geometric observation time as a fraction of `final_time`.
    #[serde(default = "default_first_fraction")]
    pub first_fraction: f64,
    /// Initial copy numbers: `[A(0)]` for the death process, `[S1, S2, S3]`
    /// for dimerization.
    #[serde(default)]
    pub initial: Vec<u64>,
    /// Toy model draws `r`.
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// Sort the toy draws into order statistics.
    #[serde(default = "default_true")]
    pub sorted: bool,
    #[serde(default = "default_voxels")]
    pub voxels: usize,
    #[serde(default = "default_per_voxel")]
    pub per_voxel: u64,
    #[serde(default = "default_event_cap")]
    pub event_cap: u64,
}

impl ModelConfig {
    pub fn schedule(&self) -> Result<ObservationSchedule> {
        match self.spacing {
            Spacing::Linear => ObservationSchedule::linear(self.observations, self.final_time),
            Spacing::Geometric => {
                ObservationSchedule::geometric(self.observations, self.final_time, self.first_fraction)
            }
        }
        .map_err(|e| Error::validation("model.observations", e.to_string()))
    }

    pub fn build(&self) -> Result<Model> {
        Ok(match self.id {
            ModelId::Toy => Model::Toy { draws: self.draws, sorted: self.sorted },
            ModelId::Death => {
                Model::Death { a0: self.initial[0], schedule: self.schedule()?, event_cap: self.event_cap }
            }
            ModelId::Dimerization => Model::Dimerization {
                initial: [self.initial[0], self.initial[1], self.initial[2]],
                schedule: self.schedule()?,
                event_cap: self.event_cap,
            },
            ModelId::Diffusion => Model::Diffusion {
                voxels: self.voxels,
                per_voxel: self.per_voxel,
                schedule: self.schedule()?,
                event_cap: self.event_cap,
            },
        })
    }

    fn validate(&self) -> Result<()> {
        if self.event_cap == 0 {
            return Err(Error::validation("model.event_cap", "must be positive"));
        }
        match self.id {
            ModelId::Toy => {
                if self.draws == 0 {
                    return Err(Error::validation("model.draws", "must be at least 1"));
                }
                return Ok(());
            }
            ModelId::Death if self.initial.len() != 1 => {
                return Err(Error::validation("model.initial", "death process needs one initial count"));
            }
            ModelId::Dimerization if self.initial.len() != 3 => {
                return Err(Error::validation("model.initial", "dimerization needs three initial counts"));
            }
            ModelId::Diffusion if self.voxels < 2 || !self.voxels.is_multiple_of(2) => {
                return Err(Error::validation("model.voxels", "must be even and at least 2"));
            }
            _ => {}
        }
        if self.observations == 0 {
            return Err(Error::validation("model.observations", "must be at least 1"));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::validation("model.final_time", "must be positive and finite"));
        }
        if self.spacing == Spacing::Geometric && !(self.first_fraction > 0.0 && self.first_fraction < 1.0) {
            return Err(Error::validation("model.first_fraction", "must lie in (0, 1)"));
        }
        self.schedule().map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    pub k: usize,
    pub search: NeighbourSearch,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { k: 4, search: NeighbourSearch::Auto }
    }
}

impl EstimatorConfig {
    pub fn estimator(&self) -> Estimator {
        Estimator { k: self.k, exponent_dim: true, search: self.search }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    /// Posterior change needed to keep a summary in subset selection.
    pub subset_threshold: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { subset_threshold: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    /// Prior and resampled posterior points used by the Hellinger metric.
    pub n_ref: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { n_ref: 10_000 }
    }
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub seed: u64,
    /// Simulations per generation `N`.
    pub n_sims: usize,
    /// Proportion of candidates kept each generation.
    pub alpha_accept: f64,
    pub generations: usize,
    pub repeats: usize,
    /// Perturbation kernel standard deviation in log₁₀ units.
    pub proposal_sd: f64,
    /// Resample kept candidates by importance weight before estimating the
    /// adaptive objective.
    #[serde(default)]
    pub resample_posterior: bool,
    pub theta_star: Vec<f64>,
    /// Prior interval `[lo, hi]` per parameter, natural units.
    pub prior: Vec<[f64; 2]>,
    pub model: ModelConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub baselines: BaselineConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

const PRESETS: &[(&str, &str)] = &[
    ("toy", include_str!("../../presets/toy.toml")),
    ("death", include_str!("../../presets/death.toml")),
    ("dimerization", include_str!("../../presets/dimerization.toml")),
    ("diffusion", include_str!("../../presets/diffusion.toml")),
    ("toy-desk", include_str!("../../presets/toy-desk.toml")),
    ("death-desk", include_str!("../../presets/death-desk.toml")),
    ("dimerization-desk", include_str!("../../presets/dimerization-desk.toml")),
    ("diffusion-desk", include_str!("../../presets/diffusion-desk.toml")),
    ("toy-figure", include_str!("../../presets/toy-figure.toml")),
    ("death-figure", include_str!("../../presets/death-figure.toml")),
];

/// Experiment scale for the shipped presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Full,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(Error::validation("scale", format!("expected `desk` or `full`, got `{s}`"))),
        }
    }
}

impl ExperimentConfig {
    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    /// A shipped preset by name, e.g. `death` or `toy-desk`.
    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::validation("preset", format!("unknown preset `{name}`")))?;
        Self::from_toml(text)
    }

    pub fn preset_for(model: ModelId, scale: Scale) -> Result<Self> {
        match scale {
            Scale::Full => Self::preset(model.as_str()),
            Scale::Desk => Self::preset(&format!("{model}-desk")),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sims == 0 {
            return Err(Error::validation("n_sims", "must be at least 1"));
        }
        if !(self.alpha_accept > 0.0 && self.alpha_accept <= 1.0) {
            return Err(Error::validation("alpha_accept", "must lie in (0, 1]"));
        }
        if accepted_count(self.alpha_accept, self.n_sims).is_err() {
            return Err(Error::validation(
                "alpha_accept",
                format!("floor(alpha_accept * n_sims) = 0 for n_sims = {}", self.n_sims),
            ));
        }
        if self.generations == 0 {
            return Err(Error::validation("generations", "must be at least 1"));
        }
        if self.repeats == 0 {
            return Err(Error::validation("repeats", "must be at least 1"));
        }
        if !(self.proposal_sd > 0.0 && self.proposal_sd.is_finite()) {
            return Err(Error::validation("proposal_sd", "must be positive and finite"));
        }
        self.model.validate()?;
        let dim = self.model.build()?.param_dim();
        if self.prior.len() != dim {
            return Err(Error::validation(
                "prior",
                format!("{} intervals given, model has {dim} parameters", self.prior.len()),
            ));
        }
        for (i, [lo, hi]) in self.prior.iter().enumerate() {
            if !(*lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(Error::validation("prior", format!("interval {i} must satisfy 0 < lo < hi")));
            }
        }
        if self.theta_star.len() != dim {
            return Err(Error::validation(
                "theta_star",
                format!("{} values given, model has {dim} parameters", self.theta_star.len()),
            ));
        }
        if self.theta_star.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::validation("theta_star", "values must be finite and nonnegative"));
        }
        if self.estimator.k == 0 {
            return Err(Error::validation("estimator.k", "must be at least 1"));
        }
        if self.accepted()? <= self.estimator.k {
            return Err(Error::validation(
                "alpha_accept",
                format!("keeps {} particles, need more than k = {}", self.accepted()?, self.estimator.k),
            ));
        }
        self.optimizer.validate().map_err(|e| Error::validation("optimizer", e.to_string()))?;
        let t = self.baselines.subset_threshold;
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::validation("baselines.subset_threshold", "must lie in (0, 1)"));
        }
        if self.metrics.n_ref <= self.estimator.k {
            return Err(Error::validation("metrics.n_ref", "must exceed estimator.k"));
        }
        Ok(())
    }

    /// Particles kept per generation `M`.
    pub fn accepted(&self) -> Result<usize> {
        accepted_count(self.alpha_accept, self.n_sims)
    }

    pub fn model(&self) -> Result<Model> {
        self.model.build()
    }

    pub fn prior_spec(&self) -> Result<PriorSpec> {
        PriorSpec::new(self.prior.iter().map(|[lo, hi]| (*lo, *hi)).collect())
    }

    pub fn smc_settings(&self) -> Result<SmcSettings> {
        Ok(SmcSettings {
            n_sims: self.n_sims,
            alpha_accept: self.alpha_accept,
            generations: self.generations,
            kernel: KernelSpec::isotropic(self.prior.len(), self.proposal_sd)?,
            seed: self.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for name in ExperimentConfig::preset_names() {
            let cfg = ExperimentConfig::preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.model().unwrap().name(), cfg.model.id.as_str());
        }
    }

    #[test]
    fn death_preset_values() {
        let c = ExperimentConfig::preset("death").unwrap();
        assert_eq!(c.model.id, ModelId::Death);
        assert_eq!(c.model.observations, 32);
        assert_eq!(c.model.initial, vec![10]);
        assert_eq!(c.model.final_time, 20.0);
        assert_eq!(c.theta_star, vec![0.1, 0.01]);
        assert_eq!(c.n_sims, 500_000);
        assert_eq!(c.alpha_accept, 0.005);
        assert_eq!(c.repeats, 5);
        assert_eq!(c.proposal_sd, 0.25);
        assert_eq!(c.prior, vec![[1e-4, 1e4]; 2]);
    }

    #[test]
    fn round_trip() {
        for name in ExperimentConfig::preset_names() {
            let c = ExperimentConfig::preset(name).unwrap();
            let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
            assert_eq!(c, back);
        }
    }

    #[test]
    fn empty_acceptance_names_alpha() {
        let mut c = ExperimentConfig::preset("toy").unwrap();
        c.n_sims = 100;
        c.alpha_accept = 0.001;
        match c.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "alpha_accept"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = ExperimentConfig::preset("toy").unwrap().to_toml().unwrap();
        text.insert_str(0, "colour = \"blue\"\n");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::ConfigParse(_))));
    }
}
