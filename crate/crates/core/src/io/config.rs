//! Declarative experiment description, loaded from TOML.
//!
//! Every key is addressable as `section.key` (or just `key` at the top
//! level) through [`ExperimentConfig::set`], which is how command-line
//! flags override file values.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contrastive::{CriticKind, LossConfig, Pairing, ScheduleKind};
use crate::embedding::{DissimilarityMetric, MdsConfig, MdsInit};
use crate::error::{Error, Result};
use crate::metrics::{AmdConfig, SsimConfig};
use crate::registration::{RansacConfig, SiftConfig};
use crate::toy::{DatasetConfig, EncoderShape, OptimizerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleName {
    #[default]
    Baseline,
    Alternating,
    Summed,
    Pretraining,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSection {
    pub kind: ScheduleName,
    pub alternating_weight: f64,
    pub summed_alpha: f64,
    pub pretrain_split_epoch: usize,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        ScheduleSection {
            kind: ScheduleName::Baseline,
            alternating_weight: 1.0,
            summed_alpha: 0.5,
            pretrain_split_epoch: 50,
        }
    }
}

impl ScheduleSection {
    pub fn schedule(&self) -> ScheduleKind {
        match self.kind {
            ScheduleName::Baseline => ScheduleKind::Baseline,
            ScheduleName::Alternating => ScheduleKind::Alternating {
                weight: self.alternating_weight,
            },
            ScheduleName::Summed => ScheduleKind::Summed {
                alpha: self.summed_alpha,
            },
            ScheduleName::Pretraining => ScheduleKind::Pretraining {
                split_epoch: self.pretrain_split_epoch,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossSection {
    pub critic_final: CriticKind,
    pub critic_bn: CriticKind,
    pub tau_final: f64,
    pub tau_bn: f64,
    pub pairing: Pairing,
}

impl Default for LossSection {
    fn default() -> Self {
        LossSection {
            critic_final: CriticKind::GaussianL2,
            critic_bn: CriticKind::GaussianL2,
            tau_final: 0.5,
            tau_bn: 0.5,
            pairing: Pairing::CrossPair,
        }
    }
}

impl LossSection {
    pub fn final_loss(&self) -> Result<LossConfig> {
        LossConfig::new(self.critic_final, self.tau_final, self.pairing)
    }

    pub fn bn_loss(&self) -> Result<LossConfig> {
        LossConfig::new(self.critic_bn, self.tau_bn, self.pairing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegistrationSection {
    pub n_pairs: usize,
    pub max_rotation_deg: f64,
    pub max_translation_px: f64,
    /// Success threshold on the corner error, in pixels.
    pub threshold_px: f64,
    /// When set, overrides `threshold_px` with this fraction of `max(W, H)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_fraction: Option<f64>,
    /// Side of the generated textured source when no image is given.
    pub texture_size: usize,
    pub seed: u64,
}

impl Default for RegistrationSection {
    fn default() -> Self {
        RegistrationSection {
            n_pairs: 50,
            max_rotation_deg: 30.0,
            max_translation_px: 100.0,
            threshold_px: 100.0,
            threshold_fraction: None,
            texture_size: 834,
            seed: 0,
        }
    }
}

impl RegistrationSection {
    pub fn threshold_for(&self, width: usize, height: usize) -> f64 {
        match self.threshold_fraction {
            Some(f) => crate::registration::threshold_from_fraction(f, width, height),
            None => self.threshold_px,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Mse,
    Correlation,
    Ssim,
    AlphaAmd,
}

impl MetricName {
    pub const ALL: [MetricName; 4] = [
        MetricName::Mse,
        MetricName::Correlation,
        MetricName::Ssim,
        MetricName::AlphaAmd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricName::Mse => "mse",
            MetricName::Correlation => "correlation",
            MetricName::Ssim => "ssim",
            MetricName::AlphaAmd => "alpha_amd",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricName::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown metric '{s}' (expected mse, correlation, ssim or alpha_amd)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub selection: Vec<MetricName>,
    /// Fixed α in pixels; by default it scales with the image size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amd_alpha: Option<f64>,
    pub amd_levels: usize,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection {
            selection: MetricName::ALL.to_vec(),
            amd_alpha: None,
            amd_levels: 8,
        }
    }
}

impl MetricsSection {
    pub fn amd_for(&self, width: usize, height: usize) -> AmdConfig {
        let mut cfg = AmdConfig::for_size(width, height);
        cfg.levels = self.amd_levels;
        if let Some(a) = self.amd_alpha {
            cfg.alpha = a;
        }
        cfg
    }

    pub fn selected(&self, m: MetricName) -> bool {
        self.selection.contains(&m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MdsSection {
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub init: MdsInit,
    pub dissimilarity: DissimilarityMetric,
}

impl Default for MdsSection {
    fn default() -> Self {
        let m = MdsConfig::default();
        MdsSection {
            max_iters: m.max_iters,
            tol: m.tol,
            seed: m.seed,
            init: m.init,
            dissimilarity: DissimilarityMetric::Mse,
        }
    }
}

impl MdsSection {
    pub fn solver(&self) -> MdsConfig {
        MdsConfig {
            max_iters: self.max_iters,
            tol: self.tol,
            seed: self.seed,
            init: self.init,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    /// Relative cut-off for counting collapsed dimensions.
    pub epsilon: f64,
    /// Divide the reported values by the largest one.
    pub normalize: bool,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            epsilon: crate::embedding::DEFAULT_COLLAPSE_EPSILON,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    pub dataset: DatasetConfig,
    pub encoder: EncoderShape,
    pub schedule: ScheduleSection,
    pub loss: LossSection,
    pub optimizer: OptimizerConfig,
    pub registration: RegistrationSection,
    pub sift: SiftConfig,
    pub ransac: RansacConfig,
    pub metrics: MetricsSection,
    pub ssim: SsimConfig,
    pub mds: MdsSection,
    pub spectrum: SpectrumSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            output_dir: PathBuf::from("comir-out"),
            dataset: DatasetConfig::default(),
            encoder: EncoderShape::default(),
            schedule: ScheduleSection::default(),
            loss: LossSection::default(),
            optimizer: OptimizerConfig::default(),
            registration: RegistrationSection::default(),
            sift: SiftConfig::default(),
            ransac: RansacConfig::default(),
            metrics: MetricsSection::default(),
            ssim: SsimConfig::default(),
            mds: MdsSection::default(),
            spectrum: SpectrumSection::default(),
        }
    }
}

fn config_err(e: impl fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(config_err)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config always serializes")
    }

    /// Every settable key, as `section.key` or a bare top-level key.
    pub fn keys() -> Vec<String> {
        let mut full = ExperimentConfig::default();
        full.registration.threshold_fraction = Some(0.0);
        full.metrics.amd_alpha = Some(0.0);
        let value = toml::Value::try_from(&full).expect("config always serializes");
        let mut keys = Vec::new();
        for (k, v) in value.as_table().expect("table") {
            match v.as_table() {
                Some(section) => keys.extend(section.keys().map(|sub| format!("{k}.{sub}"))),
                None => keys.push(k.clone()),
            }
        }
        keys
    }

    /// Overrides one key from its textual value. List-valued keys take a
    /// comma-separated list.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        if !Self::keys().iter().any(|k| k == key) {
            return Err(Error::Config(format!("unknown config key '{key}'")));
        }
        let mut root = toml::Value::try_from(&*self).map_err(config_err)?;
        let table = root.as_table_mut().expect("table");
        let (parent, leaf) = match key.split_once('.') {
            Some((section, leaf)) => (
                table
                    .get_mut(section)
                    .and_then(|s| s.as_table_mut())
                    .expect("section"),
                leaf,
            ),
            None => (table, key),
        };
        let parsed = match parent.get(leaf) {
            Some(toml::Value::Integer(_)) => raw
                .trim()
                .parse::<i64>()
                .map(toml::Value::Integer)
                .map_err(config_err),
            Some(toml::Value::Float(_)) => raw
                .trim()
                .parse::<f64>()
                .map(toml::Value::Float)
                .map_err(config_err),
            Some(toml::Value::Boolean(_)) => raw
                .trim()
                .parse::<bool>()
                .map(toml::Value::Boolean)
                .map_err(config_err),
            Some(toml::Value::Array(_)) => Ok(toml::Value::Array(
                raw.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| toml::Value::String(s.to_string()))
                    .collect(),
            )),
            Some(_) => Ok(toml::Value::String(raw.to_string())),
            // Unset optional keys are all reals.
            None => raw
                .trim()
                .parse::<f64>()
                .map(toml::Value::Float)
                .map_err(config_err),
        }
        .map_err(|e| Error::Config(format!("{key}: {e}")))?;
        parent.insert(leaf.to_string(), parsed);
        *self = root
            .try_into()
            .map_err(|e| Error::Config(format!("{key}: {e}")))?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        self.loss.final_loss()?;
        self.loss.bn_loss()?;
        self.schedule.schedule().validate(self.optimizer.epochs)?;
        self.sift.validate()?;
        self.ransac.validate()?;
        self.ssim.validate()?;
        if self.metrics.amd_levels == 0
            || self
                .metrics
                .amd_alpha
                .is_some_and(|a| !(a > 0.0 && a.is_finite()))
        {
            return Err(Error::Config(
                "alpha-AMD needs levels >= 1 and a positive alpha".into(),
            ));
        }
        let r = &self.registration;
        if !(r.max_rotation_deg >= 0.0 && r.max_translation_px >= 0.0 && r.threshold_px > 0.0) {
            return Err(Error::Config(
                "registration bounds must be >= 0 and the threshold > 0".into(),
            ));
        }
        if r.threshold_fraction
            .is_some_and(|f| !(f > 0.0 && f.is_finite()))
        {
            return Err(Error::Config(
                "registration threshold fraction must be positive".into(),
            ));
        }
        if !(self.mds.tol >= 0.0) || !(self.spectrum.epsilon >= 0.0) {
            return Err(Error::Config("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}
