//! Declarative run configuration, its validation and its hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversarial::RewardConfig;
use crate::auxdisc::{RewardMode, DEFAULT_TREES};
use crate::data::LengthBounds;
use crate::neural::{AdamConfig, CriticDims, GeneratorDims};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub top_k: usize,
    pub n_trees: usize,
    pub cv_folds: usize,
    /// "product" or "threshold"
    pub mode: String,
    pub tau: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            top_k: 10,
            n_trees: DEFAULT_TREES,
            cv_folds: 5,
            mode: "product".into(),
            tau: 0.40,
        }
    }
}

impl ClassifierConfig {
    pub fn reward_mode(&self) -> Result<RewardMode, ConfigError> {
        match self.mode.as_str() {
            "product" => Ok(RewardMode::Product),
            "threshold" => Ok(RewardMode::Threshold { tau: self.tau }),
            other => Err(ConfigError::Invalid(format!("unknown auxiliary mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub emb: usize,
    pub hid: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig { emb: 32, hid: 128 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticConfig {
    pub emb: usize,
    pub windows: Vec<usize>,
    pub filters: usize,
    pub pad_to: usize,
    pub clip: f64,
    pub init_scale: f64,
}

impl Default for CriticConfig {
    fn default() -> Self {
        CriticConfig {
            emb: 32,
            windows: (1..=8).collect(),
            filters: 16,
            pad_to: 80,
            clip: 0.01,
            init_scale: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimConfig {
    pub mle_lr: f64,
    pub adversarial_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            mle_lr: 1e-3,
            adversarial_lr: 1e-4,
            critic_lr: 1e-4,
            batch_size: 64,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl OptimConfig {
    pub fn adam(&self, lr: f64) -> AdamConfig {
        AdamConfig {
            lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub mle_epochs: usize,
    pub adversarial_epochs: usize,
    pub critic_pretrain_steps: usize,
    pub g_steps: usize,
    pub d_steps: usize,
    /// batches per g/d pass; defaults to one pass over the dataset
    pub batches_per_epoch: Option<usize>,
    /// samples per class for the per-epoch metrics
    pub eval_samples: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            mle_epochs: 250,
            adversarial_epochs: 50,
            critic_pretrain_steps: 10,
            g_steps: 1,
            d_steps: 1,
            batches_per_epoch: None,
            eval_samples: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OversampleConfig {
    /// class name to boost; none disables oversampling
    pub class: Option<String>,
    pub factor: usize,
}

impl Default for OversampleConfig {
    fn default() -> Self {
        OversampleConfig { class: None, factor: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub seed: u64,
    pub dataset: String,
    pub output_dir: String,
    pub lengths: LengthBounds,
    pub classifier: ClassifierConfig,
    pub generator: GeneratorConfig,
    pub critic: CriticConfig,
    pub optim: OptimConfig,
    pub schedule: ScheduleConfig,
    pub reward: RewardConfig,
    pub oversample: OversampleConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            seed: 0,
            dataset: "data/synthetic.csv".into(),
            output_dir: "runs/default".into(),
            lengths: LengthBounds::default(),
            classifier: ClassifierConfig::default(),
            generator: GeneratorConfig::default(),
            critic: CriticConfig::default(),
            optim: OptimConfig::default(),
            schedule: ScheduleConfig::default(),
            reward: RewardConfig::default(),
            oversample: OversampleConfig::default(),
        }
    }
}

impl TrainingConfig {
    pub fn from_toml(text: &str) -> Result<TrainingConfig, ConfigError> {
        let cfg: TrainingConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<TrainingConfig, ConfigError> {
        TrainingConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        self.reward
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.reward.lambdas.len() > 2 {
            return bad("at most one auxiliary weight is supported");
        }
        if self.lengths.min == 0 || self.lengths.min > self.lengths.max {
            return bad("length bounds must satisfy 1 <= min <= max");
        }
        if self.generator.emb == 0 || self.generator.hid == 0 {
            return bad("generator dimensions must be positive");
        }
        if self.critic.emb == 0 || self.critic.filters == 0 || self.critic.windows.is_empty() || self.critic.pad_to == 0 {
            return bad("critic dimensions must be positive");
        }
        if self.critic.windows.contains(&0) {
            return bad("critic windows must be positive");
        }
        if self.critic.clip <= 0.0 {
            return bad("clip must be positive");
        }
        if self.optim.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if self.oversample.factor == 0 {
            return bad("oversampling factor must be at least 1");
        }
        if self.schedule.eval_samples == 0 {
            return bad("eval_samples must be positive");
        }
        self.classifier.reward_mode()?;
        Ok(())
    }

    /// SHA-256 over the serialized config with the output directory
    /// blanked, so relocating a run keeps its hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir.clear();
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn generator_dims(&self, vocab: usize) -> GeneratorDims {
        GeneratorDims {
            vocab,
            emb: self.generator.emb,
            hid: self.generator.hid,
        }
    }

    pub fn critic_dims(&self, vocab: usize, pad_token: usize) -> CriticDims {
        CriticDims {
            vocab,
            emb: self.critic.emb,
            windows: self.critic.windows.clone(),
            filters: self.critic.filters,
            pad_to: self.critic.pad_to,
            pad_token,
        }
    }
}
