//! TOML run configuration: what to evaluate, where the frozen world lives,
//! and how to reach the candidate and judge endpoints.
//!
//! All paths in the file are resolved relative to the directory holding the
//! config file itself, so a run directory can be moved or mounted anywhere
//! and still describe the same run.

use std::path::{Path, PathBuf};

use anchorbench::costmodel::PriceSheet;
use anchorbench::datamodel::{DecodingConfig, JudgeConfig, ModelRef};
use anchorbench::inference::EndpointProfile;
use anchorbench::judge::compare_prompt_id;
use anyhow::Context;
use serde::Deserialize;

/// Marker for errors that should exit with the configuration code (2)
/// instead of the runtime code (1).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Path to the item set JSON file.
    pub itemset: PathBuf,
    /// Path to the frozen anchor-set directory.
    pub baseset: PathBuf,
    /// Directory for run outputs: translations, plan, judgments, reports.
    pub workdir: PathBuf,
    /// Seed for pair slot assignment.
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub candidate: CandidateSection,
    pub judge: JudgeSection,
    #[serde(default)]
    pub endpoints: EndpointsSection,
    #[serde(default)]
    pub prices: PricesSection,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSection {
    /// Model identifier sent to the endpoint and written in reports.
    pub id: String,
    /// `"frozen"` marks a model whose translations are read from the anchor
    /// set instead of generated; anything else labels a live endpoint.
    #[serde(default = "default_candidate_endpoint")]
    pub endpoint: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_candidate_max_tokens")]
    pub max_output_tokens: u32,
}

fn default_candidate_endpoint() -> String {
    "candidate".into()
}

fn default_candidate_max_tokens() -> u32 {
    2048
}

impl CandidateSection {
    pub fn model_ref(&self) -> ModelRef {
        ModelRef {
            id: self.id.clone(),
            endpoint: self.endpoint.clone(),
            decoding: DecodingConfig {
                temperature: self.temperature,
                max_output_tokens: self.max_output_tokens,
                extra: Default::default(),
            },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgeSection {
    /// Judge model identifier.
    pub model: String,
    /// Must stay 0: judging is pinned deterministic.
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_judge_max_tokens")]
    pub max_output_tokens: u32,
    /// Re-asks for malformed judge output before recording a refusal.
    #[serde(default = "default_judge_retries")]
    pub max_retries: u32,
}

fn default_judge_max_tokens() -> u32 {
    4096
}

fn default_judge_retries() -> u32 {
    3
}

impl JudgeSection {
    pub fn judge_config(&self) -> JudgeConfig {
        let decoding = DecodingConfig {
            temperature: self.temperature,
            max_output_tokens: self.max_output_tokens,
            extra: Default::default(),
        };
        JudgeConfig {
            model: ModelRef {
                id: self.model.clone(),
                endpoint: "judge".into(),
                decoding: decoding.clone(),
            },
            prompt_id: compare_prompt_id().to_string(),
            decoding,
            max_retries: self.max_retries,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointsSection {
    #[serde(default)]
    pub candidate: EndpointProfile,
    #[serde(default)]
    pub judge: EndpointProfile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricesSection {
    #[serde(default = "default_input_price")]
    pub input_per_million: f64,
    #[serde(default = "default_output_price")]
    pub output_per_million: f64,
    #[serde(default = "default_currency")]
    pub currency: String,
}

fn default_input_price() -> f64 {
    PriceSheet::default().input_per_million
}

fn default_output_price() -> f64 {
    PriceSheet::default().output_per_million
}

fn default_currency() -> String {
    PriceSheet::default().currency
}

impl Default for PricesSection {
    fn default() -> Self {
        PricesSection {
            input_per_million: default_input_price(),
            output_per_million: default_output_price(),
            currency: default_currency(),
        }
    }
}

impl PricesSection {
    pub fn price_sheet(&self) -> PriceSheet {
        PriceSheet {
            input_per_million: self.input_per_million,
            output_per_million: self.output_per_million,
            currency: self.currency.clone(),
        }
    }
}

impl RunConfig {
    /// Load a run config, resolving every path against the config file's
    /// own directory and validating the judge settings.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config `{}`: {e}", path.display())))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| config_error(format!("invalid config `{}`: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.itemset = resolve(base, &config.itemset);
        config.baseset = resolve(base, &config.baseset);
        config.workdir = resolve(base, &config.workdir);
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.candidate.id.is_empty() {
            return Err(config_error("candidate.id must not be empty"));
        }
        if self.judge.model.is_empty() {
            return Err(config_error("judge.model must not be empty"));
        }
        self.judge
            .judge_config()
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        self.endpoints
            .candidate
            .validate()
            .and(self.endpoints.judge.validate())
            .map_err(|e| config_error(e.to_string()))?;
        let sheet = self.prices.price_sheet();
        sheet.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(())
    }

    pub fn translations_path(&self) -> PathBuf {
        self.workdir.join("translations.jsonl")
    }

    pub fn plan_path(&self) -> PathBuf {
        self.workdir.join("plan.json")
    }

    pub fn judgments_path(&self) -> PathBuf {
        self.workdir.join("judgments.jsonl")
    }

    /// Load the item set this run evaluates on.
    pub fn load_items(&self) -> anyhow::Result<anchorbench::datamodel::ItemSet> {
        anchorbench::datamodel::load_item_set(&self.itemset)
            .with_context(|| format!("loading item set `{}`", self.itemset.display()))
    }

    /// Load and validate the frozen anchor set.
    pub fn load_baseset(
        &self,
        items: &anchorbench::datamodel::ItemSet,
    ) -> anyhow::Result<anchorbench::datamodel::AnchorSet> {
        anchorbench::datamodel::load_anchor_set(&self.baseset, items)
            .with_context(|| format!("loading anchor set `{}`", self.baseset.display()))
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
