use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::metrics::Algorithm;
use crate::preferences::{ProposalOrder, PuUtilityFn};
use crate::scenario::ScenarioConfig;
use crate::{Error, Result};

use super::TrialOptions;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityChoice {
    /// `1 - e^{-v}`.
    #[default]
    SaturatingExp,
    Identity,
}

impl UtilityChoice {
    pub fn to_fn(self) -> PuUtilityFn<f64> {
        match self {
            UtilityChoice::SaturatingExp => PuUtilityFn::SaturatingExp,
            UtilityChoice::Identity => PuUtilityFn::Identity,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A full experiment. Scenario keys sit at the top level of the config
/// file next to the sweep keys; anything left out keeps its default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub scenario: ScenarioConfig<f64>,
    pub m_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub trials: u64,
    pub algorithms: Vec<Algorithm>,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub verify_stability: bool,
    pub pu_utility: UtilityChoice,
    pub proposal_order: ProposalOrder,
    /// Worker threads; `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            m_values: (2..=10).collect(),
            n_values: vec![3, 4],
            trials: 100_000,
            algorithms: Algorithm::ALL.to_vec(),
            output_path: None,
            format: OutputFormat::Csv,
            verify_stability: false,
            pu_utility: UtilityChoice::SaturatingExp,
            proposal_order: ProposalOrder::Detection,
            threads: None,
        }
    }
}

impl SweepConfig {
    /// Reads `key = value` text (TOML), or JSON when the extension is `.json`.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Ok(serde_json::from_str(&text)?)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn base_seed(&self) -> u64 {
        self.scenario.rng_seed
    }

    pub fn trial_options(&self) -> TrialOptions {
        TrialOptions {
            algorithms: self.algorithms.clone(),
            pu_utility: self.pu_utility,
            proposal_order: self.proposal_order,
            verify_stability: self.verify_stability,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.m_values.is_empty() || self.n_values.is_empty() {
            return Err(Error::Config("m_values and n_values must be nonempty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        for &n in &self.n_values {
            for &m in &self.m_values {
                self.scenario.clone().with_size(m, n).validate()?;
            }
        }
        Ok(())
    }
}
