use std::path::{Path, PathBuf};

use critnode::baselines::BaselineKind;
use critnode::engine::EvolutionConfig;
use critnode::variation::LlmEndpointConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a run needs. Read from `--config`, then overridden by flags,
/// then written back out as `config.json` with all defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub graph: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub evolution: EvolutionConfig,
    pub llm: LlmEndpointConfig,
    /// Directory with `crossover.txt`, `mutation.txt` and `format.txt`
    /// replacing the built-in prompt templates.
    pub templates_dir: Option<PathBuf>,
    pub baselines: Vec<BaselineKind>,
    /// Seeds averaged over for randomized baselines.
    pub baseline_seeds: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            graph: None,
            output_dir: PathBuf::from("critnode-run"),
            evolution: EvolutionConfig::default(),
            llm: LlmEndpointConfig::default(),
            templates_dir: None,
            baselines: BaselineKind::ALL.to_vec(),
            baseline_seeds: 10,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.evolution.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        self.llm.validate().map_err(CliError::Usage)?;
        if self.baseline_seeds == 0 {
            return Err(CliError::Usage("baseline_seeds must be at least 1".into()));
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self).expect("config serializes");
        crate::write_file(&dir.join("config.json"), json + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"evolution": {"epochs": 5, "bogus": 1}}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<RunConfig>(r#"{"grpah": "x.txt"}"#);
        assert!(err.is_err());
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"evolution": {"epochs": 5}}"#).unwrap();
        assert_eq!(cfg.evolution.epochs, 5);
        assert_eq!(cfg.evolution.mutation_rate, 0.3);
        assert_eq!(cfg.llm.temperature_mutation, 1.5);
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::default();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), cfg);
    }
}
