//! Run configuration: a flat key-value file (TOML grammar) with tagged
//! sub-records for the distribution specs, overridable by CLI flags.
//! Unknown keys are rejected so typos cannot silently fall back to
//! defaults. Defaults reproduce the headline experiment: 100k nodes,
//! 20 initial nodes, batch sizes uniform on 1..=5, m=2, m2=6,
//! attractiveness uniform on [0,1], aging exponent 1/2.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attachment::SamplerStrategy;
use crate::engine::{ModelParams, StopRule};
use crate::stochastic::{AttractivenessSpec, BatchSizeSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Exact,
    Bucketed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub lambda: f64,
    pub m: u32,
    pub m2: u32,
    pub m0: u32,
    pub alpha: f64,
    /// Stop after the batch that reaches this many nodes (ignored when
    /// `max_time` is set).
    pub nodes: u64,
    pub max_time: Option<f64>,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub bucket_ratio: f64,
    pub batch: BatchSizeSpec,
    pub attractiveness: AttractivenessSpec,
    pub per_node_attractiveness: bool,
    /// Independent runs pooled by `compare` and `sweep-alpha`.
    pub replicas: u32,
    /// Aging exponents visited by `sweep-alpha`.
    pub alphas: Vec<f64>,
    pub snapshot_every_batches: Option<u64>,
    pub export_edge_list: bool,
    pub export_bipartite: bool,
    pub export_event_log: bool,
    /// Log-binning ratio for empirical densities.
    pub bin_ratio: f64,
    /// Evaluate and log the alternative characteristic-equation residual.
    pub variant_residual: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lambda: 1.0,
            m: 2,
            m2: 6,
            m0: 20,
            alpha: 0.5,
            nodes: 100_000,
            max_time: None,
            seed: 42,
            sampler: SamplerKind::Bucketed,
            bucket_ratio: 2.0,
            batch: BatchSizeSpec::UniformInt { lo: 1, hi: 5 },
            attractiveness: AttractivenessSpec::Uniform { lo: 0.0, hi: 1.0 },
            per_node_attractiveness: false,
            replicas: 3,
            alphas: vec![0.1, 0.5, 0.9, 1.0],
            snapshot_every_batches: None,
            export_edge_list: true,
            export_bipartite: false,
            export_event_log: false,
            bin_ratio: 1.25,
            variant_residual: false,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn strategy(&self) -> SamplerStrategy {
        match self.sampler {
            SamplerKind::Exact => SamplerStrategy::ExactScan,
            SamplerKind::Bucketed => SamplerStrategy::AgeBucketed {
                bucket_ratio: self.bucket_ratio,
            },
        }
    }

    /// Model parameters for replica `index` (replicas use consecutive
    /// seeds so a pool is reproducible from the base seed alone).
    pub fn model_params(&self, replica: u32) -> ModelParams {
        let stop = match self.max_time {
            Some(t) => StopRule::MaxTime(t),
            None => StopRule::TargetNodeCount(self.nodes),
        };
        ModelParams {
            lambda: self.lambda,
            m: self.m,
            m2: self.m2,
            m0: self.m0,
            alpha: self.alpha,
            batch: self.batch.clone(),
            attractiveness: self.attractiveness.clone(),
            stop,
            seed: self.seed.wrapping_add(u64::from(replica)),
            sampler: self.strategy(),
            per_node_attractiveness: self.per_node_attractiveness,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model_params(0)
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.replicas == 0 {
            return Err(ConfigError::Invalid("replicas must be at least 1".into()));
        }
        if !(self.bin_ratio > 1.0) {
            return Err(ConfigError::Invalid(format!(
                "bin_ratio must exceed 1, got {}",
                self.bin_ratio
            )));
        }
        if self.alphas.is_empty() {
            return Err(ConfigError::Invalid("alphas must be nonempty".into()));
        }
        if self.alphas.iter().any(|&a| !(a >= 0.0)) {
            return Err(ConfigError::Invalid(
                "sweep alphas must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_match_headline_experiment() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.nodes, 100_000);
        assert_eq!(cfg.m0, 20);
        assert_eq!(cfg.m, 2);
        assert_eq!(cfg.m2, 6);
        assert_eq!(cfg.alpha, 0.5);
        assert_eq!(cfg.batch, BatchSizeSpec::UniformInt { lo: 1, hi: 5 });
        assert_eq!(
            cfg.attractiveness,
            AttractivenessSpec::Uniform { lo: 0.0, hi: 1.0 }
        );
    }

    #[test]
    fn parses_tagged_sub_records() {
        let cfg = RunConfig::from_toml(
            r#"
                nodes = 5000
                seed = 7
                sampler = "exact"
                batch = { kind = "uniform_int", lo = 1, hi = 5 }
                attractiveness = { kind = "exponential", rate = 2.0 }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.nodes, 5000);
        assert_eq!(cfg.sampler, SamplerKind::Exact);
        assert_eq!(
            cfg.attractiveness,
            AttractivenessSpec::Exponential { rate: 2.0 }
        );
        // untouched keys keep their defaults
        assert_eq!(cfg.m2, 6);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml("nodez = 10").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        let err = RunConfig::from_toml("batch = { kind = \"uniform_int\", low = 1, hi = 5 }")
            .unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn invalid_model_is_caught() {
        let cfg = RunConfig {
            m2: 0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            m0: 5, // m * m2 = 12 > 5
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn replica_seeds_are_consecutive() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.model_params(0).seed, 42);
        assert_eq!(cfg.model_params(2).seed, 44);
    }
}
