//! Pipeline configuration: one document aggregating every tunable, each
//! with a default. TOML or JSON, chosen by file extension.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::association::{MatchingStrategy, SimilarityThresholds, SimilarityWeights};
use crate::clustering::ClusteringParams;
use crate::error::{invalid, Result};
use crate::tracking::{KfConfig, LifecycleConfig, ScoreMode, TrackerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EgoConfig {
    /// Moving/static threshold on the compensated radial velocity, m/s.
    pub delta_v: f64,
    pub compensate_before_association: bool,
}

impl Default for EgoConfig {
    fn default() -> Self {
        Self {
            delta_v: 0.5,
            compensate_before_association: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Largest centroid distance for a detection to count as a match, m.
    pub match_dist: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { match_dist: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub clustering: ClusteringParams,
    pub weights: SimilarityWeights,
    pub thresholds: SimilarityThresholds,
    pub matching: MatchingStrategy,
    pub kf: KfConfig,
    pub lifecycle: LifecycleConfig,
    pub ego: EgoConfig,
    pub eval: EvalConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.clustering.validate()?;
        self.weights.validate()?;
        self.thresholds.validate()?;
        self.kf.validate()?;
        self.lifecycle.validate()?;
        if !(self.ego.delta_v > 0.0) {
            return Err(invalid("ego.delta_v", "must be > 0"));
        }
        if !(self.eval.match_dist > 0.0) {
            return Err(invalid("eval.match_dist", "must be > 0"));
        }
        Ok(())
    }

    pub fn tracker_config(&self, score: ScoreMode) -> TrackerConfig {
        TrackerConfig {
            kf: self.kf.clone(),
            lifecycle: self.lifecycle.clone(),
            weights: self.weights,
            thresholds: self.thresholds,
            matching: self.matching,
            score,
            delta_v: self.ego.delta_v,
            compensate_before_association: self.ego.compensate_before_association,
        }
    }
}

/// Reads a structured document, TOML unless the extension is `.json`.
pub fn load_document<T: DeserializeOwned>(path: &Path) -> std::result::Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_document(
        &text,
        path.extension().and_then(|e| e.to_str()) == Some("json"),
    )
    .map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_document<T: DeserializeOwned>(
    text: &str,
    json: bool,
) -> std::result::Result<T, String> {
    if json {
        serde_json::from_str(text).map_err(|e| e.to_string())
    } else {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}
