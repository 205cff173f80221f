//! Run-time configuration shared by the simulator, the map, the agent and the CLI.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config value `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Grid resolution in meters.
    pub cell_size: f64,
    pub feature_dim: usize,
    /// Horizontal (and vertical) field of view in degrees.
    pub fov: f64,
    /// Square observation side in pixels.
    pub image_size: usize,
    /// Depth sensor range in meters.
    pub max_range: f64,
    pub camera_height: f64,
    /// Translation per Forward, meters.
    pub step_size: f64,
    pub interaction_range: f64,
    /// Interactions at or below this distance fail as "too close".
    pub min_interaction_range: f64,
    /// Minimum frontier component area in cells.
    pub frontier_threshold: usize,
    /// Free cells within this Chebyshev distance of unknown space form the frontier band.
    pub frontier_band: i32,
    pub frontier_tokens: usize,
    /// Chebyshev radius (cells) of the map patch that frontier tokens are drawn from.
    pub token_radius: i32,
    pub softmax_temperature: f64,
    /// Temperature of the per-instance global/local fusion weights.
    pub fusion_temperature: f64,
    pub max_hl_steps: usize,
    pub max_step_retries: usize,
    pub max_commands_per_step: usize,
    pub max_ll_actions: usize,
    /// Motion commands executed before a path is replanned.
    pub replan_interval: usize,
    /// Cost multiplier for traversing unknown cells.
    pub unknown_cost: f64,
    pub adapter_timeout_secs: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            cell_size: 0.05,
            feature_dim: 64,
            fov: 90.0,
            image_size: 64,
            max_range: 5.0,
            camera_height: 1.5,
            step_size: 0.25,
            interaction_range: 1.5,
            min_interaction_range: 0.25,
            frontier_threshold: 150,
            frontier_band: 3,
            frontier_tokens: 32,
            token_radius: 10,
            softmax_temperature: 0.1,
            fusion_temperature: 1.0,
            max_hl_steps: 30,
            max_step_retries: 3,
            max_commands_per_step: 60,
            max_ll_actions: 2500,
            replan_interval: 5,
            unknown_cost: 1.5,
            adapter_timeout_secs: 30.0,
            seed: 0,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Canonical pretty JSON form (all fields, declaration order).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Cells advanced by one Forward.
    pub fn step_cells(&self) -> i32 {
        (self.step_size / self.cell_size).round() as i32
    }

    pub fn max_range_cells(&self) -> f64 {
        self.max_range / self.cell_size
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::Invalid { field, reason: format!("must be positive, got {v}") })
            }
        }
        positive("cell_size", self.cell_size)?;
        positive("fov", self.fov)?;
        positive("max_range", self.max_range)?;
        positive("camera_height", self.camera_height)?;
        positive("step_size", self.step_size)?;
        positive("interaction_range", self.interaction_range)?;
        positive("softmax_temperature", self.softmax_temperature)?;
        positive("fusion_temperature", self.fusion_temperature)?;
        positive("unknown_cost", self.unknown_cost)?;
        positive("adapter_timeout_secs", self.adapter_timeout_secs)?;
        if self.fov >= 180.0 {
            return Err(ConfigError::Invalid { field: "fov", reason: "must be below 180 degrees".into() });
        }
        if !(self.min_interaction_range >= 0.0 && self.min_interaction_range < self.interaction_range) {
            return Err(ConfigError::Invalid {
                field: "min_interaction_range",
                reason: "must lie in [0, interaction_range)".into(),
            });
        }
        if self.step_cells() < 1 {
            return Err(ConfigError::Invalid { field: "step_size", reason: "smaller than one cell".into() });
        }
        let counts = [
            ("feature_dim", self.feature_dim),
            ("image_size", self.image_size),
            ("frontier_threshold", self.frontier_threshold),
            ("frontier_tokens", self.frontier_tokens),
            ("max_hl_steps", self.max_hl_steps),
            ("max_commands_per_step", self.max_commands_per_step),
            ("max_ll_actions", self.max_ll_actions),
            ("replan_interval", self.replan_interval),
        ];
        for (field, v) in counts {
            if v < 1 {
                return Err(ConfigError::Invalid { field, reason: "must be at least 1".into() });
            }
        }
        if self.frontier_band < 1 {
            return Err(ConfigError::Invalid { field: "frontier_band", reason: "must be at least 1".into() });
        }
        if self.token_radius < 0 {
            return Err(ConfigError::Invalid { field: "token_radius", reason: "must be non-negative".into() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = Config::default();
        c.validate().unwrap();
        assert_eq!(c.step_cells(), 5);
        assert_eq!(c.max_hl_steps, 30);
        assert_eq!(c.frontier_threshold, 150);
    }

    #[test]
    fn partial_file_fills_defaults_and_round_trips() {
        let c = Config::from_json(r#"{"frontier_threshold": 70, "seed": 9}"#).unwrap();
        assert_eq!(c.frontier_threshold, 70);
        assert_eq!(c.cell_size, 0.05);
        let canon = c.to_json();
        assert_eq!(Config::from_json(&canon).unwrap().to_json(), canon);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(Config::from_json(r#"{"frontier_treshold": 70}"#).is_err());
        assert!(Config::from_json(r#"{"cell_size": -1.0}"#).is_err());
        assert!(Config::from_json(r#"{"frontier_threshold": 0}"#).is_err());
    }
}
