use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat4, Vec4};
use crate::model::{mat2_from_rows, GgiwState, MotionParams};
use crate::sim::{GroundTruthTrack, ScenarioConfig};
use crate::tracker::TrackerConfig;
use crate::update::VbConfig;

/// Prior of every track at scan 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialParams {
    /// Kinematic means `(px, py, vx, vy)` per target; `None` starts each
    /// track at its true initial position and velocity.
    pub means: Option<Vec<[f64; 4]>>,
    pub cov_diag: [f64; 4],
    pub dof: f64,
    /// Inverse-Wishart scale, row-major.
    pub scale: [[f64; 2]; 2],
    pub gamma_shape: f64,
    pub gamma_rate: f64,
}

impl Default for InitialParams {
    fn default() -> Self {
        Self {
            means: None,
            cov_diag: [25.0, 25.0, 4.0, 4.0],
            dof: 10.0,
            scale: [[50.0, 0.0], [0.0, 50.0]],
            gamma_shape: 80.0,
            gamma_rate: 1.0,
        }
    }
}

impl InitialParams {
    pub fn states(&self, truth: &[GroundTruthTrack]) -> Result<Vec<GgiwState>> {
        if let Some(means) = &self.means {
            if means.len() != truth.len() {
                return Err(Error::Config(format!(
                    "{} initial means for {} targets",
                    means.len(),
                    truth.len()
                )));
            }
        }
        let c = self.cov_diag;
        let states: Vec<GgiwState> = truth
            .iter()
            .enumerate()
            .map(|(n, t)| GgiwState {
                mean: match &self.means {
                    Some(m) => Vec4::from(m[n]),
                    None => Vec4::new(t.initial_position.x, t.initial_position.y, t.velocity.x, t.velocity.y),
                },
                cov: Mat4::from_diagonal(&Vec4::new(c[0], c[1], c[2], c[3])),
                dof: self.dof,
                scale: mat2_from_rows(&self.scale),
                gamma_shape: self.gamma_shape,
                gamma_rate: self.gamma_rate,
            })
            .collect();
        for s in &states {
            s.validate().map_err(|e| Error::Config(format!("initial state: {e}")))?;
        }
        Ok(states)
    }
}

/// Filter settings of an experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerSettings {
    pub motion: MotionParams,
    pub update: VbConfig,
    pub initial: InitialParams,
    /// Clutter rate assumed by the filter; `None` uses the scenario's.
    pub clutter_rate: Option<f64>,
}

impl TrackerSettings {
    /// Tracker configuration for `scenario`; the surveillance volume is
    /// the scenario's region.
    pub fn tracker_config(&self, scenario: &ScenarioConfig) -> TrackerConfig {
        TrackerConfig {
            motion: self.motion.clone(),
            update: self.update.clone(),
            clutter_rate: self.clutter_rate.unwrap_or(scenario.lambda_c),
            surveillance_volume: scenario.region.area(),
        }
    }
}

/// A complete Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub tracker: TrackerSettings,
    pub mc_runs: usize,
    /// Worker threads for the runs; 0 uses every core.
    pub workers: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            tracker: TrackerSettings::default(),
            mc_runs: 25,
            workers: 0,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mc_runs == 0 {
            return Err(Error::Config("mc_runs must be at least 1".into()));
        }
        self.scenario.validate()?;
        self.tracker.tracker_config(&self.scenario).validate()?;
        if let Some(m) = &self.tracker.initial.means {
            if m.len() != self.scenario.targets.len() {
                return Err(Error::Config("one initial mean per target required".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::generate_truth;

    #[test]
    fn defaults_round_trip_through_json() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"mc_runs": 3, "scenario": {"lambda_c": 5}}"#).unwrap();
        assert_eq!(cfg.mc_runs, 3);
        assert_eq!(cfg.scenario.lambda_c, 5.0);
        assert_eq!(cfg.scenario.lambda_t, 20.0);
    }

    #[test]
    fn bad_json_is_a_config_error() {
        for text in [r#"{"mc_runs": 0}"#, r#"{"unknown": 1}"#, "not json", r#"{"tracker": {"update": {"n_vb": 0}}}"#] {
            assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn initial_states_follow_truth() {
        let scenario = ScenarioConfig::default();
        let truth = generate_truth(&scenario).unwrap();
        let states = InitialParams::default().states(&truth).unwrap();
        assert_eq!(states[1].mean, Vec4::new(0.0, 300.0, 11.0, -7.7));
        assert_eq!(states[0].rate_mean().unwrap(), 80.0);
        assert_eq!(states[0].extent_mean().unwrap(), crate::linalg::Mat2::identity() * 12.5);
    }
}
