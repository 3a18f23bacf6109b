//! Fixed-cardinality tracker: one time update and one measurement update
//! per frame.

use serde::{Deserialize, Serialize};

use crate::association::MeasurementFrame;
use crate::error::{Error, Result};
use crate::model::{predict, GgiwState, MotionModel, MotionParams};
use crate::update::{vb_measurement_update, VbConfig, COAST_THRESHOLD};

/// Filter tunables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub motion: MotionParams,
    pub update: VbConfig,
    /// Expected clutter count per frame assumed by the filter.
    pub clutter_rate: f64,
    /// Area of the surveillance region (m²).
    pub surveillance_volume: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            motion: MotionParams::default(),
            update: VbConfig::default(),
            clutter_rate: 25.0,
            surveillance_volume: 700.0 * 640.0,
        }
    }
}

impl TrackerConfig {
    /// Clutter factor `ρ·λ_c` of the event weights, with `ρ = λ_c / S_V`.
    pub fn clutter_intensity(&self) -> f64 {
        self.clutter_rate * self.clutter_rate / self.surveillance_volume
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clutter_rate >= 0.0 && self.clutter_rate.is_finite()) {
            return Err(Error::Config("clutter rate must be non-negative".into()));
        }
        if !(self.surveillance_volume > 0.0) {
            return Err(Error::Config("surveillance volume must be positive".into()));
        }
        self.update.validate()?;
        MotionModel::from_params(&self.motion)?;
        Ok(())
    }
}

/// What happened during one [`Tracker::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub n_events: usize,
    /// Expected number of measurements assigned to each target.
    pub expected_counts: Vec<f64>,
}

impl StepReport {
    /// Targets that received (almost) no measurements.
    pub fn coasting(&self) -> usize {
        self.expected_counts.iter().filter(|c| **c < COAST_THRESHOLD).count()
    }
}

#[derive(Debug, Clone)]
pub struct Tracker {
    model: MotionModel,
    config: TrackerConfig,
    states: Vec<GgiwState>,
}

impl Tracker {
    pub fn new(config: TrackerConfig, initial: Vec<GgiwState>) -> Result<Self> {
        config.validate()?;
        if initial.is_empty() {
            return Err(Error::Config("tracker needs at least one initial state".into()));
        }
        for s in &initial {
            s.validate().map_err(|e| Error::Config(format!("initial state: {e}")))?;
        }
        let model = MotionModel::from_params(&config.motion)?;
        Ok(Self { model, config, states: initial })
    }

    pub fn states(&self) -> &[GgiwState] {
        &self.states
    }

    pub fn model(&self) -> &MotionModel {
        &self.model
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Advances all targets by one scan. On error the states are left
    /// as they were.
    pub fn step(&mut self, frame: &MeasurementFrame) -> Result<StepReport> {
        let predicted = self
            .states
            .iter()
            .map(|s| predict(s, &self.model))
            .collect::<Result<Vec<_>>>()?;
        let out = vb_measurement_update(
            &predicted,
            frame,
            &self.config.update,
            &self.model,
            self.config.clutter_intensity(),
        )?;
        self.states = out.states;
        Ok(StepReport { n_events: out.n_events, expected_counts: out.association.expected_counts() })
    }
}
