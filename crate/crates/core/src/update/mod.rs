//! Variational measurement update: coordinate ascent over the association
//! weights, kinematics, extent and measurement rate of every target.

mod steps;

pub use steps::{update_extent, update_kinematic, update_rate, AssociationStatistics, COAST_THRESHOLD};

use serde::{Deserialize, Serialize};

use crate::association::{
    cluster_partitions, enumerate_all_events, gate, AssignmentScores, ClusterParams, JointAssociationEvent,
    MeasurementFrame, PredictedMeasurement, DEFAULT_ENUMERATION_CAP,
};
use crate::error::{domain, Error, Result};
use crate::linalg::log_sum_exp;
use crate::model::{distortion_matrix, GgiwState, MotionModel};

/// How association events are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Every assignment of every measurement.
    FullEnumeration,
    /// Gating, then DBSCAN clusters assigned as a whole.
    ClusterPruned,
    /// Per-measurement marginal association probabilities.
    Marginal,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::FullEnumeration, Scheme::ClusterPruned, Scheme::Marginal];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::FullEnumeration => "full_enumeration",
            Scheme::ClusterPruned => "cluster_pruned",
            Scheme::Marginal => "marginal",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s || k.name().replace('_', "-") == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

/// Settings of the measurement update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VbConfig {
    /// Fixed number of coordinate-ascent iterations.
    pub n_vb: usize,
    pub scheme: Scheme,
    /// Gate size `g` in Mahalanobis units.
    pub gate_threshold: f64,
    pub cluster: ClusterParams,
    /// Largest event set the full scheme may enumerate.
    pub enumeration_cap: usize,
}

impl Default for VbConfig {
    fn default() -> Self {
        Self {
            n_vb: 10,
            scheme: Scheme::ClusterPruned,
            gate_threshold: 9.21f64.sqrt(),
            cluster: ClusterParams::default(),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl VbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_vb == 0 {
            return Err(Error::Config("n_vb must be at least 1".into()));
        }
        if !(self.gate_threshold > 0.0) {
            return Err(Error::Config("gate threshold must be positive".into()));
        }
        self.cluster.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

/// Probability `ε[n][j]` that measurement `j` stems from target `n`
/// (0-based); the remainder of each column is the clutter share.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalAssociation {
    pub eps: Vec<Vec<f64>>,
}

impl MarginalAssociation {
    pub fn zeros(n_targets: usize, n_measurements: usize) -> Self {
        Self { eps: vec![vec![0.0; n_measurements]; n_targets] }
    }

    /// Expected number of measurements per target.
    pub fn expected_counts(&self) -> Vec<f64> {
        self.eps.iter().map(|row| row.iter().sum()).collect()
    }
}

/// `ε_{nj} = E[λₙ]·N(yⱼ; H·mₙ, Sₙ) / (Σᵢ E[λᵢ]·N(yⱼ; H·mᵢ, Sᵢ) + ρ·λ_c)`,
/// evaluated in the log domain. `clutter_intensity` is `ρ·λ_c`.
pub fn marginal_probabilities(
    frame: &MeasurementFrame,
    targets: &[PredictedMeasurement],
    rate_means: &[f64],
    clutter_intensity: f64,
) -> Result<MarginalAssociation> {
    let scores = AssignmentScores::new(frame, targets, rate_means, clutter_intensity)?;
    let mut out = MarginalAssociation::zeros(targets.len(), frame.len());
    let mut column = vec![0.0; targets.len() + 1];
    for j in 0..frame.len() {
        column.copy_from_slice(scores.row(j));
        let lse = log_sum_exp(column.iter().copied());
        if lse.is_finite() {
            for n in 0..targets.len() {
                out.eps[n][j] = (column[n + 1] - lse).exp();
            }
        }
    }
    Ok(out)
}

/// Per-measurement association probabilities implied by a normalized
/// event set over a frame of `n_measurements` points.
pub fn event_marginals(events: &[JointAssociationEvent], n_targets: usize, n_measurements: usize) -> MarginalAssociation {
    let width = n_targets + 1;
    let mut acc = vec![0.0; n_measurements * width];
    for e in events {
        let w = e.normalized_weight;
        for (row, &a) in acc.chunks_exact_mut(width).zip(&e.assignment) {
            row[a as usize] += w;
        }
    }
    MarginalAssociation {
        eps: (1..width).map(|n| acc.chunks_exact(width).map(|row| row[n]).collect()).collect(),
    }
}

/// Result of one measurement update.
#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub states: Vec<GgiwState>,
    /// Association probabilities of the last iteration.
    pub association: MarginalAssociation,
    /// Size of the event set (0 for the marginal scheme).
    pub n_events: usize,
}

/// Quantities fixed for the whole update: predicted states, their
/// distortion matrices and predicted measurement densities.
struct Prior {
    states: Vec<GgiwState>,
    distortions: Vec<crate::linalg::Mat2>,
    predicted: Vec<PredictedMeasurement>,
}

impl Prior {
    fn new(states: &[GgiwState], model: &MotionModel) -> Result<Self> {
        if states.is_empty() {
            return Err(domain("measurement update needs at least one target"));
        }
        let mut distortions = Vec::with_capacity(states.len());
        let mut predicted = Vec::with_capacity(states.len());
        for s in states {
            s.validate()?;
            let extent = s.extent_mean()?;
            let d = distortion_matrix(&extent, model)?;
            predicted.push(PredictedMeasurement::new(&s.mean, &s.cov, &d, &extent, &model.measurement)?);
            distortions.push(d);
        }
        Ok(Self { states: states.to_vec(), distortions, predicted })
    }

    /// Predicted densities moved to the current kinematic means.
    fn current_targets(&self, current: &[GgiwState], model: &MotionModel) -> Vec<PredictedMeasurement> {
        self.predicted
            .iter()
            .zip(current)
            .map(|(p, s)| p.recentered(model.measurement * s.mean))
            .collect()
    }
}

/// A fixed event set over a subset of the frame, reweighted every
/// iteration.
struct EventSet {
    events: Vec<JointAssociationEvent>,
    /// Frame index of each position in the event assignments.
    indices: Vec<usize>,
}

/// Measurement update with the scheme selected in `config`.
///
/// `clutter_intensity` is the clutter factor `ρ·λ_c` of the event weights.
pub fn vb_measurement_update(
    predicted: &[GgiwState],
    frame: &MeasurementFrame,
    config: &VbConfig,
    model: &MotionModel,
    clutter_intensity: f64,
) -> Result<UpdateOutcome> {
    config.validate()?;
    frame.validate()?;
    let prior = Prior::new(predicted, model)?;
    let n = predicted.len();
    let set = match config.scheme {
        Scheme::Marginal => None,
        Scheme::FullEnumeration => Some(EventSet {
            events: enumerate_all_events(frame.len(), n, config.enumeration_cap)?,
            indices: (0..frame.len()).collect(),
        }),
        Scheme::ClusterPruned => {
            let gating = gate(frame, &prior.predicted, config.gate_threshold);
            let indices = gating.gated_indices();
            let sub = frame.subset(&indices);
            let sub_gating = gate(&sub, &prior.predicted, config.gate_threshold);
            let rates = rate_means(&prior.states)?;
            let scores = AssignmentScores::new(&sub, &prior.predicted, &rates, clutter_intensity)?;
            let events = cluster_partitions(&sub, &sub_gating, &config.cluster, &scores)?;
            Some(EventSet { events, indices })
        }
    };
    iterate(prior, frame, config.n_vb, model, clutter_intensity, set)
}

/// Measurement update with per-measurement marginal association
/// probabilities instead of an event set.
pub fn marginal_measurement_update(
    predicted: &[GgiwState],
    frame: &MeasurementFrame,
    config: &VbConfig,
    model: &MotionModel,
    clutter_intensity: f64,
) -> Result<UpdateOutcome> {
    let config = VbConfig { scheme: Scheme::Marginal, ..config.clone() };
    vb_measurement_update(predicted, frame, &config, model, clutter_intensity)
}

/// Measurement update over a caller-supplied event set covering the whole
/// frame. The events are reweighted every iteration.
pub fn update_with_events(
    predicted: &[GgiwState],
    frame: &MeasurementFrame,
    events: Vec<JointAssociationEvent>,
    n_vb: usize,
    model: &MotionModel,
    clutter_intensity: f64,
) -> Result<UpdateOutcome> {
    if n_vb == 0 {
        return Err(Error::Config("n_vb must be at least 1".into()));
    }
    if events.is_empty() {
        return Err(domain("empty event set"));
    }
    if let Some(e) = events.iter().find(|e| e.assignment.len() != frame.len() || e.n_targets() != predicted.len()) {
        return Err(domain(format!("event {:?} does not fit the frame", e.assignment)));
    }
    let prior = Prior::new(predicted, model)?;
    let set = EventSet { events, indices: (0..frame.len()).collect() };
    iterate(prior, frame, n_vb, model, clutter_intensity, Some(set))
}

fn rate_means(states: &[GgiwState]) -> Result<Vec<f64>> {
    states.iter().map(GgiwState::rate_mean).collect()
}

fn iterate(
    prior: Prior,
    frame: &MeasurementFrame,
    n_vb: usize,
    model: &MotionModel,
    clutter_intensity: f64,
    mut set: Option<EventSet>,
) -> Result<UpdateOutcome> {
    let h = &model.measurement;
    let n = prior.states.len();
    let mut current = prior.states.clone();
    let mut association = MarginalAssociation::zeros(n, frame.len());
    for _ in 0..n_vb {
        let targets = prior.current_targets(&current, model);
        let rates = rate_means(&current)?;
        association = match set.as_mut() {
            None => marginal_probabilities(frame, &targets, &rates, clutter_intensity)?,
            Some(set) => {
                let sub = frame.subset(&set.indices);
                let scores = AssignmentScores::new(&sub, &targets, &rates, clutter_intensity)?;
                scores.weigh(&mut set.events)?;
                let local = event_marginals(&set.events, n, set.indices.len());
                let mut full = MarginalAssociation::zeros(n, frame.len());
                for (row, local_row) in full.eps.iter_mut().zip(&local.eps) {
                    for (&j, &w) in set.indices.iter().zip(local_row) {
                        row[j] = w;
                    }
                }
                full
            }
        };
        let mut next = Vec::with_capacity(n);
        for (t, pred) in prior.states.iter().enumerate() {
            let stats = AssociationStatistics::new(h * pred.mean, &association.eps[t], &frame.points);
            let d = &prior.distortions[t];
            let (mean, cov) = update_kinematic((&pred.mean, &pred.cov), &stats, &current[t].extent_mean()?, d, h)?;
            let (dof, scale) = update_extent((pred.dof, &pred.scale), &stats, (&mean, &cov), d, h)?;
            let (gamma_shape, gamma_rate) = update_rate((pred.gamma_shape, pred.gamma_rate), &stats);
            next.push(GgiwState { mean, cov, dof, scale, gamma_shape, gamma_rate });
        }
        current = next;
    }
    let n_events = set.map_or(0, |s| s.events.len());
    Ok(UpdateOutcome { states: current, association, n_events })
}
