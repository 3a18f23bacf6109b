//! Joint association events (JAEs): gating, event generation, measurement
//! moments and event weights.
//!
//! A JAE assigns every measurement of a frame either to clutter (label 0)
//! or to one target (labels `1..=n`). Several measurements may go to the
//! same target.

mod clustering;
mod dbscan;
mod events;
mod gating;

pub use clustering::{cluster_partitions, ClusterParams};
pub use dbscan::dbscan;
pub use events::{
    count_events_for_cardinality, enumerate_all_events, event_log_weight, normalize_weights,
    AssignmentScores, DEFAULT_ENUMERATION_CAP,
};
pub use gating::{gate, Gating, PredictedMeasurement};

use crate::error::{domain, Result};
use crate::linalg::{Mat2, Vec2};

/// The 2-D points observed at one scan.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasurementFrame {
    pub points: Vec<Vec2>,
    /// Origin of each point in simulation: 0 for clutter, `n` for target `n`.
    pub truth_labels: Option<Vec<usize>>,
}

impl MeasurementFrame {
    pub fn new(points: Vec<Vec2>) -> Self {
        Self { points, truth_labels: None }
    }

    pub fn with_labels(points: Vec<Vec2>, labels: Vec<usize>) -> Result<Self> {
        let frame = Self { points, truth_labels: Some(labels) };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.points.iter().all(|p| p.iter().all(|x| x.is_finite())) {
            return Err(domain("measurement frame contains non-finite points"));
        }
        if let Some(labels) = &self.truth_labels {
            if labels.len() != self.points.len() {
                return Err(domain(format!(
                    "{} labels for {} points",
                    labels.len(),
                    self.points.len()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The frame restricted to `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            truth_labels: self
                .truth_labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }
}

/// One complete assignment of a frame's measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAssociationEvent {
    /// Label per measurement; 0 is clutter.
    pub assignment: Vec<u8>,
    /// Measurement count per label, clutter first (length `n + 1`).
    pub cardinalities: Vec<usize>,
    pub log_weight: f64,
    pub normalized_weight: f64,
}

impl JointAssociationEvent {
    /// Builds an event and its cardinality profile. Panics if a label
    /// exceeds `n_targets`.
    pub fn from_assignment(assignment: Vec<u8>, n_targets: usize) -> Self {
        let mut cardinalities = vec![0; n_targets + 1];
        for &a in &assignment {
            cardinalities[a as usize] += 1;
        }
        Self { assignment, cardinalities, log_weight: 0.0, normalized_weight: 0.0 }
    }

    pub fn n_targets(&self) -> usize {
        self.cardinalities.len() - 1
    }

    /// Number of measurements assigned to `label` (0 for clutter).
    pub fn count(&self, label: usize) -> usize {
        self.cardinalities[label]
    }

    pub fn members(&self, label: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &a)| a as usize == label)
            .map(|(j, _)| j)
    }
}

/// Centroid and scatter of the measurements assigned to one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentMoments {
    pub mean: Vec2,
    /// `Σ (y − ȳ)(y − ȳ)ᵀ`, not divided by the count.
    pub scatter: Mat2,
    pub count: usize,
}

/// Centroid and scatter matrix of a non-empty point set.
pub fn equivalent_moments<'a>(points: impl IntoIterator<Item = &'a Vec2> + Clone) -> Result<EquivalentMoments> {
    let mut count = 0usize;
    let mut sum = Vec2::zeros();
    for p in points.clone() {
        sum += p;
        count += 1;
    }
    if count == 0 {
        return Err(domain("moments of an empty measurement set"));
    }
    let mean = sum / count as f64;
    let mut scatter = Mat2::zeros();
    if count > 1 {
        for p in points {
            let d = p - mean;
            scatter += d * d.transpose();
        }
    }
    Ok(EquivalentMoments { mean, scatter, count })
}

/// Per-target moments of an event, `None` for targets without measurements.
pub fn event_moments(event: &JointAssociationEvent, frame: &MeasurementFrame) -> Vec<Option<EquivalentMoments>> {
    (1..=event.n_targets())
        .map(|n| {
            if event.count(n) == 0 {
                None
            } else {
                let pts: Vec<&Vec2> = event.members(n).map(|j| &frame.points[j]).collect();
                equivalent_moments(pts.iter().copied()).ok()
            }
        })
        .collect()
}
