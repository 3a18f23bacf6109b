use crate::error::Result;
use crate::linalg::{sandwich, Gaussian2, Mat2, Mat24, Mat4, Vec2, Vec4};

use super::MeasurementFrame;

/// Predicted measurement density of one target: `N(H·m, S)` with
/// innovation covariance `S = H·P·Hᵀ + D·X̄·Dᵀ`.
#[derive(Debug, Clone)]
pub struct PredictedMeasurement {
    pub center: Vec2,
    pub innovation: Mat2,
    density: Gaussian2,
}

impl PredictedMeasurement {
    pub fn new(mean: &Vec4, cov: &Mat4, distortion: &Mat2, extent_mean: &Mat2, h: &Mat24) -> Result<Self> {
        let innovation = sandwich(h, cov) + sandwich(distortion, extent_mean);
        Self::from_parts(h * mean, innovation)
    }

    pub fn from_parts(center: Vec2, innovation: Mat2) -> Result<Self> {
        let density = Gaussian2::new(center, &innovation)?;
        Ok(Self { center, innovation, density })
    }

    /// Same innovation covariance around a different center.
    pub fn recentered(&self, center: Vec2) -> Self {
        let mut out = self.clone();
        out.center = center;
        out.density = Gaussian2::new(center, &self.innovation).expect("innovation already validated");
        out
    }

    pub fn mahalanobis_sq(&self, y: &Vec2) -> f64 {
        self.density.mahalanobis_sq(y)
    }

    pub fn logpdf(&self, y: &Vec2) -> f64 {
        self.density.logpdf(y)
    }
}

/// Result of elliptic gating.
#[derive(Debug, Clone)]
pub struct Gating {
    pub threshold_sq: f64,
    pub targets: Vec<PredictedMeasurement>,
    /// Admissible measurement indices per target.
    pub admissible: Vec<Vec<usize>>,
    /// Measurements admissible for no target.
    pub rejected: Vec<usize>,
}

impl Gating {
    /// 1-based labels of the targets whose gate contains `y`.
    pub fn targets_containing(&self, y: &Vec2) -> Vec<u8> {
        self.targets
            .iter()
            .enumerate()
            .filter(|(_, t)| t.mahalanobis_sq(y) <= self.threshold_sq)
            .map(|(n, _)| (n + 1) as u8)
            .collect()
    }

    /// Indices admissible for at least one target, ascending.
    pub fn gated_indices(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.admissible.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

/// Elliptic gating: measurement `j` is admissible for target `n` iff its
/// squared Mahalanobis distance under `S_n` is at most `g²`.
pub fn gate(frame: &MeasurementFrame, targets: &[PredictedMeasurement], threshold: f64) -> Gating {
    let threshold_sq = threshold * threshold;
    let admissible: Vec<Vec<usize>> = targets
        .iter()
        .map(|t| {
            frame
                .points
                .iter()
                .enumerate()
                .filter(|(_, y)| t.mahalanobis_sq(y) <= threshold_sq)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut inside = vec![false; frame.len()];
    for &j in admissible.iter().flatten() {
        inside[j] = true;
    }
    let rejected = (0..frame.len()).filter(|&j| !inside[j]).collect();
    Gating { threshold_sq, targets: targets.to_vec(), admissible, rejected }
}
