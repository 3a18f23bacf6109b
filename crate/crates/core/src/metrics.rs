//! Track scoring: Gaussian Wasserstein distance, position and extent
//! errors, RMSE curves and their time aggregates.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{spd_sqrt, Mat2, Vec2};
use crate::model::GgiwState;

/// Gaussian Wasserstein distance between the ellipses `(x1, X1)` and
/// `(x2, X2)`:
/// `√(‖x1 − x2‖² + tr(X1 + X2 − 2·(√X1·X2·√X1)^{1/2}))`.
pub fn gwd(center1: &Vec2, extent1: &Mat2, center2: &Vec2, extent2: &Mat2) -> Result<f64> {
    let r1 = spd_sqrt(extent1)?;
    let cross = spd_sqrt(&(r1 * extent2 * r1))?;
    spd_sqrt(extent2)?;
    let shape = (extent1 + extent2 - cross * 2.0).trace();
    Ok(((center1 - center2).norm_squared() + shape).max(0.0).sqrt())
}

/// Error of one estimate against the truth at one scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub run: usize,
    pub step: usize,
    /// 1-based target index.
    pub target: usize,
    pub gwd: f64,
    /// Euclidean position error (m).
    pub pos_err: f64,
    /// `tr(X_true − X_est)` (m²).
    pub ext_err: f64,
}

impl MetricsRecord {
    /// Scores the estimate `state` (position and extent mean) against a
    /// true center and extent.
    pub fn score(run: usize, step: usize, target: usize, truth: (&Vec2, &Mat2), state: &GgiwState) -> Result<Self> {
        let (center, extent) = truth;
        let est_extent = state.extent_mean()?;
        let est_center = state.position();
        Ok(Self {
            run,
            step,
            target,
            gwd: gwd(center, extent, &est_center, &est_extent)?,
            pos_err: (center - est_center).norm(),
            ext_err: (extent - est_extent).trace(),
        })
    }
}

/// `√(mean xᵢ²)`.
pub fn rms(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x * x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Mean and population variance over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAggregate {
    pub mean: f64,
    pub var: f64,
}

pub fn time_aggregates(curve: &[f64]) -> Result<TimeAggregate> {
    if curve.is_empty() {
        return Err(domain("time aggregate of an empty curve"));
    }
    let k = curve.len() as f64;
    let mean = curve.iter().sum::<f64>() / k;
    let var = curve.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k;
    Ok(TimeAggregate { mean, var })
}

/// Per-scan curves of one target over all runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    /// Mean GWD over runs.
    pub gwd: Vec<f64>,
    pub rmse_pos: Vec<f64>,
    pub rmse_ext: Vec<f64>,
}

/// Builds the curves of `target` over scans `1..=n_steps`. Scans without
/// records yield NaN.
pub fn curves(records: &[MetricsRecord], target: usize, n_steps: usize) -> Curves {
    let mut by_step: Vec<Vec<&MetricsRecord>> = vec![Vec::new(); n_steps];
    for r in records.iter().filter(|r| r.target == target && r.step >= 1 && r.step <= n_steps) {
        by_step[r.step - 1].push(r);
    }
    let mean = |xs: &[&MetricsRecord], f: fn(&MetricsRecord) -> f64| -> f64 {
        if xs.is_empty() {
            f64::NAN
        } else {
            xs.iter().map(|r| f(r)).sum::<f64>() / xs.len() as f64
        }
    };
    Curves {
        gwd: by_step.iter().map(|s| mean(s, |r| r.gwd)).collect(),
        rmse_pos: by_step.iter().map(|s| rms(s.iter().map(|r| r.pos_err))).collect(),
        rmse_ext: by_step.iter().map(|s| rms(s.iter().map(|r| r.ext_err))).collect(),
    }
}

/// Time aggregates of the three curves of one target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub target: usize,
    pub gwd: TimeAggregate,
    pub rmse_pos: TimeAggregate,
    pub rmse_ext: TimeAggregate,
}

pub fn summarize_target(records: &[MetricsRecord], target: usize, n_steps: usize) -> Result<TargetSummary> {
    let c = curves(records, target, n_steps);
    Ok(TargetSummary {
        target,
        gwd: time_aggregates(&c.gwd)?,
        rmse_pos: time_aggregates(&c.rmse_pos)?,
        rmse_ext: time_aggregates(&c.rmse_ext)?,
    })
}
