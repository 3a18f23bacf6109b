//! GGIW target state, the linear motion/measurement model and the time
//! update (kinematics, extent and measurement rate).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{
    gamma_mean, inverse_wishart_mean, position_matrix, rotation, sandwich, spd_inverse, spd_sqrt,
    symmetrize, Mat2, Mat24, Mat4, Vec2, Vec4, IW_MEAN_OFFSET, SPATIAL_DIM,
};

/// Gaussian × inverse-Wishart × gamma density of one target.
///
/// The kinematic state is ordered `(px, py, vx, vy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GgiwState {
    pub mean: Vec4,
    pub cov: Mat4,
    /// Inverse-Wishart degrees of freedom.
    pub dof: f64,
    /// Inverse-Wishart scale matrix (m²).
    pub scale: Mat2,
    pub gamma_shape: f64,
    pub gamma_rate: f64,
}

impl GgiwState {
    /// Checks the parameter invariants: `dof > 6`, positive gamma
    /// parameters, finite PSD covariance and scale.
    pub fn validate(&self) -> Result<()> {
        if !(self.dof > IW_MEAN_OFFSET) {
            return Err(domain(format!("extent dof {} must exceed {IW_MEAN_OFFSET}", self.dof)));
        }
        gamma_mean(self.gamma_shape, self.gamma_rate)?;
        if !self.mean.iter().all(|x| x.is_finite()) {
            return Err(domain("non-finite kinematic mean"));
        }
        spd_sqrt(&self.cov)?;
        spd_sqrt(&self.scale)?;
        Ok(())
    }

    /// Expected extent `V / (v − 6)`.
    pub fn extent_mean(&self) -> Result<Mat2> {
        inverse_wishart_mean(self.dof, &self.scale, SPATIAL_DIM)
    }

    /// Expected measurement rate `α / β`.
    pub fn rate_mean(&self) -> Result<f64> {
        gamma_mean(self.gamma_shape, self.gamma_rate)
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.mean[0], self.mean[1])
    }
}

/// Linear constant-velocity dynamics, extent evolution and measurement
/// model shared by all targets.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub transition: Mat4,
    pub process_noise: Mat4,
    pub measurement: Mat24,
    /// Sensor noise covariance.
    pub measurement_noise: Mat2,
    /// Extent-evolution degrees of freedom.
    pub extent_dof: f64,
    /// Extent-evolution matrix.
    pub extent_evolution: Mat2,
    /// Forgetting factor applied to the gamma parameters, `> 1`.
    pub forgetting: f64,
    /// Scaling of the extent in the observed spread.
    pub spread_scale: f64,
}

/// Scalar parameters of a [`MotionModel`], in the form used by config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionParams {
    pub dt: f64,
    /// Diagonal of the process-noise covariance, `(px, py, vx, vy)`.
    pub process_noise_diag: [f64; 4],
    /// Sensor noise covariance, row-major.
    pub measurement_noise: [[f64; 2]; 2],
    pub extent_dof: f64,
    /// Extent-evolution matrix, row-major. `None` means `I / √extent_dof`,
    /// which keeps the predicted extent mean equal to the posterior mean.
    pub extent_evolution: Option<[[f64; 2]; 2]>,
    pub forgetting: f64,
    pub spread_scale: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        Self {
            dt: 1.0,
            process_noise_diag: [1.0, 1.0, 0.1, 0.1],
            measurement_noise: [[0.01, 0.0], [0.0, 0.01]],
            extent_dof: 50.0,
            extent_evolution: None,
            forgetting: 1.25,
            spread_scale: 0.25,
        }
    }
}

pub(crate) fn mat2_from_rows(rows: &[[f64; 2]; 2]) -> Mat2 {
    Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
}

impl MotionModel {
    /// Builds the constant-velocity model `Φ = [1 T; 0 1] ⊗ I₂`,
    /// `H = [I₂ 0₂]`.
    pub fn from_params(p: &MotionParams) -> Result<Self> {
        let dt = p.dt;
        #[rustfmt::skip]
        let transition = Mat4::new(
            1.0, 0.0, dt, 0.0,
            0.0, 1.0, 0.0, dt,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        let q = p.process_noise_diag;
        let evolution = match &p.extent_evolution {
            Some(rows) => mat2_from_rows(rows),
            None if p.extent_dof > 0.0 => Mat2::identity() / p.extent_dof.sqrt(),
            None => Mat2::identity(),
        };
        let model = Self {
            transition,
            process_noise: Mat4::from_diagonal(&Vec4::new(q[0], q[1], q[2], q[3])),
            measurement: position_matrix(),
            measurement_noise: mat2_from_rows(&p.measurement_noise),
            extent_dof: p.extent_dof,
            extent_evolution: evolution,
            forgetting: p.forgetting,
            spread_scale: p.spread_scale,
        };
        model.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.extent_evolution.determinant().abs() <= 1e-12 {
            return Err(domain("extent-evolution matrix must be invertible"));
        }
        if !(self.forgetting > 1.0) {
            return Err(domain(format!("forgetting factor {} must exceed 1", self.forgetting)));
        }
        if !(self.extent_dof > 0.0) {
            return Err(domain("extent-evolution dof must be positive"));
        }
        if !(self.spread_scale > 0.0) {
            return Err(domain("spread scale must be positive"));
        }
        spd_sqrt(&self.process_noise)?;
        spd_sqrt(&self.measurement_noise)?;
        Ok(())
    }
}

impl Default for MotionModel {
    fn default() -> Self {
        Self::from_params(&MotionParams::default()).expect("default motion model is valid")
    }
}

/// Kalman time update `m ← Φ m`, `P ← Φ P Φᵀ + G`.
pub fn predict_kinematic(state: &GgiwState, model: &MotionModel) -> (Vec4, Mat4) {
    let mean = model.transition * state.mean;
    let cov = sandwich(&model.transition, &state.cov) + model.process_noise;
    (mean, symmetrize(&cov))
}

/// Extent time update of the inverse-Wishart parameters under the
/// Wishart evolution `X_k | X_{k-1} ~ W(τ, E X_{k-1} Eᵀ)`.
pub fn predict_extent(state: &GgiwState, model: &MotionModel) -> Result<(f64, Mat2)> {
    let d = SPATIAL_DIM as f64;
    let gamma = state.dof - 2.0 * d - 2.0;
    if !(gamma > 0.0) {
        return Err(domain(format!(
            "extent prediction needs dof > {IW_MEAN_OFFSET}, got {}",
            state.dof
        )));
    }
    let tau = model.extent_dof;
    let dof = 2.0 * tau * (gamma + 1.0) * (gamma - 1.0) * (gamma - 2.0)
        / (gamma * gamma * (gamma + tau))
        + 2.0 * d
        + 4.0;
    let factor = tau / gamma * (dof - 2.0 * d - 2.0);
    let scale = sandwich(&model.extent_evolution, &state.scale) * factor;
    Ok((dof, scale))
}

/// Exponential forgetting of the gamma parameters; the mean is unchanged.
pub fn predict_rate(state: &GgiwState, model: &MotionModel) -> (f64, f64) {
    (state.gamma_shape / model.forgetting, state.gamma_rate / model.forgetting)
}

/// Full time update of one target.
pub fn predict(state: &GgiwState, model: &MotionModel) -> Result<GgiwState> {
    let (mean, cov) = predict_kinematic(state, model);
    let (dof, scale) = predict_extent(state, model)?;
    let (gamma_shape, gamma_rate) = predict_rate(state, model);
    Ok(GgiwState { mean, cov, dof, scale, gamma_shape, gamma_rate })
}

/// Distortion matrix `D = (s·X̄ + R)^{1/2} · X̄^{-1/2}`, which satisfies
/// `D·X̄·Dᵀ = s·X̄ + R`.
pub fn distortion_matrix(extent_mean: &Mat2, model: &MotionModel) -> Result<Mat2> {
    let x = symmetrize(extent_mean);
    if !(x.determinant() > 0.0) {
        return Err(domain("distortion matrix needs a positive definite extent"));
    }
    let spread = x * model.spread_scale + model.measurement_noise;
    let inv_root = spd_inverse(&spd_sqrt(&x)?)?;
    Ok(spd_sqrt(&spread)? * inv_root)
}

/// Extent matrix of an ellipse with full axis lengths `(major, minor)`
/// rotated by `orientation` radians.
pub fn extent_from_shape(axis_lengths: (f64, f64), orientation: f64) -> Result<Mat2> {
    let (l1, l2) = axis_lengths;
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(domain(format!("axis lengths must be positive, got ({l1}, {l2})")));
    }
    let rot = rotation(orientation);
    let semi = Mat2::new((l1 / 2.0).powi(2), 0.0, 0.0, (l2 / 2.0).powi(2));
    Ok(sandwich(&rot, &semi))
}
