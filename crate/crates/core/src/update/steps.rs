//! The per-target factor updates shared by all association schemes.
//!
//! Every expectation the updates need is linear in the event weights and
//! in the measurements, so they reduce to weighted moments of the frame
//! under the per-measurement association probabilities.

use crate::error::{domain, Result};
use crate::linalg::{sandwich, spd_inverse, symmetrize, Mat2, Mat24, Mat4, Vec2, Vec4};

/// Expected measurement count `Σ_l q_l·φ_l` below which a target coasts.
pub const COAST_THRESHOLD: f64 = 1e-9;

/// Weighted moments of the measurements assigned to one target, taken
/// about a fixed origin (the predicted measurement center) to keep the
/// second moment well conditioned far from the coordinate origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationStatistics {
    pub origin: Vec2,
    /// Expected number of measurements, `Σ_j εⱼ`.
    pub count: f64,
    /// `Σ_j εⱼ (yⱼ − origin)`.
    pub first: Vec2,
    /// `Σ_j εⱼ (yⱼ − origin)(yⱼ − origin)ᵀ`.
    pub second: Mat2,
}

impl AssociationStatistics {
    pub fn new(origin: Vec2, weights: &[f64], points: &[Vec2]) -> Self {
        let mut count = 0.0;
        let mut first = Vec2::zeros();
        let mut second = Mat2::zeros();
        for (&w, y) in weights.iter().zip(points) {
            if w == 0.0 {
                continue;
            }
            let d = y - origin;
            count += w;
            first += d * w;
            second += d * d.transpose() * w;
        }
        Self { origin, count, first, second }
    }

    pub fn empty(origin: Vec2) -> Self {
        Self { origin, count: 0.0, first: Vec2::zeros(), second: Mat2::zeros() }
    }

    pub fn is_coasting(&self) -> bool {
        self.count < COAST_THRESHOLD
    }

    /// Weight-averaged equivalent measurement `A₁ / A₂`.
    pub fn centroid(&self) -> Option<Vec2> {
        (!self.is_coasting()).then(|| self.origin + self.first / self.count)
    }

    /// `Σ_j εⱼ (yⱼ − c)(yⱼ − c)ᵀ` about an arbitrary center `c`.
    pub fn scatter_about(&self, center: &Vec2) -> Mat2 {
        let c = center - self.origin;
        symmetrize(&(self.second - c * self.first.transpose() - self.first * c.transpose()
            + c * c.transpose() * self.count))
    }
}

/// Gamma update `α + A₂`, `β + 1`. A coasting target adds no count, which
/// keeps the shape increment equal to the extent's dof increment.
pub fn update_rate(prior: (f64, f64), stats: &AssociationStatistics) -> (f64, f64) {
    let count = if stats.is_coasting() { 0.0 } else { stats.count };
    (prior.0 + count, prior.1 + 1.0)
}

/// Kalman-type update of the kinematic state with the equivalent
/// measurement `A₁/A₂` and pseudo-noise `D·E[X]·Dᵀ / A₂`. Returns the
/// prior unchanged for a coasting target.
pub fn update_kinematic(
    prior: (&Vec4, &Mat4),
    stats: &AssociationStatistics,
    extent_mean: &Mat2,
    distortion: &Mat2,
    h: &Mat24,
) -> Result<(Vec4, Mat4)> {
    let (mean, cov) = prior;
    let Some(centroid) = stats.centroid() else {
        return Ok((*mean, *cov));
    };
    let innovation_cov = sandwich(h, cov) + sandwich(distortion, extent_mean) / stats.count;
    let gain = cov * h.transpose() * spd_inverse(&innovation_cov)?;
    let mean_post = mean + gain * (centroid - h * mean);
    let cov_post = symmetrize(&(cov - gain * h * cov));
    Ok((mean_post, cov_post))
}

/// Inverse-Wishart update `v + A₂`,
/// `V + D⁻¹·(Σ_j εⱼ (yⱼ − H·m)(yⱼ − H·m)ᵀ + A₂·H·P·Hᵀ)·D⁻ᵀ`
/// with the posterior kinematics `(m, P)`.
pub fn update_extent(
    prior: (f64, &Mat2),
    stats: &AssociationStatistics,
    posterior: (&Vec4, &Mat4),
    distortion: &Mat2,
    h: &Mat24,
) -> Result<(f64, Mat2)> {
    let (dof, scale) = prior;
    if stats.is_coasting() {
        return Ok((dof, *scale));
    }
    let inv = distortion
        .try_inverse()
        .filter(|_| distortion.determinant().abs() > 1e-300)
        .ok_or_else(|| domain("distortion matrix is singular"))?;
    let (mean, cov) = posterior;
    let spread = stats.scatter_about(&(h * mean)) + sandwich(h, cov) * stats.count;
    Ok((dof + stats.count, symmetrize(&(scale + sandwich(&inv, &spread)))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::equivalent_moments;
    use crate::linalg::position_matrix;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rate_examples() {
        let s = AssociationStatistics::new(Vec2::zeros(), &[1.0, 1.0, 1.0], &[Vec2::zeros(); 3]);
        assert_eq!(update_rate((4.0, 2.0), &s), (7.0, 3.0));
        assert_eq!(update_rate((4.0, 2.0), &AssociationStatistics::empty(Vec2::zeros())), (4.0, 3.0));
        // two equally likely events with 2 and 4 measurements: 6 points at weight 1/2
        let s = AssociationStatistics::new(Vec2::zeros(), &[0.5; 6], &[Vec2::zeros(); 6]);
        assert_eq!(update_rate((1.0, 1.0), &s).0, 4.0);
    }

    #[test]
    fn zero_innovation_keeps_mean() {
        let h = position_matrix();
        let m = Vec4::new(3.0, 4.0, 1.0, -1.0);
        let s = AssociationStatistics::new(h * m, &[1.0], &[h * m]);
        let (mp, _) = update_kinematic((&m, &Mat4::identity()), &s, &Mat2::identity(), &Mat2::identity(), &h).unwrap();
        assert_relative_eq!(mp, m, epsilon = 1e-12);
    }

    #[test]
    fn confident_prior_ignores_measurements() {
        let h = position_matrix();
        let m = Vec4::new(3.0, 4.0, 1.0, -1.0);
        let s = AssociationStatistics::new(Vec2::zeros(), &[1.0], &[Vec2::new(100.0, 0.0)]);
        let (mp, _) = update_kinematic((&m, &(Mat4::identity() * 1e-12)), &s, &Mat2::identity(), &Mat2::identity(), &h).unwrap();
        assert!((mp - m).norm() < 1e-8);
    }

    #[test]
    fn scalar_kalman_analogue() {
        // unit position variance, unit pseudo-noise, innovation 2 along x
        let h = position_matrix();
        let m = Vec4::zeros();
        let s = AssociationStatistics::new(Vec2::zeros(), &[1.0], &[Vec2::new(2.0, 0.0)]);
        let (mp, pp) = update_kinematic((&m, &Mat4::identity()), &s, &Mat2::identity(), &Mat2::identity(), &h).unwrap();
        assert_relative_eq!(mp[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(pp[(0, 0)], 0.5, epsilon = 1e-12);
        assert_relative_eq!(pp[(2, 2)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coasting_leaves_prior() {
        let h = position_matrix();
        let s = AssociationStatistics::empty(Vec2::zeros());
        let m = Vec4::new(1.0, 2.0, 3.0, 4.0);
        let p = Mat4::identity();
        assert_eq!(update_kinematic((&m, &p), &s, &Mat2::identity(), &Mat2::identity(), &h).unwrap(), (m, p));
        let v = Mat2::identity() * 5.0;
        assert_eq!(update_extent((9.0, &v), &s, (&m, &p), &Mat2::identity(), &h).unwrap(), (9.0, v));
    }

    #[test]
    fn extent_examples() {
        let h = position_matrix();
        let v = Mat2::identity() * 3.0;
        // singleton at the posterior center with exact kinematics
        let m = Vec4::new(1.0, 0.0, 0.0, 0.0);
        let s = AssociationStatistics::new(Vec2::zeros(), &[1.0], &[Vec2::new(1.0, 0.0)]);
        let (dof, scale) = update_extent((10.0, &v), &s, (&m, &Mat4::zeros()), &Mat2::identity(), &h).unwrap();
        assert_eq!(dof, 11.0);
        assert_relative_eq!(scale, v, epsilon = 1e-12);
        // pair symmetric about the posterior center adds its scatter
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0)];
        let s = AssociationStatistics::new(Vec2::new(5.0, 5.0), &[1.0, 1.0], &pts);
        let (_, scale) = update_extent((10.0, &v), &s, (&m, &Mat4::zeros()), &Mat2::identity(), &h).unwrap();
        assert_relative_eq!(scale - v, Mat2::new(2.0, 0.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn singular_distortion_rejected() {
        let h = position_matrix();
        let s = AssociationStatistics::new(Vec2::zeros(), &[1.0], &[Vec2::zeros()]);
        let r = update_extent((10.0, &Mat2::identity()), &s, (&Vec4::zeros(), &Mat4::zeros()), &Mat2::zeros(), &h);
        assert!(r.is_err());
    }

    proptest! {
        /// With unit weights the moments reproduce the equivalent
        /// measurement decomposition `Ȳ + φ(ȳ − c)(ȳ − c)ᵀ`.
        #[test]
        fn scatter_matches_equivalent_moments(
            raw in proptest::collection::vec((-30.0f64..30.0, -30.0f64..30.0), 1..12),
            ox in -500.0f64..500.0, oy in -500.0f64..500.0,
            cx in -40.0f64..40.0, cy in -40.0f64..40.0,
        ) {
            let pts: Vec<Vec2> = raw.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
            let s = AssociationStatistics::new(Vec2::new(ox, oy), &vec![1.0; pts.len()], &pts);
            let eq = equivalent_moments(pts.iter()).unwrap();
            let c = Vec2::new(cx, cy);
            let d = eq.mean - c;
            let expected = eq.scatter + d * d.transpose() * eq.count as f64;
            prop_assert!((s.scatter_about(&c) - expected).norm() <= 1e-7 * (1.0 + expected.norm()));
            prop_assert!((s.centroid().unwrap() - eq.mean).norm() <= 1e-9 * (1.0 + eq.mean.norm()));
        }
    }
}
