//! Small fixed-size matrix helpers and density evaluations.
//!
//! Everything here works on `nalgebra` static matrices. Extents and
//! measurement spreads are 2×2, kinematic covariances 4×4.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Matrix2x4, Matrix4, SMatrix, SVector, Vector2, Vector4};

use crate::error::{domain, Result};

pub type Vec2 = Vector2<f64>;
pub type Vec4 = Vector4<f64>;
pub type Mat2 = Matrix2<f64>;
pub type Mat4 = Matrix4<f64>;
pub type Mat24 = Matrix2x4<f64>;

/// Spatial dimension of the scene.
pub const SPATIAL_DIM: usize = 2;

/// `2·d + 2` for the spatial dimension, the offset in the inverse-Wishart mean.
pub const IW_MEAN_OFFSET: f64 = (2 * SPATIAL_DIM + 2) as f64;

/// `(M + Mᵀ) / 2`.
pub fn symmetrize<const D: usize>(m: &SMatrix<f64, D, D>) -> SMatrix<f64, D, D> {
    (m + m.transpose()) * 0.5
}

/// `A·B·Aᵀ`, symmetrized.
pub fn sandwich<const R: usize, const C: usize>(
    a: &SMatrix<f64, R, C>,
    b: &SMatrix<f64, C, C>,
) -> SMatrix<f64, R, R> {
    symmetrize(&(a * b * a.transpose()))
}

/// Principal square root of a symmetric positive semi-definite matrix.
///
/// Uses an eigendecomposition so singular (PSD but not PD) inputs are
/// accepted. Eigenvalues below `-1e-9·trace` are rejected; tiny negative
/// round-off eigenvalues are clamped to zero.
pub fn spd_sqrt<const D: usize>(a: &SMatrix<f64, D, D>) -> Result<SMatrix<f64, D, D>> {
    let a = symmetrize(a);
    if !a.iter().all(|x| x.is_finite()) {
        return Err(domain("matrix square root of non-finite matrix"));
    }
    let eig = DMatrix::from_column_slice(D, D, a.as_slice()).symmetric_eigen();
    let tol = 1e-9 * a.trace().abs().max(f64::MIN_POSITIVE);
    let mut roots = SVector::<f64, D>::zeros();
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev < -tol {
            return Err(domain(format!(
                "matrix square root of a non-PSD matrix (eigenvalue {ev:e})"
            )));
        }
        roots[i] = ev.max(0.0).sqrt();
    }
    let q = SMatrix::<f64, D, D>::from_column_slice(eig.eigenvectors.as_slice());
    Ok(symmetrize(&(q * SMatrix::<f64, D, D>::from_diagonal(&roots) * q.transpose())))
}

/// Inverse of a symmetric positive definite matrix through Cholesky.
pub fn spd_inverse<const D: usize>(a: &SMatrix<f64, D, D>) -> Result<SMatrix<f64, D, D>> {
    let chol = symmetrize(a)
        .cholesky()
        .ok_or_else(|| domain("matrix is not positive definite"))?;
    Ok(symmetrize(&chol.inverse()))
}

/// Log-density of `N(y; mu, sigma)`.
pub fn gaussian_logpdf<const D: usize>(
    y: &SVector<f64, D>,
    mu: &SVector<f64, D>,
    sigma: &SMatrix<f64, D, D>,
) -> Result<f64> {
    let chol = symmetrize(sigma)
        .cholesky()
        .ok_or_else(|| domain("Gaussian covariance is not positive definite"))?;
    let diff = y - mu;
    let maha = diff.dot(&chol.solve(&diff));
    let log_det = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    Ok(-0.5 * (D as f64 * (2.0 * PI).ln() + log_det + maha))
}

/// Precomputed Gaussian for repeated log-density evaluation at a fixed
/// covariance.
#[derive(Debug, Clone)]
pub struct Gaussian2 {
    mean: Vec2,
    precision: Mat2,
    log_norm: f64,
}

impl Gaussian2 {
    pub fn new(mean: Vec2, cov: &Mat2) -> Result<Self> {
        let cov = symmetrize(cov);
        let det = cov.determinant();
        if !(det > 0.0) || cov[(0, 0)] <= 0.0 {
            return Err(domain("Gaussian covariance is not positive definite"));
        }
        let precision = spd_inverse(&cov)?;
        Ok(Self {
            mean,
            precision,
            log_norm: -(2.0 * PI).ln() - 0.5 * det.ln(),
        })
    }

    pub fn mean(&self) -> &Vec2 {
        &self.mean
    }

    /// Squared Mahalanobis distance of `y` from the mean.
    pub fn mahalanobis_sq(&self, y: &Vec2) -> f64 {
        let d = y - self.mean;
        d.dot(&(self.precision * d))
    }

    pub fn logpdf(&self, y: &Vec2) -> f64 {
        self.log_norm - 0.5 * self.mahalanobis_sq(y)
    }
}

/// Mean of `IW(v, V)` in dimension `dim`: `V / (v − 2·dim − 2)`.
pub fn inverse_wishart_mean<const D: usize>(
    dof: f64,
    scale: &SMatrix<f64, D, D>,
    dim: usize,
) -> Result<SMatrix<f64, D, D>> {
    let denom = dof - (2 * dim + 2) as f64;
    if !(denom > 0.0) {
        return Err(domain(format!(
            "inverse-Wishart mean undefined for {dof} degrees of freedom in dimension {dim}"
        )));
    }
    Ok(scale / denom)
}

/// Mean of a gamma distribution in the shape/rate convention.
pub fn gamma_mean(shape: f64, rate: f64) -> Result<f64> {
    if !(shape > 0.0 && rate > 0.0) {
        return Err(domain(format!(
            "gamma parameters must be positive (shape {shape}, rate {rate})"
        )));
    }
    Ok(shape / rate)
}

/// Position-extraction measurement matrix `[I₂ 0₂]` for state
/// `(px, py, vx, vy)`.
pub fn position_matrix() -> Mat24 {
    Mat24::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

/// Counter-clockwise rotation by `angle` radians.
pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// `ln(Σ exp(xᵢ))` with max subtraction; `-inf` for an empty or all `-inf`
/// input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.into_iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn sqrt_trivial_cases() {
        assert_relative_eq!(spd_sqrt(&Mat2::identity()).unwrap(), Mat2::identity(), epsilon = 1e-12);
        assert_relative_eq!(
            spd_sqrt(&Mat2::new(4.0, 0.0, 0.0, 9.0)).unwrap(),
            Mat2::new(2.0, 0.0, 0.0, 3.0),
            epsilon = 1e-12
        );
        assert_eq!(spd_sqrt(&Mat2::zeros()).unwrap(), Mat2::zeros());
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        assert!(spd_sqrt(&Mat2::new(1.0, 0.0, 0.0, -1.0)).is_err());
    }

    #[test]
    fn sqrt_accepts_singular_psd() {
        let a = Mat2::new(1.0, 1.0, 1.0, 1.0);
        let r = spd_sqrt(&a).unwrap();
        assert_relative_eq!(r * r, a, epsilon = 1e-12);
    }

    #[test]
    fn logpdf_examples() {
        let ln2pi = (2.0 * PI).ln();
        let z = Vec2::zeros();
        assert_relative_eq!(gaussian_logpdf(&z, &z, &Mat2::identity()).unwrap(), -ln2pi, epsilon = 1e-14);
        assert_relative_eq!(
            gaussian_logpdf(&Vec2::new(1.0, 0.0), &z, &Mat2::identity()).unwrap(),
            -ln2pi - 0.5,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            gaussian_logpdf(&Vec2::new(1.0, 1.0), &z, &Mat2::new(2.0, 0.0, 0.0, 2.0)).unwrap(),
            -ln2pi - 2f64.ln() - 0.5,
            epsilon = 1e-14
        );
        assert!(gaussian_logpdf(&z, &z, &Mat2::zeros()).is_err());
    }

    #[test]
    fn cached_gaussian_agrees_with_direct() {
        let cov = Mat2::new(3.0, 0.7, 0.7, 1.5);
        let mu = Vec2::new(1.0, -2.0);
        let g = Gaussian2::new(mu, &cov).unwrap();
        let y = Vec2::new(0.3, 0.9);
        assert_relative_eq!(g.logpdf(&y), gaussian_logpdf(&y, &mu, &cov).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn logpdf_integrates_to_one() {
        for cov in [
            Mat2::new(0.1, 0.0, 0.0, 10.0),
            Mat2::new(2.0, 0.9, 0.9, 1.0),
            Mat2::new(10.0, -3.0, -3.0, 5.0),
        ] {
            let g = Gaussian2::new(Vec2::zeros(), &cov).unwrap();
            let half = 8.0 * 10f64.sqrt();
            let n = 1200;
            let h = 2.0 * half / n as f64;
            let mut mass = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let y = Vec2::new(-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h);
                    mass += g.logpdf(&y).exp() * h * h;
                }
            }
            assert!((0.999..1.001).contains(&mass), "mass {mass}");
        }
    }

    #[test]
    fn iw_mean_examples() {
        let v = Mat2::new(8.0, 0.0, 0.0, 8.0);
        assert_relative_eq!(inverse_wishart_mean(10.0, &v, 2).unwrap(), Mat2::new(2.0, 0.0, 0.0, 2.0));
        assert_relative_eq!(inverse_wishart_mean(7.0, &v, 2).unwrap(), v);
        assert_eq!(inverse_wishart_mean(10.0, &Mat2::zeros(), 2).unwrap(), Mat2::zeros());
        assert!(inverse_wishart_mean(6.0, &v, 2).is_err());
    }

    #[test]
    fn gamma_mean_examples() {
        assert_eq!(gamma_mean(4.0, 2.0).unwrap(), 2.0);
        assert_eq!(gamma_mean(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(gamma_mean(80.0, 1.0).unwrap(), 80.0);
        assert!(gamma_mean(0.0, 1.0).is_err());
        assert!(gamma_mean(1.0, -1.0).is_err());
    }

    fn psd4() -> impl Strategy<Value = Mat4> {
        (proptest::collection::vec(-3.0f64..3.0, 16), 0.0f64..1.0).prop_map(|(v, shift)| {
            let a = Mat4::from_iterator(v);
            a * a.transpose() + Mat4::identity() * shift
        })
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(a in psd4()) {
            let r = spd_sqrt(&a).unwrap();
            let err = (r * r - a).norm() / a.norm().max(1e-300);
            prop_assert!(err < 1e-8, "relative error {}", err);
        }

        #[test]
        fn iw_mean_linear_in_scale(a in 0.1f64..10.0, b in 0.1f64..10.0, c in -1.0f64..1.0, k in 0.0f64..5.0, dof in 6.5f64..100.0) {
            let v = Mat2::new(a, c, c, b);
            let lhs = inverse_wishart_mean(dof, &(v * k), 2).unwrap();
            let rhs = inverse_wishart_mean(dof, &v, 2).unwrap() * k;
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }
    }
}
