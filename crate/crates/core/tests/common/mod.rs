//! Helpers shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use ggiw_vb::association::MeasurementFrame;
use ggiw_vb::linalg::{Mat2, Mat4, Vec2, Vec4};
use ggiw_vb::model::{MotionModel, MotionParams};
use ggiw_vb::GgiwState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn default_model() -> MotionModel {
    MotionModel::from_params(&MotionParams::default()).unwrap()
}

/// State whose extent mean is exactly `extent`.
pub fn state_with_extent(mean: Vec4, cov: Mat4, extent: Mat2, dof: f64, rate: (f64, f64)) -> GgiwState {
    GgiwState { mean, cov, dof, scale: extent * (dof - 6.0), gamma_shape: rate.0, gamma_rate: rate.1 }
}

/// Square root of a 2×2 SPD matrix in closed form:
/// `√A = (A + √det(A)·I) / √(tr A + 2√det A)`.
pub fn sqrt2(a: &Mat2) -> Mat2 {
    let s = a.determinant().sqrt();
    let t = (a.trace() + 2.0 * s).sqrt();
    (a + Mat2::identity() * s) / t
}

/// Posterior mean and marginal standard deviations of a constant-velocity
/// state with Gaussian prior `N(mean, cov)` after observing `points`, each
/// drawn from `N(position, noise)`, by quadrature over the position plane.
///
/// The likelihood only involves the position, so the velocity moments
/// follow from the prior's conditional `v | p`, which is Gaussian and
/// linear in `p`.
pub fn grid_posterior(mean: &Vec4, cov: &Mat4, points: &[Vec2], noise: &Mat2, nodes: usize) -> (Vec4, Vec4) {
    let mp = Vec2::new(mean[0], mean[1]);
    let mv = Vec2::new(mean[2], mean[3]);
    let ppp: Mat2 = cov.fixed_view::<2, 2>(0, 0).into();
    let pvp: Mat2 = cov.fixed_view::<2, 2>(2, 0).into();
    let pvv: Mat2 = cov.fixed_view::<2, 2>(2, 2).into();
    let ppp_inv = ppp.try_inverse().unwrap();
    let noise_inv = noise.try_inverse().unwrap();

    let log_density = |p: &Vec2| -> f64 {
        let d = p - mp;
        let mut l = -0.5 * (d.transpose() * ppp_inv * d)[(0, 0)];
        for y in points {
            let e = y - p;
            l -= 0.5 * (e.transpose() * noise_inv * e)[(0, 0)];
        }
        l
    };

    // Box around the sample mean wide enough for both prior and data.
    let ybar = points.iter().fold(Vec2::zeros(), |a, y| a + y) / points.len() as f64;
    let center = (ybar + mp) * 0.5;
    let spread = (ybar - mp).norm() + 12.0 * ppp.trace().sqrt().min(noise.trace().sqrt());
    let h = 2.0 * spread / (nodes - 1) as f64;
    let coord = |i: usize| -spread + i as f64 * h;

    let mut log_w = Vec::with_capacity(nodes * nodes);
    for i in 0..nodes {
        for j in 0..nodes {
            let p = center + Vec2::new(coord(i), coord(j));
            log_w.push(log_density(&p));
        }
    }
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut first = Vec2::zeros();
    let mut second = Mat2::zeros();
    for i in 0..nodes {
        for j in 0..nodes {
            let p = center + Vec2::new(coord(i), coord(j));
            let w = (log_w[i * nodes + j] - max).exp();
            z += w;
            first += p * w;
            second += p * p.transpose() * w;
        }
    }
    let ep = first / z;
    let cp = second / z - ep * ep.transpose();

    let gain = pvp * ppp_inv;
    let ev = mv + gain * (ep - mp);
    let cv = gain * cp * gain.transpose() + (pvv - gain * pvp.transpose());
    (
        Vec4::new(ep[0], ep[1], ev[0], ev[1]),
        Vec4::new(cp[(0, 0)].sqrt(), cp[(1, 1)].sqrt(), cv[(0, 0)].sqrt(), cv[(1, 1)].sqrt()),
    )
}

/// A random well-conditioned 4×4 covariance.
pub fn random_cov4(rng: &mut impl Rng) -> Mat4 {
    let a = Mat4::from_fn(|_, _| rng.random_range(-1.0..1.0));
    a * a.transpose() + Mat4::from_diagonal(&Vec4::new(4.0, 4.0, 1.0, 1.0))
}

pub fn random_extent(rng: &mut impl Rng) -> Mat2 {
    let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (c, s) = (angle.cos(), angle.sin());
    let r = Mat2::new(c, -s, s, c);
    let d = Mat2::new(rng.random_range(5.0..40.0), 0.0, 0.0, rng.random_range(5.0..40.0));
    r * d * r.transpose()
}

/// Two predicted targets a few metres apart and a frame of `m` points
/// scattered around and between them.
pub fn random_two_target_instance(seed: u64, m: usize) -> (Vec<GgiwState>, MeasurementFrame) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sep = rng.random_range(2.0..20.0);
    let centers = [Vec2::new(0.0, 0.0), Vec2::new(sep, rng.random_range(-5.0..5.0))];
    let states: Vec<GgiwState> = centers
        .iter()
        .map(|c| {
            let mean = Vec4::new(c.x, c.y, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let cov = random_cov4(&mut rng);
            let extent = random_extent(&mut rng);
            let dof = rng.random_range(8.0..60.0);
            state_with_extent(mean, cov, extent, dof, (rng.random_range(5.0..50.0), rng.random_range(0.5..2.0)))
        })
        .collect();
    let points = (0..m)
        .map(|_| Vec2::new(rng.random_range(-10.0..sep + 10.0), rng.random_range(-10.0..10.0)))
        .collect();
    (states, MeasurementFrame::new(points))
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
