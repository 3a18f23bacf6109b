//! Ground truth and measurement generation for constant-velocity
//! elliptical targets in uniform clutter.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::association::MeasurementFrame;
use crate::error::{Error, Result};
use crate::linalg::{spd_sqrt, Mat2, Vec2};
use crate::model::{extent_from_shape, mat2_from_rows};

/// One simulated target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub initial_position: [f64; 2],
    pub velocity: [f64; 2],
    /// Full lengths of the major and minor axes (m).
    pub axis_lengths: [f64; 2],
    /// Rotation of the major axis (rad).
    pub orientation: f64,
}

/// Axis-aligned surveillance box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }
}

/// Spatial law of target-originated measurements around the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadLaw {
    /// `N(0, s·X)`.
    Gaussian,
    /// Uniform over the ellipse `X`, whose covariance is `X / 4`.
    UniformEllipse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub duration_steps: usize,
    pub dt: f64,
    pub targets: Vec<TargetSpec>,
    /// Poisson mean of measurements per detected target and scan.
    pub lambda_t: f64,
    /// Poisson mean of clutter points per scan.
    pub lambda_c: f64,
    pub region: Region,
    pub detection_prob: f64,
    pub seed: u64,
    pub spread_law: SpreadLaw,
    /// Extent scaling `s` of the Gaussian spread law.
    pub spread_scale: f64,
    /// Sensor noise covariance, row-major.
    pub measurement_noise: [[f64; 2]; 2],
}

impl Default for ScenarioConfig {
    /// Two targets crossing at the scene center over 60 one-second scans.
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            duration_steps: 60,
            dt: 1.0,
            targets: vec![
                TargetSpec {
                    initial_position: [0.0, -300.0],
                    velocity: [11.0, 7.7],
                    axis_lengths: [60.0, 30.0],
                    orientation: -PI / 3.0,
                },
                TargetSpec {
                    initial_position: [0.0, 300.0],
                    velocity: [11.0, -7.7],
                    axis_lengths: [40.0, 20.0],
                    orientation: -PI / 4.0,
                },
            ],
            lambda_t: 20.0,
            lambda_c: 25.0,
            region: Region { x_min: -50.0, x_max: 650.0, y_min: -320.0, y_max: 320.0 },
            detection_prob: 1.0,
            seed: 1,
            spread_law: SpreadLaw::Gaussian,
            spread_scale: 0.25,
            measurement_noise: [[0.01, 0.0], [0.0, 0.01]],
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.duration_steps == 0 {
            return bad("duration_steps must be at least 1");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if self.targets.is_empty() {
            return bad("scenario needs at least one target");
        }
        if !(self.lambda_t >= 0.0 && self.lambda_c >= 0.0) || !self.lambda_t.is_finite() || !self.lambda_c.is_finite() {
            return bad("Poisson rates must be finite and non-negative");
        }
        if !(self.region.area() > 0.0) || !(self.region.x_max > self.region.x_min) {
            return bad("region must have positive area");
        }
        if !(0.0..=1.0).contains(&self.detection_prob) {
            return bad("detection_prob must lie in [0, 1]");
        }
        if !(self.spread_scale > 0.0) {
            return bad("spread_scale must be positive");
        }
        spd_sqrt(&mat2_from_rows(&self.measurement_noise))
            .map_err(|e| Error::Config(format!("measurement_noise: {e}")))?;
        for t in &self.targets {
            extent_from_shape((t.axis_lengths[0], t.axis_lengths[1]), t.orientation)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }
}

/// True trajectory of one target; index `k` holds scan `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthTrack {
    pub initial_position: Vec2,
    pub velocity: Vec2,
    pub centers: Vec<Vec2>,
    pub extent: Mat2,
}

impl GroundTruthTrack {
    /// Center at scan `step` (1-based; 0 is the initial position).
    pub fn center(&self, step: usize) -> Vec2 {
        if step == 0 {
            self.initial_position
        } else {
            self.centers[step - 1]
        }
    }
}

/// Constant-velocity, constant-extent tracks: center at scan `k` is
/// `initial + k·dt·velocity`.
pub fn generate_truth(config: &ScenarioConfig) -> Result<Vec<GroundTruthTrack>> {
    config
        .targets
        .iter()
        .map(|t| {
            let p0 = Vec2::from(t.initial_position);
            let v = Vec2::from(t.velocity);
            Ok(GroundTruthTrack {
                initial_position: p0,
                velocity: v,
                centers: (1..=config.duration_steps).map(|k| p0 + v * (k as f64 * config.dt)).collect(),
                extent: extent_from_shape((t.axis_lengths[0], t.axis_lengths[1]), t.orientation)?,
            })
        })
        .collect()
}

/// Generator for the frames of Monte-Carlo run `run`. Each scan draws from
/// its own stream of the seeded generator, so frames can be regenerated
/// independently of each other and of other runs.
pub fn frame_rng(seed: u64, run: usize, step: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((run as u64) << 32) | step as u64);
    rng
}

fn poisson(rate: f64, rng: &mut impl Rng) -> usize {
    if rate <= 0.0 {
        return 0;
    }
    let d = Poisson::new(rate).expect("positive finite Poisson rate");
    d.sample(rng) as usize
}

fn standard_normal2(rng: &mut impl Rng) -> Vec2 {
    Vec2::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Measurements of scan `step` (1-based): Poisson target returns spread
/// around each center plus sensor noise, and uniform clutter, shuffled.
/// Labels are 0 for clutter and `n` for target `n`.
pub fn generate_frame(
    truth: &[GroundTruthTrack],
    step: usize,
    config: &ScenarioConfig,
    rng: &mut impl Rng,
) -> Result<MeasurementFrame> {
    let noise_root = spd_sqrt(&mat2_from_rows(&config.measurement_noise))?;
    let mut tagged: Vec<(Vec2, usize)> = Vec::new();
    for (n, track) in truth.iter().enumerate() {
        if !rng.random_bool(config.detection_prob) {
            continue;
        }
        let count = poisson(config.lambda_t, rng);
        let center = track.center(step);
        let root = match config.spread_law {
            SpreadLaw::Gaussian => spd_sqrt(&(track.extent * config.spread_scale))?,
            SpreadLaw::UniformEllipse => spd_sqrt(&track.extent)?,
        };
        for _ in 0..count {
            let offset = match config.spread_law {
                SpreadLaw::Gaussian => root * standard_normal2(rng),
                SpreadLaw::UniformEllipse => root * unit_disc(rng),
            };
            tagged.push((center + offset + noise_root * standard_normal2(rng), n + 1));
        }
    }
    let r = &config.region;
    for _ in 0..poisson(config.lambda_c, rng) {
        let x = rng.random_range(r.x_min..r.x_max);
        let y = rng.random_range(r.y_min..r.y_max);
        tagged.push((Vec2::new(x, y), 0));
    }
    tagged.shuffle(rng);
    let (points, labels) = tagged.into_iter().unzip();
    MeasurementFrame::with_labels(points, labels)
}

fn unit_disc(rng: &mut impl Rng) -> Vec2 {
    loop {
        let p = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if p.norm_squared() <= 1.0 {
            return p;
        }
    }
}

/// Truth and all frames of one Monte-Carlo run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub truth: Vec<GroundTruthTrack>,
    /// Index `k` holds scan `k + 1`.
    pub frames: Vec<MeasurementFrame>,
}

pub fn simulate_run(config: &ScenarioConfig, run: usize) -> Result<Simulation> {
    config.validate()?;
    let truth = generate_truth(config)?;
    let frames = (1..=config.duration_steps)
        .map(|k| generate_frame(&truth, k, config, &mut frame_rng(config.seed, run, k)))
        .collect::<Result<_>>()?;
    Ok(Simulation { truth, frames })
}
