//! Synthetic radar scenarios with ground truth.
//!
//! Targets move at constant velocity in the world frame while the radar moves
//! at a constant ego velocity. Every frame each target returns a Poisson
//! number of plots (at least one) scattered uniformly over its extent, with
//! Gaussian jitter on position, amplitude and radial velocity. Outputs are in
//! the sensor frame. All randomness comes from one ChaCha stream seeded from
//! the config, so a scenario is reproducible bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ego::{dead_reckon, static_radial_velocity, EgoMotion};
use crate::error::{invalid, Result};
use crate::metrics::{GroundTruthRecord, TargetClass};
use crate::model::{azimuth, BoundingBox, Frame, Plot};

/// Default `(width, depth)` of each class in meters.
pub fn default_extent(class: TargetClass) -> (f64, f64) {
    match class {
        TargetClass::Pedestrian => (0.5, 0.5),
        TargetClass::Bicycle => (0.6, 1.8),
        TargetClass::Sedan => (1.8, 4.5),
        TargetClass::Clutter => (0.3, 0.3),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub class: TargetClass,
    /// `(width, depth)`; the class default when omitted.
    #[serde(default)]
    pub extent: Option<[f64; 2]>,
    pub reflectivity: f64,
    /// Mean plots per frame.
    pub plot_count: f64,
    /// World position at t = 0.
    pub start: [f64; 2],
    #[serde(default)]
    pub velocity: [f64; 2],
}

impl TargetSpec {
    pub fn extent(&self) -> (f64, f64) {
        match self.extent {
            Some([w, d]) => (w, d),
            None => default_extent(self.class),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Position jitter sigma per axis, meters.
    pub position: f64,
    /// Radial velocity sigma, m/s.
    pub velocity: f64,
    /// Amplitude sigma.
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldOfView {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for FieldOfView {
    fn default() -> Self {
        Self {
            x_min: -20.0,
            x_max: 20.0,
            y_min: 1.0,
            y_max: 40.0,
        }
    }
}

/// Where plots land on a target's extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterModel {
    /// Fresh plot count and positions every frame.
    #[default]
    PerFrame,
    /// Scatterers drawn once per target and fixed to its body; with zero
    /// noise a target then looks the same in every frame.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Seconds.
    pub duration: f64,
    /// Hz.
    pub frame_rate: f64,
    #[serde(default)]
    pub seed: u64,
    /// Constant radar velocity `(vx, vy)`.
    #[serde(default)]
    pub ego: [f64; 2],
    #[serde(default)]
    pub noise: NoiseConfig,
    /// Mean spurious plots per frame.
    #[serde(default)]
    pub false_alarm_rate: f64,
    #[serde(default)]
    pub field_of_view: FieldOfView,
    #[serde(default)]
    pub scatter: ScatterModel,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(invalid("duration", "must be finite and > 0"));
        }
        if !(self.frame_rate > 0.0) || !self.frame_rate.is_finite() {
            return Err(invalid("frame_rate", "must be finite and > 0"));
        }
        if !self.ego.iter().all(|v| v.is_finite()) {
            return Err(invalid("ego", "must be finite"));
        }
        for (name, s) in [
            ("noise.position", self.noise.position),
            ("noise.velocity", self.noise.velocity),
            ("noise.amplitude", self.noise.amplitude),
        ] {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(invalid(name, "must be finite and >= 0"));
            }
        }
        if !(self.false_alarm_rate >= 0.0) || !self.false_alarm_rate.is_finite() {
            return Err(invalid("false_alarm_rate", "must be finite and >= 0"));
        }
        let fov = &self.field_of_view;
        if !(fov.x_max > fov.x_min && fov.y_max > fov.y_min) {
            return Err(invalid("field_of_view", "max must exceed min"));
        }
        for (i, t) in self.targets.iter().enumerate() {
            let field = |f: &str| format!("targets[{i}].{f}");
            let (w, d) = t.extent();
            let positive = w > 0.0 && d > 0.0;
            let nonneg = w >= 0.0 && d >= 0.0;
            if (t.class != TargetClass::Clutter && !positive) || !nonneg {
                return Err(invalid(&field("extent"), "must be positive"));
            }
            if t.class == TargetClass::Clutter && t.velocity != [0.0, 0.0] {
                return Err(invalid(&field("velocity"), "clutter must be static"));
            }
            if !(t.plot_count >= 1.0) || !t.plot_count.is_finite() {
                return Err(invalid(&field("plot_count"), "must be >= 1"));
            }
            if !(t.reflectivity >= 0.0) || !t.reflectivity.is_finite() {
                return Err(invalid(&field("reflectivity"), "must be finite and >= 0"));
            }
            if !t.start.iter().chain(&t.velocity).all(|v| v.is_finite()) {
                return Err(invalid(
                    &field("start"),
                    "position and velocity must be finite",
                ));
            }
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.frame_rate).round() as usize
    }

    pub fn timestamp(&self, k: usize) -> f64 {
        k as f64 / self.frame_rate
    }
}

/// Generated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub frames: Vec<Frame>,
    pub ego: Vec<EgoMotion>,
    pub gt: Vec<GroundTruthRecord>,
}

fn normal(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

fn plot_count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    let n: f64 = Poisson::new(mean).expect("validated mean").sample(rng);
    (n as usize).max(1)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn scatter_offsets(rng: &mut ChaCha8Rng, spec: &TargetSpec) -> Vec<(f64, f64)> {
    let (w, d) = spec.extent();
    let n = plot_count(rng, spec.plot_count);
    (0..n)
        .map(|_| {
            let ox = uniform(rng, -w / 2.0, w / 2.0);
            let oy = uniform(rng, -d / 2.0, d / 2.0);
            (ox, oy)
        })
        .collect()
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<Simulation> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.frame_count();
    let stamps: Vec<(u64, f64)> = (0..n).map(|k| (k as u64, cfg.timestamp(k))).collect();
    let ego: Vec<EgoMotion> = stamps
        .iter()
        .map(|&(f, _)| EgoMotion::new(f, cfg.ego[0], cfg.ego[1]))
        .collect();
    let poses = dead_reckon(&ego, &stamps)?;

    let fixed: Vec<Vec<(f64, f64)>> = match cfg.scatter {
        ScatterModel::Fixed => cfg
            .targets
            .iter()
            .map(|t| scatter_offsets(&mut rng, t))
            .collect(),
        ScatterModel::PerFrame => Vec::new(),
    };
    let fa_amp_max = 0.5
        * cfg
            .targets
            .iter()
            .map(|t| t.reflectivity)
            .fold(f64::INFINITY, f64::min);
    let fa_amp_max = if fa_amp_max.is_finite() {
        fa_amp_max
    } else {
        1.0
    };
    let fa_speed = 5.0;

    let mut frames = Vec::with_capacity(n);
    let mut gt = Vec::with_capacity(n * cfg.targets.len());
    for (k, (&(index, t), pose)) in stamps.iter().zip(&poses).enumerate() {
        let e = &ego[k];
        let mut plots = Vec::new();
        for (ti, spec) in cfg.targets.iter().enumerate() {
            let (w, d) = spec.extent();
            let wx = spec.start[0] + spec.velocity[0] * t;
            let wy = spec.start[1] + spec.velocity[1] * t;
            let cx = wx - pose.x;
            let cy = wy - pose.y;
            gt.push(GroundTruthRecord {
                frame: index,
                target: ti as u64,
                class: spec.class,
                cx,
                cy,
                bbox: BoundingBox::centered(cx, cy, w, d),
            });
            let offsets = match cfg.scatter {
                ScatterModel::Fixed => fixed[ti].clone(),
                ScatterModel::PerFrame => scatter_offsets(&mut rng, spec),
            };
            for (ox, oy) in offsets {
                let x = cx + ox + normal(&mut rng, cfg.noise.position);
                let y = cy + oy + normal(&mut rng, cfg.noise.position);
                let amp = (spec.reflectivity + normal(&mut rng, cfg.noise.amplitude)).max(0.0);
                let a = azimuth(x, y);
                let (s, c) = a.sin_cos();
                let own = spec.velocity[0] * s + spec.velocity[1] * c;
                let vr = own - static_radial_velocity(e, a) + normal(&mut rng, cfg.noise.velocity);
                plots.push(Plot::new(x, y, amp, vr));
            }
        }
        if cfg.false_alarm_rate > 0.0 {
            let count: f64 = Poisson::new(cfg.false_alarm_rate)
                .expect("validated rate")
                .sample(&mut rng);
            let fov = &cfg.field_of_view;
            for _ in 0..count as usize {
                let x = uniform(&mut rng, fov.x_min, fov.x_max);
                let y = uniform(&mut rng, fov.y_min, fov.y_max);
                let amp = uniform(&mut rng, 0.0, fa_amp_max);
                let vr = uniform(&mut rng, -fa_speed, fa_speed);
                plots.push(Plot::new(x, y, amp, vr));
            }
        }
        frames.push(Frame::new(index, t, plots));
    }
    Ok(Simulation { frames, ego, gt })
}
