//! Ego-motion handling: apparent radial velocity of static scene points,
//! moving/static classification, dead reckoning of the radar pose and
//! world-frame trajectory correction.
//!
//! Range rates are positive when receding. A static point seen by a radar
//! moving with velocity `v` has range rate `-(v . u)` where `u` is the line of
//! sight, while `static_radial_velocity` returns `+(v . u)`. The compensated
//! residual of a detection is therefore `vr + V_static`, which is zero for any
//! static point and equals the target's own radial speed otherwise.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cluster, Frame};

/// Radar-vehicle velocity for one frame, in the sensor axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoMotion {
    pub frame: u64,
    pub vx: f64,
    pub vy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
}

impl EgoMotion {
    pub fn new(frame: u64, vx: f64, vy: f64) -> Self {
        Self {
            frame,
            vx,
            vy,
            heading: None,
        }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    /// Rejects non-finite velocities and any nonzero heading.
    pub fn validate(&self) -> Result<()> {
        if !self.vx.is_finite() || !self.vy.is_finite() {
            return Err(crate::error::invalid(
                &format!("ego[frame {}]", self.frame),
                "velocity must be finite",
            ));
        }
        match self.heading {
            Some(h) if h != 0.0 => Err(Error::UnsupportedHeading {
                frame: self.frame,
                heading: h,
            }),
            _ => Ok(()),
        }
    }
}

/// Radar pose in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoPose {
    pub frame: u64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl EgoPose {
    /// Maps a sensor-frame point into the world frame.
    pub fn to_world(&self, sx: f64, sy: f64) -> (f64, f64) {
        let (s, c) = self.heading.sin_cos();
        (self.x + c * sx - s * sy, self.y + s * sx + c * sy)
    }
}

/// `vx sin(azimuth) + vy cos(azimuth)`: the ego velocity projected on the
/// line of sight at `azimuth`.
pub fn static_radial_velocity(ego: &EgoMotion, azimuth: f64) -> f64 {
    let (s, c) = azimuth.sin_cos();
    ego.vx * s + ego.vy * c
}

/// Radial velocity with the ego-induced part removed.
pub fn compensated_radial_velocity(vr: f64, azimuth: f64, ego: &EgoMotion) -> f64 {
    vr + static_radial_velocity(ego, azimuth)
}

/// True when the compensated residual exceeds `delta_v`.
pub fn classify_moving(vr: f64, azimuth: f64, ego: &EgoMotion, delta_v: f64) -> bool {
    compensated_radial_velocity(vr, azimuth, ego).abs() > delta_v
}

/// Mean compensated radial velocity over a cluster's plots, each plot
/// compensated at its own azimuth.
pub fn cluster_residual(frame: &Frame, cluster: &Cluster, ego: &EgoMotion) -> f64 {
    let n = cluster.member_indices.len().max(1) as f64;
    cluster
        .plots(frame)
        .map(|p| compensated_radial_velocity(p.radial_velocity, p.azimuth(), ego))
        .sum::<f64>()
        / n
}

/// Integrates the ego velocity with the trapezoidal rule starting from the
/// origin. `timestamps` lists `(frame index, time)` for every frame; each
/// needs an ego record.
pub fn dead_reckon(ego: &[EgoMotion], timestamps: &[(u64, f64)]) -> Result<Vec<EgoPose>> {
    let by_frame: BTreeMap<u64, &EgoMotion> = ego.iter().map(|e| (e.frame, e)).collect();
    let mut poses = Vec::with_capacity(timestamps.len());
    let mut prev: Option<(f64, &EgoMotion, EgoPose)> = None;
    for &(frame, t) in timestamps {
        let e = by_frame
            .get(&frame)
            .copied()
            .ok_or(Error::MissingEgo(frame))?;
        e.validate()?;
        let pose = match prev {
            None => EgoPose {
                frame,
                x: 0.0,
                y: 0.0,
                heading: 0.0,
            },
            Some((t0, e0, p0)) => {
                let dt = t - t0;
                if !(dt > 0.0) {
                    return Err(Error::NonMonotoneTimestamp {
                        frame,
                        previous: t0,
                        current: t,
                    });
                }
                EgoPose {
                    frame,
                    x: p0.x + 0.5 * (e0.vx + e.vx) * dt,
                    y: p0.y + 0.5 * (e0.vy + e.vy) * dt,
                    heading: 0.0,
                }
            }
        };
        poses.push(pose);
        prev = Some((t, e, pose));
    }
    Ok(poses)
}

/// Maps `(frame, x, y)` sensor-frame points into the world frame.
pub fn correct_trajectory(
    history: &[(u64, f64, f64)],
    poses: &[EgoPose],
) -> Result<Vec<(u64, f64, f64)>> {
    let by_frame: BTreeMap<u64, &EgoPose> = poses.iter().map(|p| (p.frame, p)).collect();
    history
        .iter()
        .map(|&(frame, x, y)| {
            let pose = by_frame.get(&frame).ok_or(Error::MissingPose(frame))?;
            let (wx, wy) = pose.to_world(x, y);
            Ok((frame, wx, wy))
        })
        .collect()
}
