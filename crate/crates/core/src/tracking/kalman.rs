//! Constant-velocity Kalman filter over the eight-component cluster state
//! `[Px, Py, Vx, Vy, BXmax, BXmin, BYmax, BYmin]`.
//!
//! Box edges translate rigidly with the centroid. The measurement is the full
//! state (`H = I`): centroid and box come straight from the cluster and the
//! velocity from the radial/tangential decomposition.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{BoundingBox, FeatureVector};

pub const STATE_DIM: usize = 8;

pub type StateVector = SVector<f64, STATE_DIM>;
pub type StateMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;

pub const PX: usize = 0;
pub const PY: usize = 1;
pub const VX: usize = 2;
pub const VY: usize = 3;
pub const BX_MAX: usize = 4;
pub const BX_MIN: usize = 5;
pub const BY_MAX: usize = 6;
pub const BY_MIN: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KfConfig {
    /// Process-noise intensities, scaled by `dt`.
    pub q_pos: f64,
    pub q_vel: f64,
    pub q_box: f64,
    /// Measurement variances.
    pub r_pos: f64,
    pub r_vel: f64,
    pub r_box: f64,
    /// Attenuation of the tangential velocity term, in `[0, 1]`.
    pub xi: f64,
    /// Velocity variance of a freshly spawned track.
    pub init_vel_var: f64,
}

impl Default for KfConfig {
    fn default() -> Self {
        Self {
            q_pos: 0.01,
            q_vel: 0.1,
            q_box: 0.01,
            r_pos: 0.12 * 0.12,
            r_vel: 0.1,
            r_box: 0.05,
            xi: 0.5,
            init_vel_var: 1.0,
        }
    }
}

impl KfConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kf.q_pos", self.q_pos),
            ("kf.q_vel", self.q_vel),
            ("kf.q_box", self.q_box),
        ] {
            if !(v >= 0.0) || v.is_infinite() {
                return Err(invalid(name, "must be finite and >= 0"));
            }
        }
        for (name, v) in [
            ("kf.r_pos", self.r_pos),
            ("kf.r_vel", self.r_vel),
            ("kf.r_box", self.r_box),
            ("kf.init_vel_var", self.init_vel_var),
        ] {
            if !(v > 0.0) || v.is_infinite() {
                return Err(invalid(name, "must be finite and > 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(invalid("kf.xi", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn process_noise(&self, dt: f64) -> StateMatrix {
        StateMatrix::from_diagonal(&StateVector::from_column_slice(&[
            self.q_pos * dt,
            self.q_pos * dt,
            self.q_vel * dt,
            self.q_vel * dt,
            self.q_box * dt,
            self.q_box * dt,
            self.q_box * dt,
            self.q_box * dt,
        ]))
    }

    pub fn measurement_noise(&self) -> StateMatrix {
        StateMatrix::from_diagonal(&StateVector::from_column_slice(&[
            self.r_pos, self.r_pos, self.r_vel, self.r_vel, self.r_box, self.r_box, self.r_box,
            self.r_box,
        ]))
    }

    /// Initial covariance for a track spawned from a single cluster.
    pub fn initial_covariance(&self) -> StateMatrix {
        StateMatrix::from_diagonal(&StateVector::from_column_slice(&[
            self.r_pos,
            self.r_pos,
            self.init_vel_var,
            self.init_vel_var,
            self.r_box,
            self.r_box,
            self.r_box,
            self.r_box,
        ]))
    }
}

/// Constant-velocity transition matrix.
pub fn transition(dt: f64) -> StateMatrix {
    let mut a = StateMatrix::identity();
    a[(PX, VX)] = dt;
    a[(PY, VY)] = dt;
    a[(BX_MAX, VX)] = dt;
    a[(BX_MIN, VX)] = dt;
    a[(BY_MAX, VY)] = dt;
    a[(BY_MIN, VY)] = dt;
    a
}

#[derive(Debug, Clone, PartialEq)]
pub struct KfState {
    pub x: StateVector,
    pub p: StateMatrix,
}

impl KfState {
    pub fn new(x: StateVector, p: StateMatrix) -> Self {
        Self { x, p }
    }

    pub fn from_parts(
        px: f64,
        py: f64,
        vx: f64,
        vy: f64,
        bbox: &BoundingBox,
        p: StateMatrix,
    ) -> Self {
        Self {
            x: measurement(px, py, vx, vy, bbox),
            p,
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x[PX], self.x[PY])
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.x[VX], self.x[VY])
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::new(
            self.x[BX_MIN],
            self.x[BX_MAX],
            self.x[BY_MIN],
            self.x[BY_MAX],
        )
    }

    /// Feature vector of the estimate. Radial velocity and amplitude are not
    /// part of the state and are supplied by the caller.
    pub fn to_features(&self, vr: f64, amplitude: f64) -> FeatureVector {
        let bbox = self.bbox();
        FeatureVector {
            px: self.x[PX],
            py: self.x[PY],
            vr,
            area: bbox.area(),
            amplitude,
            bbox,
        }
    }

    fn check_finite(&self) -> Result<()> {
        if self.x.iter().all(|v| v.is_finite()) && self.p.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteState)
        }
    }
}

/// Builds a state-space measurement vector.
pub fn measurement(px: f64, py: f64, vx: f64, vy: f64, bbox: &BoundingBox) -> StateVector {
    StateVector::from_column_slice(&[
        px, py, vx, vy, bbox.x_max, bbox.x_min, bbox.y_max, bbox.y_min,
    ])
}

/// Propagates the state by `dt` seconds.
pub fn predict(state: &KfState, dt: f64, cfg: &KfConfig) -> Result<KfState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    state.check_finite()?;
    let a = transition(dt);
    let x = a * state.x;
    let p = symmetrize(a * state.p * a.transpose() + cfg.process_noise(dt));
    let out = KfState { x, p };
    out.check_finite()?;
    Ok(out)
}

/// Full-state measurement update.
pub fn update(state: &KfState, z: &StateVector, cfg: &KfConfig) -> Result<KfState> {
    state.check_finite()?;
    if !z.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteState);
    }
    let innovation = z - state.x;
    let s = state.p + cfg.measurement_noise();
    let s_inv = s.try_inverse().ok_or(Error::SingularInnovation)?;
    let gain = state.p * s_inv;
    let x = state.x + gain * innovation;
    let p = symmetrize((StateMatrix::identity() - gain) * state.p);
    let mut out = KfState { x, p };
    out.check_finite()?;
    reorder_box_edges(&mut out);
    Ok(out)
}

fn symmetrize(p: StateMatrix) -> StateMatrix {
    (p + p.transpose()) * 0.5
}

/// Swaps max/min edges that the filter has pushed past each other.
fn reorder_box_edges(state: &mut KfState) {
    for (hi, lo) in [(BX_MAX, BX_MIN), (BY_MAX, BY_MIN)] {
        if state.x[hi] < state.x[lo] {
            state.x.swap_rows(hi, lo);
            state.p.swap_rows(hi, lo);
            state.p.swap_columns(hi, lo);
        }
    }
}
