//! Velocity reconstruction from a radial measurement and the angular
//! displacement of the cluster centroid between frames.

use crate::error::{Error, Result};
use crate::model::azimuth;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Tangential speed, `r_prev * sin(theta) / dt`, where `theta` is the
/// azimuth swept from `prev` to `curr` (positive towards `+x`).
pub fn tangential_speed(prev: (f64, f64), curr: (f64, f64), dt: f64) -> Result<f64> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    let r_prev = prev.0.hypot(prev.1);
    if r_prev == 0.0 {
        return Err(Error::CentroidAtOrigin);
    }
    let theta = wrap_angle(azimuth(curr.0, curr.1) - azimuth(prev.0, prev.1));
    Ok(r_prev * theta.sin() / dt)
}

/// Cartesian velocity `(Vx, Vy)` from the radial velocity `vr` measured at
/// `curr` and the tangential speed implied by the move from `prev`.
///
/// The radial unit vector at azimuth `phi` is `(sin phi, cos phi)` and the
/// tangential one `(cos phi, -sin phi)`, so
/// `Vx = vr sin phi + xi Vt cos phi` and `Vy = vr cos phi - xi Vt sin phi`.
/// With `xi = 1` a constant-velocity target is reconstructed exactly.
pub fn estimate_tangential_velocity(
    prev: (f64, f64),
    curr: (f64, f64),
    vr: f64,
    dt: f64,
    xi: f64,
) -> Result<(f64, f64)> {
    let vt = tangential_speed(prev, curr, dt)?;
    let phi = azimuth(curr.0, curr.1);
    let (s, c) = phi.sin_cos();
    let vt = xi * vt;
    Ok((vr * s + vt * c, vr * c - vt * s))
}

/// Velocity seeded from the radial component alone.
pub fn radial_only_velocity(at: (f64, f64), vr: f64) -> (f64, f64) {
    let (s, c) = azimuth(at.0, at.1).sin_cos();
    (vr * s, vr * c)
}
