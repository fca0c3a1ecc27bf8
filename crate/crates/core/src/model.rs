//! Shared domain types: plots, frames, bounding boxes, clusters and the
//! nine-component cluster feature vector.
//!
//! Coordinates follow the sensor convention used throughout the crate: `y`
//! points along the radar boresight (forward) and `x` is lateral (positive
//! right). Azimuth is measured from `+y` towards `+x`, so a point at range `r`
//! and azimuth `a` sits at `(r sin a, r cos a)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One post-CFAR radar detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plot {
    pub x: f64,
    pub y: f64,
    /// Linear amplitude, never negative.
    #[serde(rename = "amp")]
    pub amplitude: f64,
    /// Range rate in m/s, positive when receding.
    #[serde(rename = "vr")]
    pub radial_velocity: f64,
}

impl Plot {
    pub fn new(x: f64, y: f64, amplitude: f64, radial_velocity: f64) -> Self {
        Self {
            x,
            y,
            amplitude,
            radial_velocity,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.radial_velocity.is_finite()
            && self.amplitude.is_finite()
            && self.amplitude >= 0.0
    }

    /// Azimuth from boresight in radians.
    pub fn azimuth(&self) -> f64 {
        azimuth(self.x, self.y)
    }

    pub fn distance_to(&self, other: &Plot) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Azimuth of `(x, y)` measured from the `+y` axis towards `+x`.
pub fn azimuth(x: f64, y: f64) -> f64 {
    x.atan2(y)
}

/// One radar scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub index: u64,
    pub timestamp: f64,
    pub plots: Vec<Plot>,
}

impl Frame {
    pub fn new(index: u64, timestamp: f64, plots: Vec<Plot>) -> Self {
        Self {
            index,
            timestamp,
            plots,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.plots.is_empty()
    }

    pub fn len(&self) -> usize {
        self.plots.len()
    }

    /// Mean plot amplitude, zero for an empty frame.
    pub fn mean_amplitude(&self) -> f64 {
        if self.plots.is_empty() {
            return 0.0;
        }
        self.plots.iter().map(|p| p.amplitude).sum::<f64>() / self.plots.len() as f64
    }
}

/// Axis-aligned box in the sensor plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BoundingBox {
    /// Builds a box from possibly unordered edges.
    pub fn new(x_a: f64, x_b: f64, y_a: f64, y_b: f64) -> Self {
        Self {
            x_min: x_a.min(x_b),
            x_max: x_a.max(x_b),
            y_min: y_a.min(y_b),
            y_max: y_a.max(y_b),
        }
    }

    pub fn centered(cx: f64, cy: f64, width: f64, depth: f64) -> Self {
        Self::new(
            cx - width / 2.0,
            cx + width / 2.0,
            cy - depth / 2.0,
            cy + depth / 2.0,
        )
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn depth(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.depth()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x_min: self.x_min + dx,
            x_max: self.x_max + dx,
            y_min: self.y_min + dy,
            y_max: self.y_max + dy,
        }
    }

    /// Area of the overlap with `other`, zero when disjoint.
    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Intersection over union. Two degenerate boxes score 1 when they
    /// coincide and 0 otherwise.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            return if self == other { 1.0 } else { 0.0 };
        }
        (inter / union).clamp(0.0, 1.0)
    }

    /// `[x_min, x_max, y_min, y_max]`, the order used by every file format.
    pub fn to_array(&self) -> [f64; 4] {
        [self.x_min, self.x_max, self.y_min, self.y_max]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

/// Cluster descriptor: centroid, mean radial velocity, box area, mean
/// amplitude and the box edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub px: f64,
    pub py: f64,
    pub vr: f64,
    pub area: f64,
    pub amplitude: f64,
    pub bbox: BoundingBox,
}

impl FeatureVector {
    pub fn centroid(&self) -> (f64, f64) {
        (self.px, self.py)
    }

    /// The nine components in descriptor order
    /// `[Px, Py, Vr, S, A, BXmax, BXmin, BYmax, BYmin]`.
    pub fn to_components(&self) -> [f64; 9] {
        [
            self.px,
            self.py,
            self.vr,
            self.area,
            self.amplitude,
            self.bbox.x_max,
            self.bbox.x_min,
            self.bbox.y_max,
            self.bbox.y_min,
        ]
    }
}

/// A group of plots believed to come from one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    /// Sorted indices into the originating frame.
    pub member_indices: Vec<usize>,
    pub features: FeatureVector,
}

impl Cluster {
    pub fn from_members(id: usize, frame: &Frame, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        let features = extract_features(frame, &members)?;
        Ok(Self {
            id,
            member_indices: members,
            features,
        })
    }

    pub fn len(&self) -> usize {
        self.member_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }

    pub fn plots<'a>(&'a self, frame: &'a Frame) -> impl Iterator<Item = &'a Plot> + 'a {
        self.member_indices.iter().map(move |&i| &frame.plots[i])
    }
}

/// Computes the feature vector of the plots selected by `members`.
pub fn extract_features(frame: &Frame, members: &[usize]) -> Result<FeatureVector> {
    if members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let len = frame.plots.len();
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sv = 0.0;
    let mut sa = 0.0;
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &i in members {
        let p = frame
            .plots
            .get(i)
            .ok_or(Error::PlotIndex { index: i, len })?;
        sx += p.x;
        sy += p.y;
        sv += p.radial_velocity;
        sa += p.amplitude;
        x_min = x_min.min(p.x);
        x_max = x_max.max(p.x);
        y_min = y_min.min(p.y);
        y_max = y_max.max(p.y);
    }
    let n = members.len() as f64;
    let bbox = BoundingBox {
        x_min,
        x_max,
        y_min,
        y_max,
    };
    // Means of points can drift outside [min, max] by rounding; pin them.
    let px = (sx / n).clamp(x_min, x_max);
    let py = (sy / n).clamp(y_min, y_max);
    Ok(FeatureVector {
        px,
        py,
        vr: sv / n,
        area: bbox.area(),
        amplitude: sa / n,
        bbox,
    })
}
