//! Plot suppression and amplitude/velocity-aware density clustering.
//!
//! Clustering follows DBSCAN's region growing with three changes:
//!
//! * a plot is pre-marked as noise only when it is sparse (`|N_eps| < min_pts`)
//!   *and* dimmer than the frame's mean amplitude, so bright isolated plots
//!   from small targets can still seed a cluster;
//! * a neighbor joins only if it is itself dense and its radial velocity and
//!   amplitude are within `vel_thres` / `amp_thres` of the plot it was reached
//!   from (chained comparison, as in DBSCAN expansion);
//! * neighbors that fail those tests are left for later seeds or dropped as
//!   noise.
//!
//! Iteration is in ascending plot index, which makes threshold-straddling
//! chains reproducible.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{Cluster, Frame};
use crate::spatial::GridIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusteringParams {
    /// Neighborhood radius in meters (strict `<`).
    pub epsilon: f64,
    pub min_pts: usize,
    /// Amplitude threshold; `None` means half the frame's mean amplitude.
    pub amp_thres: Option<f64>,
    pub vel_thres: f64,
    /// Non-maximum suppression radius; 0 disables suppression.
    pub suppression_radius: f64,
    /// Pre-mark sparse plots as noise only when they are also dim. When
    /// false, every sparse plot is noise (classical DBSCAN).
    pub amplitude_noise_test: bool,
}

impl Default for ClusteringParams {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            min_pts: 2,
            amp_thres: None,
            vel_thres: 1.0,
            suppression_radius: 0.2,
            amplitude_noise_test: true,
        }
    }
}

impl ClusteringParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(invalid("clustering.epsilon", "must be > 0"));
        }
        if self.min_pts < 1 {
            return Err(invalid("clustering.min_pts", "must be >= 1"));
        }
        if let Some(a) = self.amp_thres {
            if !(a > 0.0) {
                return Err(invalid("clustering.amp_thres", "must be > 0"));
            }
        }
        if !(self.vel_thres > 0.0) {
            return Err(invalid("clustering.vel_thres", "must be > 0"));
        }
        if !(self.suppression_radius >= 0.0) || self.suppression_radius.is_infinite() {
            return Err(invalid(
                "clustering.suppression_radius",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }

    /// Amplitude threshold in effect for `frame`.
    pub fn effective_amp_thres(&self, frame: &Frame) -> f64 {
        match self.amp_thres {
            Some(a) => a,
            None => (0.5 * frame.mean_amplitude()).max(f64::MIN_POSITIVE),
        }
    }
}

/// Keeps only plots that dominate every other plot within `radius`
/// (inclusive). Equal amplitudes go to the lower index.
pub fn suppress_non_maxima(frame: &Frame, radius: f64) -> Frame {
    if radius <= 0.0 || frame.plots.len() < 2 {
        return frame.clone();
    }
    let plots = &frame.plots;
    let grid = GridIndex::new(plots, radius);
    let kept = (0..plots.len())
        .filter(|&i| {
            grid.neighbors(plots, i, radius, true)
                .into_iter()
                .filter(|&j| j != i)
                .all(|j| {
                    let (ai, aj) = (plots[i].amplitude, plots[j].amplitude);
                    ai > aj || (ai == aj && i < j)
                })
        })
        .map(|i| plots[i])
        .collect();
    Frame::new(frame.index, frame.timestamp, kept)
}

/// Clusters plus the indices of plots that ended up in no cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    pub noise: Vec<usize>,
}

/// Partitions `frame` into clusters. Unclustered plots are dropped; use
/// [`cluster_with_noise`] to see them.
pub fn cluster(frame: &Frame, params: &ClusteringParams) -> Vec<Cluster> {
    cluster_with_noise(frame, params).clusters
}

pub fn cluster_with_noise(frame: &Frame, params: &ClusteringParams) -> Clustering {
    let plots = &frame.plots;
    let n = plots.len();
    if n == 0 {
        return Clustering {
            clusters: Vec::new(),
            noise: Vec::new(),
        };
    }
    let eps = params.epsilon;
    let amp_thres = params.effective_amp_thres(frame);
    let vel_thres = params.vel_thres;
    let mean_amp = frame.mean_amplitude();

    let grid = GridIndex::new(plots, eps);
    let neighborhoods: Vec<Vec<usize>> = (0..n)
        .map(|i| grid.neighbors(plots, i, eps, false))
        .collect();
    let dense: Vec<bool> = neighborhoods
        .iter()
        .map(|nb| nb.len() >= params.min_pts)
        .collect();
    let noise: Vec<bool> = (0..n)
        .map(|i| !dense[i] && (!params.amplitude_noise_test || plots[i].amplitude < mean_amp))
        .collect();

    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if label[seed].is_some() || noise[seed] {
            continue;
        }
        let k = groups.len();
        label[seed] = Some(k);
        let mut members = vec![seed];
        queue.push_back(seed);
        while let Some(q) = queue.pop_front() {
            let pq = &plots[q];
            for &j in &neighborhoods[q] {
                if label[j].is_some() || !dense[j] {
                    continue;
                }
                let pj = &plots[j];
                if (pj.radial_velocity - pq.radial_velocity).abs() < vel_thres
                    && (pj.amplitude - pq.amplitude).abs() < amp_thres
                {
                    label[j] = Some(k);
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups.sort_by_key(|g| g[0]);
    let clusters = groups
        .into_iter()
        .enumerate()
        .map(|(id, members)| {
            Cluster::from_members(id, frame, members).expect("cluster members are valid")
        })
        .collect();
    let noise = (0..n).filter(|&i| label[i].is_none()).collect();
    Clustering { clusters, noise }
}
