//! Weighted feature similarity between clusters and the frame-to-track
//! assignment built on it.
//!
//! `Sim = w_dis*S_dis + w_vel*S_vel + w_area*S_area + w_overlap*S_overlap + w_amp*S_amp`,
//! where every component is clamped to `[0, 1]` before weighting.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{BoundingBox, Cluster, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimilarityWeights {
    pub w_dis: f64,
    pub w_vel: f64,
    pub w_area: f64,
    pub w_overlap: f64,
    pub w_amp: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        Self {
            w_dis: 0.3,
            w_vel: 0.2,
            w_area: 0.15,
            w_overlap: 0.2,
            w_amp: 0.15,
        }
    }
}

impl SimilarityWeights {
    pub fn new(w_dis: f64, w_vel: f64, w_area: f64, w_overlap: f64, w_amp: f64) -> Self {
        Self {
            w_dis,
            w_vel,
            w_area,
            w_overlap,
            w_amp,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.w_dis,
            self.w_vel,
            self.w_area,
            self.w_overlap,
            self.w_amp,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let names = ["w_dis", "w_vel", "w_area", "w_overlap", "w_amp"];
        for (name, w) in names.iter().zip(self.as_array()) {
            if !(0.0..=1.0).contains(&w) {
                return Err(invalid(&format!("weights.{name}"), "must lie in [0, 1]"));
            }
        }
        let sum: f64 = self.as_array().iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(invalid("weights", format!("must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimilarityThresholds {
    /// Centroid distance at which `S_dis` reaches zero, meters.
    pub d_thres: f64,
    /// Radial velocity difference at which `S_vel` reaches zero, m/s.
    pub v_thres: f64,
    /// Area difference at which `S_area` reaches zero, m^2.
    pub area_thres: f64,
    /// Minimum similarity for a track/cluster pair to be associated.
    pub gate: f64,
    /// Refuse pairs whose centroids are `d_thres` or more apart, whatever
    /// the other components say.
    pub distance_gate: bool,
}

impl Default for SimilarityThresholds {
    fn default() -> Self {
        Self {
            d_thres: 2.0,
            v_thres: 2.0,
            area_thres: 2.0,
            gate: 0.4,
            distance_gate: true,
        }
    }
}

impl SimilarityThresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("thresholds.d_thres", self.d_thres),
            ("thresholds.v_thres", self.v_thres),
            ("thresholds.area_thres", self.area_thres),
        ] {
            if !(v > 0.0) {
                return Err(invalid(name, "must be > 0"));
            }
        }
        if !(self.gate > 0.0 && self.gate <= 1.0) {
            return Err(invalid("thresholds.gate", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

fn ramp(delta: f64, thres: f64) -> f64 {
    (1.0 - delta / thres).clamp(0.0, 1.0)
}

pub fn distance_similarity(f1: &FeatureVector, f2: &FeatureVector, d_thres: f64) -> f64 {
    ramp((f1.px - f2.px).hypot(f1.py - f2.py), d_thres)
}

pub fn velocity_similarity(f1: &FeatureVector, f2: &FeatureVector, v_thres: f64) -> f64 {
    ramp((f1.vr - f2.vr).abs(), v_thres)
}

pub fn area_similarity(f1: &FeatureVector, f2: &FeatureVector, area_thres: f64) -> f64 {
    ramp((f1.area - f2.area).abs(), area_thres)
}

/// IoU of the two boxes.
pub fn overlap_similarity(b1: &BoundingBox, b2: &BoundingBox) -> f64 {
    b1.iou(b2)
}

pub fn amplitude_similarity(f1: &FeatureVector, f2: &FeatureVector) -> f64 {
    let hi = f1.amplitude.max(f2.amplitude);
    if hi <= 0.0 {
        return 1.0;
    }
    (1.0 - (f1.amplitude - f2.amplitude).abs() / hi).clamp(0.0, 1.0)
}

/// The five clamped components in weight order.
pub fn similarity_components(
    f1: &FeatureVector,
    f2: &FeatureVector,
    thresholds: &SimilarityThresholds,
) -> [f64; 5] {
    [
        distance_similarity(f1, f2, thresholds.d_thres),
        velocity_similarity(f1, f2, thresholds.v_thres),
        area_similarity(f1, f2, thresholds.area_thres),
        overlap_similarity(&f1.bbox, &f2.bbox),
        amplitude_similarity(f1, f2),
    ]
}

pub fn similarity(
    f1: &FeatureVector,
    f2: &FeatureVector,
    weights: &SimilarityWeights,
    thresholds: &SimilarityThresholds,
) -> f64 {
    weighted_sum(&similarity_components(f1, f2, thresholds), weights)
}

/// Whether a pair may be associated at all.
pub fn eligible(f1: &FeatureVector, f2: &FeatureVector, thresholds: &SimilarityThresholds) -> bool {
    !thresholds.distance_gate || distance_similarity(f1, f2, thresholds.d_thres) > 0.0
}

/// Score for ineligible pairs; below any valid gate.
pub const INELIGIBLE: f64 = -1.0;

fn weighted_sum(components: &[f64; 5], weights: &SimilarityWeights) -> f64 {
    // When every component is 1 the sum is exactly the weight sum; return 1
    // directly so identical features score exactly 1 regardless of rounding.
    if components.iter().all(|&c| c == 1.0) {
        return 1.0;
    }
    let s: f64 = components
        .iter()
        .zip(weights.as_array())
        .map(|(c, w)| c * w)
        .sum();
    s.clamp(0.0, 1.0)
}

/// How contended pairs are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingStrategy {
    /// Repeatedly take the globally best remaining pair above the gate.
    #[default]
    Greedy,
    /// Maximize total similarity over all one-to-one matchings.
    Optimal,
}

/// Result of matching predicted tracks to clusters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    /// `(track_id, cluster_id, similarity)`, in selection order.
    pub pairs: Vec<(u64, usize, f64)>,
    pub unmatched_tracks: Vec<u64>,
    pub unmatched_clusters: Vec<usize>,
}

impl Assignment {
    pub fn total_similarity(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).sum()
    }
}

/// Greedy association under the weighted similarity.
pub fn associate(
    predicted: &[(u64, FeatureVector)],
    clusters: &[Cluster],
    weights: &SimilarityWeights,
    thresholds: &SimilarityThresholds,
) -> Assignment {
    let matrix = similarity_matrix(predicted, clusters, |a, b| {
        if eligible(a, b, thresholds) {
            similarity(a, b, weights, thresholds)
        } else {
            INELIGIBLE
        }
    });
    assign_greedy(predicted, clusters, &matrix, thresholds.gate)
}

/// Pairwise scores, rows are tracks and columns clusters.
pub fn similarity_matrix<F>(
    predicted: &[(u64, FeatureVector)],
    clusters: &[Cluster],
    score: F,
) -> Vec<Vec<f64>>
where
    F: Fn(&FeatureVector, &FeatureVector) -> f64,
{
    predicted
        .iter()
        .map(|(_, f)| clusters.iter().map(|c| score(f, &c.features)).collect())
        .collect()
}

pub fn assign(
    predicted: &[(u64, FeatureVector)],
    clusters: &[Cluster],
    matrix: &[Vec<f64>],
    gate: f64,
    strategy: MatchingStrategy,
) -> Result<Assignment> {
    match strategy {
        MatchingStrategy::Greedy => Ok(assign_greedy(predicted, clusters, matrix, gate)),
        MatchingStrategy::Optimal => assign_optimal(predicted, clusters, matrix, gate),
    }
}

/// Takes the highest remaining score at or above `gate`, ties going to the
/// lower track id and then the lower cluster id.
pub fn assign_greedy(
    predicted: &[(u64, FeatureVector)],
    clusters: &[Cluster],
    matrix: &[Vec<f64>],
    gate: f64,
) -> Assignment {
    let mut candidates: Vec<(f64, u64, usize, usize, usize)> = Vec::new();
    for (ti, (tid, _)) in predicted.iter().enumerate() {
        for (ci, c) in clusters.iter().enumerate() {
            let s = matrix[ti][ci];
            if s >= gate {
                candidates.push((s, *tid, c.id, ti, ci));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut track_used = vec![false; predicted.len()];
    let mut cluster_used = vec![false; clusters.len()];
    let mut pairs = Vec::new();
    for (s, tid, cid, ti, ci) in candidates {
        if track_used[ti] || cluster_used[ci] {
            continue;
        }
        track_used[ti] = true;
        cluster_used[ci] = true;
        pairs.push((tid, cid, s));
    }
    finish(predicted, clusters, pairs, &track_used, &cluster_used)
}

/// Largest cluster count accepted by the exact matcher.
pub const OPTIMAL_MAX_CLUSTERS: usize = 16;

/// Exact maximum-total-similarity matching by dynamic programming over
/// subsets of clusters. Pairs below `gate` are never formed.
pub fn assign_optimal(
    predicted: &[(u64, FeatureVector)],
    clusters: &[Cluster],
    matrix: &[Vec<f64>],
    gate: f64,
) -> Result<Assignment> {
    let m = clusters.len();
    if m > OPTIMAL_MAX_CLUSTERS {
        return Err(Error::MatchingTooLarge {
            max: OPTIMAL_MAX_CLUSTERS,
            got: m,
        });
    }
    let n = predicted.len();
    let full = 1usize << m;
    // best[t][mask]: best total using tracks t.. with clusters in mask taken.
    let mut best = vec![vec![0.0f64; full]; n + 1];
    for t in (0..n).rev() {
        for mask in 0..full {
            let mut v = best[t + 1][mask];
            for c in 0..m {
                let s = matrix[t][c];
                if mask & (1 << c) == 0 && s >= gate {
                    v = v.max(s + best[t + 1][mask | (1 << c)]);
                }
            }
            best[t][mask] = v;
        }
    }
    let mut mask = 0usize;
    let mut track_used = vec![false; n];
    let mut cluster_used = vec![false; m];
    let mut pairs = Vec::new();
    for t in 0..n {
        let target = best[t][mask];
        if best[t + 1][mask] == target {
            continue;
        }
        for c in 0..m {
            let s = matrix[t][c];
            if mask & (1 << c) == 0 && s >= gate && s + best[t + 1][mask | (1 << c)] == target {
                mask |= 1 << c;
                track_used[t] = true;
                cluster_used[c] = true;
                pairs.push((predicted[t].0, clusters[c].id, s));
                break;
            }
        }
    }
    Ok(finish(
        predicted,
        clusters,
        pairs,
        &track_used,
        &cluster_used,
    ))
}

fn finish(
    predicted: &[(u64, FeatureVector)],
    clusters: &[Cluster],
    pairs: Vec<(u64, usize, f64)>,
    track_used: &[bool],
    cluster_used: &[bool],
) -> Assignment {
    Assignment {
        pairs,
        unmatched_tracks: predicted
            .iter()
            .zip(track_used)
            .filter(|(_, &u)| !u)
            .map(|((id, _), _)| *id)
            .collect(),
        unmatched_clusters: clusters
            .iter()
            .zip(cluster_used)
            .filter(|(_, &u)| !u)
            .map(|(c, _)| c.id)
            .collect(),
    }
}
