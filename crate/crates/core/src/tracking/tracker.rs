use serde::{Deserialize, Serialize};

use crate::association::{
    assign, eligible, overlap_similarity, similarity, similarity_matrix, MatchingStrategy,
    SimilarityThresholds, SimilarityWeights, INELIGIBLE,
};
use crate::ego::{cluster_residual, static_radial_velocity, EgoMotion};
use crate::error::{invalid, Error, Result};
use crate::model::{azimuth, Cluster, FeatureVector, Frame};

use super::kalman::{self, measurement, KfConfig, KfState};
use super::tangential::{estimate_tangential_velocity, radial_only_velocity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Coasting,
    Deleted,
}

impl TrackStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrackStatus::Tentative => "tentative",
            TrackStatus::Confirmed => "confirmed",
            TrackStatus::Coasting => "coasting",
            TrackStatus::Deleted => "deleted",
        }
    }

    /// Whether `self -> next` is an allowed lifecycle transition.
    pub fn can_become(&self, next: TrackStatus) -> bool {
        use TrackStatus::*;
        *self == next
            || matches!(
                (self, next),
                (Tentative, Confirmed)
                    | (Tentative, Deleted)
                    | (Confirmed, Coasting)
                    | (Coasting, Confirmed)
                    | (Coasting, Deleted)
            )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LifecycleConfig {
    pub confirm_hits: u32,
    pub max_misses: u32,
}

impl Default for LifecycleConfig {
    fn default() -> Self {
        Self {
            confirm_hits: 3,
            max_misses: 3,
        }
    }
}

impl LifecycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.confirm_hits < 1 {
            return Err(invalid("lifecycle.confirm_hits", "must be >= 1"));
        }
        if self.max_misses < 1 {
            return Err(invalid("lifecycle.max_misses", "must be >= 1"));
        }
        Ok(())
    }
}

/// Which score drives association.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    #[default]
    Weighted,
    /// Bounding-box IoU alone; used to cross-check the `w_overlap = 1` case.
    IouOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub kf: KfConfig,
    pub lifecycle: LifecycleConfig,
    pub weights: SimilarityWeights,
    pub thresholds: SimilarityThresholds,
    pub matching: MatchingStrategy,
    pub score: ScoreMode,
    /// Moving/static threshold on the compensated radial velocity.
    pub delta_v: f64,
    /// Use ego-compensated radial velocities in the similarity.
    pub compensate_before_association: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            kf: KfConfig::default(),
            lifecycle: LifecycleConfig::default(),
            weights: SimilarityWeights::default(),
            thresholds: SimilarityThresholds::default(),
            matching: MatchingStrategy::Greedy,
            score: ScoreMode::Weighted,
            delta_v: 0.5,
            compensate_before_association: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub state: KfState,
    pub status: TrackStatus,
    pub hits: u32,
    pub consecutive_misses: u32,
    /// `(frame index, estimate)` for every frame the track was alive.
    pub history: Vec<(u64, FeatureVector)>,
    /// Centroid and time of the last associated cluster.
    pub last_centroid: (f64, f64),
    pub last_centroid_time: f64,
    /// Radial velocity and amplitude of the last associated cluster.
    pub last_vr: f64,
    pub amplitude: f64,
    /// Similarity of this frame's association, if any.
    pub similarity: Option<f64>,
    /// Moving/static verdict, latched once any associated cluster moved.
    /// `None` when no ego motion is known.
    pub moving: Option<bool>,
}

impl Track {
    pub fn is_live(&self) -> bool {
        self.status != TrackStatus::Deleted
    }

    /// Current estimate as a feature vector.
    pub fn features(&self) -> FeatureVector {
        self.state.to_features(self.predicted_vr(), self.amplitude)
    }

    /// Radial velocity implied by the state velocity at the state position.
    pub fn predicted_vr(&self) -> f64 {
        let (px, py) = self.state.position();
        let (vx, vy) = self.state.velocity();
        let (s, c) = azimuth(px, py).sin_cos();
        if px == 0.0 && py == 0.0 {
            return self.last_vr;
        }
        vx * s + vy * c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackEventKind {
    Created,
    Confirmed,
    Deleted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackEvent {
    pub frame: u64,
    pub track_id: u64,
    pub kind: TrackEventKind,
}

/// What happened during one [`Tracker::step`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepReport {
    pub events: Vec<TrackEvent>,
    /// `(track_id, cluster_id, similarity)` for this frame's associations.
    pub matches: Vec<(u64, usize, f64)>,
    /// Tracks deleted this frame, in their final state.
    pub deleted: Vec<Track>,
}

/// Frame-by-frame multi-target tracker.
#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    tracks: Vec<Track>,
    next_id: u64,
    last_time: Option<(u64, f64)>,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Self {
        Self {
            cfg,
            tracks: Vec::new(),
            next_id: 0,
            last_time: None,
        }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    /// Live tracks in creation order.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Advances the tracker to `frame` using its `clusters`. `ego` enables
    /// moving/static classification (and compensated association when
    /// configured).
    pub fn step(
        &mut self,
        frame: &Frame,
        clusters: &[Cluster],
        ego: Option<&EgoMotion>,
    ) -> Result<StepReport> {
        let t = frame.timestamp;
        if !t.is_finite() {
            return Err(Error::InvalidTimeStep(t));
        }
        if let Some((_, prev)) = self.last_time {
            if !(t > prev) {
                return Err(Error::NonMonotoneTimestamp {
                    frame: frame.index,
                    previous: prev,
                    current: t,
                });
            }
            let dt = t - prev;
            for track in &mut self.tracks {
                track.state = kalman::predict(&track.state, dt, &self.cfg.kf)?;
                track.similarity = None;
            }
        }
        self.last_time = Some((frame.index, t));

        let compensate = self.cfg.compensate_before_association;
        let predicted: Vec<(u64, FeatureVector)> = self
            .tracks
            .iter()
            .map(|tr| {
                let mut f = tr.features();
                if let (true, Some(e)) = (compensate, ego) {
                    f.vr += static_radial_velocity(e, azimuth(f.px, f.py));
                }
                (tr.id, f)
            })
            .collect();
        let scored: Vec<Cluster> = match (compensate, ego) {
            (true, Some(e)) => clusters
                .iter()
                .map(|c| {
                    let mut c = c.clone();
                    c.features.vr = cluster_residual(frame, &c, e);
                    c
                })
                .collect(),
            _ => clusters.to_vec(),
        };
        let th = &self.cfg.thresholds;
        let matrix = similarity_matrix(&predicted, &scored, |a, b| {
            if !eligible(a, b, th) {
                return INELIGIBLE;
            }
            match self.cfg.score {
                ScoreMode::Weighted => similarity(a, b, &self.cfg.weights, th),
                ScoreMode::IouOnly => overlap_similarity(&a.bbox, &b.bbox),
            }
        });
        let assignment = assign(
            &predicted,
            &scored,
            &matrix,
            self.cfg.thresholds.gate,
            self.cfg.matching,
        )?;

        let mut report = StepReport::default();
        let by_cluster_id = |id: usize| clusters.iter().find(|c| c.id == id);
        let confirm_hits = self.cfg.lifecycle.confirm_hits;
        let max_misses = self.cfg.lifecycle.max_misses;
        let delta_v = self.cfg.delta_v;

        for &(track_id, cluster_id, sim) in &assignment.pairs {
            let cluster = by_cluster_id(cluster_id).expect("assigned cluster exists");
            let idx = self
                .tracks
                .iter()
                .position(|tr| tr.id == track_id)
                .expect("assigned track exists");
            let kf = &self.cfg.kf;
            let track = &mut self.tracks[idx];
            let f = &cluster.features;
            let curr = f.centroid();
            let span = t - track.last_centroid_time;
            let (vx, vy) = if span > 0.0 && track.last_centroid != (0.0, 0.0) {
                estimate_tangential_velocity(track.last_centroid, curr, f.vr, span, kf.xi)?
            } else {
                radial_only_velocity(curr, f.vr)
            };
            let z = measurement(f.px, f.py, vx, vy, &f.bbox);
            track.state = kalman::update(&track.state, &z, kf)?;
            track.hits += 1;
            track.consecutive_misses = 0;
            track.last_centroid = curr;
            track.last_centroid_time = t;
            track.last_vr = f.vr;
            track.amplitude = f.amplitude;
            track.similarity = Some(sim);
            if let Some(e) = ego {
                let moved = cluster_residual(frame, cluster, e).abs() > delta_v;
                track.moving = Some(track.moving.unwrap_or(false) || moved);
            }
            let promote = match track.status {
                TrackStatus::Tentative => track.hits >= confirm_hits,
                TrackStatus::Coasting => true,
                _ => false,
            };
            if promote {
                if track.status == TrackStatus::Tentative {
                    report.events.push(TrackEvent {
                        frame: frame.index,
                        track_id,
                        kind: TrackEventKind::Confirmed,
                    });
                }
                track.status = TrackStatus::Confirmed;
            }
            report.matches.push((track_id, cluster_id, sim));
        }

        for &track_id in &assignment.unmatched_tracks {
            let track = self
                .tracks
                .iter_mut()
                .find(|tr| tr.id == track_id)
                .expect("unmatched track exists");
            track.consecutive_misses += 1;
            if track.status == TrackStatus::Confirmed {
                track.status = TrackStatus::Coasting;
            }
            if track.consecutive_misses >= max_misses {
                track.status = TrackStatus::Deleted;
                report.events.push(TrackEvent {
                    frame: frame.index,
                    track_id,
                    kind: TrackEventKind::Deleted,
                });
            }
        }

        for &cluster_id in &assignment.unmatched_clusters {
            let cluster = by_cluster_id(cluster_id).expect("unmatched cluster exists");
            let f = &cluster.features;
            let (vx, vy) = radial_only_velocity(f.centroid(), f.vr);
            let state = KfState::from_parts(
                f.px,
                f.py,
                vx,
                vy,
                &f.bbox,
                self.cfg.kf.initial_covariance(),
            );
            let id = self.next_id;
            self.next_id += 1;
            let status = if confirm_hits <= 1 {
                TrackStatus::Confirmed
            } else {
                TrackStatus::Tentative
            };
            let moving = ego.map(|e| cluster_residual(frame, cluster, e).abs() > delta_v);
            self.tracks.push(Track {
                id,
                state,
                status,
                hits: 1,
                consecutive_misses: 0,
                history: Vec::new(),
                last_centroid: f.centroid(),
                last_centroid_time: t,
                last_vr: f.vr,
                amplitude: f.amplitude,
                similarity: None,
                moving,
            });
            report.events.push(TrackEvent {
                frame: frame.index,
                track_id: id,
                kind: TrackEventKind::Created,
            });
            if status == TrackStatus::Confirmed {
                report.events.push(TrackEvent {
                    frame: frame.index,
                    track_id: id,
                    kind: TrackEventKind::Confirmed,
                });
            }
        }

        for track in &mut self.tracks {
            let f = track.features();
            track.history.push((frame.index, f));
        }
        let (live, dead): (Vec<Track>, Vec<Track>) = std::mem::take(&mut self.tracks)
            .into_iter()
            .partition(Track::is_live);
        self.tracks = live;
        report.deleted = dead;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Plot;

    fn blob_frame(index: u64, t: f64, centers: &[(f64, f64, f64, f64)]) -> (Frame, Vec<Cluster>) {
        let mut plots = Vec::new();
        let mut groups = Vec::new();
        for &(cx, cy, amp, vr) in centers {
            let start = plots.len();
            for (dx, dy) in [
                (-0.3, -0.3),
                (0.3, -0.3),
                (-0.3, 0.3),
                (0.3, 0.3),
                (0.0, 0.0),
            ] {
                plots.push(Plot::new(cx + dx, cy + dy, amp, vr));
            }
            groups.push((start..plots.len()).collect::<Vec<_>>());
        }
        let frame = Frame::new(index, t, plots);
        let clusters = groups
            .into_iter()
            .enumerate()
            .map(|(id, m)| Cluster::from_members(id, &frame, m).unwrap())
            .collect();
        (frame, clusters)
    }

    #[test]
    fn lifecycle_confirm_coast_delete() {
        let mut tr = Tracker::new(TrackerConfig::default());
        let mut confirmed_at = None;
        for k in 0..4u64 {
            let (f, c) = blob_frame(k, k as f64 * 0.1, &[(0.0, 10.0, 5.0, 0.0)]);
            let r = tr.step(&f, &c, None).unwrap();
            if r.events.iter().any(|e| e.kind == TrackEventKind::Confirmed) {
                confirmed_at = Some(k);
            }
        }
        assert_eq!(confirmed_at, Some(2));
        assert_eq!(tr.tracks().len(), 1);
        assert_eq!(tr.tracks()[0].status, TrackStatus::Confirmed);

        // two empty frames: coasting, not yet deleted
        for k in 4..6u64 {
            let f = Frame::new(k, k as f64 * 0.1, vec![]);
            let r = tr.step(&f, &[], None).unwrap();
            assert!(r.deleted.is_empty());
            assert_eq!(tr.tracks()[0].status, TrackStatus::Coasting);
        }
        let f = Frame::new(6, 0.6, vec![]);
        let r = tr.step(&f, &[], None).unwrap();
        assert_eq!(r.deleted.len(), 1);
        assert_eq!(r.deleted[0].status, TrackStatus::Deleted);
        assert!(tr.tracks().is_empty());
    }

    #[test]
    fn coasting_track_recovers() {
        let mut tr = Tracker::new(TrackerConfig::default());
        for k in 0..3u64 {
            let (f, c) = blob_frame(k, k as f64 * 0.1, &[(0.0, 10.0, 5.0, 0.0)]);
            tr.step(&f, &c, None).unwrap();
        }
        tr.step(&Frame::new(3, 0.3, vec![]), &[], None).unwrap();
        assert_eq!(tr.tracks()[0].status, TrackStatus::Coasting);
        let (f, c) = blob_frame(4, 0.4, &[(0.0, 10.0, 5.0, 0.0)]);
        tr.step(&f, &c, None).unwrap();
        assert_eq!(tr.tracks()[0].status, TrackStatus::Confirmed);
        assert_eq!(tr.tracks()[0].consecutive_misses, 0);
    }

    #[test]
    fn non_monotone_time_rejected() {
        let mut tr = Tracker::new(TrackerConfig::default());
        let (f, c) = blob_frame(0, 1.0, &[(0.0, 10.0, 5.0, 0.0)]);
        tr.step(&f, &c, None).unwrap();
        let (f, c) = blob_frame(1, 1.0, &[(0.0, 10.0, 5.0, 0.0)]);
        assert!(matches!(
            tr.step(&f, &c, None),
            Err(Error::NonMonotoneTimestamp { frame: 1, .. })
        ));
    }

    #[test]
    fn ids_never_reused() {
        let mut tr = Tracker::new(TrackerConfig::default());
        let mut seen = std::collections::BTreeSet::new();
        for k in 0..12u64 {
            // a new far-away blob every frame, old ones vanish
            let x = if k % 2 == 0 { -10.0 } else { 10.0 };
            let (f, c) = blob_frame(k, k as f64 * 0.1, &[(x, 5.0 + k as f64 * 5.0, 5.0, 0.0)]);
            let r = tr.step(&f, &c, None).unwrap();
            for e in r
                .events
                .iter()
                .filter(|e| e.kind == TrackEventKind::Created)
            {
                assert!(seen.insert(e.track_id));
            }
        }
        assert_eq!(seen.len(), 12);
    }

    #[test]
    fn ego_latches_moving() {
        let mut tr = Tracker::new(TrackerConfig::default());
        let ego = EgoMotion::new(0, 0.0, 0.0);
        let (f, c) = blob_frame(0, 0.0, &[(0.0, 10.0, 5.0, 0.0), (5.0, 10.0, 5.0, 2.0)]);
        tr.step(&f, &c, Some(&ego)).unwrap();
        assert_eq!(tr.tracks()[0].moving, Some(false));
        assert_eq!(tr.tracks()[1].moving, Some(true));
    }

    #[test]
    fn status_transitions() {
        use TrackStatus::*;
        assert!(Tentative.can_become(Confirmed));
        assert!(!Confirmed.can_become(Tentative));
        assert!(!Confirmed.can_become(Deleted));
        assert!(Coasting.can_become(Deleted));
    }
}
