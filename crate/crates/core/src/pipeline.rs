//! Frame-by-frame driver: suppression, clustering, association, filtering
//! and track extraction, plus evaluation of the resulting records.

use std::collections::BTreeMap;

use crate::clustering::{cluster, suppress_non_maxima};
use crate::config::PipelineConfig;
use crate::ego::{correct_trajectory, dead_reckon, EgoMotion};
use crate::error::{Error, Result};
use crate::io::{CorrectedRecord, TrackRecord};
use crate::metrics::{evaluate, Detection, EvalReport, GroundTruthRecord};
use crate::model::{Cluster, Frame};
use crate::tracking::{ScoreMode, TrackEvent, Tracker};

/// Everything a tracking run produces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackRun {
    pub records: Vec<TrackRecord>,
    /// World-frame positions, only when ego motion was supplied.
    pub corrected: Vec<CorrectedRecord>,
    pub events: Vec<TrackEvent>,
    /// `(frame, track_id, cluster centroid)` for every association.
    pub measurements: Vec<(u64, u64, (f64, f64))>,
}

/// Suppression followed by clustering; returns the suppressed frame the
/// cluster indices refer to.
pub fn detect(frame: &Frame, cfg: &PipelineConfig) -> (Frame, Vec<Cluster>) {
    let reduced = suppress_non_maxima(frame, cfg.clustering.suppression_radius);
    let clusters = cluster(&reduced, &cfg.clustering);
    (reduced, clusters)
}

pub fn run(frames: &[Frame], ego: Option<&[EgoMotion]>, cfg: &PipelineConfig) -> Result<TrackRun> {
    run_with_score(frames, ego, cfg, ScoreMode::Weighted)
}

pub fn run_with_score(
    frames: &[Frame],
    ego: Option<&[EgoMotion]>,
    cfg: &PipelineConfig,
    score: ScoreMode,
) -> Result<TrackRun> {
    let ego_by_frame: Option<BTreeMap<u64, &EgoMotion>> =
        ego.map(|e| e.iter().map(|m| (m.frame, m)).collect());
    let mut tracker = Tracker::new(cfg.tracker_config(score));
    let mut run = TrackRun::default();
    for frame in frames {
        let e = match &ego_by_frame {
            Some(map) => Some(
                *map.get(&frame.index)
                    .ok_or(Error::MissingEgo(frame.index))?,
            ),
            None => None,
        };
        let (reduced, clusters) = detect(frame, cfg);
        let report = tracker.step(&reduced, &clusters, e)?;
        for &(track_id, cluster_id, _) in &report.matches {
            let c = clusters
                .iter()
                .find(|c| c.id == cluster_id)
                .expect("matched cluster");
            run.measurements
                .push((frame.index, track_id, c.features.centroid()));
        }
        run.events.extend(report.events);
        let mut records: Vec<TrackRecord> = tracker
            .tracks()
            .iter()
            .chain(report.deleted.iter())
            .map(|t| TrackRecord::from_track(frame.index, t))
            .collect();
        records.sort_by_key(|r| r.track_id);
        run.records.extend(records);
    }
    if let Some(ego) = ego {
        let stamps: Vec<(u64, f64)> = frames.iter().map(|f| (f.index, f.timestamp)).collect();
        let poses = dead_reckon(ego, &stamps)?;
        let points: Vec<(u64, f64, f64)> =
            run.records.iter().map(|r| (r.frame, r.px, r.py)).collect();
        let world = correct_trajectory(&points, &poses)?;
        run.corrected = run
            .records
            .iter()
            .zip(world)
            .map(|(r, (_, x, y))| CorrectedRecord {
                frame: r.frame,
                track_id: r.track_id,
                status: r.status,
                moving: r.moving,
                x,
                y,
            })
            .collect();
    }
    Ok(run)
}

/// Reported records as detections for evaluation.
pub fn detections(records: &[TrackRecord]) -> Vec<Detection> {
    records
        .iter()
        .filter(|r| r.is_reported())
        .map(|r| Detection {
            frame: r.frame,
            track_id: r.track_id,
            cx: r.px,
            cy: r.py,
            bbox: r.bbox,
        })
        .collect()
}

pub fn evaluate_records(
    records: &[TrackRecord],
    gt: &[GroundTruthRecord],
    match_dist: f64,
) -> EvalReport {
    evaluate(gt, &detections(records), match_dist)
}
