//! JSON Lines records for frames, ego motion, ground truth and tracks.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ego::EgoMotion;
use crate::metrics::bbox_array;
use crate::model::{BoundingBox, Frame};
use crate::tracking::{Track, TrackStatus};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

/// Parses one record per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let p = path.display().to_string();
    let file = File::open(path).map_err(|source| IoError::Read {
        path: p.clone(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| IoError::Read {
            path: p.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| IoError::Parse {
            path: p.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut s = String::new();
    for item in items {
        s.push_str(&serde_json::to_string(item).expect("records serialize"));
        s.push('\n');
    }
    s
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), IoError> {
    let err = |source| IoError::Write {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(err)?);
    w.write_all(to_jsonl(items).as_bytes()).map_err(err)?;
    w.flush().map_err(err)
}

/// Checks plot validity and timestamp ordering of an ingested frame list.
pub fn validate_frames(frames: &[Frame]) -> Result<(), String> {
    let mut prev: Option<f64> = None;
    for f in frames {
        if !f.timestamp.is_finite() {
            return Err(format!("frame {}: timestamp must be finite", f.index));
        }
        if let Some(p) = prev {
            if !(f.timestamp > p) {
                return Err(format!(
                    "frame {}: timestamp {} not after previous {}",
                    f.index, f.timestamp, p
                ));
            }
        }
        prev = Some(f.timestamp);
        if let Some(i) = f.plots.iter().position(|p| !p.is_valid()) {
            return Err(format!(
                "frame {}: plot {i} must have finite coordinates and amplitude >= 0",
                f.index
            ));
        }
    }
    Ok(())
}

/// Checks that every frame has exactly one ego record.
pub fn validate_ego(frames: &[Frame], ego: &[EgoMotion]) -> Result<(), String> {
    let mut seen = std::collections::BTreeMap::new();
    for e in ego {
        if seen.insert(e.frame, e).is_some() {
            return Err(format!("duplicate ego record for frame {}", e.frame));
        }
        e.validate().map_err(|e| e.to_string())?;
    }
    for f in frames {
        if !seen.contains_key(&f.index) {
            return Err(format!("missing ego record for frame {}", f.index));
        }
    }
    Ok(())
}

/// One line of the track output: a track's estimate in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub frame: u64,
    pub track_id: u64,
    pub status: TrackStatus,
    pub px: f64,
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
    #[serde(with = "bbox_array")]
    pub bbox: BoundingBox,
    pub similarity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moving: Option<bool>,
}

impl TrackRecord {
    pub fn from_track(frame: u64, track: &Track) -> Self {
        let (px, py) = track.state.position();
        let (vx, vy) = track.state.velocity();
        Self {
            frame,
            track_id: track.id,
            status: track.status,
            px,
            py,
            vx,
            vy,
            bbox: track.state.bbox(),
            similarity: track.similarity,
            moving: track.moving,
        }
    }

    /// Whether the record counts as a reported target: an established
    /// track not known to be static.
    pub fn is_reported(&self) -> bool {
        matches!(self.status, TrackStatus::Confirmed | TrackStatus::Coasting)
            && self.moving != Some(false)
    }
}

/// World-frame position of a track after ego-motion correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedRecord {
    pub frame: u64,
    pub track_id: u64,
    pub status: TrackStatus,
    pub moving: Option<bool>,
    pub x: f64,
    pub y: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{GroundTruthRecord, TargetClass};
    use crate::model::Plot;
    use proptest::prelude::*;

    #[test]
    fn frame_format() {
        let line = r#"{"plots":[{"vr":-1.5,"amp":3.0,"x":1.0,"y":2.0,"snr":9}],"timestamp":0.1,"index":4,"extra":true}"#;
        let f: Frame = serde_json::from_str(line).unwrap();
        assert_eq!(f, Frame::new(4, 0.1, vec![Plot::new(1.0, 2.0, 3.0, -1.5)]));
        let out = serde_json::to_string(&f).unwrap();
        assert_eq!(
            out,
            r#"{"index":4,"timestamp":0.1,"plots":[{"x":1.0,"y":2.0,"amp":3.0,"vr":-1.5}]}"#
        );
    }

    #[test]
    fn track_record_format() {
        let r = TrackRecord {
            frame: 2,
            track_id: 5,
            status: TrackStatus::Confirmed,
            px: 1.0,
            py: 2.0,
            vx: 0.5,
            vy: 0.0,
            bbox: BoundingBox::new(0.0, 2.0, 1.0, 3.0),
            similarity: None,
            moving: None,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"frame":2,"track_id":5,"status":"confirmed","px":1.0,"py":2.0,"vx":0.5,"vy":0.0,"bbox":[0.0,2.0,1.0,3.0],"similarity":null}"#
        );
    }

    #[test]
    fn malformed_line_reports_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.jsonl");
        std::fs::write(
            &path,
            "{\"index\":0,\"timestamp\":0.0,\"plots\":[]}\n\nnot json\n",
        )
        .unwrap();
        let err = read_jsonl::<Frame>(&path).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn ego_alignment() {
        let frames: Vec<Frame> = (0..9).map(|k| Frame::new(k, k as f64, vec![])).collect();
        let ego: Vec<EgoMotion> = (0..9)
            .filter(|&k| k != 7)
            .map(|k| EgoMotion::new(k, 0.0, 1.0))
            .collect();
        assert!(validate_ego(&frames, &ego).unwrap_err().contains("frame 7"));
    }

    #[test]
    fn gt_bbox_order_checked() {
        let bad = r#"{"frame":0,"target":0,"class":"sedan","cx":0,"cy":0,"bbox":[1,0,0,1]}"#;
        assert!(serde_json::from_str::<GroundTruthRecord>(bad).is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        -1e6..1e6f64
    }

    proptest! {
        #[test]
        fn records_round_trip(
            x in finite(), y in finite(), a in 0.0..1e6f64, v in finite(),
            t in 0.0..1e6f64, idx in 0u64..1_000_000,
            w in 0.0..100.0f64, h in 0.0..100.0f64,
            sim in prop::option::of(0.0..1.0f64),
        ) {
            let f = Frame::new(idx, t, vec![Plot::new(x, y, a, v), Plot::new(y, x, a, -v)]);
            let back: Frame = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
            prop_assert_eq!(&back, &f);

            let e = EgoMotion::new(idx, v, x);
            let back: EgoMotion = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
            prop_assert_eq!(back, e);

            let g = GroundTruthRecord {
                frame: idx, target: 3, class: TargetClass::Bicycle, cx: x, cy: y,
                bbox: BoundingBox::centered(x, y, w, h),
            };
            let back: GroundTruthRecord = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
            prop_assert_eq!(back, g);

            let r = TrackRecord {
                frame: idx, track_id: 1, status: TrackStatus::Coasting, px: x, py: y, vx: v, vy: -v,
                bbox: BoundingBox::centered(x, y, w, h), similarity: sim, moving: Some(true),
            };
            let back: TrackRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
