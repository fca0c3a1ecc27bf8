//! Track evaluation against ground truth: centroid matching error (CME),
//! bounding-box overlap rate (BBOR) and frame-level detection F1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetClass {
    Pedestrian,
    Bicycle,
    Sedan,
    Clutter,
}

impl TargetClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TargetClass::Pedestrian => "pedestrian",
            TargetClass::Bicycle => "bicycle",
            TargetClass::Sedan => "sedan",
            TargetClass::Clutter => "clutter",
        }
    }
}

/// One ground-truth sample: target `target` in frame `frame`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub frame: u64,
    pub target: u64,
    pub class: TargetClass,
    pub cx: f64,
    pub cy: f64,
    #[serde(with = "bbox_array")]
    pub bbox: BoundingBox,
}

/// A detected track position in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame: u64,
    pub track_id: u64,
    pub cx: f64,
    pub cy: f64,
    pub bbox: BoundingBox,
}

/// `(frame, x, y)` samples.
pub type Trajectory = [(u64, f64, f64)];

fn common_frames<T: Copy, U: Copy>(a: &[(u64, T)], b: &[(u64, U)]) -> Vec<(T, U)> {
    let bm: BTreeMap<u64, U> = b.iter().copied().collect();
    a.iter()
        .filter_map(|&(f, x)| bm.get(&f).map(|&y| (x, y)))
        .collect()
}

/// Mean centroid distance over frames present in both trajectories.
pub fn cme(gt: &Trajectory, dt: &Trajectory) -> Result<f64> {
    let a: Vec<(u64, (f64, f64))> = gt.iter().map(|&(f, x, y)| (f, (x, y))).collect();
    let b: Vec<(u64, (f64, f64))> = dt.iter().map(|&(f, x, y)| (f, (x, y))).collect();
    let pairs = common_frames(&a, &b);
    if pairs.is_empty() {
        return Err(Error::NoCommonFrames);
    }
    let sum: f64 = pairs
        .iter()
        .map(|(g, d)| (g.0 - d.0).hypot(g.1 - d.1))
        .sum();
    Ok(sum / pairs.len() as f64)
}

/// Mean box IoU over frames present in both sequences.
pub fn bbor(gt: &[(u64, BoundingBox)], dt: &[(u64, BoundingBox)]) -> Result<f64> {
    let pairs = common_frames(gt, dt);
    if pairs.is_empty() {
        return Err(Error::NoCommonFrames);
    }
    let sum: f64 = pairs.iter().map(|(g, d)| g.iou(d)).sum();
    Ok(sum / pairs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target: u64,
    pub class: TargetClass,
    /// Frames in which the target was matched.
    pub frames: usize,
    pub cme_m: Option<f64>,
    pub bbor: Option<f64>,
}

/// Per-frame residual of a true-positive match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub frame: u64,
    pub target: u64,
    pub track: u64,
    pub dx: f64,
    pub dy: f64,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Mean over all true-positive matches; `None` without matches.
    pub cme_m: Option<f64>,
    pub bbor: Option<f64>,
    pub per_target: Vec<TargetReport>,
    #[serde(skip)]
    pub residuals: Vec<Residual>,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Frame-level evaluation.
///
/// In every frame detections are matched one-to-one to non-clutter targets
/// by ascending centroid distance up to `match_dist`. Matches are true
/// positives, leftover detections false positives (detections sitting on
/// clutter included) and leftover targets false negatives.
pub fn evaluate(gt: &[GroundTruthRecord], dt: &[Detection], match_dist: f64) -> EvalReport {
    let mut gt_by_frame: BTreeMap<u64, Vec<&GroundTruthRecord>> = BTreeMap::new();
    for g in gt.iter().filter(|g| g.class != TargetClass::Clutter) {
        gt_by_frame.entry(g.frame).or_default().push(g);
    }
    let mut dt_by_frame: BTreeMap<u64, Vec<&Detection>> = BTreeMap::new();
    for d in dt {
        dt_by_frame.entry(d.frame).or_default().push(d);
    }
    let frames: std::collections::BTreeSet<u64> = gt_by_frame
        .keys()
        .chain(dt_by_frame.keys())
        .copied()
        .collect();

    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    let mut residuals = Vec::new();
    let empty_g = Vec::new();
    let empty_d = Vec::new();
    for frame in frames {
        let gs = gt_by_frame.get(&frame).unwrap_or(&empty_g);
        let ds = dt_by_frame.get(&frame).unwrap_or(&empty_d);
        let mut cand: Vec<(f64, u64, u64, usize, usize)> = Vec::new();
        for (gi, g) in gs.iter().enumerate() {
            for (di, d) in ds.iter().enumerate() {
                let dist = (g.cx - d.cx).hypot(g.cy - d.cy);
                if dist <= match_dist {
                    cand.push((dist, g.target, d.track_id, gi, di));
                }
            }
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut g_used = vec![false; gs.len()];
        let mut d_used = vec![false; ds.len()];
        for (_, _, _, gi, di) in cand {
            if g_used[gi] || d_used[di] {
                continue;
            }
            g_used[gi] = true;
            d_used[di] = true;
            let (g, d) = (gs[gi], ds[di]);
            residuals.push(Residual {
                frame,
                target: g.target,
                track: d.track_id,
                dx: d.cx - g.cx,
                dy: d.cy - g.cy,
                iou: g.bbox.iou(&d.bbox),
            });
        }
        let matched = g_used.iter().filter(|&&u| u).count();
        tp += matched;
        fn_ += gs.len() - matched;
        fp += ds.len() - matched;
    }

    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);

    let mut classes: BTreeMap<u64, TargetClass> = BTreeMap::new();
    for g in gt.iter().filter(|g| g.class != TargetClass::Clutter) {
        classes.entry(g.target).or_insert(g.class);
    }
    let per_target = classes
        .iter()
        .map(|(&target, &class)| {
            let rs: Vec<&Residual> = residuals.iter().filter(|r| r.target == target).collect();
            let n = rs.len();
            let mean = |f: &dyn Fn(&Residual) -> f64| {
                (n > 0).then(|| rs.iter().map(|r| f(r)).sum::<f64>() / n as f64)
            };
            TargetReport {
                target,
                class,
                frames: n,
                cme_m: mean(&|r| r.dx.hypot(r.dy)),
                bbor: mean(&|r| r.iou),
            }
        })
        .collect();
    let n = residuals.len();
    let cme_m = (n > 0).then(|| residuals.iter().map(|r| r.dx.hypot(r.dy)).sum::<f64>() / n as f64);
    let bbor = (n > 0).then(|| residuals.iter().map(|r| r.iou).sum::<f64>() / n as f64);

    EvalReport {
        precision,
        recall,
        f1: f1_score(precision, recall),
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        cme_m,
        bbor,
        per_target,
        residuals,
    }
}

pub(crate) mod bbox_array {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::model::BoundingBox;

    pub fn serialize<S: Serializer>(b: &BoundingBox, s: S) -> Result<S::Ok, S::Error> {
        b.to_array().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BoundingBox, D::Error> {
        let a = <[f64; 4]>::deserialize(d)?;
        if a[1] < a[0] || a[3] < a[2] {
            return Err(serde::de::Error::custom(
                "bbox must be [xmin, xmax, ymin, ymax] with max >= min",
            ));
        }
        Ok(BoundingBox::from_array(a))
    }
}
