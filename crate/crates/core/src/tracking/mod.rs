//! Per-track Kalman filtering, velocity reconstruction and track lifecycle.

pub mod kalman;
pub mod tangential;
mod tracker;

pub use kalman::{predict, update, KfConfig, KfState};
pub use tangential::estimate_tangential_velocity;
pub use tracker::{
    LifecycleConfig, ScoreMode, StepReport, Track, TrackEvent, TrackEventKind, TrackStatus,
    Tracker, TrackerConfig,
};
