//! Multi-target tracking for automotive FMCW radar point clouds.
//!
//! The pipeline turns post-CFAR plot lists into tracks:
//!
//! 1. [`clustering::suppress_non_maxima`] keeps the locally strongest plots;
//! 2. [`clustering::cluster`] groups them with an amplitude- and
//!    velocity-aware DBSCAN;
//! 3. [`association`] scores predicted tracks against clusters with a
//!    weighted five-part feature similarity and matches them greedily;
//! 4. [`tracking`] runs a constant-velocity Kalman filter per track over
//!    centroid, velocity and box edges, and manages the track lifecycle;
//! 5. [`ego`] separates moving from static targets on a moving radar and
//!    maps tracks back to the world frame.
//!
//! [`metrics`] scores tracks against ground truth and [`simulator`]
//! produces synthetic scenarios to feed the whole thing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod cli;
pub mod clustering;
pub mod config;
pub mod ego;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod simulator;
pub mod spatial;
pub mod tracking;

pub use error::{Error, Result};
pub use model::{extract_features, BoundingBox, Cluster, FeatureVector, Frame, Plot};
