//! Command-line entry points.
//!
//! Exit codes: 0 success, 2 usage or validation failure, 3 runtime failure.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::SimilarityWeights;
use crate::config::{load_document, PipelineConfig};
use crate::ego::EgoMotion;
use crate::io::{read_jsonl, validate_ego, validate_frames, write_jsonl, IoError, TrackRecord};
use crate::metrics::{EvalReport, GroundTruthRecord};
use crate::model::Frame;
use crate::pipeline::{self, evaluate_records, run_with_score};
use crate::simulator::{simulate, ScenarioConfig};
use crate::tracking::ScoreMode;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "radar-track",
    version,
    about = "Cluster-based radar multi-target tracking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scenario: frames.jsonl, ego.jsonl and gt.jsonl.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Track a frame file; writes tracks and, with --ego, corrected.jsonl
    /// next to it.
    Track {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        ego: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score tracks against ground truth; writes the report and
    /// residuals.csv next to it.
    Evaluate {
        #[arg(long)]
        tracks: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Evaluate a grid of similarity weights and gates.
    Sweep {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        ego: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Write { .. } => Self::runtime(e.to_string()),
            _ => Self::validation(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Track {
            frames,
            ego,
            config,
            out,
        } => cmd_track(&frames, ego.as_deref(), &config, &out),
        Command::Evaluate {
            tracks,
            gt,
            config,
            report,
        } => cmd_evaluate(&tracks, &gt, &config, &report),
        Command::Sweep {
            frames,
            gt,
            ego,
            config,
            grid,
            out,
        } => cmd_sweep(&frames, &gt, ego.as_deref(), &config, &grid, &out),
    }
}

pub fn load_config(path: &Path) -> CliResult<PipelineConfig> {
    let cfg: PipelineConfig = load_document(path).map_err(CliError::validation)?;
    cfg.validate()
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

fn load_frames(path: &Path) -> CliResult<Vec<Frame>> {
    let frames: Vec<Frame> = read_jsonl(path)?;
    validate_frames(&frames)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    Ok(frames)
}

fn load_ego(path: Option<&Path>, frames: &[Frame]) -> CliResult<Option<Vec<EgoMotion>>> {
    let Some(path) = path else { return Ok(None) };
    let ego: Vec<EgoMotion> = read_jsonl(path)?;
    validate_ego(frames, &ego)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    Ok(Some(ego))
}

fn load_gt(path: &Path) -> CliResult<Vec<GroundTruthRecord>> {
    let gt: Vec<GroundTruthRecord> = read_jsonl(path)?;
    if gt.is_empty() {
        return Err(CliError::validation(format!(
            "{}: ground truth is empty",
            path.display()
        )));
    }
    Ok(gt)
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent()
        .map(|p| p.join(name))
        .unwrap_or_else(|| PathBuf::from(name))
}

pub fn cmd_simulate(config: &Path, out: &Path) -> CliResult<()> {
    let cfg: ScenarioConfig = load_document(config).map_err(CliError::validation)?;
    cfg.validate()
        .map_err(|e| CliError::validation(format!("{}: {e}", config.display())))?;
    let sim = simulate(&cfg).map_err(|e| CliError::runtime(e.to_string()))?;
    create_dir(out)?;
    write_jsonl(&out.join("frames.jsonl"), &sim.frames)?;
    write_jsonl(&out.join("ego.jsonl"), &sim.ego)?;
    write_jsonl(&out.join("gt.jsonl"), &sim.gt)?;
    Ok(())
}

pub fn cmd_track(frames: &Path, ego: Option<&Path>, config: &Path, out: &Path) -> CliResult<()> {
    let cfg = load_config(config)?;
    let frames = load_frames(frames)?;
    let ego = load_ego(ego, &frames)?;
    let result = pipeline::run(&frames, ego.as_deref(), &cfg)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_jsonl(out, &result.records)?;
    if ego.is_some() {
        write_jsonl(&sibling(out, "corrected.jsonl"), &result.corrected)?;
    }
    Ok(())
}

/// Report document: the evaluation plus the configuration that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    #[serde(flatten)]
    pub report: EvalReport,
    pub match_dist: f64,
    pub config: PipelineConfig,
}

pub fn cmd_evaluate(tracks: &Path, gt: &Path, config: &Path, report: &Path) -> CliResult<()> {
    let cfg = load_config(config)?;
    let records: Vec<TrackRecord> = read_jsonl(tracks)?;
    let gt = load_gt(gt)?;
    let eval = evaluate_records(&records, &gt, cfg.eval.match_dist);
    if let Some(parent) = report.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let residuals = sibling(report, "residuals.csv");
    let mut w = csv::Writer::from_path(&residuals)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", residuals.display())))?;
    for r in &eval.residuals {
        w.serialize(r)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", residuals.display())))?;
    }
    w.flush()
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", residuals.display())))?;
    let doc = ReportDocument {
        report: eval,
        match_dist: cfg.eval.match_dist,
        config: cfg,
    };
    let text = serde_json::to_string_pretty(&doc).expect("report serializes");
    std::fs::write(report, text + "\n")
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", report.display())))
}

/// One grid point of a weight sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRow {
    pub w_dis: f64,
    pub w_vel: f64,
    pub w_area: f64,
    pub w_overlap: f64,
    pub w_amp: f64,
    pub gate: f64,
}

impl GridRow {
    pub fn weights(&self) -> SimilarityWeights {
        SimilarityWeights::new(
            self.w_dis,
            self.w_vel,
            self.w_area,
            self.w_overlap,
            self.w_amp,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub w_dis: f64,
    pub w_vel: f64,
    pub w_area: f64,
    pub w_overlap: f64,
    pub w_amp: f64,
    pub gate: f64,
    pub f1: f64,
    pub cme: Option<f64>,
    pub bbor: Option<f64>,
    /// For `w_overlap = 1` rows: whether the run equals pure-IoU association.
    pub iou_crosscheck: Option<bool>,
}

pub fn read_grid(path: &Path) -> CliResult<Vec<GridRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<GridRow>().enumerate() {
        let row_no = i + 1;
        let row = rec
            .map_err(|e| CliError::validation(format!("{}: row {row_no}: {e}", path.display())))?;
        row.weights()
            .validate()
            .map_err(|e| CliError::validation(format!("{}: row {row_no}: {e}", path.display())))?;
        if !(row.gate > 0.0 && row.gate <= 1.0) {
            return Err(CliError::validation(format!(
                "{}: row {row_no}: gate must lie in (0, 1]",
                path.display()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Evaluates every grid row; rows come back in grid order.
pub fn sweep(
    frames: &[Frame],
    ego: Option<&[EgoMotion]>,
    gt: &[GroundTruthRecord],
    base: &PipelineConfig,
    grid: &[GridRow],
) -> crate::Result<Vec<SweepRow>> {
    grid.par_iter()
        .map(|row| {
            let mut cfg = base.clone();
            cfg.weights = row.weights();
            cfg.thresholds.gate = row.gate;
            let result = pipeline::run(frames, ego, &cfg)?;
            let eval = evaluate_records(&result.records, gt, cfg.eval.match_dist);
            let iou_crosscheck = if row.w_overlap == 1.0 {
                let iou = run_with_score(frames, ego, &cfg, ScoreMode::IouOnly)?;
                Some(iou.records == result.records)
            } else {
                None
            };
            Ok(SweepRow {
                w_dis: row.w_dis,
                w_vel: row.w_vel,
                w_area: row.w_area,
                w_overlap: row.w_overlap,
                w_amp: row.w_amp,
                gate: row.gate,
                f1: eval.f1,
                cme: eval.cme_m,
                bbor: eval.bbor,
                iou_crosscheck,
            })
        })
        .collect()
}

pub fn cmd_sweep(
    frames: &Path,
    gt: &Path,
    ego: Option<&Path>,
    config: &Path,
    grid: &Path,
    out: &Path,
) -> CliResult<()> {
    let cfg = load_config(config)?;
    let frames = load_frames(frames)?;
    let ego = load_ego(ego, &frames)?;
    let gt = load_gt(gt)?;
    let grid = read_grid(grid)?;
    let rows = sweep(&frames, ego.as_deref(), &gt, &cfg, &grid)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let err = |e: csv::Error| CliError::runtime(format!("cannot write {}: {e}", out.display()));
    let mut w = csv::Writer::from_path(out).map_err(err)?;
    for r in &rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush()
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", out.display())))
}
