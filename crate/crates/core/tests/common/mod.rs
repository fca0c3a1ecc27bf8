//! Shared fixtures and independent reference implementations for the
//! integration and acceptance tests.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radar_tracking::clustering::ClusteringParams;
use radar_tracking::config::PipelineConfig;
use radar_tracking::metrics::TargetClass;
use radar_tracking::model::{Frame, Plot};
use radar_tracking::simulator::{
    FieldOfView, NoiseConfig, ScatterModel, ScenarioConfig, TargetSpec,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random frame of up to `max_plots` plots packed into a small area so that
/// neighborhoods overlap often.
pub fn random_frame(rng: &mut ChaCha8Rng, max_plots: usize) -> Frame {
    let n = rng.random_range(0..=max_plots);
    let plots = (0..n)
        .map(|_| {
            Plot::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(3.0..7.0),
                rng.random_range(0.0..10.0),
                rng.random_range(-3.0..3.0),
            )
        })
        .collect();
    Frame::new(0, 0.0, plots)
}

pub fn random_params(rng: &mut ChaCha8Rng) -> ClusteringParams {
    ClusteringParams {
        epsilon: rng.random_range(0.3..1.2),
        min_pts: rng.random_range(1..=4),
        amp_thres: if rng.random_bool(0.3) {
            None
        } else {
            Some(rng.random_range(0.5..6.0))
        },
        vel_thres: rng.random_range(0.3..3.0),
        suppression_radius: 0.0,
        amplitude_noise_test: rng.random_bool(0.8),
    }
}

fn dist(a: &Plot, b: &Plot) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Partition as sorted member lists, ordered by smallest member.
pub type Partition = Vec<Vec<usize>>;

/// Conditional reachability closure computed by exhaustive fixed-point
/// iteration over all plot pairs.
pub fn closure_oracle(frame: &Frame, params: &ClusteringParams) -> Partition {
    let p = &frame.plots;
    let n = p.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = p.iter().map(|q| q.amplitude).sum::<f64>() / n as f64;
    let amp_thres = params
        .amp_thres
        .unwrap_or((0.5 * mean).max(f64::MIN_POSITIVE));
    let within = |i: usize, j: usize| dist(&p[i], &p[j]) < params.epsilon;
    let count: Vec<usize> = (0..n)
        .map(|i| (0..n).filter(|&j| within(i, j)).count())
        .collect();
    let dense: Vec<bool> = count.iter().map(|&c| c >= params.min_pts).collect();
    let noise: Vec<bool> = (0..n)
        .map(|i| !dense[i] && (!params.amplitude_noise_test || p[i].amplitude < mean))
        .collect();
    let link = |i: usize, j: usize| {
        within(i, j)
            && dense[j]
            && (p[j].radial_velocity - p[i].radial_velocity).abs() < params.vel_thres
            && (p[j].amplitude - p[i].amplitude).abs() < amp_thres
    };
    let mut taken = vec![false; n];
    let mut out = Vec::new();
    for seed in 0..n {
        if taken[seed] || noise[seed] {
            continue;
        }
        let mut member = vec![false; n];
        member[seed] = true;
        loop {
            let mut grew = false;
            for i in 0..n {
                if !member[i] {
                    continue;
                }
                for j in 0..n {
                    if !member[j] && !taken[j] && link(i, j) {
                        member[j] = true;
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let group: Vec<usize> = (0..n).filter(|&i| member[i]).collect();
        for &i in &group {
            taken[i] = true;
        }
        out.push(group);
    }
    out.sort_by_key(|g| g[0]);
    out
}

/// Textbook DBSCAN restricted to core points: core points within epsilon of
/// each other share a cluster, everything else is left out.
pub fn dbscan_core_reference(frame: &Frame, epsilon: f64, min_pts: usize) -> Partition {
    let p = &frame.plots;
    let n = p.len();
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| dist(&p[i], &p[j]) < epsilon).count() >= min_pts)
        .collect();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    for i in 0..n {
        if !core[i] || label[i].is_some() {
            continue;
        }
        label[i] = Some(next);
        let mut stack = vec![i];
        while let Some(q) = stack.pop() {
            for j in 0..n {
                if core[j] && label[j].is_none() && dist(&p[q], &p[j]) < epsilon {
                    label[j] = Some(next);
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    let mut out: Partition = vec![Vec::new(); next];
    for (i, l) in label.iter().enumerate() {
        if let Some(k) = l {
            out[*k].push(i);
        }
    }
    out.sort_by_key(|g| g[0]);
    out
}

/// Dense matrices as nested vectors for the filter oracle.
pub type Mat = Vec<Vec<f64>>;

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

pub fn mat_add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn mat_sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn diag(d: &[f64]) -> Mat {
    let n = d.len();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { d[i] } else { 0.0 }).collect())
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let d = m[col][col];
        assert!(d.abs() > 1e-300, "singular matrix");
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Constant-velocity transition for `[px, py, vx, vy, bxmax, bxmin, bymax, bymin]`
/// where the box edges move with the velocity.
pub fn cv_transition(dt: f64) -> Mat {
    let mut a = identity(8);
    a[0][2] = dt;
    a[1][3] = dt;
    a[4][2] = dt;
    a[5][2] = dt;
    a[6][3] = dt;
    a[7][3] = dt;
    a
}

/// Smallest eigenvalue bound via Cholesky: true when `a + tol*I` factors.
pub fn is_psd(a: &Mat, tol: f64) -> bool {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j] + if i == j { tol } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

pub fn target(class: TargetClass, start: [f64; 2], velocity: [f64; 2]) -> TargetSpec {
    TargetSpec {
        class,
        extent: None,
        reflectivity: 10.0,
        plot_count: 8.0,
        start,
        velocity,
    }
}

pub fn scenario(seed: u64, targets: Vec<TargetSpec>) -> ScenarioConfig {
    ScenarioConfig {
        duration: 5.0,
        frame_rate: 10.0,
        seed,
        ego: [0.0, 0.0],
        noise: NoiseConfig::default(),
        false_alarm_rate: 0.0,
        field_of_view: FieldOfView::default(),
        scatter: ScatterModel::PerFrame,
        targets,
    }
}

/// Three static clutter items placed away from the moving-target lanes.
pub fn clutter_items() -> Vec<TargetSpec> {
    [[6.0, 9.0], [-7.0, 24.0], [9.0, 30.0]]
        .into_iter()
        .map(|start| TargetSpec {
            class: TargetClass::Clutter,
            extent: None,
            reflectivity: 8.0,
            plot_count: 3.0,
            start,
            velocity: [0.0, 0.0],
        })
        .collect()
}

pub fn default_config() -> PipelineConfig {
    PipelineConfig::default()
}
