//! Uniform-grid index for fixed-radius neighbor queries in the plot plane.

use std::collections::HashMap;

use crate::model::Plot;

/// Buckets plots into square cells whose side equals the query radius, so a
/// radius query only visits the 3x3 block of cells around the query point.
#[derive(Debug)]
pub struct GridIndex {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl GridIndex {
    pub fn new(plots: &[Plot], radius: f64) -> Self {
        // Very small radii would explode the key space; floor the cell size.
        let cell = if radius.is_finite() && radius > 1e-9 {
            radius
        } else {
            f64::INFINITY
        };
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in plots.iter().enumerate() {
            cells.entry(key(p.x, p.y, cell)).or_default().push(i);
        }
        Self { cell, cells }
    }

    /// Indices `j` (including `i` itself) with `dist(i, j) < radius`, or
    /// `<= radius` when `inclusive`. Sorted ascending.
    pub fn neighbors(&self, plots: &[Plot], i: usize, radius: f64, inclusive: bool) -> Vec<usize> {
        let p = &plots[i];
        let within = |j: usize| {
            let d = p.distance_to(&plots[j]);
            if inclusive {
                d <= radius
            } else {
                d < radius
            }
        };
        let mut out: Vec<usize> = if self.cell.is_infinite() {
            (0..plots.len()).filter(|&j| within(j)).collect()
        } else {
            let (cx, cy) = key(p.x, p.y, self.cell);
            let mut v = Vec::new();
            for gx in cx - 1..=cx + 1 {
                for gy in cy - 1..=cy + 1 {
                    if let Some(bucket) = self.cells.get(&(gx, gy)) {
                        v.extend(bucket.iter().copied().filter(|&j| within(j)));
                    }
                }
            }
            v
        };
        out.sort_unstable();
        out
    }
}

fn key(x: f64, y: f64, cell: f64) -> (i64, i64) {
    if cell.is_infinite() {
        return (0, 0);
    }
    ((x / cell).floor() as i64, (y / cell).floor() as i64)
}
