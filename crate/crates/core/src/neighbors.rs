//! Closed-ball neighbor queries.

use std::collections::HashMap;

use crate::manifold::PointCloud;

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices `i` with `‖x_i − z‖ ≤ eps`, ascending. Reference implementation.
pub fn epsilon_neighbors(cloud: &PointCloud, z: &[f64], eps: f64) -> Vec<usize> {
    let e2 = eps * eps;
    cloud
        .rows()
        .enumerate()
        .filter(|(_, x)| dist_sq(x, z) <= e2)
        .map(|(i, _)| i)
        .collect()
}

const GRID_AXES: usize = 3;
const AXIS_BITS: u32 = 21;
const AXIS_OFFSET: i64 = 1 << (AXIS_BITS - 1);

/// Cell coordinates packed into one integer, 21 bits per axis.
type Cell = u64;

fn pack(k: &[i64; GRID_AXES]) -> Cell {
    k.iter().fold(0u64, |acc, v| {
        let shifted = (v + AXIS_OFFSET).clamp(0, (1 << AXIS_BITS) - 1) as u64;
        (acc << AXIS_BITS) | shifted
    })
}

/// Uniform grid over the first (up to three) ambient coordinates.
///
/// Returns exactly the same index set as [`epsilon_neighbors`]: candidate
/// cells are chosen conservatively and every candidate is checked with the
/// same `dist² ≤ eps²` test.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell: f64,
    axes: usize,
    order: Vec<u32>,
    spans: HashMap<Cell, (usize, usize)>,
}

impl GridIndex {
    /// Coordinates beyond `2^20` cells from the origin share boundary cells,
    /// which costs speed but never correctness.
    pub fn new(cloud: &PointCloud, cell: f64) -> Self {
        assert!(cell > 0.0, "grid cell size must be positive");
        assert!(cloud.len() <= u32::MAX as usize, "cloud too large for the grid index");
        let axes = cloud.ambient.min(GRID_AXES);
        let key_of = |x: &[f64]| -> Cell {
            let mut k = [0i64; GRID_AXES];
            for a in 0..axes {
                k[a] = (x[a] / cell).floor() as i64;
            }
            pack(&k)
        };
        let mut keyed: Vec<(Cell, u32)> = cloud.rows().enumerate().map(|(i, x)| (key_of(x), i as u32)).collect();
        keyed.sort_unstable();
        let mut spans = HashMap::new();
        let mut start = 0;
        while start < keyed.len() {
            let k = keyed[start].0;
            let mut end = start;
            while end < keyed.len() && keyed[end].0 == k {
                end += 1;
            }
            spans.insert(k, (start, end));
            start = end;
        }
        GridIndex {
            cell,
            axes,
            order: keyed.into_iter().map(|(_, i)| i).collect(),
            spans,
        }
    }

    pub fn query(&self, cloud: &PointCloud, z: &[f64], eps: f64) -> Vec<usize> {
        let e2 = eps * eps;
        let mut lo = [0i64; GRID_AXES];
        let mut hi = [0i64; GRID_AXES];
        for a in 0..self.axes {
            lo[a] = ((z[a] - eps) / self.cell).floor() as i64;
            hi[a] = ((z[a] + eps) / self.cell).floor() as i64;
        }
        let mut out = Vec::new();
        let mut k = lo;
        loop {
            if let Some(&(s, e)) = self.spans.get(&pack(&k)) {
                for &i in &self.order[s..e] {
                    let i = i as usize;
                    if dist_sq(cloud.point(i), z) <= e2 {
                        out.push(i);
                    }
                }
            }
            // odometer over the cell box
            let mut a = 0;
            loop {
                if a == self.axes {
                    out.sort_unstable();
                    return out;
                }
                k[a] += 1;
                if k[a] <= hi[a] {
                    break;
                }
                k[a] = lo[a];
                a += 1;
            }
        }
    }
}
