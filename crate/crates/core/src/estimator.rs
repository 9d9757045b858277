//! Local PCA followed by a quadratic least-squares fit.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::PointCloud;
use crate::neighbors::epsilon_neighbors;

/// Smallest admissible `σ_d / σ_1` in the local PCA.
pub const RANK_TOL: f64 = 1e-10;
/// Largest admissible condition number of `ZᵀZ`.
pub const COND_MAX: f64 = 1e12;

/// Column layout of the design matrix for intrinsic dimension `d`:
/// `[1 | y_1..y_d | y_1²..y_d² | y_s y_t for s < t, row-major]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignLayout {
    pub d: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Block {
    A,
    B,
    C,
    D,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::A, Block::B, Block::C, Block::D];

    pub fn name(&self) -> &'static str {
        match self {
            Block::A => "A",
            Block::B => "B",
            Block::C => "C",
            Block::D => "D",
        }
    }
}

impl DesignLayout {
    pub fn new(d: usize) -> Self {
        DesignLayout { d }
    }

    /// `1 + 2d + d(d−1)/2`.
    pub fn columns(&self) -> usize {
        1 + 2 * self.d + self.d * (self.d - 1) / 2
    }

    /// Minimum neighbor count for a well-posed fit, `1 + d + d(d+1)/2`.
    pub fn min_neighbors(&self) -> usize {
        1 + self.d + self.d * (self.d + 1) / 2
    }

    pub fn linear(&self, s: usize) -> usize {
        1 + s
    }

    pub fn square(&self, s: usize) -> usize {
        1 + self.d + s
    }

    /// Column of `y_s y_t`, `s < t`, 0-based.
    pub fn cross(&self, s: usize, t: usize) -> usize {
        debug_assert!(s < t && t < self.d);
        1 + 2 * self.d + self.pair_rank(s, t)
    }

    /// Row-major rank of the pair `(s, t)`, `s < t`, 0-based.
    pub fn pair_rank(&self, s: usize, t: usize) -> usize {
        s * (2 * self.d - s - 1) / 2 + (t - s - 1)
    }

    /// Pairs `(s, t)` in column order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for s in 0..self.d {
            for t in s + 1..self.d {
                v.push((s, t));
            }
        }
        v
    }

    pub fn block_of(&self, col: usize) -> Block {
        if col == 0 {
            Block::A
        } else if col <= self.d {
            Block::B
        } else if col <= 2 * self.d {
            Block::C
        } else {
            Block::D
        }
    }

    pub fn block_range(&self, b: Block) -> std::ops::Range<usize> {
        match b {
            Block::A => 0..1,
            Block::B => 1..1 + self.d,
            Block::C => 1 + self.d..1 + 2 * self.d,
            Block::D => 1 + 2 * self.d..self.columns(),
        }
    }
}

/// Position (1-based) of the Hessian entry `(i, j)`, `1 ≤ i ≤ j ≤ d`, inside
/// the quadratic part of the coefficient vector: diagonal entries come
/// first, then the off-diagonal ones in row-major upper-triangular order,
/// `d + (j − i) + (i − 1)(2d − i)/2`.
pub fn hessian_slot(i: usize, j: usize, d: usize) -> usize {
    assert!(1 <= i && i <= j && j <= d);
    if i == j {
        i
    } else {
        d + (j - i) + (i - 1) * (2 * d - i) / 2
    }
}

/// Everything computed at one query point.
#[derive(Debug, Clone)]
pub struct LocalFit {
    pub center: Vec<f64>,
    pub eps: f64,
    pub neighbor_idx: Vec<usize>,
    pub basis: DMatrix<f64>,
    pub coords: DMatrix<f64>,
    pub design: DMatrix<f64>,
    pub cond: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianEstimate {
    pub f0: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    /// PCA basis the estimate is expressed in (`p × d`; empty before it is attached).
    pub basis: DMatrix<f64>,
    pub k_z: usize,
    pub cond: f64,
}

impl HessianEstimate {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }
}

/// `p × k` matrix of differences `x_j − z` over the given neighbors.
fn difference_matrix(cloud: &PointCloud, idx: &[usize], z: &[f64]) -> DMatrix<f64> {
    let p = cloud.ambient;
    DMatrix::from_fn(p, idx.len(), |a, j| cloud.point(idx[j])[a] - z[a])
}

/// Top-`d` left singular vectors of `[x_j − z]` (no mean-centering), with
/// each column's largest-magnitude entry made positive.
pub fn local_pca(cloud: &PointCloud, idx: &[usize], z: &[f64], d: usize) -> Result<DMatrix<f64>> {
    let p = cloud.ambient;
    if z.len() != p {
        return Err(Error::DimensionMismatch(format!("z has {} coordinates, cloud has {p}", z.len())));
    }
    if d == 0 || d > p {
        return Err(Error::InvalidArgument(format!("need 1 <= d <= p, got d = {d}, p = {p}")));
    }
    if idx.len() < d {
        return Err(Error::TooFewNeighbors {
            found: idx.len(),
            required: d,
        });
    }
    // X = Rᵀ Qᵀ with Xᵀ = QR, so the left singular vectors of X are those of Rᵀ.
    let x = difference_matrix(cloud, idx, z);
    let small = if idx.len() > p {
        let r = x.transpose().qr().r();
        r.transpose()
    } else {
        x
    };
    let svd = small.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|a, b| svd.singular_values[*b].total_cmp(&svd.singular_values[*a]));
    let s1 = svd.singular_values[order[0]];
    let sd = svd.singular_values[order[d - 1]];
    let ratio = if s1 > 0.0 { sd / s1 } else { 0.0 };
    if !(ratio >= RANK_TOL) {
        return Err(Error::RankDeficient { ratio, k: idx.len() });
    }
    let mut basis = DMatrix::zeros(p, d);
    for (c, &k) in order.iter().take(d).enumerate() {
        let mut col = u.column(k).clone_owned();
        let lead = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if lead < 0.0 {
            col.neg_mut();
        }
        basis.set_column(c, &col);
    }
    Ok(basis)
}

/// `Q[j] = Uᵀ(x_j − z)`, one row per neighbor.
pub fn project(basis: &DMatrix<f64>, cloud: &PointCloud, idx: &[usize], z: &[f64]) -> DMatrix<f64> {
    (basis.transpose() * difference_matrix(cloud, idx, z)).transpose()
}

pub fn build_design_matrix(coords: &DMatrix<f64>) -> DMatrix<f64> {
    let d = coords.ncols();
    let layout = DesignLayout::new(d);
    let mut z = DMatrix::zeros(coords.nrows(), layout.columns());
    for r in 0..coords.nrows() {
        z[(r, 0)] = 1.0;
        for s in 0..d {
            let y = coords[(r, s)];
            z[(r, layout.linear(s))] = y;
            z[(r, layout.square(s))] = y * y;
        }
        for (s, t) in layout.pairs() {
            z[(r, layout.cross(s, t))] = coords[(r, s)] * coords[(r, t)];
        }
    }
    z
}

/// Least-squares coefficients by Householder QR of `Z`, with `cond(ZᵀZ)`.
pub fn solve_fit(design: &DMatrix<f64>, fvals: &[f64]) -> Result<(DVector<f64>, f64)> {
    let (k, m) = design.shape();
    if fvals.len() != k {
        return Err(Error::BadLength {
            expected: k,
            found: fvals.len(),
        });
    }
    // m = 1 + 2d + d(d-1)/2; recover d to state the neighbor requirement.
    let d = ((((8 * m + 1) as f64).sqrt() - 3.0) / 2.0).round() as usize;
    let required = DesignLayout::new(d).min_neighbors();
    if k < required {
        return Err(Error::TooFewNeighbors { found: k, required });
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let sv = r.singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), v| (a.max(*v), b.min(*v)));
    let cond = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
    if !(cond <= COND_MAX) {
        return Err(Error::IllConditioned { cond });
    }
    let mut rhs = DVector::from_column_slice(fvals);
    qr.q_tr_mul(&mut rhs);
    let top = rhs.rows(0, m).clone_owned();
    let g = r
        .solve_upper_triangular(&top)
        .ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    Ok((g, cond))
}

/// Unpack the coefficient vector into value, gradient and Hessian.
pub fn extract(g: &DVector<f64>, d: usize) -> Result<HessianEstimate> {
    let layout = DesignLayout::new(d);
    if g.len() != layout.columns() {
        return Err(Error::BadLength {
            expected: layout.columns(),
            found: g.len(),
        });
    }
    let mut hess = DMatrix::zeros(d, d);
    for i in 1..=d {
        hess[(i - 1, i - 1)] = 2.0 * g[d + hessian_slot(i, i, d)];
        for j in i + 1..=d {
            let v = g[d + hessian_slot(i, j, d)];
            hess[(i - 1, j - 1)] = v;
            hess[(j - 1, i - 1)] = v;
        }
    }
    Ok(HessianEstimate {
        f0: g[0],
        grad: g.rows(1, d).clone_owned(),
        hess,
        basis: DMatrix::zeros(0, d),
        k_z: 0,
        cond: f64::NAN,
    })
}

/// Fit on a known neighbor set with a given basis. `local_f` holds the
/// function values at `idx`, in the same order.
pub fn fit_in_basis(
    cloud: &PointCloud,
    idx: &[usize],
    local_f: &[f64],
    z: &[f64],
    basis: DMatrix<f64>,
) -> Result<HessianEstimate> {
    let d = basis.ncols();
    let coords = project(&basis, cloud, idx, z);
    let design = build_design_matrix(&coords);
    let (g, cond) = solve_fit(&design, local_f)?;
    let mut est = extract(&g, d)?;
    est.basis = basis;
    est.k_z = idx.len();
    est.cond = cond;
    Ok(est)
}

/// Local PCA and fit on a known neighbor set.
pub fn fit_neighborhood(cloud: &PointCloud, idx: &[usize], local_f: &[f64], z: &[f64], d: usize) -> Result<HessianEstimate> {
    let required = DesignLayout::new(d).min_neighbors();
    if idx.len() < required {
        return Err(Error::TooFewNeighbors {
            found: idx.len(),
            required,
        });
    }
    let basis = local_pca(cloud, idx, z, d)?;
    fit_in_basis(cloud, idx, local_f, z, basis)
}

/// Full pipeline at `z`, with full diagnostics.
pub fn local_fit(cloud: &PointCloud, fvals: &[f64], z: &[f64], eps: f64, d: usize) -> Result<(LocalFit, HessianEstimate)> {
    if fvals.len() != cloud.len() {
        return Err(Error::BadLength {
            expected: cloud.len(),
            found: fvals.len(),
        });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if z.len() != cloud.ambient {
        return Err(Error::DimensionMismatch(format!(
            "z has {} coordinates, cloud has {}",
            z.len(),
            cloud.ambient
        )));
    }
    let idx = epsilon_neighbors(cloud, z, eps);
    let local_f: Vec<f64> = idx.iter().map(|&i| fvals[i]).collect();
    let est = fit_neighborhood(cloud, &idx, &local_f, z, d)?;
    let coords = project(&est.basis, cloud, &idx, z);
    let design = build_design_matrix(&coords);
    let fit = LocalFit {
        center: z.to_vec(),
        eps,
        neighbor_idx: idx,
        basis: est.basis.clone(),
        coords,
        design,
        cond: est.cond,
        rank: d,
    };
    Ok((fit, est))
}

/// Estimate value, gradient and Hessian of `f` at `z` from samples.
pub fn estimate_at(cloud: &PointCloud, fvals: &[f64], z: &[f64], eps: f64, d: usize) -> Result<HessianEstimate> {
    local_fit(cloud, fvals, z, eps, d).map(|(_, est)| est)
}
