use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::fit_neighborhood;
use crate::manifold::PointCloud;
use crate::neighbors::GridIndex;

/// Monte Carlo estimate of `∫_M |Hess f|² dvol` from estimates at the
/// sample points `query_idx`. Query points are draws from `ρ`, so each term
/// is weighted by `1/ρ(z)`; for a uniform density this is `Vol(M)`.
pub fn hessian_energy(cloud: &PointCloud, fvals: &[f64], eps: f64, d: usize, query_idx: &[usize]) -> Result<f64> {
    let (Some(model), Some(density)) = (&cloud.model, &cloud.density) else {
        return Err(Error::InvalidArgument("hessian_energy needs a cloud with model and density metadata".into()));
    };
    if fvals.len() != cloud.len() {
        return Err(Error::BadLength {
            expected: cloud.len(),
            found: fvals.len(),
        });
    }
    if query_idx.is_empty() {
        return Err(Error::InvalidArgument("no query points".into()));
    }
    if let Some(&bad) = query_idx.iter().find(|&&i| i >= cloud.len()) {
        return Err(Error::InvalidArgument(format!("query index {bad} out of range")));
    }
    let grid = GridIndex::new(cloud, eps);
    let terms: Vec<Result<f64>> = query_idx
        .par_iter()
        .map(|&q| {
            let z = cloud.point(q);
            let idx = grid.query(cloud, z, eps);
            let local_f: Vec<f64> = idx.iter().map(|&i| fvals[i]).collect();
            let est = fit_neighborhood(cloud, &idx, &local_f, z, d)?;
            let weight = if density.is_uniform() {
                model.volume()
            } else {
                1.0 / density.value(z)
            };
            Ok(est.hess.norm_squared() * weight)
        })
        .collect();
    let mut sum = 0.0;
    for t in terms {
        sum += t?;
    }
    Ok(sum / query_idx.len() as f64)
}
