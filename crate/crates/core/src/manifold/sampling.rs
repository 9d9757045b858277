use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DensityModel, ManifoldModel};
use crate::error::{Error, Result};
use crate::rng::{chunks, derive_seed, stream_rng};

/// Minimum acceptance rate before sampling gives up.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// `n` points in `R^p`, stored row-major, with the metadata needed to
/// regenerate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    /// Generating model and density; absent for clouds read from bare files.
    pub model: Option<ManifoldModel>,
    pub density: Option<DensityModel>,
    pub seed: u64,
    pub ambient: usize,
    pub points: Vec<f64>,
}

impl PointCloud {
    /// A cloud from raw row-major coordinates, without sampling metadata.
    pub fn from_rows(ambient: usize, points: Vec<f64>) -> Result<Self> {
        if ambient == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be positive".into()));
        }
        if !points.len().is_multiple_of(ambient) {
            return Err(Error::BadLength {
                expected: ambient * (points.len() / ambient + 1),
                found: points.len(),
            });
        }
        Ok(PointCloud {
            model: None,
            density: None,
            seed: 0,
            ambient,
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.ambient
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.ambient..(i + 1) * self.ambient]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.ambient)
    }
}

/// `n` i.i.d. draws from `ρ dvol` by rejection against the uniform measure
/// on the chart box. Each chunk of draws has its own counter-keyed stream,
/// so the result does not depend on the thread count.
pub fn sample(model: &ManifoldModel, density: &DensityModel, n: usize, seed: u64) -> Result<PointCloud> {
    model.validate()?;
    if n == 0 {
        return Err(Error::validation("n", "must be at least 1"));
    }
    let key = derive_seed(seed, "sample");
    let bounds = model.chart_box();
    let envelope = model.max_volume_element() * density.bounds().1;
    let p = model.ambient_dim();
    let parts: Vec<Result<Vec<f64>>> = chunks(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = stream_rng(key, c);
            let mut out = Vec::with_capacity(len * p);
            let mut u = vec![0.0; bounds.len()];
            let mut proposals: u64 = 0;
            let mut accepted = 0usize;
            while accepted < len {
                proposals += 1;
                for (ui, (lo, hi)) in u.iter_mut().zip(&bounds) {
                    *ui = lo + (hi - lo) * rng.random::<f64>();
                }
                let keep = if model.in_chart(&u) {
                    let x = model.embed_unchecked(&u);
                    let w = model.volume_element(&u) * density.value(&x) / envelope;
                    if rng.random::<f64>() < w {
                        out.extend_from_slice(&x);
                        true
                    } else {
                        false
                    }
                } else {
                    false
                };
                if keep {
                    accepted += 1;
                }
                if proposals >= 100_000 && (accepted as f64) < MIN_ACCEPTANCE * proposals as f64 {
                    return Err(Error::RejectionStall {
                        rate: accepted as f64 / proposals as f64,
                        proposals,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut points = Vec::with_capacity(n * p);
    for part in parts {
        points.extend(part?);
    }
    log::debug!("sampled {n} points on {} ({})", model.name(), density.name());
    Ok(PointCloud {
        model: Some(model.clone()),
        density: Some(density.clone()),
        seed,
        ambient: p,
        points,
    })
}
