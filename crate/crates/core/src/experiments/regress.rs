use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Non-positive errors are replaced by this value before taking logs.
pub const ERROR_FLOOR: f64 = 1e-15;

/// Least-squares line through `(log ε, log err)` with a 95% bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

fn floored(err: f64) -> f64 {
    if err > 0.0 {
        err
    } else {
        log::warn!("error {err} is not positive; using {ERROR_FLOOR} in the log-log fit");
        ERROR_FLOOR
    }
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn check_eps(eps: impl Iterator<Item = f64> + Clone, count: usize) -> Result<()> {
    if count < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 points for a rate fit, got {count}")));
    }
    if eps.clone().any(|e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("eps values must be positive".into()));
    }
    let first = eps.clone().next().unwrap_or(0.0);
    if eps.clone().all(|e| e == first) {
        return Err(Error::InvalidArgument("eps values must not all coincide".into()));
    }
    Ok(())
}

/// OLS slope of `log err` against `log ε`. With one error per scale there is
/// nothing to resample, so the interval collapses onto the slope; use
/// [`rate_regress_grouped`] when query-level errors are available.
pub fn rate_regress(points: &[(f64, f64)]) -> Result<SlopeFit> {
    check_eps(points.iter().map(|p| p.0), points.len())?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| floored(p.1).ln()).collect();
    let (slope, intercept) = ols(&xs, &ys);
    Ok(SlopeFit {
        slope,
        intercept,
        ci_low: slope,
        ci_high: slope,
    })
}

/// Fit through the per-scale means of `groups = [(ε, errors at ε)]`; the
/// interval comes from resampling errors within each scale.
pub fn rate_regress_grouped(groups: &[(f64, Vec<f64>)], seed: u64) -> Result<SlopeFit> {
    check_eps(groups.iter().map(|g| g.0), groups.len())?;
    if let Some(g) = groups.iter().find(|g| g.1.is_empty()) {
        return Err(Error::InvalidArgument(format!("no errors recorded at eps = {}", g.0)));
    }
    let xs: Vec<f64> = groups.iter().map(|g| g.0.ln()).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ys: Vec<f64> = groups.iter().map(|g| floored(mean(&g.1)).ln()).collect();
    let (slope, intercept) = ols(&xs, &ys);

    let mut rng = stream_rng(derive_seed(seed, "bootstrap"), 0);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut ys_b = vec![0.0; groups.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for (y, (_, errs)) in ys_b.iter_mut().zip(groups) {
            let k = errs.len();
            let s: f64 = (0..k).map(|_| errs[rng.random_range(0..k)]).sum();
            *y = (s / k as f64).max(ERROR_FLOOR).ln();
        }
        slopes.push(ols(&xs, &ys_b).0);
    }
    slopes.sort_by(f64::total_cmp);
    let at = |q: f64| slopes[((q * BOOTSTRAP_RESAMPLES as f64) as usize).min(BOOTSTRAP_RESAMPLES - 1)];
    Ok(SlopeFit {
        slope,
        intercept,
        ci_low: at(0.025),
        ci_high: at(0.975),
    })
}
