use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rate_regress_grouped, validate_eps_grid, NRule, SlopeFit};
use crate::alignment::{align_frames, estimate_error, ErrorRecord};
use crate::error::{Error, Result};
use crate::estimator::fit_neighborhood;
use crate::geometry::Jet;
use crate::manifold::{sample, DensityKind, DensityModel, ManifoldModel, PointCloud, ScalarField};
use crate::neighbors::GridIndex;
use crate::rng::{derive_seed, derive_seed_indexed};

/// Largest sample size at the largest scale under the default schedule.
pub const DEFAULT_N_MAX: usize = 20_000;
/// Batches of candidate query points tried before giving up on a region.
const QUERY_BATCHES: u64 = 64;
const QUERY_BATCH: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuerySpec {
    /// Points farther than `σ = √ε` from the boundary (anywhere on closed models).
    InteriorPoints { count: usize },
    /// Points within `σ = √ε` of the boundary.
    BoundaryBandPoints { count: usize },
    FixedPoints { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Interior,
    Boundary,
    Fixed,
}

impl QuerySpec {
    pub fn region(&self) -> Region {
        match self {
            QuerySpec::InteriorPoints { .. } => Region::Interior,
            QuerySpec::BoundaryBandPoints { .. } => Region::Boundary,
            QuerySpec::FixedPoints { .. } => Region::Fixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub model: ManifoldModel,
    #[serde(default = "default_density")]
    pub density: DensityKind,
    /// Catalog id of the test function.
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default = "default_grid")]
    pub eps_grid: Vec<f64>,
    /// Defaults to exponent `d + 6` anchored at 2·10⁴ points for the largest ε.
    #[serde(default)]
    pub n_of_eps: Option<NRule>,
    #[serde(default = "default_query")]
    pub query: QuerySpec,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_density() -> DensityKind {
    DensityKind::Uniform
}
fn default_field() -> String {
    "linear".into()
}
fn default_grid() -> Vec<f64> {
    vec![0.4, 0.3, 0.22, 0.16]
}
fn default_query() -> QuerySpec {
    QuerySpec::InteriorPoints { count: 64 }
}
fn default_repetitions() -> usize {
    3
}

impl ConvergenceConfig {
    /// Defaults everywhere except the model.
    pub fn new(model: ManifoldModel) -> Self {
        ConvergenceConfig {
            model,
            density: default_density(),
            field: default_field(),
            eps_grid: default_grid(),
            n_of_eps: None,
            query: default_query(),
            repetitions: default_repetitions(),
            seed: 0,
        }
    }

    pub fn n_rule(&self) -> NRule {
        self.n_of_eps.unwrap_or_else(|| {
            let eps_max = self.eps_grid.first().copied().unwrap_or(1.0);
            NRule::anchored(self.model.dim() as f64 + 6.0, eps_max, DEFAULT_N_MAX)
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        validate_eps_grid(&self.eps_grid)?;
        self.n_rule().validate(self.model.dim())?;
        if self.repetitions == 0 {
            return Err(Error::validation("repetitions", "must be at least 1"));
        }
        DensityModel::new(&self.model, self.density)?;
        ScalarField::catalog(&self.model, &self.field)
            .map_err(|e| Error::validation("field", e.to_string()))?;
        match &self.query {
            QuerySpec::InteriorPoints { count } | QuerySpec::BoundaryBandPoints { count } if *count == 0 => {
                return Err(Error::validation("count", "must be at least 1"));
            }
            QuerySpec::BoundaryBandPoints { .. } if !self.model.has_boundary() => {
                return Err(Error::validation("query", format!("{} has no boundary", self.model.name())));
            }
            QuerySpec::FixedPoints { points } => {
                if points.is_empty() {
                    return Err(Error::validation("points", "must not be empty"));
                }
                for x in points {
                    if x.len() != self.model.ambient_dim() {
                        return Err(Error::validation("points", "wrong number of coordinates"));
                    }
                    self.model
                        .check_on_manifold(x)
                        .map_err(|e| Error::validation("points", e.to_string()))?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Query points for scale `eps`. Candidates come from one uniform stream
/// keyed by `seed`, so on closed models every scale gets the same points,
/// while band membership (`σ = √ε`) is re-evaluated per scale.
pub fn select_queries(model: &ManifoldModel, spec: &QuerySpec, eps: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (count, want_band) = match spec {
        QuerySpec::FixedPoints { points } => return Ok(points.clone()),
        QuerySpec::InteriorPoints { count } => (*count, false),
        QuerySpec::BoundaryBandPoints { count } => (*count, true),
    };
    let sigma = eps.sqrt();
    let uniform = DensityModel::uniform(model);
    let key = derive_seed(seed, "queries");
    let mut out = Vec::with_capacity(count);
    for batch in 0..QUERY_BATCHES {
        let cands = sample(model, &uniform, QUERY_BATCH, derive_seed_indexed(key, "batch", &[batch]))?;
        for x in cands.rows() {
            let in_band = model.boundary_distance(x)? <= sigma;
            if in_band == want_band {
                out.push(x.to_vec());
                if out.len() == count {
                    return Ok(out);
                }
            }
        }
    }
    Err(Error::InvalidArgument(format!(
        "found only {} of {count} query points in the requested region of {}",
        out.len(),
        model.name()
    )))
}

/// Errors at one query point in one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub eps: f64,
    pub n: usize,
    pub repetition: usize,
    pub point_id: usize,
    #[serde(flatten)]
    pub errors: ErrorRecord,
    pub k_z: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub eps: f64,
    pub repetition: usize,
    pub point_id: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsRecord {
    pub eps: f64,
    pub n: usize,
    pub evaluated: usize,
    pub failures: usize,
    pub mean: ErrorRecord,
    /// 90th percentile (nearest rank) of each channel.
    pub p90: ErrorRecord,
    pub k_min: usize,
    pub k_mean: f64,
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slopes {
    pub e_f: Option<SlopeFit>,
    pub e_grad: Option<SlopeFit>,
    pub e_hess_frob: Option<SlopeFit>,
    pub e_trace: Option<SlopeFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub region: Region,
    pub config: ConvergenceConfig,
    pub records: Vec<EpsRecord>,
    pub slopes: Slopes,
    /// Hessian errors sit at solver precision, so slopes carry no rate information.
    pub noise_floor: bool,
    pub failures: Vec<Failure>,
    pub raw: Vec<RawRow>,
}

impl ConvergenceReport {
    pub fn hess_slope(&self) -> Option<f64> {
        self.slopes.e_hess_frob.map(|s| s.slope)
    }

    pub fn mean_hess(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.mean.e_hess_frob).collect()
    }
}

fn channel(e: &ErrorRecord, c: usize) -> f64 {
    [e.e_f, e.e_grad, e.e_hess_frob, e.e_trace][c]
}

fn record_from(values: [Vec<f64>; 4]) -> (ErrorRecord, ErrorRecord) {
    let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let p90 = |v: &Vec<f64>| {
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        s[((0.9 * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1]
    };
    let build = |f: &dyn Fn(&Vec<f64>) -> f64| ErrorRecord {
        e_f: f(&values[0]),
        e_grad: f(&values[1]),
        e_hess_frob: f(&values[2]),
        e_trace: f(&values[3]),
    };
    (build(&mean), build(&p90))
}

fn evaluate(
    cloud: &PointCloud,
    grid: &GridIndex,
    field: &ScalarField,
    z: &[f64],
    frame: &DMatrix<f64>,
    truth: &Jet,
    eps: f64,
    d: usize,
) -> Result<(ErrorRecord, usize)> {
    let idx = grid.query(cloud, z, eps);
    let local_f: Vec<f64> = idx.iter().map(|&i| field.value(cloud.point(i))).collect();
    let est = fit_neighborhood(cloud, &idx, &local_f, z, d)?;
    let r = align_frames(&est.basis, frame)?;
    Ok((estimate_error(&est, truth, &r)?, idx.len()))
}

/// Error-versus-scale study: a fresh cloud per (ε, repetition), estimates at
/// every query point, and log-log slopes of the mean errors.
pub fn convergence_run(config: &ConvergenceConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let model = &config.model;
    let d = model.dim();
    let field = ScalarField::catalog(model, &config.field)?;
    let density = DensityModel::new(model, config.density)?;
    let rule = config.n_rule();
    let mut records = Vec::new();
    let mut raw = Vec::new();
    let mut failures = Vec::new();
    let mut groups: [Vec<(f64, Vec<f64>)>; 4] = Default::default();
    for (i, &eps) in config.eps_grid.iter().enumerate() {
        let queries = select_queries(model, &config.query, eps, config.seed)?;
        let truth: Vec<(DMatrix<f64>, Jet)> = queries
            .iter()
            .map(|z| {
                let frame = model.tangent_frame(z)?;
                let jet = model.true_derivatives(&field, z, &frame)?;
                Ok((frame, jet))
            })
            .collect::<Result<_>>()?;
        let n = rule.n(eps);
        let mut values: [Vec<f64>; 4] = Default::default();
        let mut ks = Vec::new();
        let mut failed = 0;
        for rep in 0..config.repetitions {
            let cloud = sample(model, &density, n, derive_seed_indexed(config.seed, "cloud", &[i as u64, rep as u64]))?;
            let grid = GridIndex::new(&cloud, eps);
            let results: Vec<Result<(ErrorRecord, usize)>> = queries
                .par_iter()
                .zip(&truth)
                .map(|(z, (frame, jet))| evaluate(&cloud, &grid, &field, z, frame, jet, eps, d))
                .collect();
            for (point_id, res) in results.into_iter().enumerate() {
                match res {
                    Ok((errors, k_z)) => {
                        for (c, v) in values.iter_mut().enumerate() {
                            v.push(channel(&errors, c));
                        }
                        ks.push(k_z);
                        raw.push(RawRow {
                            eps,
                            n,
                            repetition: rep,
                            point_id,
                            errors,
                            k_z,
                        });
                    }
                    Err(e) => {
                        log::warn!("eps = {eps}, repetition {rep}, point {point_id}: {e}");
                        failed += 1;
                        failures.push(Failure {
                            eps,
                            repetition: rep,
                            point_id,
                            error: e.to_string(),
                        });
                    }
                }
            }
            log::info!("eps = {eps}: repetition {rep} done (n = {n})");
        }
        if ks.is_empty() {
            log::warn!("eps = {eps}: every query point failed");
            continue;
        }
        let (mean, p90) = record_from(values.clone());
        records.push(EpsRecord {
            eps,
            n,
            evaluated: ks.len(),
            failures: failed,
            mean,
            p90,
            k_min: *ks.iter().min().expect("nonempty"),
            k_mean: ks.iter().sum::<usize>() as f64 / ks.len() as f64,
            k_max: *ks.iter().max().expect("nonempty"),
        });
        for (c, v) in values.into_iter().enumerate() {
            groups[c].push((eps, v));
        }
    }
    let fit = |g: &Vec<(f64, Vec<f64>)>| -> Option<SlopeFit> {
        if g.len() < 3 {
            None
        } else {
            rate_regress_grouped(g, config.seed).ok()
        }
    };
    let slopes = Slopes {
        e_f: fit(&groups[0]),
        e_grad: fit(&groups[1]),
        e_hess_frob: fit(&groups[2]),
        e_trace: fit(&groups[3]),
    };
    let noise_floor = !records.is_empty() && records.iter().all(|r| r.mean.e_hess_frob < 1e-9);
    Ok(ConvergenceReport {
        region: config.query.region(),
        config: config.clone(),
        records,
        slopes,
        noise_floor,
        failures,
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: ManifoldModel, field: &str) -> ConvergenceConfig {
        ConvergenceConfig {
            field: field.into(),
            eps_grid: vec![0.5, 0.4, 0.3],
            n_of_eps: Some(NRule::anchored(model.dim() as f64 + 4.0, 0.5, 1500)),
            query: QuerySpec::InteriorPoints { count: 8 },
            repetitions: 1,
            ..ConvergenceConfig::new(model)
        }
    }

    #[test]
    fn band_selection_respects_sigma() {
        let m = ManifoldModel::hemisphere(2).unwrap();
        for eps in [0.4, 0.16] {
            let band = select_queries(&m, &QuerySpec::BoundaryBandPoints { count: 30 }, eps, 1).unwrap();
            let inner = select_queries(&m, &QuerySpec::InteriorPoints { count: 30 }, eps, 1).unwrap();
            assert!(band.iter().all(|x| m.boundary_distance(x).unwrap() <= eps.sqrt()));
            assert!(inner.iter().all(|x| m.boundary_distance(x).unwrap() > eps.sqrt()));
        }
    }

    #[test]
    fn closed_models_reuse_query_points() {
        let m = ManifoldModel::sphere(2).unwrap();
        let spec = QuerySpec::InteriorPoints { count: 10 };
        assert_eq!(select_queries(&m, &spec, 0.4, 3).unwrap(), select_queries(&m, &spec, 0.2, 3).unwrap());
    }

    #[test]
    fn quadratic_on_flat_disk_hits_the_noise_floor() {
        let cfg = small(ManifoldModel::flat_disk(2, 2, 1.0).unwrap(), "bowl");
        let rep = convergence_run(&cfg).unwrap();
        assert!(rep.noise_floor);
        assert!(rep.failures.is_empty());
        assert_eq!(rep.raw.len(), 3 * 8);
    }

    #[test]
    fn deterministic_reports() {
        let cfg = small(ManifoldModel::sphere(2).unwrap(), "linear");
        let a = convergence_run(&cfg).unwrap();
        let b = convergence_run(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.slopes.e_hess_frob.is_some());
    }

    #[test]
    fn config_validation_names_keys() {
        let mut cfg = ConvergenceConfig::new(ManifoldModel::sphere(2).unwrap());
        cfg.query = QuerySpec::BoundaryBandPoints { count: 4 };
        assert!(matches!(cfg.validate(), Err(Error::Validation { key, .. }) if key == "query"));
        let mut cfg = ConvergenceConfig::new(ManifoldModel::sphere(2).unwrap());
        cfg.field = "nope".into();
        assert!(matches!(cfg.validate(), Err(Error::Validation { key, .. }) if key == "field"));
        let mut cfg = ConvergenceConfig::new(ManifoldModel::sphere(2).unwrap());
        cfg.eps_grid = vec![0.2, 0.3, 0.4];
        assert!(matches!(cfg.validate(), Err(Error::Validation { key, .. }) if key == "eps_grid"));
    }
}
