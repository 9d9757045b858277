//! Run configurations: one JSON document per run, validated up front.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{ConvergenceConfig, GramExperimentConfig};
use crate::manifold::{DensityKind, DensityModel, ManifoldModel, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Sample,
    Estimate,
    Moments,
    Gram,
    Converge,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Sample => "sample",
            Subcommand::Estimate => "estimate",
            Subcommand::Moments => "moments",
            Subcommand::Gram => "gram",
            Subcommand::Converge => "converge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub model: ManifoldModel,
    #[serde(default = "uniform")]
    pub density: DensityKind,
    /// Catalog field evaluated at the samples and written next to the cloud.
    #[serde(default)]
    pub field: Option<String>,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

fn uniform() -> DensityKind {
    DensityKind::Uniform
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.n == 0 {
            return Err(Error::validation("n", "must be at least 1"));
        }
        DensityModel::new(&self.model, self.density)?;
        if let Some(f) = &self.field {
            ScalarField::catalog(&self.model, f)?;
        }
        Ok(())
    }
}

/// A query given either as a row of the cloud or as coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QueryPoint {
    Index(usize),
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub cloud: PathBuf,
    /// Single-column CSV of function values; alternatively `field`.
    #[serde(default)]
    pub fvals: Option<PathBuf>,
    /// Catalog field, evaluated on the cloud (needs the cloud's metadata).
    #[serde(default)]
    pub field: Option<String>,
    pub z: QueryPoint,
    pub eps: f64,
    /// Intrinsic dimension; defaults to the cloud's model.
    #[serde(default)]
    pub dim: Option<usize>,
}

impl EstimateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::validation("eps", "must be positive"));
        }
        match (&self.fvals, &self.field) {
            (Some(_), Some(_)) => Err(Error::validation("fvals", "give either fvals or field, not both")),
            (None, None) => Err(Error::validation("fvals", "one of fvals or field is required")),
            _ => Ok(()),
        }?;
        if self.dim == Some(0) {
            return Err(Error::validation("dim", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub d: usize,
    #[serde(default)]
    pub delta: f64,
    pub eps: f64,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_mc_samples() -> usize {
    1_000_000
}

impl MomentsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::validation("d", "must be at least 2"));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::validation("delta", "must lie in [0, 1)"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::validation("eps", "must be positive"));
        }
        if self.mc_samples < 1000 {
            return Err(Error::validation("mc_samples", "need at least 1000 samples"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Params {
    Sample(SampleConfig),
    Estimate(EstimateConfig),
    Moments(MomentsConfig),
    Gram(GramExperimentConfig),
    Converge(ConvergenceConfig),
}

impl Params {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Params::Sample(c) => Some(c.seed),
            Params::Moments(c) => Some(c.seed),
            Params::Gram(c) => Some(c.seed),
            Params::Converge(c) => Some(c.seed),
            Params::Estimate(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Params::Sample(c) => c.validate(),
            Params::Estimate(c) => c.validate(),
            Params::Moments(c) => c.validate(),
            Params::Gram(c) => c.validate(),
            Params::Converge(c) => c.validate(),
        }
    }
}

/// A complete run: what to do, with which parameters, and where to write.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub params: Params,
    /// Output file, or output prefix for `converge`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    subcommand: Subcommand,
    params: serde_json::Value,
    #[serde(default)]
    output: Option<PathBuf>,
}

fn data_error(e: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let inner = e.inner().to_string();
    // serde reports unknown and missing keys by name; otherwise use the path
    let named = ["unknown field `", "missing field `", "unknown variant `"]
        .iter()
        .find_map(|p| inner.split_once(p).and_then(|(_, rest)| rest.split_once('`')).map(|(k, _)| k.to_string()));
    let path = e.path().to_string();
    let key = match named {
        Some(k) if !inner.starts_with("unknown variant") => k,
        _ => path
            .rsplit('.')
            .next()
            .filter(|s| !s.is_empty() && *s != "?")
            .unwrap_or("config")
            .to_string(),
    };
    let key = key.trim_end_matches(|c: char| c == ']' || c.is_ascii_digit() || c == '[').to_string();
    Error::validation(key, inner)
}

fn from_value<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(data_error)
}

/// Parameters for one subcommand from a JSON value.
pub fn parse_params(subcommand: Subcommand, value: serde_json::Value) -> Result<Params> {
    let params = match subcommand {
        Subcommand::Sample => Params::Sample(from_value(value)?),
        Subcommand::Estimate => Params::Estimate(from_value(value)?),
        Subcommand::Moments => Params::Moments(from_value(value)?),
        Subcommand::Gram => Params::Gram(from_value(value)?),
        Subcommand::Converge => Params::Converge(from_value(value)?),
    };
    params.validate()?;
    Ok(params)
}

fn parse_json(text: &str) -> Result<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// A full run document: `{"subcommand": …, "params": {…}, "output": …}`.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawRun = from_value(parse_json(text)?)?;
    Ok(RunConfig {
        subcommand: raw.subcommand,
        params: parse_params(raw.subcommand, raw.params)?,
        output: raw.output,
    })
}

/// Config file given to a subcommand on the command line: either a full run
/// document (whose subcommand must match) or just the parameter object.
pub fn parse_subcommand_config(subcommand: Subcommand, text: &str) -> Result<RunConfig> {
    let value = parse_json(text)?;
    if value.get("subcommand").is_some() {
        let run = parse_config(text)?;
        if run.subcommand != subcommand {
            return Err(Error::validation(
                "subcommand",
                format!("config is for `{}`, not `{}`", run.subcommand.name(), subcommand.name()),
            ));
        }
        return Ok(run);
    }
    Ok(RunConfig {
        subcommand,
        params: parse_params(subcommand, value)?,
        output: None,
    })
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }
}
