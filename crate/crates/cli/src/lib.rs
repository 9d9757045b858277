//! Dispatch of parsed run configurations to the library, and output writing.

use std::path::{Path, PathBuf};

use hessfit_core::config::{EstimateConfig, MomentsConfig, Params, QueryPoint, RunConfig, SampleConfig};
use hessfit_core::experiments::{convergence_run, gram_deviation_experiment, ConvergenceReport, GramExperimentConfig, Region};
use hessfit_core::io::{fmt_f64, read_cloud, read_values, write_cloud, write_csv, write_json, write_values};
use hessfit_core::moments::oracle_report;
use hessfit_core::{estimate_at, sample, ConvergenceConfig, DensityModel, Error, Result, ScalarField};
use serde::Serialize;

/// Exit status for a finished run: 0, 2 for bad input, 3 for numerical failure.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_validation() => 2,
        Err(_) => 3,
    }
}

pub fn run(config: &RunConfig) -> Result<()> {
    let out = config.output.as_deref();
    match &config.params {
        Params::Sample(c) => run_sample(c, required(out, "--out")?),
        Params::Estimate(c) => run_estimate(c, out),
        Params::Moments(c) => run_moments(c, out),
        Params::Gram(c) => run_gram(c, required(out, "--out")?),
        Params::Converge(c) => run_converge(c, required(out, "--out-prefix")?),
    }
}

fn required<'a>(out: Option<&'a Path>, flag: &str) -> Result<&'a Path> {
    out.ok_or_else(|| Error::Validation {
        key: flag.trim_start_matches('-').replace('-', "_"),
        message: format!("{flag} is required"),
    })
}

/// `dir/stem.csv` → `dir/stem.f.csv`.
pub fn values_path(cloud_path: &Path) -> PathBuf {
    let stem = cloud_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    cloud_path.with_file_name(format!("{stem}.f.csv"))
}

fn run_sample(c: &SampleConfig, out: &Path) -> Result<()> {
    let density = DensityModel::new(&c.model, c.density)?;
    let cloud = sample(&c.model, &density, c.n, c.seed)?;
    write_cloud(out, &cloud)?;
    if let Some(id) = &c.field {
        let field = ScalarField::catalog(&c.model, id)?;
        write_values(&values_path(out), "f", &field.evaluate_rows(&cloud.points, cloud.ambient))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateOutput {
    z: Vec<f64>,
    eps: f64,
    k_z: usize,
    f0: f64,
    grad: Vec<f64>,
    hess: Vec<Vec<f64>>,
    /// Columns of the PCA basis, one row per basis vector.
    basis: Vec<Vec<f64>>,
    cond: f64,
}

fn run_estimate(c: &EstimateConfig, out: Option<&Path>) -> Result<()> {
    let cloud = read_cloud(&c.cloud)?;
    let fvals = match (&c.fvals, &c.field) {
        (Some(path), _) => read_values(path)?,
        (None, Some(id)) => {
            let model = cloud
                .model
                .as_ref()
                .ok_or_else(|| Error::validation("field", "the cloud has no model metadata; pass fvals instead"))?;
            ScalarField::catalog(model, id)?.evaluate_rows(&cloud.points, cloud.ambient)
        }
        (None, None) => return Err(Error::validation("fvals", "one of fvals or field is required")),
    };
    let d = match (c.dim, &cloud.model) {
        (Some(d), _) => d,
        (None, Some(m)) => m.dim(),
        (None, None) => return Err(Error::validation("dim", "the cloud has no model metadata; pass dim")),
    };
    let z = match &c.z {
        QueryPoint::Index(i) if *i < cloud.len() => cloud.point(*i).to_vec(),
        QueryPoint::Index(i) => return Err(Error::validation("z", format!("index {i} out of range for {} points", cloud.len()))),
        QueryPoint::Point(p) => p.clone(),
    };
    let est = estimate_at(&cloud, &fvals, &z, c.eps, d)?;
    let rows = |m: &nalgebra::DMatrix<f64>| (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect();
    let output = EstimateOutput {
        z,
        eps: c.eps,
        k_z: est.k_z,
        f0: est.f0,
        grad: est.grad.iter().copied().collect(),
        hess: rows(&est.hess),
        basis: rows(&est.basis.transpose()),
        cond: est.cond,
    };
    match out {
        Some(p) => write_json(p, &output),
        None => {
            println!("{}", serde_json::to_string_pretty(&output).expect("plain numbers serialize"));
            Ok(())
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn run_moments(c: &MomentsConfig, out: Option<&Path>) -> Result<()> {
    let rows = oracle_report(c.d, c.delta, c.eps, c.mc_samples, c.seed)?;
    let header = ["name", "closed_form", "quadrature", "mc", "mc_stderr", "pass"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                opt(r.closed_form),
                opt(r.quadrature),
                fmt_f64(r.mc),
                fmt_f64(r.mc_stderr),
                r.pass.to_string(),
            ]
        })
        .collect();
    match out {
        Some(p) => write_csv(p, &header, &cells)?,
        None => {
            println!("{}", header.join(","));
            for r in &cells {
                println!("{}", r.join(","));
            }
        }
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        log::warn!("{failed} oracle rows disagree");
    }
    Ok(())
}

fn run_gram(c: &GramExperimentConfig, out: &Path) -> Result<()> {
    let rep = gram_deviation_experiment(c)?;
    let header = ["eps", "n", "k_z", "block", "max_abs_dev", "predicted", "ratio", "pass"];
    let cells: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.eps),
                r.n.to_string(),
                r.k_z.to_string(),
                r.block.clone(),
                fmt_f64(r.max_abs_dev),
                fmt_f64(r.predicted),
                fmt_f64(r.ratio),
                rep.pass.get(&r.block).copied().unwrap_or(false).to_string(),
            ]
        })
        .collect();
    write_csv(out, &header, &cells)
}

/// Acceptance band for the Hessian slope in each query region.
pub fn rate_band(region: Region) -> Option<(f64, f64)> {
    match region {
        Region::Interior => Some((0.6, 1.4)),
        Region::Boundary => Some((0.25, 0.85)),
        Region::Fixed => None,
    }
}

#[derive(Serialize)]
struct ConvergeOutput<'a> {
    rate_band: Option<(f64, f64)>,
    rate_pass: Option<bool>,
    #[serde(flatten)]
    report: &'a ConvergenceReport,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn run_converge(c: &ConvergenceConfig, prefix: &Path) -> Result<()> {
    let rep = convergence_run(c)?;
    let header = ["eps", "n", "repetition", "point_id", "e_f", "e_grad", "e_hess_frob", "e_trace", "k_z"];
    let cells: Vec<Vec<String>> = rep
        .raw
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.eps),
                r.n.to_string(),
                r.repetition.to_string(),
                r.point_id.to_string(),
                fmt_f64(r.errors.e_f),
                fmt_f64(r.errors.e_grad),
                fmt_f64(r.errors.e_hess_frob),
                fmt_f64(r.errors.e_trace),
                r.k_z.to_string(),
            ]
        })
        .collect();
    write_csv(&with_suffix(prefix, "_raw.csv"), &header, &cells)?;
    let band = rate_band(rep.region);
    let pass = match (band, rep.hess_slope()) {
        (Some((lo, hi)), Some(s)) if !rep.noise_floor => Some((lo..=hi).contains(&s)),
        _ => None,
    };
    write_json(
        &with_suffix(prefix, "_report.json"),
        &ConvergeOutput {
            rate_band: band,
            rate_pass: pass,
            report: &rep,
        },
    )
}
