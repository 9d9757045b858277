//! CSV and JSON persistence. Every write goes to a temporary file in the
//! target directory and is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{DensityModel, ManifoldModel, PointCloud};

/// Seventeen significant digits, enough for an exact round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Replace `path` with `bytes` atomically.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// Write a table of already formatted cells.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| io_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| io_err(path, e))?;
    atomic_write(path, &bytes)
}

/// Header and numeric rows of a CSV file.
pub fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| io_err(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), line + 1)))?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Sampling metadata stored next to a cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudMeta {
    pub model: Option<ManifoldModel>,
    pub density: Option<DensityModel>,
    pub seed: u64,
    pub n: usize,
    pub ambient: usize,
}

/// `dir/stem.csv` → `dir/stem.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}

/// Cloud as CSV with header `x1..xp`, plus the metadata sidecar.
pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    let header: Vec<String> = (1..=cloud.ambient).map(|k| format!("x{k}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = cloud.rows().map(|x| x.iter().map(|v| fmt_f64(*v)).collect()).collect();
    write_csv(path, &header, &rows)?;
    write_json(
        &sidecar_path(path),
        &CloudMeta {
            model: cloud.model.clone(),
            density: cloud.density.clone(),
            seed: cloud.seed,
            n: cloud.len(),
            ambient: cloud.ambient,
        },
    )
}

/// Read a cloud; metadata is attached when a matching sidecar exists.
pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    let (header, rows) = read_numeric_csv(path)?;
    let p = header.len();
    if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
        return Err(Error::Parse(format!("{} row {}: expected {p} columns", path.display(), i + 1)));
    }
    let mut cloud = PointCloud::from_rows(p, rows.into_iter().flatten().collect())?;
    let meta_path = sidecar_path(path);
    if meta_path.exists() {
        let text = fs::read_to_string(&meta_path).map_err(|e| io_err(&meta_path, e))?;
        let meta: CloudMeta = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", meta_path.display())))?;
        if meta.n != cloud.len() || meta.ambient != p {
            return Err(Error::Parse(format!(
                "{} describes {} points in R^{}, the CSV has {} in R^{p}",
                meta_path.display(),
                meta.n,
                meta.ambient,
                cloud.len()
            )));
        }
        cloud.model = meta.model;
        cloud.density = meta.density;
        cloud.seed = meta.seed;
    }
    Ok(cloud)
}

/// One named column of values.
pub fn write_values(path: &Path, name: &str, values: &[f64]) -> Result<()> {
    let rows: Vec<Vec<String>> = values.iter().map(|v| vec![fmt_f64(*v)]).collect();
    write_csv(path, &[name], &rows)
}

pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let (header, rows) = read_numeric_csv(path)?;
    if header.len() != 1 {
        return Err(Error::Parse(format!("{}: expected a single column", path.display())));
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}
