use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ManifoldModel;
use crate::error::{Error, Result};
use crate::geometry::dot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityKind {
    Uniform,
    /// Unnormalized `1 + amplitude * sin(mode * <w, x>)`, with
    /// `w = (1, 2, …, p) / ‖(1, 2, …, p)‖`.
    SmoothBump { amplitude: f64, mode: f64 },
}

/// A sampling density on a model, normalized so that `∫ ρ dvol = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    pub kind: DensityKind,
    /// `∫_M (unnormalized density) dvol`.
    pub normalization: f64,
    direction: Vec<f64>,
}

impl DensityModel {
    pub fn new(model: &ManifoldModel, kind: DensityKind) -> Result<Self> {
        let p = model.ambient_dim();
        let mut direction: Vec<f64> = (1..=p).map(|k| k as f64).collect();
        let n = dot(&direction, &direction).sqrt();
        direction.iter_mut().for_each(|v| *v /= n);
        let mut out = DensityModel {
            kind,
            normalization: 1.0,
            direction,
        };
        out.normalization = match kind {
            DensityKind::Uniform => model.volume(),
            DensityKind::SmoothBump { amplitude, mode } => {
                if !(amplitude.abs() < 1.0) {
                    return Err(Error::validation("amplitude", "need |amplitude| < 1"));
                }
                if !mode.is_finite() {
                    return Err(Error::validation("mode", "must be finite"));
                }
                model.integrate(|x| out.unnormalized(x))
            }
        };
        Ok(out)
    }

    pub fn uniform(model: &ManifoldModel) -> Self {
        Self::new(model, DensityKind::Uniform).expect("uniform density is always valid")
    }

    pub fn name(&self) -> String {
        match self.kind {
            DensityKind::Uniform => "uniform".into(),
            DensityKind::SmoothBump { amplitude, mode } => format!("smooth_bump(a={amplitude},k={mode})"),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, DensityKind::Uniform)
    }

    fn phase(&self, x: &[f64]) -> f64 {
        dot(&self.direction, x)
    }

    fn unnormalized(&self, x: &[f64]) -> f64 {
        match self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::SmoothBump { amplitude, mode } => 1.0 + amplitude * (mode * self.phase(x)).sin(),
        }
    }

    /// `ρ(x)` at an ambient point on the manifold.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.unnormalized(x) / self.normalization
    }

    /// Ambient gradient of the extension used to define `ρ`.
    pub fn ambient_gradient(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            DensityKind::Uniform => vec![0.0; x.len()],
            DensityKind::SmoothBump { amplitude, mode } => {
                let c = amplitude * mode * (mode * self.phase(x)).cos() / self.normalization;
                self.direction.iter().map(|w| c * w).collect()
            }
        }
    }

    pub fn ambient_hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let p = x.len();
        match self.kind {
            DensityKind::Uniform => DMatrix::zeros(p, p),
            DensityKind::SmoothBump { amplitude, mode } => {
                let c = -amplitude * mode * mode * (mode * self.phase(x)).sin() / self.normalization;
                DMatrix::from_fn(p, p, |a, b| c * self.direction[a] * self.direction[b])
            }
        }
    }

    /// `(inf ρ, sup ρ)` bounds valid on the whole model.
    pub fn bounds(&self) -> (f64, f64) {
        match self.kind {
            DensityKind::Uniform => (1.0 / self.normalization, 1.0 / self.normalization),
            DensityKind::SmoothBump { amplitude, .. } => (
                (1.0 - amplitude.abs()) / self.normalization,
                (1.0 + amplitude.abs()) / self.normalization,
            ),
        }
    }
}
