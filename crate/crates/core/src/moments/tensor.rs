//! Sphere integrals of tensors contracted with `θ ∈ S^{d−1}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ball::{mc_sphere_mean, unit_ball_volume};
use crate::error::{Error, Result};
use crate::geometry::{dot, SecondFundamentalForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorKind {
    /// `∫ T(θ,θ)`
    TraceT,
    /// `∫ T(θ,θ) <θ,u>²`
    TE1Sq,
    /// `∫ T(θ,θ) <θ,u><θ,v>`
    TE1E2,
    /// `∫ |II(θ,θ)|²`
    SffSq,
    /// `∫ |II(θ,θ)|² <θ,u>²`
    SffSqE1Sq,
    /// `∫ |II(θ,θ)|² <θ,u><θ,v>`
    SffSqE1E2,
    /// `∫ <II(θ,θ), II(θ,u)> <θ,v>`
    AijCross,
}

impl TensorKind {
    pub const ALL: [TensorKind; 7] = [
        TensorKind::TraceT,
        TensorKind::TE1Sq,
        TensorKind::TE1E2,
        TensorKind::SffSq,
        TensorKind::SffSqE1Sq,
        TensorKind::SffSqE1E2,
        TensorKind::AijCross,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TensorKind::TraceT => "traceT",
            TensorKind::TE1Sq => "T_e1_sq",
            TensorKind::TE1E2 => "T_e1_e2",
            TensorKind::SffSq => "sff_sq",
            TensorKind::SffSqE1Sq => "sff_sq_e1sq",
            TensorKind::SffSqE1E2 => "sff_sq_e1e2",
            TensorKind::AijCross => "AijCross",
        }
    }

    fn uses_t(&self) -> bool {
        matches!(self, TensorKind::TraceT | TensorKind::TE1Sq | TensorKind::TE1E2)
    }

    fn needs_orthogonal_pair(&self) -> bool {
        matches!(self, TensorKind::TE1E2 | TensorKind::SffSqE1E2)
    }
}

/// Inputs for [`sphere_tensor_integral`]. `u` and `v` are unit vectors in
/// `R^d`; `u ⊥ v` is required by the mixed kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorInputs {
    pub t: Option<DMatrix<f64>>,
    pub sff: Option<SecondFundamentalForm>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl TensorInputs {
    fn dim(&self, kind: TensorKind) -> Result<usize> {
        if kind.uses_t() {
            let t = self
                .t
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument(format!("{} needs a tensor T", kind.name())))?;
            if !t.is_square() {
                return Err(Error::DimensionMismatch("T must be square".into()));
            }
            if (t - t.transpose()).amax() > 1e-12 * (1.0 + t.amax()) {
                return Err(Error::NotSymmetric("T".into()));
            }
            Ok(t.nrows())
        } else {
            self.sff
                .as_ref()
                .map(|s| s.dim())
                .ok_or_else(|| Error::MissingCurvatureData(format!("{} needs a second fundamental form", kind.name())))
        }
    }

    fn check_vectors(&self, kind: TensorKind, d: usize) -> Result<()> {
        let needs_u = !matches!(kind, TensorKind::TraceT | TensorKind::SffSq);
        let needs_v = matches!(kind, TensorKind::TE1E2 | TensorKind::SffSqE1E2 | TensorKind::AijCross);
        for (name, w, needed) in [("u", &self.u, needs_u), ("v", &self.v, needs_v)] {
            if !needed {
                continue;
            }
            if w.len() != d {
                return Err(Error::DimensionMismatch(format!("{name} has {} entries, d = {d}", w.len())));
            }
            if (dot(w, w) - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!("{name} must be a unit vector")));
            }
        }
        if kind.needs_orthogonal_pair() && dot(&self.u, &self.v).abs() > 1e-10 {
            return Err(Error::InvalidArgument("u and v must be orthogonal".into()));
        }
        Ok(())
    }
}

fn quad(t: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let d = t.nrows();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += x[i] * t[(i, j)] * y[j];
        }
    }
    s
}

/// Closed form of the sphere integral over the unit `S^{d−1}`. With
/// `|B| = |B^d|`, `H = tr II`, `|A|² = Σ|II(E_i,E_j)|²` and `Ric` from
/// the Gauss equation:
///
/// * `TraceT`: `|B| tr T`
/// * `TE1Sq`: `|B| (2T(u,u) + tr T) / (d+2)`
/// * `TE1E2`: `2|B| T(u,v) / (d+2)`
/// * `SffSq`: `|B| (2|A|² + |H|²) / (d+2)`
/// * `SffSqE1Sq`: `|B| (12 H·II(u,u) − 8 Ric(u,u) + 2|A|² + |H|²) / ((d+2)(d+4))`
/// * `SffSqE1E2`: `|B| (12 H·II(u,v) − 8 Ric(u,v)) / ((d+2)(d+4))`
/// * `AijCross`: `|B| (3 H·II(u,v) − 2 Ric(u,v)) / (d+2)`
pub fn sphere_tensor_integral(kind: TensorKind, inputs: &TensorInputs) -> Result<f64> {
    let d = inputs.dim(kind)?;
    inputs.check_vectors(kind, d)?;
    let df = d as f64;
    let b = unit_ball_volume(d);
    let (u, v) = (&inputs.u, &inputs.v);
    let value = if kind.uses_t() {
        let t = inputs.t.as_ref().expect("checked");
        match kind {
            TensorKind::TraceT => b * t.trace(),
            TensorKind::TE1Sq => b * (2.0 * quad(t, u, u) + t.trace()) / (df + 2.0),
            _ => 2.0 * b * quad(t, u, v) / (df + 2.0),
        }
    } else {
        let s = inputs.sff.as_ref().expect("checked");
        let h = s.mean_curvature();
        let h2 = dot(&h, &h);
        let a2 = s.norm_sq();
        let c6 = b / ((df + 2.0) * (df + 4.0));
        match kind {
            TensorKind::SffSq => b * (2.0 * a2 + h2) / (df + 2.0),
            TensorKind::SffSqE1Sq => c6 * (12.0 * s.mean_dot(u, u) - 8.0 * s.ricci(u, u) + 2.0 * a2 + h2),
            TensorKind::SffSqE1E2 => c6 * (12.0 * s.mean_dot(u, v) - 8.0 * s.ricci(u, v)),
            _ => b * (3.0 * s.mean_dot(u, v) - 2.0 * s.ricci(u, v)) / (df + 2.0),
        }
    };
    Ok(value)
}

/// The integrand of [`sphere_tensor_integral`] at `θ`.
pub fn tensor_integrand(kind: TensorKind, inputs: &TensorInputs, theta: &[f64]) -> f64 {
    let (u, v) = (&inputs.u, &inputs.v);
    if kind.uses_t() {
        let t = inputs.t.as_ref().expect("tensor required");
        let base = quad(t, theta, theta);
        match kind {
            TensorKind::TraceT => base,
            TensorKind::TE1Sq => base * dot(theta, u).powi(2),
            _ => base * dot(theta, u) * dot(theta, v),
        }
    } else {
        let s = inputs.sff.as_ref().expect("second fundamental form required");
        let ii = s.apply(theta, theta);
        let sq = dot(&ii, &ii);
        match kind {
            TensorKind::SffSq => sq,
            TensorKind::SffSqE1Sq => sq * dot(theta, u).powi(2),
            TensorKind::SffSqE1E2 => sq * dot(theta, u) * dot(theta, v),
            _ => dot(&ii, &s.apply(theta, u)) * dot(theta, v),
        }
    }
}

/// Monte Carlo value of the same integral with its standard error.
pub fn mc_tensor_integral(kind: TensorKind, inputs: &TensorInputs, n: usize, seed: u64) -> Result<(f64, f64)> {
    let d = inputs.dim(kind)?;
    inputs.check_vectors(kind, d)?;
    let area = d as f64 * unit_ball_volume(d);
    let (m, s) = mc_sphere_mean(d, n, seed, &format!("mc_tensor/{}", kind.name()), |x| {
        tensor_integrand(kind, inputs, x)
    });
    Ok((m * area, s * area))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sphere_rule;

    fn inputs_t(t: DMatrix<f64>) -> TensorInputs {
        let d = t.nrows();
        let mut u = vec![0.0; d];
        u[0] = 1.0;
        let mut v = vec![0.0; d];
        v[1] = 1.0;
        TensorInputs { t: Some(t), sff: None, u, v }
    }

    #[test]
    fn identity_trace() {
        for d in 2..=5 {
            let v = sphere_tensor_integral(TensorKind::TraceT, &inputs_t(DMatrix::identity(d, d))).unwrap();
            assert!((v - d as f64 * unit_ball_volume(d)).abs() < 1e-13);
        }
    }

    #[test]
    fn first_axis_projector() {
        let d = 3;
        let mut t = DMatrix::zeros(d, d);
        t[(0, 0)] = 1.0;
        let v = sphere_tensor_integral(TensorKind::TE1Sq, &inputs_t(t)).unwrap();
        assert!((v - unit_ball_volume(d) * 3.0 / 5.0).abs() < 1e-13);
    }

    #[test]
    fn asymmetric_tensor_rejected() {
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            sphere_tensor_integral(TensorKind::TraceT, &inputs_t(t)),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn closed_forms_match_product_quadrature() {
        // codimension 2 form in d = 3, generic u, v
        let sff = SecondFundamentalForm::from_fn(3, 2, |i, j| {
            let a = (i + j) as f64 * 0.3 - 0.4;
            let b = if i == j { 0.7 - i as f64 * 0.5 } else { 0.2 * (i * j) as f64 + 0.1 };
            vec![a, b]
        })
        .unwrap();
        let c = 0.6f64;
        let s = 0.8f64;
        let inputs = TensorInputs {
            t: Some(DMatrix::from_row_slice(3, 3, &[1.0, 0.3, -0.2, 0.3, -0.5, 0.4, -0.2, 0.4, 2.0])),
            sff: Some(sff),
            u: vec![c, s, 0.0],
            v: vec![-s, c, 0.0],
        };
        let rule = sphere_rule(3, 12);
        for kind in TensorKind::ALL {
            let q: f64 = rule.iter().map(|(x, w)| w * tensor_integrand(kind, &inputs, x)).sum();
            let closed = sphere_tensor_integral(kind, &inputs).unwrap();
            assert!((q - closed).abs() < 1e-11, "{}: {q} vs {closed}", kind.name());
        }
    }
}
