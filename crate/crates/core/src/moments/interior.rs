//! Small-ball expansions of density-weighted averages at an interior point.
//!
//! Every item is the average `(1/Vol_ρ(B̃)) ∫_{B̃} (…) ρ dvol` over
//! `B̃ = M ∩ B_ε(z)`, expanded in `ε` with `α = ε²/(d+2)` and
//! `β = ε⁴/((d+2)(d+4))`. Coordinates `x_s = <x − z, e_s>`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Jet, SecondFundamentalForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntfItem {
    /// `avg f`
    Mean,
    /// `avg x_j f`
    First { j: usize },
    /// `avg x_j² f`
    Square { j: usize },
    /// `avg x_s x_l f`, `s ≠ l`
    Cross { s: usize, l: usize },
    /// `avg x_s x_l²`
    Cubic { s: usize, l: usize },
    /// `avg x_s² x_l²`
    Quartic { s: usize, l: usize },
}

impl IntfItem {
    /// Power of `ε` of the first neglected term.
    pub fn remainder_order(&self) -> i32 {
        match self {
            IntfItem::Mean | IntfItem::First { .. } => 4,
            _ => 6,
        }
    }
}

/// Leading expansion of the chosen average.
///
/// `field` and `rho` carry value, gradient and covariant Hessian at `z` in
/// the frame `{e_j}`; `curvature` is the second fundamental form in the
/// same frame and is required by the `Square` and `Cross` items.
pub fn interior_moment_oracle(
    d: usize,
    eps: f64,
    field: &Jet,
    rho: &Jet,
    curvature: Option<&SecondFundamentalForm>,
    which: IntfItem,
) -> Result<f64> {
    if field.dim() != d || rho.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "jets have d = {} and {}, expected {d}",
            field.dim(),
            rho.dim()
        )));
    }
    if !(rho.value > 0.0) {
        return Err(Error::InvalidArgument("density must be positive".into()));
    }
    let in_range = |k: usize| {
        if k < d {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("index {k} out of range for d = {d}")))
        }
    };
    let df = d as f64;
    let alpha = eps * eps / (df + 2.0);
    let beta = eps.powi(4) / ((df + 2.0) * (df + 4.0));
    let f = field.value;
    let gf = &field.grad;
    let hf = &field.hess;
    let r = rho.value;
    let gr = &rho.grad;
    let hr = &rho.hess;
    let lap_f = field.laplacian();
    let lap_r = rho.laplacian();
    let grad_dot = gf.dot(gr);
    let curv = || {
        curvature.ok_or_else(|| Error::MissingCurvatureData("second fundamental form at z".into()))
    };
    let unit = |k: usize| {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        e
    };
    Ok(match which {
        IntfItem::Mean => f + 0.5 * alpha * (lap_f + 2.0 * grad_dot / r),
        IntfItem::First { j } => {
            in_range(j)?;
            alpha * (gf[j] + f * gr[j] / r)
        }
        IntfItem::Square { j } => {
            in_range(j)?;
            let s = curv()?;
            if s.dim() != d {
                return Err(Error::DimensionMismatch("curvature dimension".into()));
            }
            let ej = unit(j);
            alpha * f
                + beta * (hf[(j, j)] + 0.5 * lap_f)
                + beta / r * (2.0 * gf[j] * gr[j] + grad_dot + f * hr[(j, j)] - f * lap_r / (df + 2.0))
                + beta * (2.0 * s.volume_lambda() - 0.5 * s.mean_dot(&ej, &ej)) * f
        }
        IntfItem::Cross { s: a, l: b } => {
            in_range(a)?;
            in_range(b)?;
            if a == b {
                return Err(Error::InvalidArgument("cross item needs s != l".into()));
            }
            let s = curv()?;
            if s.dim() != d {
                return Err(Error::DimensionMismatch("curvature dimension".into()));
            }
            beta * hf[(a, b)] + beta / r * (gf[a] * gr[b] + gf[b] * gr[a] + f * hr[(a, b)])
                - 0.5 * beta * s.mean_dot(&unit(a), &unit(b)) * f
        }
        IntfItem::Cubic { s, l } => {
            in_range(s)?;
            in_range(l)?;
            let w = if s == l { 3.0 } else { 1.0 };
            w * beta * gr[s] / r
        }
        IntfItem::Quartic { s, l } => {
            in_range(s)?;
            in_range(l)?;
            if s == l {
                3.0 * beta
            } else {
                beta
            }
        }
    })
}
