//! Test functions on the models.
//!
//! Every field is the restriction of a smooth function `F: R^p → R`, so the
//! intrinsic derivatives follow from the ambient ones and the second
//! fundamental form (see [`super::ManifoldModel::intrinsic_jet`]).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ManifoldModel;
use crate::error::{Error, Result};
use crate::geometry::dot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coef: f64,
    /// Exponent of each ambient coordinate.
    pub powers: Vec<u32>,
}

/// `amplitude * sin(<frequency, x> + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wave {
    pub amplitude: f64,
    pub frequency: Vec<f64>,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarField {
    AmbientLinear { c: Vec<f64> },
    AmbientPolynomial { terms: Vec<Monomial> },
    Trig { waves: Vec<Wave> },
}

impl ScalarField {
    pub fn constant(value: f64, p: usize) -> Self {
        ScalarField::AmbientPolynomial {
            terms: vec![Monomial {
                coef: value,
                powers: vec![0; p],
            }],
        }
    }

    /// Ambient dimension the field is written for.
    pub fn ambient_dim(&self) -> Option<usize> {
        match self {
            ScalarField::AmbientLinear { c } => Some(c.len()),
            ScalarField::AmbientPolynomial { terms } => terms.first().map(|t| t.powers.len()),
            ScalarField::Trig { waves } => waves.first().map(|w| w.frequency.len()),
        }
    }

    pub fn check_dim(&self, p: usize) -> Result<()> {
        let ok = match self {
            ScalarField::AmbientLinear { c } => c.len() == p,
            ScalarField::AmbientPolynomial { terms } => terms.iter().all(|t| t.powers.len() == p),
            ScalarField::Trig { waves } => waves.iter().all(|w| w.frequency.len() == p),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("field is not defined on R^{p}")))
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::AmbientLinear { c } => dot(c, x),
            ScalarField::AmbientPolynomial { terms } => terms
                .iter()
                .map(|t| t.coef * t.powers.iter().zip(x).map(|(k, v)| v.powi(*k as i32)).product::<f64>())
                .sum(),
            ScalarField::Trig { waves } => waves
                .iter()
                .map(|w| w.amplitude * (dot(&w.frequency, x) + w.phase).sin())
                .sum(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let p = x.len();
        match self {
            ScalarField::AmbientLinear { c } => c.clone(),
            ScalarField::AmbientPolynomial { terms } => {
                let mut g = vec![0.0; p];
                for t in terms {
                    for (a, ga) in g.iter_mut().enumerate() {
                        *ga += t.coef * partial(&t.powers, x, &[a]);
                    }
                }
                g
            }
            ScalarField::Trig { waves } => {
                let mut g = vec![0.0; p];
                for w in waves {
                    let c = w.amplitude * (dot(&w.frequency, x) + w.phase).cos();
                    for (ga, k) in g.iter_mut().zip(&w.frequency) {
                        *ga += c * k;
                    }
                }
                g
            }
        }
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let p = x.len();
        match self {
            ScalarField::AmbientLinear { .. } => DMatrix::zeros(p, p),
            ScalarField::AmbientPolynomial { terms } => DMatrix::from_fn(p, p, |a, b| {
                terms.iter().map(|t| t.coef * partial(&t.powers, x, &[a, b])).sum()
            }),
            ScalarField::Trig { waves } => {
                let mut h = DMatrix::zeros(p, p);
                for w in waves {
                    let s = -w.amplitude * (dot(&w.frequency, x) + w.phase).sin();
                    for a in 0..p {
                        for b in 0..p {
                            h[(a, b)] += s * w.frequency[a] * w.frequency[b];
                        }
                    }
                }
                h
            }
        }
    }

    /// Values at every row of a row-major `n × p` buffer.
    pub fn evaluate_rows(&self, points: &[f64], p: usize) -> Vec<f64> {
        points.chunks_exact(p).map(|x| self.value(x)).collect()
    }

    /// The fixed test-field catalog: three fields per model.
    ///
    /// | id      | FlatDisk                                   | other models |
    /// |---------|--------------------------------------------|--------------|
    /// | `poly`  | `0.7u1² − 0.4u2² + 0.9u1u2 + 0.3u1 − 0.2u2 + 0.1` | `x1 x2 + 0.5 x_p²` |
    /// | `bowl`  | `|u|² / 2`                                 | n/a |
    /// | `linear`| n/a                                        | `<c, x>`, `c = (1, 2, …, 2) / ‖·‖` |
    /// | `trig`  | `sin(u1 + 0.5 u2 + 0.3)`                   | `sin(x1 + 0.5 x2 + 0.3)` |
    ///
    /// For `FlatDisk` with `d > 2` the extra coordinates enter `poly` and
    /// `bowl` with the same pattern as `u2`.
    pub fn catalog(model: &ManifoldModel, id: &str) -> Result<ScalarField> {
        let p = model.ambient_dim();
        let d = model.dim();
        let mono = |coef: f64, pairs: &[(usize, u32)]| {
            let mut powers = vec![0u32; p];
            for (i, k) in pairs {
                powers[*i] += k;
            }
            Monomial { coef, powers }
        };
        let wave = || {
            let mut frequency = vec![0.0; p];
            frequency[0] = 1.0;
            if p > 1 {
                frequency[1] = 0.5;
            }
            ScalarField::Trig {
                waves: vec![Wave {
                    amplitude: 1.0,
                    frequency,
                    phase: 0.3,
                }],
            }
        };
        let flat = matches!(model, ManifoldModel::FlatDisk { .. });
        match (id, flat) {
            ("poly", true) => {
                let mut terms = vec![mono(0.1, &[]), mono(0.7, &[(0, 2)]), mono(0.3, &[(0, 1)])];
                for k in 1..d {
                    terms.push(mono(-0.4, &[(k, 2)]));
                    terms.push(mono(0.9, &[(0, 1), (k, 1)]));
                    terms.push(mono(-0.2, &[(k, 1)]));
                }
                Ok(ScalarField::AmbientPolynomial { terms })
            }
            ("bowl", true) => Ok(ScalarField::AmbientPolynomial {
                terms: (0..d).map(|k| mono(0.5, &[(k, 2)])).collect(),
            }),
            ("poly", false) => Ok(ScalarField::AmbientPolynomial {
                terms: vec![mono(1.0, &[(0, 1), (1, 1)]), mono(0.5, &[(p - 1, 2)])],
            }),
            ("linear", false) => {
                let mut c = vec![2.0; p];
                c[0] = 1.0;
                let n = dot(&c, &c).sqrt();
                Ok(ScalarField::AmbientLinear {
                    c: c.into_iter().map(|v| v / n).collect(),
                })
            }
            ("trig", _) => Ok(wave()),
            _ => Err(Error::validation(
                "field",
                format!("unknown field `{id}` for {}", model.name()),
            )),
        }
    }

    pub fn catalog_ids(model: &ManifoldModel) -> &'static [&'static str] {
        match model {
            ManifoldModel::FlatDisk { .. } => &["poly", "bowl", "trig"],
            _ => &["linear", "poly", "trig"],
        }
    }
}

/// Partial derivative of `prod x_i^{k_i}` with respect to the listed coordinates.
fn partial(powers: &[u32], x: &[f64], wrt: &[usize]) -> f64 {
    let mut k: Vec<i32> = powers.iter().map(|v| *v as i32).collect();
    let mut coef = 1.0;
    for &a in wrt {
        if k[a] == 0 {
            return 0.0;
        }
        coef *= k[a] as f64;
        k[a] -= 1;
    }
    coef * k.iter().zip(x).map(|(e, v)| v.powi(*e)).product::<f64>()
}
