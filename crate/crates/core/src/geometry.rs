//! Small differential-geometry containers shared by the models and the
//! moment oracles.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Value, gradient and Hessian of a function at a point, expressed in an
/// orthonormal tangent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet {
    pub fn new(value: f64, grad: DVector<f64>, hess: DMatrix<f64>) -> Self {
        Jet { value, grad, hess }
    }

    pub fn constant(value: f64, d: usize) -> Self {
        Jet {
            value,
            grad: DVector::zeros(d),
            hess: DMatrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn laplacian(&self) -> f64 {
        self.hess.trace()
    }
}

/// Second fundamental form at a point: `II(E_i, E_j)` for an orthonormal
/// tangent frame `{E_i}`, written in an orthonormal basis of the normal
/// space (`codim` components).
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalForm {
    dim: usize,
    codim: usize,
    // index (i * dim + j) * codim + a
    data: Vec<f64>,
}

impl SecondFundamentalForm {
    pub fn new(dim: usize, codim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim * codim {
            return Err(Error::BadLength {
                expected: dim * dim * codim,
                found: data.len(),
            });
        }
        let sff = SecondFundamentalForm { dim, codim, data };
        for i in 0..dim {
            for j in 0..i {
                for a in 0..codim {
                    let (x, y) = (sff.data[sff.offset(i, j) + a], sff.data[sff.offset(j, i) + a]);
                    if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                        return Err(Error::NotSymmetric(format!(
                            "II({i},{j}) != II({j},{i}) in normal component {a}"
                        )));
                    }
                }
            }
        }
        Ok(sff)
    }

    pub fn zeros(dim: usize, codim: usize) -> Self {
        SecondFundamentalForm {
            dim,
            codim,
            data: vec![0.0; dim * dim * codim],
        }
    }

    /// Build from a closure returning the normal components of `II(E_i, E_j)`.
    pub fn from_fn(dim: usize, codim: usize, f: impl Fn(usize, usize) -> Vec<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim * codim);
        for i in 0..dim {
            for j in 0..dim {
                let v = f(i, j);
                if v.len() != codim {
                    return Err(Error::BadLength {
                        expected: codim,
                        found: v.len(),
                    });
                }
                data.extend(v);
            }
        }
        Self::new(dim, codim, data)
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        (i * self.dim + j) * self.codim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn component(&self, i: usize, j: usize) -> &[f64] {
        let o = self.offset(i, j);
        &self.data[o..o + self.codim]
    }

    /// `II(x, y)` for tangent vectors given in frame coordinates.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.codim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for (o, c) in out.iter_mut().zip(self.component(i, j)) {
                    *o += w * c;
                }
            }
        }
        out
    }

    /// Mean curvature vector `H = tr II`.
    pub fn mean_curvature(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.codim];
        for i in 0..self.dim {
            for (o, c) in h.iter_mut().zip(self.component(i, i)) {
                *o += c;
            }
        }
        h
    }

    /// `|A|^2 = sum_ij |II(E_i, E_j)|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Ricci curvature from the Gauss equation in flat ambient space:
    /// `Ric(x, y) = H . II(x, y) - sum_j II(x, E_j) . II(y, E_j)`.
    pub fn ricci(&self, x: &[f64], y: &[f64]) -> f64 {
        let h = self.mean_curvature();
        let mut r = dot(&h, &self.apply(x, y));
        let mut e = vec![0.0; self.dim];
        for j in 0..self.dim {
            e[j] = 1.0;
            r -= dot(&self.apply(x, &e), &self.apply(y, &e));
            e[j] = 0.0;
        }
        r
    }

    /// `H . II(x, y)`.
    pub fn mean_dot(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(&self.mean_curvature(), &self.apply(x, y))
    }

    /// `Λ = (|H|^2 - 2|A|^2) / (8 (d + 2))`, the curvature constant in the
    /// small-ball volume expansion.
    pub fn volume_lambda(&self) -> f64 {
        let h = self.mean_curvature();
        (dot(&h, &h) - 2.0 * self.norm_sq()) / (8.0 * (self.dim as f64 + 2.0))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Extend `seed` (orthonormal columns, possibly empty) by Gram–Schmidt over
/// the standard basis until `count` orthonormal columns exist in `R^p`,
/// skipping any direction in `exclude`.
pub(crate) fn complete_orthonormal(
    p: usize,
    seed: &[Vec<f64>],
    exclude: &[Vec<f64>],
    count: usize,
) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = seed.to_vec();
    let mut against: Vec<Vec<f64>> = exclude.to_vec();
    against.extend(seed.iter().cloned());
    for k in 0..p {
        if basis.len() >= count {
            break;
        }
        let mut v = vec![0.0; p];
        v[k] = 1.0;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for b in &against {
                let c = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            v.iter_mut().for_each(|x| *x /= n);
            against.push(v.clone());
            basis.push(v);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sphere_curvature_scalars() {
        // S^2 with outward normal: II(E_i, E_j) = -delta_ij
        let sff = SecondFundamentalForm::from_fn(2, 1, |i, j| vec![if i == j { -1.0 } else { 0.0 }]).unwrap();
        assert_eq!(sff.mean_curvature(), vec![-2.0]);
        assert_eq!(sff.norm_sq(), 2.0);
        assert!((sff.ricci(&[1.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(sff.volume_lambda(), 0.0);
    }

    #[test]
    fn asymmetric_form_is_rejected() {
        let err = SecondFundamentalForm::new(2, 1, vec![1.0, 0.5, 0.2, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric(_)));
    }

    #[test]
    fn completion_is_orthonormal() {
        let n = vec![0.0, 0.6, 0.8];
        let b = complete_orthonormal(3, &[], std::slice::from_ref(&n), 2);
        assert_eq!(b.len(), 2);
        for v in &b {
            assert!(dot(v, &n).abs() < 1e-14);
            assert!((norm(v) - 1.0).abs() < 1e-14);
        }
        assert!(dot(&b[0], &b[1]).abs() < 1e-14);
    }
}
