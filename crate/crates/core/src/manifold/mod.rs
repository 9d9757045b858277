//! Synthetic embedded manifolds with closed-form geometry.
//!
//! Chart conventions (all angles in radians):
//!
//! | model              | chart point                          | embedding |
//! |--------------------|--------------------------------------|-----------|
//! | `FlatDisk(d, p)`   | `u ∈ R^d`, `‖u‖ ≤ R`                 | `(u, 0, …, 0)` |
//! | `Sphere(d)`        | `(φ_1, …, φ_{d-1}) ∈ [0, π]`, `φ_d ∈ [0, 2π)` | `x_{d+1} = cos φ_1`, remaining coordinates `sin φ_1 ·` the embedding of `S^{d-1}` in `(φ_2, …)`; `S^1` is `(cos φ, sin φ)` |
//! | `Hemisphere(d)`    | as `Sphere`, with `φ_1 ∈ [0, π/2]`   | same |
//! | `Cylinder`         | `(θ, h)`, `θ ∈ [0, 2π)`, `|h| ≤ H`   | `(cos θ, sin θ, h)` |
//! | `Torus`            | `(u, v) ∈ [0, 2π)^2`                 | `((R + r cos v) cos u, (R + r cos v) sin u, r sin v)` |
//!
//! The pole `φ_1 = 0` of the sphere is `(0, …, 0, 1)`.

mod density;
mod field;
mod sampling;

pub use density::{DensityKind, DensityModel};
pub use field::{Monomial, ScalarField, Wave};
pub use sampling::{sample, PointCloud};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{complete_orthonormal, dot, norm, Jet, SecondFundamentalForm};
use crate::quadrature::{gauss_legendre_on, sphere_rule};

/// Residual below which a point counts as lying on the manifold.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

/// Residual allowed for a caller-supplied tangent frame.
pub const FRAME_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldModel {
    FlatDisk { dim: usize, ambient: usize, radius: f64 },
    Sphere { dim: usize },
    Hemisphere { dim: usize },
    /// Unit-radius cylinder around the `x_3` axis.
    Cylinder { half_height: f64 },
    Torus { major: f64, minor: f64 },
}

impl ManifoldModel {
    pub fn flat_disk(dim: usize, ambient: usize, radius: f64) -> Result<Self> {
        let m = ManifoldModel::FlatDisk { dim, ambient, radius };
        m.validate()?;
        Ok(m)
    }

    pub fn sphere(dim: usize) -> Result<Self> {
        let m = ManifoldModel::Sphere { dim };
        m.validate()?;
        Ok(m)
    }

    pub fn hemisphere(dim: usize) -> Result<Self> {
        let m = ManifoldModel::Hemisphere { dim };
        m.validate()?;
        Ok(m)
    }

    pub fn cylinder(half_height: f64) -> Result<Self> {
        let m = ManifoldModel::Cylinder { half_height };
        m.validate()?;
        Ok(m)
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        let m = ManifoldModel::Torus { major, minor };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ManifoldModel::FlatDisk { dim, ambient, radius } => {
                if dim == 0 {
                    return Err(Error::validation("dim", "must be at least 1"));
                }
                if ambient < dim {
                    return Err(Error::validation("ambient", "must be at least dim"));
                }
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::validation("radius", "must be positive"));
                }
            }
            ManifoldModel::Sphere { dim } | ManifoldModel::Hemisphere { dim } => {
                if dim < 2 {
                    return Err(Error::validation("dim", "spheres need dim >= 2"));
                }
            }
            ManifoldModel::Cylinder { half_height } => {
                if !(half_height > 0.0 && half_height.is_finite()) {
                    return Err(Error::validation("half_height", "must be positive"));
                }
            }
            ManifoldModel::Torus { major, minor } => {
                if !(minor > 0.0 && major > minor && major.is_finite()) {
                    return Err(Error::validation("major", "need major > minor > 0"));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match self {
            ManifoldModel::FlatDisk { dim, ambient, .. } => format!("FlatDisk({dim},{ambient})"),
            ManifoldModel::Sphere { dim } => format!("Sphere({dim})"),
            ManifoldModel::Hemisphere { dim } => format!("Hemisphere({dim})"),
            ManifoldModel::Cylinder { .. } => "Cylinder".into(),
            ManifoldModel::Torus { .. } => "Torus".into(),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ManifoldModel::FlatDisk { dim, .. } => dim,
            ManifoldModel::Sphere { dim } | ManifoldModel::Hemisphere { dim } => dim,
            ManifoldModel::Cylinder { .. } | ManifoldModel::Torus { .. } => 2,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            ManifoldModel::FlatDisk { ambient, .. } => ambient,
            ManifoldModel::Sphere { dim } | ManifoldModel::Hemisphere { dim } => dim + 1,
            ManifoldModel::Cylinder { .. } | ManifoldModel::Torus { .. } => 3,
        }
    }

    pub fn has_boundary(&self) -> bool {
        matches!(
            self,
            ManifoldModel::FlatDisk { .. } | ManifoldModel::Hemisphere { .. } | ManifoldModel::Cylinder { .. }
        )
    }

    /// Riemannian volume of the whole model.
    pub fn volume(&self) -> f64 {
        match *self {
            ManifoldModel::FlatDisk { dim, radius, .. } => {
                crate::moments::unit_ball_volume(dim) * radius.powi(dim as i32)
            }
            ManifoldModel::Sphere { dim } => sphere_area(dim),
            ManifoldModel::Hemisphere { dim } => 0.5 * sphere_area(dim),
            ManifoldModel::Cylinder { half_height } => 2.0 * PI * 2.0 * half_height,
            ManifoldModel::Torus { major, minor } => 4.0 * PI * PI * major * minor,
        }
    }

    /// Largest radius for which a Euclidean ball around an interior point
    /// still sees a single embedded sheet. Documentation only; the
    /// estimator does not enforce it.
    pub fn max_eps_hint(&self) -> f64 {
        match *self {
            ManifoldModel::FlatDisk { radius, .. } => radius,
            ManifoldModel::Sphere { .. } | ManifoldModel::Hemisphere { .. } => 1.0,
            ManifoldModel::Cylinder { half_height } => half_height.min(1.0),
            ManifoldModel::Torus { minor, .. } => minor,
        }
    }

    /// Parameter rectangle containing the chart domain (rejection proposal).
    pub fn chart_box(&self) -> Vec<(f64, f64)> {
        match *self {
            ManifoldModel::FlatDisk { dim, radius, .. } => vec![(-radius, radius); dim],
            ManifoldModel::Sphere { dim } => {
                let mut b = vec![(0.0, PI); dim - 1];
                b.push((0.0, 2.0 * PI));
                b
            }
            ManifoldModel::Hemisphere { dim } => {
                let mut b = vec![(0.0, PI); dim - 1];
                b[0] = (0.0, 0.5 * PI);
                b.push((0.0, 2.0 * PI));
                b
            }
            ManifoldModel::Cylinder { half_height } => vec![(0.0, 2.0 * PI), (-half_height, half_height)],
            ManifoldModel::Torus { .. } => vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
        }
    }

    pub fn in_chart(&self, u: &[f64]) -> bool {
        if u.len() != self.dim() || u.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match *self {
            ManifoldModel::FlatDisk { radius, .. } => norm(u) <= radius,
            _ => self
                .chart_box()
                .iter()
                .zip(u)
                .all(|((lo, hi), x)| *x >= *lo && *x <= *hi),
        }
    }

    /// `ι(u)`.
    pub fn embed(&self, u: &[f64]) -> Result<Vec<f64>> {
        if !self.in_chart(u) {
            return Err(Error::OutOfChart {
                model: self.name(),
                point: u.to_vec(),
            });
        }
        Ok(self.embed_unchecked(u))
    }

    pub(crate) fn embed_unchecked(&self, u: &[f64]) -> Vec<f64> {
        match *self {
            ManifoldModel::FlatDisk { ambient, .. } => {
                let mut x = u.to_vec();
                x.resize(ambient, 0.0);
                x
            }
            ManifoldModel::Sphere { .. } | ManifoldModel::Hemisphere { .. } => sphere_embed(u),
            ManifoldModel::Cylinder { .. } => {
                let (s, c) = u[0].sin_cos();
                vec![c, s, u[1]]
            }
            ManifoldModel::Torus { major, minor } => {
                let (su, cu) = u[0].sin_cos();
                let (sv, cv) = u[1].sin_cos();
                let a = major + minor * cv;
                vec![a * cu, a * su, minor * sv]
            }
        }
    }

    /// Analytic chart metric `g_ij = <∂_i ι, ∂_j ι>`.
    pub fn chart_metric(&self, u: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        match *self {
            ManifoldModel::FlatDisk { .. } | ManifoldModel::Cylinder { .. } => DMatrix::identity(d, d),
            ManifoldModel::Sphere { .. } | ManifoldModel::Hemisphere { .. } => {
                let mut g = DMatrix::zeros(d, d);
                let mut scale = 1.0;
                for k in 0..d {
                    g[(k, k)] = scale;
                    scale *= u[k].sin().powi(2);
                }
                g
            }
            ManifoldModel::Torus { major, minor } => {
                let a = major + minor * u[1].cos();
                DMatrix::from_diagonal(&DVector::from_vec(vec![a * a, minor * minor]))
            }
        }
    }

    /// `sqrt(det g)` at chart point `u`.
    pub fn volume_element(&self, u: &[f64]) -> f64 {
        match *self {
            ManifoldModel::FlatDisk { .. } | ManifoldModel::Cylinder { .. } => 1.0,
            ManifoldModel::Sphere { dim } | ManifoldModel::Hemisphere { dim } => (0..dim - 1)
                .map(|k| u[k].sin().abs().powi((dim - 1 - k) as i32))
                .product(),
            ManifoldModel::Torus { major, minor } => minor * (major + minor * u[1].cos()),
        }
    }

    /// Supremum of [`Self::volume_element`] over the chart box.
    pub fn max_volume_element(&self) -> f64 {
        match *self {
            ManifoldModel::Torus { major, minor } => minor * (major + minor),
            _ => 1.0,
        }
    }

    /// Distance from `x` to the embedded model (0 on the manifold).
    pub fn membership_residual(&self, x: &[f64]) -> f64 {
        if x.len() != self.ambient_dim() || x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        match *self {
            ManifoldModel::FlatDisk { dim, radius, .. } => {
                let off = norm(&x[dim..]);
                let out = (norm(&x[..dim]) - radius).max(0.0);
                off.max(out)
            }
            ManifoldModel::Sphere { .. } => (norm(x) - 1.0).abs(),
            ManifoldModel::Hemisphere { dim } => (norm(x) - 1.0).abs().max((-x[dim]).max(0.0)),
            ManifoldModel::Cylinder { half_height } => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                (r - 1.0).abs().max((x[2].abs() - half_height).max(0.0))
            }
            ManifoldModel::Torus { major, minor } => {
                let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                (((rho - major).powi(2) + x[2] * x[2]).sqrt() - minor).abs()
            }
        }
    }

    pub fn check_on_manifold(&self, x: &[f64]) -> Result<()> {
        let residual = self.membership_residual(x);
        if residual <= ON_MANIFOLD_TOL {
            Ok(())
        } else {
            Err(Error::NotOnManifold {
                model: self.name(),
                residual,
            })
        }
    }

    /// Orthonormal basis (as `p × d` columns) of the embedded tangent space at `x`.
    pub fn tangent_frame(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_on_manifold(x)?;
        let p = self.ambient_dim();
        let d = self.dim();
        let cols: Vec<Vec<f64>> = match *self {
            ManifoldModel::FlatDisk { .. } => (0..d)
                .map(|k| {
                    let mut e = vec![0.0; p];
                    e[k] = 1.0;
                    e
                })
                .collect(),
            ManifoldModel::Sphere { .. } | ManifoldModel::Hemisphere { .. } => {
                let n: Vec<f64> = x.iter().map(|v| v / norm(x)).collect();
                complete_orthonormal(p, &[], &[n], d)
            }
            ManifoldModel::Cylinder { .. } => {
                let (a, _) = cylinder_frame(x);
                vec![a, vec![0.0, 0.0, 1.0]]
            }
            ManifoldModel::Torus { .. } => {
                let (au, av, _) = self.torus_frame(x);
                vec![au, av]
            }
        };
        Ok(columns_to_matrix(p, &cols))
    }

    /// Outward unit normal for hypersurface models; `None` for the flat disk.
    pub fn unit_normal(&self, x: &[f64]) -> Option<Vec<f64>> {
        match *self {
            ManifoldModel::FlatDisk { .. } => None,
            ManifoldModel::Sphere { .. } | ManifoldModel::Hemisphere { .. } => {
                let r = norm(x);
                Some(x.iter().map(|v| v / r).collect())
            }
            ManifoldModel::Cylinder { .. } => Some(cylinder_frame(x).1),
            ManifoldModel::Torus { .. } => Some(self.torus_frame(x).2),
        }
    }

    /// Vector-valued second fundamental form `II(X, Y) ∈ R^p` at `x` for
    /// ambient tangent vectors `X`, `Y`.
    pub fn sff_ambient(&self, x: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
        let p = self.ambient_dim();
        match *self {
            ManifoldModel::FlatDisk { .. } => vec![0.0; p],
            ManifoldModel::Sphere { .. } | ManifoldModel::Hemisphere { .. } => {
                let r = norm(x);
                let g = dot(a, b);
                x.iter().map(|v| -g * v / r).collect()
            }
            ManifoldModel::Cylinder { .. } => {
                let (az, n) = cylinder_frame(x);
                let s = dot(a, &az) * dot(b, &az);
                n.iter().map(|v| -s * v).collect()
            }
            ManifoldModel::Torus { major, minor } => {
                let (au, av, n) = self.torus_frame(x);
                let cv = self.torus_cos_v(x);
                let ku = cv / (major + minor * cv);
                let kv = 1.0 / minor;
                let s = ku * dot(a, &au) * dot(b, &au) + kv * dot(a, &av) * dot(b, &av);
                n.iter().map(|v| -s * v).collect()
            }
        }
    }

    /// Second fundamental form in the columns of `frame`, with normal
    /// components taken in an orthonormal basis of the normal space
    /// (the outward normal for hypersurfaces).
    pub fn second_fundamental_form(&self, x: &[f64], frame: &DMatrix<f64>) -> Result<SecondFundamentalForm> {
        self.check_frame(x, frame)?;
        let d = self.dim();
        let p = self.ambient_dim();
        let normals: Vec<Vec<f64>> = match self.unit_normal(x) {
            Some(n) => vec![n],
            None => {
                let tangent: Vec<Vec<f64>> = (0..d).map(|k| frame.column(k).iter().copied().collect()).collect();
                complete_orthonormal(p, &[], &tangent, p - d)
            }
        };
        let cols: Vec<Vec<f64>> = (0..d).map(|k| frame.column(k).iter().copied().collect()).collect();
        SecondFundamentalForm::from_fn(d, normals.len(), |i, j| {
            let v = self.sff_ambient(x, &cols[i], &cols[j]);
            normals.iter().map(|n| dot(&v, n)).collect()
        })
    }

    /// Geodesic distance from `x` to the boundary; `+∞` for closed models.
    pub fn boundary_distance(&self, x: &[f64]) -> Result<f64> {
        self.check_on_manifold(x)?;
        Ok(match *self {
            ManifoldModel::FlatDisk { dim, radius, .. } => (radius - norm(&x[..dim])).max(0.0),
            ManifoldModel::Hemisphere { dim } => (x[dim] / norm(x)).clamp(-1.0, 1.0).asin().max(0.0),
            ManifoldModel::Cylinder { half_height } => (half_height - x[2].abs()).max(0.0),
            ManifoldModel::Sphere { .. } | ManifoldModel::Torus { .. } => f64::INFINITY,
        })
    }

    /// Unit tangent vector at `x` pointing away from the nearest boundary
    /// point, for models with boundary. `None` when the direction is not
    /// defined (closed model, or the point is equidistant in all directions).
    pub fn inward_direction(&self, x: &[f64]) -> Option<Vec<f64>> {
        let p = self.ambient_dim();
        match *self {
            ManifoldModel::FlatDisk { dim, .. } => {
                let r = norm(&x[..dim]);
                if r < 1e-12 {
                    return None;
                }
                let mut v = vec![0.0; p];
                for k in 0..dim {
                    v[k] = -x[k] / r;
                }
                Some(v)
            }
            ManifoldModel::Hemisphere { dim } => {
                // tangential part of the pole direction e_{d+1}
                let r = norm(x);
                let t = x[dim] / r;
                let mut v: Vec<f64> = x.iter().map(|xi| -t * xi / r).collect();
                v[dim] += 1.0;
                let n = norm(&v);
                if n < 1e-12 {
                    return None;
                }
                Some(v.into_iter().map(|c| c / n).collect())
            }
            ManifoldModel::Cylinder { .. } => {
                if x[2] == 0.0 {
                    None
                } else {
                    Some(vec![0.0, 0.0, -x[2].signum()])
                }
            }
            _ => None,
        }
    }

    /// Exponential map `exp_x(v)` for an ambient tangent vector `v`.
    ///
    /// Closed form on every model except the torus, where the geodesic
    /// equations are integrated with RK4 in the chart.
    pub fn exp_map(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        match *self {
            ManifoldModel::FlatDisk { .. } => x.iter().zip(v).map(|(a, b)| a + b).collect(),
            ManifoldModel::Sphere { .. } | ManifoldModel::Hemisphere { .. } => {
                let t = norm(v);
                if t == 0.0 {
                    return x.to_vec();
                }
                let (s, c) = t.sin_cos();
                x.iter().zip(v).map(|(a, b)| c * a + s * b / t).collect()
            }
            ManifoldModel::Cylinder { .. } => {
                let (az, _) = cylinder_frame(x);
                let theta = x[1].atan2(x[0]) + dot(v, &az);
                vec![theta.cos(), theta.sin(), x[2] + v[2]]
            }
            ManifoldModel::Torus { major, minor } => {
                let (au, av, _) = self.torus_frame(x);
                let u0 = x[1].atan2(x[0]);
                let v0 = x[2].atan2(((x[0] * x[0] + x[1] * x[1]).sqrt() - major) / 1.0);
                let a0 = major + minor * v0.cos();
                let mut state = [u0, v0, dot(v, &au) / a0, dot(v, &av) / minor];
                let steps = 400;
                let h = 1.0 / steps as f64;
                let rhs = |s: &[f64; 4]| -> [f64; 4] {
                    let (sv, cv) = s[1].sin_cos();
                    let a = major + minor * cv;
                    [
                        s[2],
                        s[3],
                        2.0 * minor * sv / a * s[2] * s[3],
                        -a * sv / minor * s[2] * s[2],
                    ]
                };
                for _ in 0..steps {
                    let k1 = rhs(&state);
                    let k2 = rhs(&add_scaled(&state, &k1, 0.5 * h));
                    let k3 = rhs(&add_scaled(&state, &k2, 0.5 * h));
                    let k4 = rhs(&add_scaled(&state, &k3, h));
                    for i in 0..4 {
                        state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                    }
                }
                self.embed_unchecked(&[state[0], state[1]])
            }
        }
    }

    /// Check that `frame` has orthonormal columns tangent at `x`.
    pub fn check_frame(&self, x: &[f64], frame: &DMatrix<f64>) -> Result<()> {
        let d = self.dim();
        let p = self.ambient_dim();
        if frame.nrows() != p || frame.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "frame is {}x{}, expected {p}x{d}",
                frame.nrows(),
                frame.ncols()
            )));
        }
        let truth = self.tangent_frame(x)?;
        let off_tangent = (frame - &truth * (truth.transpose() * frame)).norm();
        let gram = (frame.transpose() * frame - DMatrix::<f64>::identity(d, d)).norm();
        let residual = off_tangent.max(gram);
        if residual > FRAME_TOL {
            return Err(Error::FrameNotTangent { residual });
        }
        Ok(())
    }

    /// Convert ambient derivatives of a function `F: R^p → R` into the
    /// intrinsic jet of `F|_M` at `x` in `frame`:
    /// `grad = E^T ∇F`, `Hess(E_i, E_j) = E_i^T D²F E_j + <∇F, II(E_i, E_j)>`.
    pub fn intrinsic_jet(
        &self,
        x: &[f64],
        frame: &DMatrix<f64>,
        value: f64,
        ambient_grad: &[f64],
        ambient_hess: &DMatrix<f64>,
    ) -> Jet {
        let d = frame.ncols();
        let g = DVector::from_column_slice(ambient_grad);
        let grad = frame.transpose() * &g;
        let mut hess = frame.transpose() * ambient_hess * frame;
        let cols: Vec<Vec<f64>> = (0..d).map(|k| frame.column(k).iter().copied().collect()).collect();
        for i in 0..d {
            for j in i..d {
                let c = dot(ambient_grad, &self.sff_ambient(x, &cols[i], &cols[j]));
                hess[(i, j)] += c;
                if i != j {
                    hess[(j, i)] += c;
                }
            }
        }
        // exact symmetry
        let hess = 0.5 * (&hess + hess.transpose());
        Jet::new(value, grad, hess)
    }

    /// Value, gradient and covariant Hessian of `field` at `z` in `frame`.
    pub fn true_derivatives(&self, field: &ScalarField, z: &[f64], frame: &DMatrix<f64>) -> Result<Jet> {
        self.check_frame(z, frame)?;
        field.check_dim(self.ambient_dim())?;
        Ok(self.intrinsic_jet(z, frame, field.value(z), &field.gradient(z), &field.hessian(z)))
    }

    /// Integrate `f` (a function of the ambient point) against the
    /// Riemannian volume, by a product Gauss–Legendre rule in the chart.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let d = self.dim();
        let per_axis = ((1u64 << 20) as f64).powf(1.0 / d as f64).floor().clamp(8.0, 96.0) as usize;
        match *self {
            ManifoldModel::FlatDisk { dim, radius, ambient } => {
                let (rs, ws) = gauss_legendre_on(0.0, radius, per_axis);
                let dirs = sphere_rule(dim, per_axis.min(48));
                let mut total = 0.0;
                let mut x = vec![0.0; ambient];
                for (r, w) in rs.iter().zip(&ws) {
                    let radial = w * r.powi(dim as i32 - 1);
                    for (theta, tw) in &dirs {
                        for k in 0..dim {
                            x[k] = r * theta[k];
                        }
                        total += radial * tw * f(&x);
                    }
                }
                total
            }
            _ => self.integrate_over_box(&self.chart_box(), per_axis, f),
        }
    }

    /// Product Gauss–Legendre integral of `f ∘ ι` times the volume element
    /// over a sub-rectangle of the chart box.
    pub fn integrate_over_box<F: Fn(&[f64]) -> f64>(&self, bounds: &[(f64, f64)], per_axis: usize, f: F) -> f64 {
        let d = bounds.len();
        let axes: Vec<(Vec<f64>, Vec<f64>)> = bounds
            .iter()
            .map(|(lo, hi)| gauss_legendre_on(*lo, *hi, per_axis))
            .collect();
        let mut idx = vec![0usize; d];
        let mut u = vec![0.0; d];
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for k in 0..d {
                u[k] = axes[k].0[idx[k]];
                w *= axes[k].1[idx[k]];
            }
            total += w * self.volume_element(&u) * f(&self.embed_unchecked(&u));
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < per_axis {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == d {
                    return total;
                }
            }
        }
    }

    fn torus_cos_v(&self, x: &[f64]) -> f64 {
        if let ManifoldModel::Torus { major, minor } = *self {
            let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
            ((rho - major) / minor).clamp(-1.0, 1.0)
        } else {
            unreachable!()
        }
    }

    /// `(a_u, a_v, n)`: unit tangents along the two circles and the outward normal.
    fn torus_frame(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let (cu, su) = (x[0] / rho, x[1] / rho);
        let (major, minor) = match *self {
            ManifoldModel::Torus { major, minor } => (major, minor),
            _ => unreachable!(),
        };
        let cv = (rho - major) / minor;
        let sv = x[2] / minor;
        let s = (cv * cv + sv * sv).sqrt();
        let (cv, sv) = (cv / s, sv / s);
        (
            vec![-su, cu, 0.0],
            vec![-sv * cu, -sv * su, cv],
            vec![cv * cu, cv * su, sv],
        )
    }
}

/// `(azimuthal unit tangent, outward normal)` on the unit cylinder.
fn cylinder_frame(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let (c, s) = (x[0] / r, x[1] / r);
    (vec![-s, c, 0.0], vec![c, s, 0.0])
}

fn sphere_embed(angles: &[f64]) -> Vec<f64> {
    if angles.len() == 1 {
        let (s, c) = angles[0].sin_cos();
        return vec![c, s];
    }
    let (s, c) = angles[0].sin_cos();
    let mut x: Vec<f64> = sphere_embed(&angles[1..]).into_iter().map(|v| s * v).collect();
    x.push(c);
    x
}

/// Surface area of the unit sphere `S^d ⊂ R^{d+1}`.
fn sphere_area(d: usize) -> f64 {
    (d as f64 + 1.0) * crate::moments::unit_ball_volume(d + 1)
}

fn add_scaled(a: &[f64; 4], b: &[f64; 4], h: f64) -> [f64; 4] {
    [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2], a[3] + h * b[3]]
}

pub(crate) fn columns_to_matrix(p: usize, cols: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(p, cols.len(), |i, j| cols[j][i])
}

#[cfg(test)]
mod tests;
