use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn all_models() -> Vec<ManifoldModel> {
    vec![
        ManifoldModel::flat_disk(2, 3, 1.0).unwrap(),
        ManifoldModel::sphere(2).unwrap(),
        ManifoldModel::sphere(3).unwrap(),
        ManifoldModel::hemisphere(2).unwrap(),
        ManifoldModel::cylinder(1.5).unwrap(),
        ManifoldModel::torus(2.0, 0.5).unwrap(),
    ]
}

fn random_chart_point(m: &ManifoldModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        // stay away from coordinate singularities
        let u: Vec<f64> = m
            .chart_box()
            .iter()
            .map(|(lo, hi)| {
                let pad = 0.05 * (hi - lo);
                lo + pad + (hi - lo - 2.0 * pad) * rng.random::<f64>()
            })
            .collect();
        if m.in_chart(&u) {
            return u;
        }
    }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
}

#[test]
fn embedding_examples() {
    let s = ManifoldModel::sphere(2).unwrap();
    assert!(close(&s.embed(&[0.0, 0.0]).unwrap(), &[0.0, 0.0, 1.0], 1e-15));
    let f = ManifoldModel::flat_disk(2, 3, 1.0).unwrap();
    assert_eq!(f.embed(&[0.3, 0.4]).unwrap(), vec![0.3, 0.4, 0.0]);
    let c = ManifoldModel::cylinder(1.0).unwrap();
    assert!(close(&c.embed(&[PI / 2.0, 0.5]).unwrap(), &[0.0, 1.0, 0.5], 1e-15));
    assert!(matches!(f.embed(&[0.9, 0.9]), Err(Error::OutOfChart { .. })));
    assert!(matches!(s.embed(&[-0.1, 0.0]), Err(Error::OutOfChart { .. })));
}

#[test]
fn sphere_points_have_unit_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in [ManifoldModel::sphere(4).unwrap(), ManifoldModel::hemisphere(3).unwrap()] {
        for _ in 0..100 {
            let x = m.embed(&random_chart_point(&m, &mut rng)).unwrap();
            assert!((crate::geometry::norm(&x) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn metric_matches_finite_difference_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-6;
    for m in all_models() {
        let d = m.dim();
        for _ in 0..100 {
            let u = random_chart_point(&m, &mut rng);
            let cols: Vec<Vec<f64>> = (0..d)
                .map(|k| {
                    let mut up = u.clone();
                    let mut um = u.clone();
                    up[k] += h;
                    um[k] -= h;
                    let (a, b) = (m.embed_unchecked(&up), m.embed_unchecked(&um));
                    a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
                })
                .collect();
            let g = m.chart_metric(&u);
            for i in 0..d {
                for j in 0..d {
                    let fd = crate::geometry::dot(&cols[i], &cols[j]);
                    assert!((fd - g[(i, j)]).abs() < 1e-6, "{} at {u:?}", m.name());
                }
            }
            let det = g.determinant().sqrt();
            assert!((det - m.volume_element(&u)).abs() < 1e-12);
        }
    }
}

#[test]
fn frames_are_orthonormal_and_tangent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in all_models() {
        for _ in 0..50 {
            let u = random_chart_point(&m, &mut rng);
            let x = m.embed(&u).unwrap();
            let e = m.tangent_frame(&x).unwrap();
            let gram = e.transpose() * &e;
            assert!((gram - DMatrix::<f64>::identity(m.dim(), m.dim())).amax() < 1e-12);
            // chart tangent vectors lie in the span
            let proj = &e * e.transpose();
            for k in 0..m.dim() {
                let mut up = u.clone();
                up[k] += 1e-6;
                let a = DMatrix::from_column_slice(x.len(), 1, &m.embed_unchecked(&up));
                let b = DMatrix::from_column_slice(x.len(), 1, &x);
                let t = (a - b) / 1e-6;
                assert!((&proj * &t - &t).amax() < 1e-5 * (1.0 + t.amax()));
            }
        }
    }
}

#[test]
fn frame_examples() {
    let s = ManifoldModel::sphere(2).unwrap();
    let e = s.tangent_frame(&[0.0, 0.0, 1.0]).unwrap();
    let p = &e * e.transpose();
    let expect = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    assert!((p - &expect).amax() < 1e-15);
    let f = ManifoldModel::flat_disk(2, 3, 1.0).unwrap();
    let e = f.tangent_frame(&[0.2, -0.1, 0.0]).unwrap();
    assert!((&e * e.transpose() - &expect).amax() < 1e-15);
    let c = ManifoldModel::cylinder(1.0).unwrap();
    let e = c.tangent_frame(&[1.0, 0.0, 0.3]).unwrap();
    let expect = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    assert!((&e * e.transpose() - expect).amax() < 1e-15);
    assert!(matches!(s.tangent_frame(&[0.0, 0.0, 1.1]), Err(Error::NotOnManifold { .. })));
}

#[test]
fn boundary_distances() {
    let h = ManifoldModel::hemisphere(2).unwrap();
    assert!((h.boundary_distance(&[0.0, 0.0, 1.0]).unwrap() - PI / 2.0).abs() < 1e-15);
    let s = ManifoldModel::sphere(2).unwrap();
    assert_eq!(s.boundary_distance(&[1.0, 0.0, 0.0]).unwrap(), f64::INFINITY);
    let t = ManifoldModel::torus(2.0, 0.5).unwrap();
    assert_eq!(t.boundary_distance(&[2.5, 0.0, 0.0]).unwrap(), f64::INFINITY);
    let f = ManifoldModel::flat_disk(2, 2, 1.0).unwrap();
    assert!((f.boundary_distance(&[0.7, 0.0]).unwrap() - 0.3).abs() < 1e-15);
}

#[test]
fn sphere_linear_field_identity() {
    let s = ManifoldModel::sphere(2).unwrap();
    let z = [0.48, 0.6, 0.64];
    let f = ScalarField::AmbientLinear { c: z.to_vec() };
    let e = s.tangent_frame(&z).unwrap();
    let jet = s.true_derivatives(&f, &z, &e).unwrap();
    assert!(jet.grad.amax() < 1e-15);
    assert!((jet.hess + DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
}

#[test]
fn flat_polynomial_and_constant_fields() {
    let m = ManifoldModel::flat_disk(2, 2, 1.0).unwrap();
    let f = ScalarField::AmbientPolynomial {
        terms: vec![Monomial { coef: 1.0, powers: vec![2, 0] }],
    };
    let z = [0.3, -0.2];
    let e = m.tangent_frame(&z).unwrap();
    let jet = m.true_derivatives(&f, &z, &e).unwrap();
    assert_eq!(jet.grad.as_slice(), &[0.6, 0.0]);
    assert_eq!(jet.hess, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));
    for model in all_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = model.embed(&random_chart_point(&model, &mut rng)).unwrap();
        let e = model.tangent_frame(&x).unwrap();
        let c = ScalarField::constant(4.0, model.ambient_dim());
        let jet = model.true_derivatives(&c, &x, &e).unwrap();
        assert_eq!(jet.value, 4.0);
        assert_eq!(jet.grad.amax(), 0.0);
        assert_eq!(jet.hess.amax(), 0.0);
    }
}

#[test]
fn frame_must_be_tangent() {
    let s = ManifoldModel::sphere(2).unwrap();
    let z = [0.0, 0.0, 1.0];
    let bad = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let f = ScalarField::catalog(&s, "linear").unwrap();
    assert!(matches!(s.true_derivatives(&f, &z, &bad), Err(Error::FrameNotTangent { .. })));
}

/// Second derivative of `f ∘ exp_z` along `v` by central differences.
fn geodesic_second_derivative(m: &ManifoldModel, f: &ScalarField, z: &[f64], v: &[f64], h: f64) -> f64 {
    let step = |t: f64| {
        let w: Vec<f64> = v.iter().map(|c| c * t).collect();
        f.value(&m.exp_map(z, &w))
    };
    (step(h) - 2.0 * f.value(z) + step(-h)) / (h * h)
}

#[test]
fn covariant_hessian_matches_geodesic_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in all_models() {
        for id in ScalarField::catalog_ids(&m) {
            let f = ScalarField::catalog(&m, id).unwrap();
            let x = m.embed(&random_chart_point(&m, &mut rng)).unwrap();
            let e = m.tangent_frame(&x).unwrap();
            let jet = m.true_derivatives(&f, &x, &e).unwrap();
            for _ in 0..20 {
                let a: Vec<f64> = (0..m.dim()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                let n = crate::geometry::norm(&a);
                let a: Vec<f64> = a.iter().map(|c| c / n).collect();
                let v: Vec<f64> = (0..x.len())
                    .map(|r| (0..m.dim()).map(|k| e[(r, k)] * a[k]).sum())
                    .collect();
                let fd = geodesic_second_derivative(&m, &f, &x, &v, 1e-4);
                let av = nalgebra::DVector::from_vec(a.clone());
                let exact = (av.transpose() * &jet.hess * &av)[(0, 0)];
                assert!(
                    (fd - exact).abs() < 1e-5 * exact.abs().max(1.0),
                    "{} {id}: fd {fd} vs {exact}",
                    m.name()
                );
            }
        }
    }
}

#[test]
fn torus_geodesic_stays_on_surface() {
    let t = ManifoldModel::torus(2.0, 0.5).unwrap();
    let x = t.embed(&[0.3, 1.0]).unwrap();
    let e = t.tangent_frame(&x).unwrap();
    let v: Vec<f64> = (0..3).map(|r| 0.8 * e[(r, 0)] + 0.6 * e[(r, 1)]).collect();
    let y = t.exp_map(&x, &v);
    assert!(t.membership_residual(&y) < 1e-10);
}

#[test]
fn sampling_is_deterministic_and_on_manifold() {
    for m in all_models() {
        let rho = DensityModel::new(&m, DensityKind::SmoothBump { amplitude: 0.4, mode: 3.0 }).unwrap();
        let a = sample(&m, &rho, 5000, 11).unwrap();
        let b = sample(&m, &rho, 5000, 11).unwrap();
        assert_eq!(a.points, b.points);
        assert!(a.rows().all(|x| m.membership_residual(x) <= 1e-12));
        let one = sample(&m, &rho, 1, 5).unwrap();
        assert_eq!(one.points, sample(&m, &rho, 1, 5).unwrap().points);
    }
}

#[test]
fn sphere_sample_mean_is_small() {
    let m = ManifoldModel::sphere(2).unwrap();
    let c = sample(&m, &DensityModel::uniform(&m), 10_000, 0).unwrap();
    let mut mean = [0.0; 3];
    for x in c.rows() {
        for a in 0..3 {
            mean[a] += x[a] / 10_000.0;
        }
    }
    assert!(crate::geometry::norm(&mean) < 0.05);
}

#[test]
fn hemisphere_samples_are_in_the_upper_half() {
    let m = ManifoldModel::hemisphere(2).unwrap();
    let c = sample(&m, &DensityModel::uniform(&m), 10_000, 0).unwrap();
    assert!(c.rows().all(|x| x[2] >= 0.0));
}

/// Chi-square test of sampled chart coordinates against the ρ-weighted area
/// law, binned in equal-mass cells of one chart coordinate.
fn chi_square_p_value(m: &ManifoldModel, rho: &DensityModel, axis: usize, bins: usize, n: usize) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let cloud = sample(m, rho, n, 77).unwrap();
    let (lo, hi) = m.chart_box()[axis];
    let coord = |x: &[f64]| -> f64 {
        match (m, axis) {
            (ManifoldModel::Sphere { .. }, 0) => x[2].clamp(-1.0, 1.0).acos(),
            (ManifoldModel::Torus { major, .. }, 1) => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                x[2].atan2(r - major).rem_euclid(2.0 * PI)
            }
            _ => unreachable!(),
        }
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for x in cloud.rows() {
        let k = (((coord(x) - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    // expected cell masses by product quadrature over each slab
    let mass: Vec<f64> = (0..bins)
        .map(|k| {
            let mut bx = m.chart_box();
            bx[axis] = (lo + k as f64 * width, lo + (k + 1) as f64 * width);
            m.integrate_over_box(&bx, 64, |x| rho.value(x))
        })
        .collect();
    let total: f64 = mass.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(&mass)
        .map(|(o, e)| {
            let e = e / total * n as f64;
            (*o as f64 - e).powi(2) / e
        })
        .sum();
    1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn sampler_passes_chi_square() {
    let s = ManifoldModel::sphere(2).unwrap();
    let p = chi_square_p_value(&s, &DensityModel::uniform(&s), 0, 16, 100_000);
    assert!(p > 0.001, "sphere polar angle p = {p}");
    let t = ManifoldModel::torus(2.0, 0.5).unwrap();
    let rho = DensityModel::new(&t, DensityKind::SmoothBump { amplitude: 0.5, mode: 2.0 }).unwrap();
    let p = chi_square_p_value(&t, &rho, 1, 16, 100_000);
    assert!(p > 0.001, "torus minor angle p = {p}");
}

#[test]
fn density_respects_its_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for m in all_models() {
        let rho = DensityModel::new(&m, DensityKind::SmoothBump { amplitude: 0.6, mode: 4.0 }).unwrap();
        let (lo, hi) = rho.bounds();
        for _ in 0..10_000 {
            let x = m.embed_unchecked(&random_chart_point(&m, &mut rng));
            let v = rho.value(&x);
            assert!(v >= lo && v <= hi);
        }
    }
}

#[test]
fn volumes_agree_with_quadrature() {
    for m in all_models() {
        let q = m.integrate(|_| 1.0);
        assert!((q - m.volume()).abs() < 1e-9 * m.volume(), "{}: {q}", m.name());
    }
}

proptest! {
    #[test]
    fn embedded_points_pass_membership(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        for m in all_models() {
            let bx = m.chart_box();
            let u = vec![bx[0].0 + a * (bx[0].1 - bx[0].0), bx[1].0 + b * (bx[1].1 - bx[1].0)];
            if m.dim() == 2 && m.in_chart(&u) {
                prop_assert!(m.membership_residual(&m.embed(&u).unwrap()) < 1e-12);
            }
        }
    }
}
