//! Invariances of the local quadratic fit on flat patches.

use std::collections::HashSet;

use hessfit_core::{estimate_at, hessian_slot, PointCloud};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An orthonormal `p × d` frame drawn from a Gaussian matrix.
fn random_frame(rng: &mut ChaCha8Rng, p: usize, d: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, d, |_, _| rng.random_range(-1.0..1.0));
    g.qr().q()
}

struct Patch {
    cloud: PointCloud,
    fvals: Vec<f64>,
    z: Vec<f64>,
    frame: DMatrix<f64>,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
    f0: f64,
}

/// `n` points of a flat `d`-patch in `R^p` around `z`, carrying a quadratic
/// with known intrinsic gradient and Hessian.
fn patch(seed: u64, d: usize, p: usize, n: usize) -> Patch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = random_frame(&mut rng, p, d);
    let z: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
    let f0 = rng.random_range(-1.0..1.0);
    let grad = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let hess = &a + a.transpose();
    let mut points = Vec::with_capacity(n * p);
    let mut fvals = Vec::with_capacity(n);
    for _ in 0..n {
        let u = DVector::from_fn(d, |_, _| rng.random_range(-0.5..0.5));
        let x = DVector::from_column_slice(&z) + &frame * &u;
        points.extend(x.iter());
        fvals.push(f0 + grad.dot(&u) + 0.5 * (u.transpose() * &hess * &u)[(0, 0)]);
    }
    Patch { cloud: PointCloud::from_rows(p, points).unwrap(), fvals, z, frame, grad, hess, f0 }
}

fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadratics_are_reproduced(seed in any::<u64>(), d in 1usize..4, extra in 1usize..3) {
        let p = patch(seed, d, d + extra, 400);
        let est = estimate_at(&p.cloud, &p.fvals, &p.z, 1.0, d).unwrap();
        // move the truth into the estimator's basis
        let r = est.basis.transpose() * &p.frame;
        let grad = &r * &p.grad;
        let hess = &r * &p.hess * r.transpose();
        prop_assert!((est.f0 - p.f0).abs() < 1e-10);
        prop_assert!((&est.grad - grad).amax() < 1e-9);
        prop_assert!(max_diff(&est.hess, &hess) < 1e-8, "{} vs {}", est.hess, hess);
    }

    #[test]
    fn neighbor_order_does_not_matter(seed in any::<u64>(), d in 2usize..4) {
        let p = patch(seed, d, d + 1, 300);
        let ambient = d + 1;
        let mut order: Vec<usize> = (0..p.cloud.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let points: Vec<f64> = order.iter().flat_map(|&i| p.cloud.point(i).to_vec()).collect();
        let fvals: Vec<f64> = order.iter().map(|&i| p.fvals[i]).collect();
        let shuffled = PointCloud::from_rows(ambient, points).unwrap();
        let a = estimate_at(&p.cloud, &p.fvals, &p.z, 0.6, d).unwrap();
        let b = estimate_at(&shuffled, &fvals, &p.z, 0.6, d).unwrap();
        // the frame inside the tangent space is only defined up to the
        // spread of the local covariance, so compare ambient quantities
        let lift = |e: &hessfit_core::HessianEstimate| {
            (&e.basis * e.basis.transpose(), &e.basis * &e.hess * e.basis.transpose(), &e.basis * &e.grad)
        };
        let (pa, ha, ga) = lift(&a);
        let (pb, hb, gb) = lift(&b);
        prop_assert!(max_diff(&pa, &pb) < 1e-12);
        prop_assert!(max_diff(&ha, &hb) < 1e-12, "{}", max_diff(&ha, &hb));
        prop_assert!((ga - gb).amax() < 1e-12);
        prop_assert!((a.f0 - b.f0).abs() < 1e-12);
    }

    #[test]
    fn ambient_rigid_motions_leave_the_spectrum_alone(seed in any::<u64>(), d in 2usize..4) {
        let ambient = d + 2;
        let p = patch(seed, d, ambient, 300);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let q = random_frame(&mut rng, ambient, ambient);
        let shift = DVector::from_fn(ambient, |_, _| rng.random_range(-3.0..3.0));
        let move_point = |x: &[f64]| &q * DVector::from_column_slice(x) + &shift;
        let points: Vec<f64> = p.cloud.rows().flat_map(|x| move_point(x).iter().copied().collect::<Vec<_>>()).collect();
        let moved = PointCloud::from_rows(ambient, points).unwrap();
        let z = move_point(&p.z);
        let a = estimate_at(&p.cloud, &p.fvals, &p.z, 0.6, d).unwrap();
        let b = estimate_at(&moved, &p.fvals, z.as_slice(), 0.6, d).unwrap();
        let mut ea: Vec<f64> = a.hess.clone().symmetric_eigenvalues().iter().copied().collect();
        let mut eb: Vec<f64> = b.hess.clone().symmetric_eigenvalues().iter().copied().collect();
        ea.sort_by(f64::total_cmp);
        eb.sort_by(f64::total_cmp);
        for (x, y) in ea.iter().zip(&eb) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!((a.grad.norm() - b.grad.norm()).abs() < 1e-9);
        prop_assert!((a.f0 - b.f0).abs() < 1e-10);
    }

    #[test]
    fn hessian_slots_are_a_bijection(d in 1usize..16) {
        let mut seen = HashSet::new();
        for i in 1..=d {
            for j in i..=d {
                let s = hessian_slot(i, j, d);
                prop_assert!((1..=d * (d + 1) / 2).contains(&s));
                prop_assert!(seen.insert(s), "slot {s} repeated at ({i}, {j})");
            }
        }
        prop_assert_eq!(seen.len(), d * (d + 1) / 2);
    }
}
