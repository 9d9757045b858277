//! Small-ball expansions against direct quadrature over spherical caps.

use hessfit_core::moments::{interior_moment_oracle, IntfItem};
use hessfit_core::quadrature::gauss_legendre_on;
use hessfit_core::{DensityKind, DensityModel, ManifoldModel, ScalarField};
use nalgebra::DMatrix;

/// `∫ g ρ dvol / ∫ ρ dvol` over the cap `{x ∈ S², ‖x − z‖ ≤ eps}`, in
/// geodesic polar coordinates around `z`.
fn cap_average(z: &[f64], frame: &DMatrix<f64>, eps: f64, rho: &DensityModel, g: impl Fn(&[f64]) -> f64) -> f64 {
    let t_max = 2.0 * (eps / 2.0).asin();
    let (ts, wt) = gauss_legendre_on(0.0, t_max, 48);
    let (ps, wp) = gauss_legendre_on(0.0, 2.0 * std::f64::consts::PI, 96);
    let (mut num, mut den) = (0.0, 0.0);
    for (t, a) in ts.iter().zip(&wt) {
        for (p, b) in ps.iter().zip(&wp) {
            let x: Vec<f64> = (0..3)
                .map(|k| t.cos() * z[k] + t.sin() * (p.cos() * frame[(k, 0)] + p.sin() * frame[(k, 1)]))
                .collect();
            let w = a * b * t.sin() * rho.value(&x);
            num += w * g(&x);
            den += w;
        }
    }
    num / den
}

fn local(x: &[f64], z: &[f64], frame: &DMatrix<f64>, s: usize) -> f64 {
    (0..3).map(|k| (x[k] - z[k]) * frame[(k, s)]).sum()
}

#[test]
fn sphere_cap_residuals_shrink_at_the_stated_order() {
    let m = ManifoldModel::sphere(2).unwrap();
    let rho = DensityModel::new(&m, DensityKind::SmoothBump { amplitude: 0.4, mode: 1.5 }).unwrap();
    let z = {
        let v = [0.3, -0.5, 0.8];
        let n = (v.iter().map(|a| a * a).sum::<f64>()).sqrt();
        v.map(|a| a / n)
    };
    let frame = m.tangent_frame(&z).unwrap();
    let sff = m.second_fundamental_form(&z, &frame).unwrap();
    let rho_jet = m.intrinsic_jet(&z, &frame, rho.value(&z), &rho.ambient_gradient(&z), &rho.ambient_hessian(&z));
    let items = [
        IntfItem::Mean,
        IntfItem::First { j: 0 },
        IntfItem::First { j: 1 },
        IntfItem::Square { j: 0 },
        IntfItem::Square { j: 1 },
        IntfItem::Cross { s: 0, l: 1 },
        IntfItem::Cubic { s: 0, l: 1 },
        IntfItem::Cubic { s: 1, l: 1 },
        IntfItem::Quartic { s: 0, l: 1 },
        IntfItem::Quartic { s: 0, l: 0 },
    ];
    let grid = [0.2, 0.1, 0.05];
    let mut checked = 0;
    for id in ScalarField::catalog_ids(&m) {
        let field = ScalarField::catalog(&m, id).unwrap();
        let jet = m.true_derivatives(&field, &z, &frame).unwrap();
        for item in items {
            let mut residuals = Vec::new();
            for &eps in &grid {
                let exact = cap_average(&z, &frame, eps, &rho, |x| {
                    let c = |s| local(x, &z, &frame, s);
                    match item {
                        IntfItem::Mean => field.value(x),
                        IntfItem::First { j } => c(j) * field.value(x),
                        IntfItem::Square { j } => c(j) * c(j) * field.value(x),
                        IntfItem::Cross { s, l } => c(s) * c(l) * field.value(x),
                        IntfItem::Cubic { s, l } => c(s) * c(l) * c(l),
                        IntfItem::Quartic { s, l } => c(s) * c(s) * c(l) * c(l),
                    }
                });
                let approx = interior_moment_oracle(2, eps, &jet, &rho_jet, Some(&sff), item).unwrap();
                residuals.push((exact - approx).abs());
            }
            let order = item.remainder_order() as f64;
            // each halving of eps must cut the residual by about 2^order
            for w in residuals.windows(2) {
                if w[1] < 1e-15 {
                    continue;
                }
                checked += 1;
                let observed = (w[0] / w[1]).log2();
                assert!(
                    observed > order - 0.6,
                    "{id} {item:?}: residuals {residuals:?}, observed order {observed:.2} < {order}"
                );
            }
        }
    }
    assert!(checked > 40, "only {checked} residual pairs above the floor");
}
