//! The Hessian bias for a linear ambient function on the unit sphere.
//!
//! In projected tangent coordinates `y`, `f = c_n sqrt(1 − |y|²) + c_t·y`
//! has no cubic part, so the leading error comes from the quartic
//! `−c_n |y|⁴ / 8`. Least squares on a disk of radius `ε` maps `|y|⁴` to
//! `ε² |y|²`, shifting every diagonal Hessian entry by `−c_n ε² / 4`: the
//! Frobenius error is `√2 |c_n| ε² / 4`, second order in `ε`.

use hessfit_core::{align_frames, estimate_at, estimate_error, sample, DensityModel, ManifoldModel, ScalarField};

#[test]
fn linear_field_error_matches_the_quartic_term() {
    let m = ManifoldModel::sphere(2).unwrap();
    let c_n = 0.8;
    let field = ScalarField::AmbientLinear { c: vec![0.0, 0.6, c_n] };
    let z = [0.0, 0.0, 1.0];
    let frame = m.tangent_frame(&z).unwrap();
    let truth = m.true_derivatives(&field, &z, &frame).unwrap();
    let grid = [0.3, 0.2];
    let seeds = 77..83u64;
    let mut ratios = vec![Vec::new(); grid.len()];
    for seed in seeds {
        let cloud = sample(&m, &DensityModel::uniform(&m), 1_000_000, seed).unwrap();
        let fv = field.evaluate_rows(&cloud.points, 3);
        for (i, &eps) in grid.iter().enumerate() {
            let est = estimate_at(&cloud, &fv, &z, eps, 2).unwrap();
            let r = align_frames(&est.basis, &frame).unwrap();
            let err = estimate_error(&est, &truth, &r).unwrap();
            // the shift is along the identity, so trace and Frobenius agree
            let predicted = 2f64.sqrt() * c_n * eps * eps / 4.0;
            assert!((err.e_trace / (c_n * eps * eps / 2.0) - err.e_hess_frob / predicted).abs() < 0.02);
            ratios[i].push(err.e_hess_frob / predicted);
        }
    }
    // a single cloud scatters by about 20%; the mean over clouds is tight
    for (eps, r) in grid.iter().zip(&ratios) {
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        assert!((mean - 1.0).abs() < 0.15, "eps {eps}: observed / predicted {r:?}");
    }
}
