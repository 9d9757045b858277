//! Fixtures shared by the benchmarks.

use hessfit_core::{sample, DensityModel, ManifoldModel, PointCloud, ScalarField};

/// Uniform cloud on the unit 2-sphere with `linear` field values.
pub fn sphere_fixture(n: usize, seed: u64) -> (PointCloud, Vec<f64>) {
    let model = ManifoldModel::sphere(2).expect("valid model");
    let cloud = sample(&model, &DensityModel::uniform(&model), n, seed).expect("sampling succeeds");
    let field = ScalarField::catalog(&model, "linear").expect("catalog field");
    let fvals = field.evaluate_rows(&cloud.points, cloud.ambient);
    (cloud, fvals)
}
