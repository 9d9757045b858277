//! Comparing estimates expressed in a PCA basis against truth in a reference frame.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::HessianEstimate;
use crate::geometry::Jet;

/// Smallest admissible singular value of `UᵀE`.
pub const OVERLAP_TOL: f64 = 1e-8;

/// Orthogonal `R` minimizing `‖U R − E‖_F`: `R = W Vᵀ` from `UᵀE = W Σ Vᵀ`.
pub fn align_frames(u: &DMatrix<f64>, e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if u.shape() != e.shape() {
        return Err(Error::DimensionMismatch(format!("U is {:?}, E is {:?}", u.shape(), e.shape())));
    }
    let m = u.transpose() * e;
    let svd = m.svd(true, true);
    let sigma_min = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(sigma_min >= OVERLAP_TOL) {
        return Err(Error::DegenerateOverlap { sigma_min });
    }
    Ok(svd.u.expect("requested") * svd.v_t.expect("requested"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub e_f: f64,
    pub e_grad: f64,
    pub e_hess_frob: f64,
    pub e_trace: f64,
}

/// Errors of `est` against `truth` (given in frame `E`), after rotating the
/// estimate by `R` from [`align_frames`].
pub fn estimate_error(est: &HessianEstimate, truth: &Jet, r: &DMatrix<f64>) -> Result<ErrorRecord> {
    let d = est.dim();
    if truth.dim() != d || r.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "estimate has d = {d}, truth d = {}, R is {:?}",
            truth.dim(),
            r.shape()
        )));
    }
    let rt = r.transpose();
    Ok(ErrorRecord {
        e_f: (est.f0 - truth.value).abs(),
        e_grad: (&rt * &est.grad - &truth.grad).norm(),
        e_hess_frob: (&rt * &est.hess * r - &truth.hess).norm(),
        e_trace: (est.hess.trace() - truth.hess.trace()).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn rotation(theta: f64) -> DMatrix<f64> {
        let (s, c) = theta.sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
    }

    #[test]
    fn identical_frames_give_identity() {
        let e = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let r = align_frames(&e, &e).unwrap();
        assert!((r - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn rotated_basis_is_undone() {
        let e = DMatrix::from_row_slice(3, 2, &[0.0, 0.6, 1.0, 0.0, 0.0, 0.8]);
        let r0 = rotation(0.7);
        let u = &e * &r0;
        let r = align_frames(&u, &e).unwrap();
        assert!((&u * &r - &e).norm() < 1e-14);
    }

    #[test]
    fn orthogonal_frames_are_degenerate() {
        let u = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let e = DMatrix::from_row_slice(3, 1, &[0.0, 0.0, 1.0]);
        assert!(matches!(align_frames(&u, &e), Err(Error::DegenerateOverlap { .. })));
    }

    #[test]
    fn exact_estimate_in_rotated_basis_has_zero_error() {
        let truth = Jet::new(
            1.5,
            DVector::from_vec(vec![0.3, -0.4]),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, -1.0]),
        );
        let r0 = rotation(-1.1);
        // estimate in basis U = E R0ᵀ, so R = R0
        let est = HessianEstimate {
            f0: truth.value,
            grad: &r0 * &truth.grad,
            hess: &r0 * &truth.hess * r0.transpose(),
            basis: DMatrix::zeros(0, 2),
            k_z: 0,
            cond: 1.0,
        };
        let rec = estimate_error(&est, &truth, &r0).unwrap();
        assert!(rec.e_f == 0.0 && rec.e_grad < 1e-15 && rec.e_hess_frob < 1e-14 && rec.e_trace < 1e-14);
    }
}
