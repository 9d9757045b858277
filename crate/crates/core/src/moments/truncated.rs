//! Moments of the truncated unit ball
//! `B_{1,δ} = { x : ‖x‖ ≤ 1, x_d > −(1 − δ) }` and the normalized
//! constants ("Greeks") built from them.
//!
//! The boundary sits at negative `x_d`, so removing it shifts the mass
//! toward `+e_d`: odd-in-`x_d` moments are positive for `δ > 0`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ball::{mean_stderr, sphere_monomial, unit_ball_volume};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_gauss;
use crate::rng::{chunks, derive_seed, stream_rng};

/// Absolute tolerance on every truncated moment.
pub const TRUNCATED_TOL: f64 = 1e-9;

/// Which monomial `x_d^m · (tangential part)` is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CPattern {
    /// `C_{m,2k}`: `x_d^m x_{d-1}^{2k}`.
    Standard { m: u32, two_k: u32 },
    /// `C_{0,2,2}`: `x_{d-1}^2 x_{d-2}^2`, needs `d ≥ 3`.
    TwoTangential,
}

impl CPattern {
    pub fn standard(m: u32, two_k: u32) -> Self {
        CPattern::Standard { m, two_k }
    }

    pub fn label(&self) -> String {
        match self {
            CPattern::Standard { m, two_k } => format!("C_{m},{two_k}"),
            CPattern::TwoTangential => "C_0,2,2".into(),
        }
    }

    fn normal_power(&self) -> u32 {
        match *self {
            CPattern::Standard { m, .. } => m,
            CPattern::TwoTangential => 0,
        }
    }

    /// Exponents over the `d − 1` tangential coordinates.
    fn tangential(&self, d: usize) -> Vec<u32> {
        let mut e = vec![0u32; d - 1];
        match *self {
            CPattern::Standard { two_k, .. } => e[d - 2] = two_k,
            CPattern::TwoTangential => {
                e[d - 2] = 2;
                e[d - 3] = 2;
            }
        }
        e
    }

    fn degree(&self) -> u32 {
        match *self {
            CPattern::Standard { m, two_k } => m + two_k,
            CPattern::TwoTangential => 4,
        }
    }
}

fn check(d: usize, delta: f64, pattern: CPattern) -> Result<()> {
    if d < 2 {
        return Err(Error::validation("d", "truncated moments need d >= 2"));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::validation("delta", "must lie in [0, 1)"));
    }
    match pattern {
        CPattern::Standard { m, two_k } => {
            if two_k % 2 == 1 || m + two_k > 4 {
                return Err(Error::UnsupportedPattern(format!(
                    "{} (need even tangential power and m + 2k <= 4)",
                    pattern.label()
                )));
            }
        }
        CPattern::TwoTangential => {
            if d < 3 {
                return Err(Error::UnsupportedPattern("C_0,2,2 needs d >= 3".into()));
            }
        }
    }
    Ok(())
}

/// `C = ∫_{B_{1,δ}} x_d^m (tangential monomial) dx`.
///
/// In polar form `x = tθ`, the radial integral is exact (`r(θ)^D / D` with
/// `D = d + deg`, `r(θ) = min(1, (1−δ)/(−θ_d))`). Writing `θ_d = cos φ`
/// the remaining sphere integral factors into a one-dimensional integral in
/// `φ` and an exact monomial moment of `S^{d−2}`. The `φ` integral is split
/// at the cutoff angle `arccos(−(1−δ))` and done by adaptive Gauss–Legendre.
pub fn truncated_c(d: usize, delta: f64, pattern: CPattern) -> Result<f64> {
    check(d, delta, pattern)?;
    let tangential = pattern.tangential(d);
    let tdeg: u32 = tangential.iter().sum();
    let m = pattern.normal_power() as i32;
    let big_d = (d as u32 + pattern.degree()) as i32;
    let inner = sphere_monomial(&tangential);
    if inner == 0.0 {
        return Ok(0.0);
    }
    let sin_pow = d as i32 - 2 + tdeg as i32;
    let cap = 1.0 - delta;
    let phi_c = (-cap).acos();
    let full = |phi: f64| phi.cos().powi(m) * phi.sin().powi(sin_pow) / big_d as f64;
    let cut = |phi: f64| {
        let c = phi.cos();
        let r = cap / -c;
        c.powi(m) * phi.sin().powi(sin_pow) * r.powi(big_d) / big_d as f64
    };
    let mut total = 0.0;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (f, a, b) in [
        (&full as &dyn Fn(f64) -> f64, 0.0, phi_c),
        (&cut as &dyn Fn(f64) -> f64, phi_c, PI),
    ] {
        if b - a <= 0.0 {
            continue;
        }
        let (v, change, converged) = adaptive_gauss(f, a, b, 1e-13);
        total += v;
        worst = worst.max(change);
        ok &= converged;
    }
    let value = total * inner;
    if !ok || worst * inner.abs() > TRUNCATED_TOL {
        return Err(Error::QuadratureNotConverged {
            what: format!("{} at d = {d}, delta = {delta}", pattern.label()),
            change: worst * inner.abs(),
        });
    }
    Ok(value)
}

/// Monte Carlo estimate of [`truncated_c`]: uniform points in the unit
/// ball, indicator of the half-space, times `|B^d|`.
pub fn mc_truncated_c(d: usize, delta: f64, pattern: CPattern, n: usize, seed: u64) -> Result<(f64, f64)> {
    check(d, delta, pattern)?;
    let key = derive_seed(seed, &format!("mc_truncated/{}/{d}", pattern.label()));
    let tangential = pattern.tangential(d);
    let m = pattern.normal_power() as i32;
    let df = d as f64;
    let (s1, s2) = chunks(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = stream_rng(key, c);
            let mut x = vec![0.0; d];
            let (mut a, mut b) = (0.0, 0.0);
            for _ in 0..len {
                for xi in x.iter_mut() {
                    *xi = rng.sample(StandardNormal);
                }
                let nn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let t = rng.random::<f64>().powf(1.0 / df) / nn;
                x.iter_mut().for_each(|v| *v *= t);
                if x[d - 1] <= -(1.0 - delta) {
                    continue;
                }
                let v = x[d - 1].powi(m)
                    * tangential
                        .iter()
                        .zip(&x[..d - 1])
                        .map(|(k, v)| v.powi(*k as i32))
                        .product::<f64>();
                a += v;
                b += v * v;
            }
            (a, b)
        })
        .reduce(|| (0.0, 0.0), |p, q| (p.0 + q.0, p.1 + q.1));
    let (mean, se) = mean_stderr(s1, s2, n);
    let vol = unit_ball_volume(d);
    Ok((mean * vol, se * vol))
}

/// Normalized truncated-ball moments at scale `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreekSet {
    pub d: usize,
    pub delta: f64,
    pub eps: f64,
    pub c00: f64,
    pub gamma1: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
    /// Raw moments used, labelled as in [`CPattern::label`].
    pub table: Vec<(String, f64)>,
}

impl GreekSet {
    /// Closed-form values for the full ball (`δ = 0`).
    pub fn full_ball(d: usize, eps: f64) -> Self {
        let df = d as f64;
        let a = eps * eps / (df + 2.0);
        let b = eps.powi(4) / ((df + 2.0) * (df + 4.0));
        GreekSet {
            d,
            delta: 0.0,
            eps,
            c00: unit_ball_volume(d),
            gamma1: 0.0,
            alpha1: a,
            alpha2: a,
            mu1: 0.0,
            mu2: 0.0,
            beta1: 3.0 * b,
            beta2: b,
            beta3: 3.0 * b,
            beta4: b,
            table: Vec::new(),
        }
    }
}

/// `γ₁ = ε C_{1,0}/C_{0,0}`, `α₁ = ε² C_{2,0}/C_{0,0}`, `α₂ = ε² C_{0,2}/C_{0,0}`,
/// `μ₁ = ε³ C_{3,0}/C_{0,0}`, `μ₂ = ε³ C_{1,2}/C_{0,0}`, `β₁ = ε⁴ C_{4,0}/C_{0,0}`,
/// `β₂ = ε⁴ C_{2,2}/C_{0,0}`, `β₃ = ε⁴ C_{0,4}/C_{0,0}`, `β₄ = ε⁴ C_{0,2,2}/C_{0,0}`.
///
/// For `d = 2` there is only one tangential coordinate, so `C_{0,2,2}` does
/// not exist; `β₄` is set to `β₂`. It multiplies no Gram entry when `d = 2`.
pub fn greeks(d: usize, delta: f64, eps: f64) -> Result<GreekSet> {
    if !(eps > 0.0) {
        return Err(Error::validation("eps", "must be positive"));
    }
    let mut table = Vec::new();
    let mut c = |p: CPattern| -> Result<f64> {
        let v = truncated_c(d, delta, p)?;
        table.push((p.label(), v));
        Ok(v)
    };
    let c00 = c(CPattern::standard(0, 0))?;
    let c10 = c(CPattern::standard(1, 0))?;
    let c20 = c(CPattern::standard(2, 0))?;
    let c02 = c(CPattern::standard(0, 2))?;
    let c30 = c(CPattern::standard(3, 0))?;
    let c12 = c(CPattern::standard(1, 2))?;
    let c40 = c(CPattern::standard(4, 0))?;
    let c22 = c(CPattern::standard(2, 2))?;
    let c04 = c(CPattern::standard(0, 4))?;
    let c022 = if d >= 3 { c(CPattern::TwoTangential)? } else { c22 };
    let e2 = eps * eps;
    let e4 = e2 * e2;
    Ok(GreekSet {
        d,
        delta,
        eps,
        c00,
        gamma1: eps * c10 / c00,
        alpha1: e2 * c20 / c00,
        alpha2: e2 * c02 / c00,
        mu1: e2 * eps * c30 / c00,
        mu2: e2 * eps * c12 / c00,
        beta1: e4 * c40 / c00,
        beta2: e4 * c22 / c00,
        beta3: e4 * c04 / c00,
        beta4: e4 * c022 / c00,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_ball_volume_and_odd_moments() {
        for d in 2..=5 {
            let v = truncated_c(d, 0.0, CPattern::standard(0, 0)).unwrap();
            assert!((v - unit_ball_volume(d)).abs() < 1e-12);
            assert!(truncated_c(d, 0.0, CPattern::standard(1, 0)).unwrap().abs() < 1e-12);
            assert!(truncated_c(d, 0.0, CPattern::standard(3, 0)).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn half_disk_closed_forms() {
        // δ → 1 is excluded; δ = 0.5 on the disk: region x_2 > −1/2.
        // Area = π − (segment below x_2 = −1/2) = π − (π/3 − √3/4).
        let area = truncated_c(2, 0.5, CPattern::standard(0, 0)).unwrap();
        let expect = PI - (PI / 3.0 - 3f64.sqrt() / 4.0);
        assert!((area - expect).abs() < 1e-12);
        // ∫ x_2 over the region = −∫ x_2 over the removed segment = (2/3)(3/4)^{3/2}.
        let first = truncated_c(2, 0.5, CPattern::standard(1, 0)).unwrap();
        assert!((first - 2.0 / 3.0 * 0.75f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn two_tangential_needs_three_dimensions() {
        assert!(matches!(
            truncated_c(2, 0.2, CPattern::TwoTangential),
            Err(Error::UnsupportedPattern(_))
        ));
        assert!(truncated_c(2, 0.2, CPattern::standard(3, 2)).is_err());
    }

    #[test]
    fn greeks_scale_with_eps() {
        let a = greeks(3, 0.4, 1.0).unwrap();
        let b = greeks(3, 0.4, 0.1).unwrap();
        assert!((b.alpha1 - a.alpha1 * 1e-2).abs() < 1e-15);
        assert!((b.beta4 - a.beta4 * 1e-4).abs() < 1e-17);
        assert!(a.gamma1 > 0.0);
    }
}
