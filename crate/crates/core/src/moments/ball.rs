//! Monomial moments of balls and spheres.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{chunks, derive_seed, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Solid ball of radius `r` in `R^d`, Lebesgue measure.
    Ball,
    /// Sphere of radius `r` in `R^d`, surface measure.
    Sphere,
}

/// `∫ prod x_i^{pattern_i}` over a ball or sphere centered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallMomentSpec {
    pub d: usize,
    pub r: f64,
    pub pattern: Vec<u32>,
    pub domain: Domain,
}

impl BallMomentSpec {
    pub fn new(d: usize, r: f64, pattern: &[u32], domain: Domain) -> Result<Self> {
        if d == 0 {
            return Err(Error::validation("d", "must be at least 1"));
        }
        if pattern.len() > d {
            return Err(Error::DimensionMismatch(format!(
                "pattern has {} exponents but d = {d}",
                pattern.len()
            )));
        }
        if !(r > 0.0) {
            return Err(Error::validation("r", "must be positive"));
        }
        Ok(BallMomentSpec {
            d,
            r,
            pattern: pattern.to_vec(),
            domain,
        })
    }

    fn degree(&self) -> u32 {
        self.pattern.iter().sum()
    }

    fn has_odd(&self) -> bool {
        self.pattern.iter().any(|k| k % 2 == 1)
    }

    /// Nonzero exponents, largest first.
    fn canonical(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.pattern.iter().copied().filter(|k| *k > 0).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

/// `|B^d| = π^{d/2} / Γ(d/2 + 1)`, via `|B^d| = 2π/d |B^{d-2}|`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// `Γ(k / 2)` for a positive integer `k`.
pub(crate) fn gamma_half(k: u32) -> f64 {
    match k {
        1 => PI.sqrt(),
        2 => 1.0,
        _ => (k as f64 / 2.0 - 1.0) * gamma_half(k - 2),
    }
}

/// `∫_{S^{n-1}} prod θ_i^{a_i} dS` over the unit sphere in `R^n`
/// (`n = exponents.len()`), by the Gamma-function formula.
pub fn sphere_monomial(exponents: &[u32]) -> f64 {
    if exponents.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let num: f64 = exponents.iter().map(|a| gamma_half(a + 1)).product();
    let total: u32 = exponents.iter().map(|a| a + 1).sum();
    2.0 * num / gamma_half(total)
}

/// Closed form of a moment from the table of named integrals:
///
/// | domain | pattern      | value |
/// |--------|--------------|-------|
/// | ball   | `()`         | `|B| r^d` |
/// | ball   | `(2)`        | `|B| r^{d+2} / (d+2)` |
/// | ball   | `(4)`        | `II_B = 3|B| r^{d+4} / ((d+2)(d+4))` |
/// | ball   | `(2,2)`      | `JI_B = |B| r^{d+4} / ((d+2)(d+4))` |
/// | sphere | `()`         | `d |B|` |
/// | sphere | `(2)`        | `|B|` |
/// | sphere | `(4)`        | `II_S = 3|B| / (d+2)` |
/// | sphere | `(2,2)`      | `JI_S = |B| / (d+2)` |
/// | sphere | `(6)`        | `III_S = 15|B| / ((d+2)(d+4))` |
/// | sphere | `(4,2)`      | `JJI_S = 3|B| / ((d+2)(d+4))` |
/// | sphere | `(2,2,2)`    | `KJI_S = |B| / ((d+2)(d+4))` |
/// | sphere | `(4,4)`      | `JJII_S = 9|B| / ((d+2)(d+4)(d+6))` |
///
/// Sphere values scale by `r^{d-1+deg}` for radius `r`. Any pattern with an
/// odd exponent is exactly zero.
pub fn ball_moment(spec: &BallMomentSpec) -> Result<f64> {
    if spec.has_odd() {
        return Ok(0.0);
    }
    let d = spec.d as f64;
    let b = unit_ball_volume(spec.d);
    let r = spec.r;
    let c = spec.canonical();
    let value = match (spec.domain, c.as_slice()) {
        (Domain::Ball, []) => b * r.powf(d),
        (Domain::Ball, [2]) => b * r.powf(d + 2.0) / (d + 2.0),
        (Domain::Ball, [4]) => 3.0 * b * r.powf(d + 4.0) / ((d + 2.0) * (d + 4.0)),
        (Domain::Ball, [2, 2]) => b * r.powf(d + 4.0) / ((d + 2.0) * (d + 4.0)),
        (Domain::Sphere, shape) => {
            let unit = match shape {
                [] => d * b,
                [2] => b,
                [4] => 3.0 * b / (d + 2.0),
                [2, 2] => b / (d + 2.0),
                [6] => 15.0 * b / ((d + 2.0) * (d + 4.0)),
                [4, 2] => 3.0 * b / ((d + 2.0) * (d + 4.0)),
                [2, 2, 2] => b / ((d + 2.0) * (d + 4.0)),
                [4, 4] => 9.0 * b / ((d + 2.0) * (d + 4.0) * (d + 6.0)),
                _ => return Err(unsupported(spec)),
            };
            unit * r.powf(d - 1.0 + spec.degree() as f64)
        }
        _ => return Err(unsupported(spec)),
    };
    Ok(value)
}

fn unsupported(spec: &BallMomentSpec) -> Error {
    Error::UnsupportedPattern(format!("{:?} over {:?} in d = {}", spec.pattern, spec.domain, spec.d))
}

/// Mean and standard error of `g(θ)` over `n` uniform points on the unit
/// sphere in `R^d`.
pub(crate) fn mc_sphere_mean<G>(d: usize, n: usize, seed: u64, purpose: &str, g: G) -> (f64, f64)
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let key = derive_seed(seed, purpose);
    let (s1, s2) = chunks(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = stream_rng(key, c);
            let mut x = vec![0.0; d];
            let (mut a, mut b) = (0.0, 0.0);
            for _ in 0..len {
                let nn = loop {
                    for xi in x.iter_mut() {
                        *xi = rng.sample(StandardNormal);
                    }
                    let nn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if nn > 0.0 {
                        break nn;
                    }
                };
                x.iter_mut().for_each(|v| *v /= nn);
                let v = g(&x);
                a += v;
                b += v * v;
            }
            (a, b)
        })
        .reduce(|| (0.0, 0.0), |p, q| (p.0 + q.0, p.1 + q.1));
    mean_stderr(s1, s2, n)
}

pub(crate) fn mean_stderr(s1: f64, s2: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Monte Carlo estimate of a ball or sphere moment with its standard error.
pub fn mc_moment(spec: &BallMomentSpec, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    if n_samples < 1000 {
        return Err(Error::validation("n_samples", "need at least 1000 samples"));
    }
    let d = spec.d;
    let r = spec.r;
    let df = d as f64;
    let pattern = spec.pattern.clone();
    let mono = move |x: &[f64]| -> f64 {
        pattern.iter().zip(x).map(|(k, v)| v.powi(*k as i32)).product()
    };
    let purpose = format!("mc_moment/{:?}/{:?}", spec.domain, spec.pattern);
    let (mean, se, measure) = match spec.domain {
        Domain::Sphere => {
            let (m, s) = mc_sphere_mean(d, n_samples, seed, &purpose, |x| mono(x));
            let scale = r.powf(df - 1.0 + spec.degree() as f64);
            (m * scale, s * scale, df * unit_ball_volume(d))
        }
        Domain::Ball => {
            // radius r U^{1/d} along a uniform direction
            let key = derive_seed(seed, &purpose);
            let (s1, s2) = chunks(n_samples)
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
                        let t = r * rng.random::<f64>().powf(1.0 / df) / nn;
                        x.iter_mut().for_each(|v| *v *= t);
                        let v = mono(&x);
                        a += v;
                        b += v * v;
                    }
                    (a, b)
                })
                .reduce(|| (0.0, 0.0), |p, q| (p.0 + q.0, p.1 + q.1));
            let (m, s) = mean_stderr(s1, s2, n_samples);
            (m, s, unit_ball_volume(d) * r.powf(df))
        }
    };
    Ok((mean * measure, se * measure))
}

/// `|B^d|` estimated by the hit rate of uniform points in `[-1, 1]^d`.
pub fn mc_ball_volume(d: usize, n_samples: usize, seed: u64) -> (f64, f64) {
    let key = derive_seed(seed, "mc_ball_volume");
    let hits: u64 = chunks(n_samples)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = stream_rng(key, c);
            (0..len)
                .filter(|_| (0..d).map(|_| (2.0 * rng.random::<f64>() - 1.0).powi(2)).sum::<f64>() <= 1.0)
                .count() as u64
        })
        .sum();
    let cube = 2f64.powi(d as i32);
    let p = hits as f64 / n_samples as f64;
    (cube * p, cube * (p * (1.0 - p) / n_samples as f64).sqrt())
}
