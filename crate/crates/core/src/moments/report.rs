//! One table comparing every implemented integral across its closed form,
//! deterministic quadrature and Monte Carlo evaluators.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ball::{ball_moment, mc_moment, sphere_monomial, BallMomentSpec, Domain};
use super::tensor::{mc_tensor_integral, sphere_tensor_integral, tensor_integrand, TensorInputs, TensorKind};
use super::truncated::{greeks, mc_truncated_c, truncated_c, CPattern, GreekSet};
use crate::error::{Error, Result};
use crate::geometry::SecondFundamentalForm;
use crate::quadrature::sphere_rule;
use crate::rng::{derive_seed, stream_rng};

/// Monte Carlo agreement is required within this many standard errors.
pub const MC_SIGMAS: f64 = 4.0;
/// Relative agreement required between closed form and quadrature.
pub const QUADRATURE_RTOL: f64 = 1e-8;
const SPHERE_ORDER: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub name: String,
    pub closed_form: Option<f64>,
    pub quadrature: Option<f64>,
    pub mc: f64,
    pub mc_stderr: f64,
    pub pass: bool,
}

impl OracleRow {
    fn new(name: String, closed_form: Option<f64>, quadrature: Option<f64>, mc: (f64, f64)) -> Self {
        let reference = closed_form.or(quadrature).unwrap_or(f64::NAN);
        let scale = 1.0 + reference.abs();
        let mc_ok = (reference - mc.0).abs() <= MC_SIGMAS * mc.1 + 1e-12 * scale;
        let quad_ok = match (closed_form, quadrature) {
            (Some(c), Some(q)) => (c - q).abs() <= QUADRATURE_RTOL * c.abs().max(1.0),
            _ => true,
        };
        OracleRow {
            name,
            closed_form,
            quadrature,
            mc: mc.0,
            mc_stderr: mc.1,
            pass: mc_ok && quad_ok,
        }
    }
}

fn sphere_quadrature(d: usize, g: impl Fn(&[f64]) -> f64) -> f64 {
    sphere_rule(d, SPHERE_ORDER).iter().map(|(x, w)| w * g(x)).sum()
}

fn monomial(pattern: &[u32], x: &[f64]) -> f64 {
    pattern.iter().zip(x).map(|(k, v)| v.powi(*k as i32)).product()
}

fn moment_rows(d: usize, r: f64, n: usize, seed: u64, out: &mut Vec<OracleRow>) -> Result<()> {
    let ball: &[&[u32]] = &[&[], &[2], &[4], &[2, 2], &[1]];
    let sphere: &[&[u32]] = &[&[], &[2], &[4], &[2, 2], &[6], &[4, 2], &[2, 2, 2], &[4, 4], &[3, 1]];
    for (domain, patterns) in [(Domain::Ball, ball), (Domain::Sphere, sphere)] {
        for pattern in patterns.iter().filter(|p| p.len() <= d) {
            let spec = BallMomentSpec::new(d, r, pattern, domain)?;
            let deg: u32 = pattern.iter().sum();
            let df = d as f64;
            // radial factor of the polar decomposition
            let radial = match domain {
                Domain::Ball => r.powf(df + deg as f64) / (df + deg as f64),
                Domain::Sphere => r.powf(df - 1.0 + deg as f64),
            };
            let quad = radial * sphere_quadrature(d, |x| monomial(pattern, x));
            let name = format!("{}{:?}", if domain == Domain::Ball { "ball" } else { "sphere" }, pattern);
            out.push(OracleRow::new(name, Some(ball_moment(&spec)?), Some(quad), mc_moment(&spec, n, seed)?));
        }
    }
    Ok(())
}

/// Deterministic pseudo-random tensor inputs for dimension `d`.
pub fn sample_tensor_inputs(d: usize, codim: usize, seed: u64) -> Result<TensorInputs> {
    if d < 2 {
        return Err(Error::validation("d", "tensor integrals need d >= 2"));
    }
    let mut rng = stream_rng(derive_seed(seed, "tensor_inputs"), (d * 10 + codim) as u64);
    let mut t = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    t = (&t + t.transpose()) * 0.5;
    let mut data = vec![0.0; d * d * codim];
    for i in 0..d {
        for j in i..d {
            for a in 0..codim {
                let v: f64 = rng.random_range(-1.0..1.0);
                data[(i * d + j) * codim + a] = v;
                data[(j * d + i) * codim + a] = v;
            }
        }
    }
    let sff = SecondFundamentalForm::new(d, codim, data)?;
    let mut u = vec![0.0; d];
    u[0] = 1.0;
    let mut v = vec![0.0; d];
    v[1] = 1.0;
    Ok(TensorInputs {
        t: Some(t),
        sff: Some(sff),
        u,
        v,
    })
}

fn tensor_rows(d: usize, n: usize, seed: u64, out: &mut Vec<OracleRow>) -> Result<()> {
    let inputs = sample_tensor_inputs(d, 2, seed)?;
    for kind in TensorKind::ALL {
        let quad = sphere_quadrature(d, |x| tensor_integrand(kind, &inputs, x));
        out.push(OracleRow::new(
            format!("tensor_{}", kind.name()),
            Some(sphere_tensor_integral(kind, &inputs)?),
            Some(quad),
            mc_tensor_integral(kind, &inputs, n, seed)?,
        ));
    }
    Ok(())
}

fn truncated_patterns(d: usize) -> Vec<CPattern> {
    let mut v: Vec<CPattern> = [(0, 0), (1, 0), (2, 0), (0, 2), (3, 0), (1, 2), (4, 0), (2, 2), (0, 4)]
        .iter()
        .map(|&(m, k)| CPattern::standard(m, k))
        .collect();
    if d >= 3 {
        v.push(CPattern::TwoTangential);
    }
    v
}

/// Full-ball value of a truncated pattern, from the exact sphere monomial.
fn full_ball_c(d: usize, pattern: CPattern) -> f64 {
    let mut e = vec![0u32; d];
    let deg = match pattern {
        CPattern::Standard { m, two_k } => {
            e[d - 1] = m;
            e[d - 2] = two_k;
            m + two_k
        }
        CPattern::TwoTangential => {
            e[d - 2] = 2;
            e[d - 3] = 2;
            4
        }
    };
    sphere_monomial(&e) / (d as f64 + deg as f64)
}

fn truncated_rows(d: usize, delta: f64, eps: f64, n: usize, seed: u64, out: &mut Vec<OracleRow>) -> Result<()> {
    let mut mc = Vec::new();
    for p in truncated_patterns(d) {
        let m = mc_truncated_c(d, delta, p, n, seed)?;
        let closed = (delta == 0.0).then(|| full_ball_c(d, p));
        out.push(OracleRow::new(p.label(), closed, Some(truncated_c(d, delta, p)?), m));
        mc.push((p.label(), m));
    }
    let g = greeks(d, delta, eps)?;
    let closed = (delta == 0.0).then(|| GreekSet::full_ball(d, eps));
    let mc_of = |label: &str| mc.iter().find(|(l, _)| l == label).map(|(_, v)| *v);
    let c00 = g.c00;
    let tt = if d >= 3 { "C_0,2,2" } else { "C_2,2" };
    let entries: [(&str, f64, Option<f64>, &str, i32); 9] = [
        ("gamma1", g.gamma1, closed.as_ref().map(|c| c.gamma1), "C_1,0", 1),
        ("alpha1", g.alpha1, closed.as_ref().map(|c| c.alpha1), "C_2,0", 2),
        ("alpha2", g.alpha2, closed.as_ref().map(|c| c.alpha2), "C_0,2", 2),
        ("mu1", g.mu1, closed.as_ref().map(|c| c.mu1), "C_3,0", 3),
        ("mu2", g.mu2, closed.as_ref().map(|c| c.mu2), "C_1,2", 3),
        ("beta1", g.beta1, closed.as_ref().map(|c| c.beta1), "C_4,0", 4),
        ("beta2", g.beta2, closed.as_ref().map(|c| c.beta2), "C_2,2", 4),
        ("beta3", g.beta3, closed.as_ref().map(|c| c.beta3), "C_0,4", 4),
        ("beta4", g.beta4, closed.as_ref().map(|c| c.beta4), tt, 4),
    ];
    for (name, quad, closed, label, power) in entries {
        let (m, s) = mc_of(label).expect("pattern evaluated above");
        let scale = eps.powi(power) / c00;
        out.push(OracleRow::new(name.into(), closed, Some(quad), (m * scale, s * scale)));
    }
    Ok(())
}

/// Every oracle at dimension `d`: ball and sphere moments of radius `eps`,
/// sphere tensor integrals, truncated-ball moments at `delta` and the
/// Greeks at scale `eps`.
pub fn oracle_report(d: usize, delta: f64, eps: f64, n_mc: usize, seed: u64) -> Result<Vec<OracleRow>> {
    if d < 2 {
        return Err(Error::validation("d", "must be at least 2"));
    }
    if !(eps > 0.0) {
        return Err(Error::validation("eps", "must be positive"));
    }
    let mut rows = Vec::new();
    moment_rows(d, eps, n_mc, seed, &mut rows)?;
    tensor_rows(d, n_mc, seed, &mut rows)?;
    truncated_rows(d, delta, eps, n_mc, seed, &mut rows)?;
    Ok(rows)
}
