//! Leading-order Gram matrices `L⁰ ≈ (1/k) ZᵀZ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::truncated::GreekSet;
use crate::error::{Error, Result};
use crate::estimator::{Block, DesignLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GramVariant {
    /// Truncated-ball moments, boundary normal along the last coordinate.
    TruncatedHeuristic,
    /// Full ball with a first-order density correction.
    InteriorDirect,
}

#[derive(Debug, Clone, PartialEq)]
pub enum L0Params {
    Truncated(GreekSet),
    Interior {
        d: usize,
        eps: f64,
        rho: f64,
        grad_rho: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramOracle {
    pub variant: GramVariant,
    pub d: usize,
    pub eps: f64,
    pub matrix: DMatrix<f64>,
}

impl GramOracle {
    pub fn layout(&self) -> DesignLayout {
        DesignLayout::new(self.d)
    }
}

pub fn build_l0(params: &L0Params) -> Result<GramOracle> {
    match params {
        L0Params::Truncated(g) => Ok(truncated_l0(g)),
        L0Params::Interior { d, eps, rho, grad_rho } => interior_l0(*d, *eps, *rho, grad_rho),
    }
}

fn symmetric_set(m: &mut DMatrix<f64>, i: usize, j: usize, v: f64) {
    m[(i, j)] = v;
    m[(j, i)] = v;
}

fn truncated_l0(g: &GreekSet) -> GramOracle {
    let d = g.d;
    let l = DesignLayout::new(d);
    let last = d - 1;
    let mut m = DMatrix::zeros(l.columns(), l.columns());
    m[(0, 0)] = 1.0;
    symmetric_set(&mut m, 0, l.linear(last), g.gamma1);
    for s in 0..d {
        let (alpha, beta_diag) = if s == last { (g.alpha1, g.beta1) } else { (g.alpha2, g.beta3) };
        symmetric_set(&mut m, 0, l.square(s), alpha);
        m[(l.linear(s), l.linear(s))] = alpha;
        // x_d y_s²
        symmetric_set(&mut m, l.linear(last), l.square(s), if s == last { g.mu1 } else { g.mu2 });
        m[(l.square(s), l.square(s))] = beta_diag;
        for t in s + 1..d {
            let v = if t == last { g.beta2 } else { g.beta4 };
            symmetric_set(&mut m, l.square(s), l.square(t), v);
        }
    }
    for (s, t) in l.pairs() {
        let c = l.cross(s, t);
        if t == last {
            // y_s · y_s y_d
            symmetric_set(&mut m, l.linear(s), c, g.mu2);
            m[(c, c)] = g.beta2;
        } else {
            m[(c, c)] = g.beta4;
        }
    }
    GramOracle {
        variant: GramVariant::TruncatedHeuristic,
        d,
        eps: g.eps,
        matrix: m,
    }
}

fn interior_l0(d: usize, eps: f64, rho: f64, grad_rho: &[f64]) -> Result<GramOracle> {
    if grad_rho.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "grad_rho has {} entries, d = {d}",
            grad_rho.len()
        )));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("density must be positive, got {rho}")));
    }
    let df = d as f64;
    let alpha = eps * eps / (df + 2.0);
    let beta = eps.powi(4) / ((df + 2.0) * (df + 4.0));
    let l = DesignLayout::new(d);
    let mut m = DMatrix::zeros(l.columns(), l.columns());
    m[(0, 0)] = 1.0;
    for s in 0..d {
        let g = grad_rho[s] / rho;
        symmetric_set(&mut m, 0, l.linear(s), alpha * g);
        symmetric_set(&mut m, 0, l.square(s), alpha);
        m[(l.linear(s), l.linear(s))] = alpha;
        for t in 0..d {
            let w = if s == t { 3.0 } else { 1.0 };
            symmetric_set(&mut m, l.linear(s), l.square(t), w * beta * g);
            m[(l.square(s), l.square(t))] = w * beta;
        }
    }
    for (s, t) in l.pairs() {
        let c = l.cross(s, t);
        m[(c, c)] = beta;
    }
    Ok(GramOracle {
        variant: GramVariant::InteriorDirect,
        d,
        eps,
        matrix: m,
    })
}

/// Block pairs in upper-triangular order: AA, AB, …, DD.
pub fn block_pairs() -> Vec<(Block, Block)> {
    let mut v = Vec::new();
    for (i, a) in Block::ALL.iter().enumerate() {
        for b in &Block::ALL[i..] {
            v.push((*a, *b));
        }
    }
    v
}

/// Exponent `q` in the order `ε^q` of the bias `L − L⁰` for each block.
pub fn bias_order(variant: GramVariant, a: Block, b: Block) -> Option<i32> {
    use Block::*;
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let q = match variant {
        GramVariant::TruncatedHeuristic => match (a, b) {
            (A, A) => return None,
            (A, B) => 2,
            (A, C) | (A, D) | (B, B) => 3,
            (B, C) | (B, D) => 4,
            _ => 5,
        },
        GramVariant::InteriorDirect => match (a, b) {
            (A, A) => return None,
            (A, B) => 3,
            (A, C) | (A, D) | (B, B) | (B, D) => 4,
            (B, C) => 5,
            _ => 6,
        },
    };
    Some(q)
}

/// `ε^q ω` order of the sampling deviation `(1/k) ZᵀZ − L` for each block,
/// with `ω = sqrt(log n / (n ε^d))`. Returns `q`, or `None` for the exact
/// `(A, A)` entry.
pub fn deviation_order(a: Block, b: Block) -> Option<i32> {
    use Block::*;
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    Some(match (a, b) {
        (A, A) => return None,
        (A, B) => 1,
        (A, C) | (A, D) | (B, B) => 2,
        (B, C) | (B, D) => 3,
        _ => 4,
    })
}

pub fn omega(n: usize, eps: f64, d: usize) -> f64 {
    let n = n as f64;
    (n.ln() / (n * eps.powi(d as i32))).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::greeks;

    #[test]
    fn full_ball_variants_agree() {
        for d in 2..=4 {
            let t = build_l0(&L0Params::Truncated(greeks(d, 0.0, 0.3).unwrap())).unwrap();
            let i = build_l0(&L0Params::Interior {
                d,
                eps: 0.3,
                rho: 2.0,
                grad_rho: vec![0.0; d],
            })
            .unwrap();
            assert!((t.matrix.clone() - i.matrix.clone()).amax() < 1e-10, "d={d}");
        }
    }

    #[test]
    fn two_dimensional_blocks() {
        let eps = 0.2;
        let o = build_l0(&L0Params::Truncated(greeks(2, 0.0, eps).unwrap())).unwrap();
        assert_eq!(o.matrix.shape(), (6, 6));
        let beta = eps.powi(4) / 24.0;
        let cc = o.matrix.view((3, 3), (2, 2));
        assert!((cc[(0, 0)] - 3.0 * beta).abs() < 1e-14 && (cc[(0, 1)] - beta).abs() < 1e-14);
        assert!(o.matrix[(0, 1)].abs() < 1e-14 && o.matrix[(0, 2)].abs() < 1e-14);
    }

    #[test]
    fn density_gradient_enters_only_b_rows() {
        let o = build_l0(&L0Params::Interior {
            d: 2,
            eps: 0.5,
            rho: 1.0,
            grad_rho: vec![1.0, 0.0],
        })
        .unwrap();
        let alpha = 0.25 / 4.0;
        let beta = 0.0625 / 24.0;
        assert!((o.matrix[(0, 1)] - alpha).abs() < 1e-15);
        assert_eq!(o.matrix[(0, 2)], 0.0);
        assert!((o.matrix[(1, 3)] - 3.0 * beta).abs() < 1e-15);
        assert!((o.matrix[(1, 4)] - beta).abs() < 1e-15);
        assert_eq!(o.matrix[(2, 3)], 0.0);
        assert_eq!(o.matrix, o.matrix.transpose());
    }

    #[test]
    fn wrong_gradient_length() {
        let err = build_l0(&L0Params::Interior {
            d: 3,
            eps: 0.1,
            rho: 1.0,
            grad_rho: vec![0.0; 2],
        })
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }
}
