//! Empirical checks of the estimator: Gram deviations, convergence rates
//! and the discrete Hessian energy.

mod convergence;
mod energy;
mod gram;
mod regress;

pub use convergence::{
    convergence_run, select_queries, ConvergenceConfig, ConvergenceReport, EpsRecord, Failure, QuerySpec, RawRow, Region,
    Slopes,
};
pub use energy::hessian_energy;
pub use gram::{
    empirical_gram, empirical_gram_aligned, gram_deviation_experiment, BlockDeviation, GramExperimentConfig,
    GramPlacement, GramReport,
};
pub use regress::{rate_regress, rate_regress_grouped, SlopeFit, BOOTSTRAP_RESAMPLES, ERROR_FLOOR};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample size schedule `n(ε) = ceil(A ε^{−c})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NRule {
    pub exponent: f64,
    pub constant: f64,
}

impl NRule {
    /// Exponent `c` with `A` chosen so that `n(eps_max) = n_max`.
    pub fn anchored(exponent: f64, eps_max: f64, n_max: usize) -> Self {
        NRule {
            exponent,
            constant: n_max as f64 * eps_max.powf(exponent),
        }
    }

    pub fn n(&self, eps: f64) -> usize {
        // guard against 2e4 coming out as 20000.000000004
        let raw = self.constant * eps.powf(-self.exponent);
        (raw * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.constant > 0.0 && self.constant.is_finite()) {
            return Err(Error::validation("constant", "must be positive"));
        }
        if !(self.exponent >= d as f64 + 4.0) {
            return Err(Error::validation(
                "exponent",
                format!("must be at least d + 4 = {} so the sampling term stays below the bias", d + 4),
            ));
        }
        Ok(())
    }
}

/// Checks that a grid of scales is nonempty, positive and strictly decreasing.
pub fn validate_eps_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::validation("eps_grid", "must not be empty"));
    }
    if grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::validation("eps_grid", "entries must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::validation("eps_grid", "must be strictly decreasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchored_rule_hits_the_anchor() {
        let r = NRule::anchored(8.0, 0.4, 20_000);
        assert_eq!(r.n(0.4), 20_000);
        assert!(r.n(0.16) > 30_000_000);
        assert!(r.validate(2).is_ok());
        assert!(matches!(r.validate(5), Err(Error::Validation { key, .. }) if key == "exponent"));
    }

    #[test]
    fn eps_grid_must_decrease() {
        assert!(validate_eps_grid(&[0.4, 0.3]).is_ok());
        for bad in [vec![], vec![0.3, 0.4], vec![0.3, 0.3], vec![0.3, -0.1]] {
            assert!(matches!(validate_eps_grid(&bad), Err(Error::Validation { key, .. }) if key == "eps_grid"));
        }
    }
}
