//! Hessian estimation on point clouds sampled from embedded manifolds.
//!
//! The estimator runs local PCA around a query point, projects the
//! ε-neighbors onto the estimated tangent space and fits a quadratic by
//! least squares. The crate also ships synthetic manifolds with exact
//! geometry, moment oracles for the small-ball integrals that govern the
//! estimator's bias, and a harness for measuring convergence rates.

pub mod alignment;
pub mod config;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod manifold;
pub mod moments;
pub mod neighbors;
pub mod quadrature;
pub mod rng;

pub use alignment::{align_frames, estimate_error, ErrorRecord};
pub use error::{Error, Result};
pub use estimator::{
    build_design_matrix, estimate_at, extract, fit_in_basis, fit_neighborhood, hessian_slot, local_fit, local_pca,
    project, solve_fit, Block, DesignLayout, HessianEstimate, LocalFit,
};
pub use experiments::{
    convergence_run, empirical_gram, gram_deviation_experiment, hessian_energy, rate_regress, ConvergenceConfig,
    ConvergenceReport, NRule, QuerySpec,
};
pub use geometry::{Jet, SecondFundamentalForm};
pub use manifold::{sample, DensityKind, DensityModel, ManifoldModel, PointCloud, ScalarField};
pub use neighbors::{epsilon_neighbors, GridIndex};
