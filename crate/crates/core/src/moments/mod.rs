//! Closed-form moment integrals with independent quadrature and Monte Carlo
//! evaluators.

mod ball;
mod gram;
mod interior;
mod report;
mod tensor;
mod truncated;

pub use ball::{ball_moment, mc_ball_volume, mc_moment, sphere_monomial, unit_ball_volume, BallMomentSpec, Domain};
pub use gram::{bias_order, block_pairs, build_l0, deviation_order, omega, GramOracle, GramVariant, L0Params};
pub use report::{oracle_report, sample_tensor_inputs, OracleRow, MC_SIGMAS, QUADRATURE_RTOL};
pub use interior::{interior_moment_oracle, IntfItem};
pub use tensor::{mc_tensor_integral, sphere_tensor_integral, tensor_integrand, TensorInputs, TensorKind};
pub use truncated::{greeks, mc_truncated_c, truncated_c, CPattern, GreekSet, TRUNCATED_TOL};
