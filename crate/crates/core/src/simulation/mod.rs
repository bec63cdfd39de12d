//! Simulated triangular panels and the Monte Carlo driver.
//!
//! Replication `r` draws its dataset from seed `derive_seed(dgp.seed, r)`,
//! so any subset of replications can be rerun on its own.

mod dgp;
mod monte_carlo;

pub use dgp::{g_fun, gen_dgp1, gen_dgp_with, DgpConfig, DgpTruth, Simulated};
pub use monte_carlo::{
    run_estimator, run_monte_carlo, sweep_a, sweep_points, Estimate, EstimatorSpec,
    EstimatorSummary, McConfig, McFailure, McRecord, McResult, SweepPoint,
};
