//! Learn sparse stochastic differential equations from trajectory data.
//!
//! The pipeline: simulate (or load) a diffusion trajectory, turn it into
//! Kramers–Moyal increment series, histogram those into a small weighted
//! regression problem over a basis-function dictionary, and run the stepwise
//! sparse regressor with k-fold cross-validation to pick the sparsest model
//! that still predicts held-out data. Drift, diffusion, and generalized
//! free-energy fields are all handled, and learned models can be simulated
//! back and validated against the original dynamics through Markov state
//! model timescales and stationary distributions.
//!
//! Each major capability has a runnable example under `examples/`; the
//! `stokid` binary exposes the same pipelines as subcommands
//! (`simulate`, `fit`, `greedy`, `noise`, `msm`).

pub mod basis;
pub mod energy;
pub mod increments;
pub mod manifest;
pub mod msm;
pub mod regression;
pub mod search;
pub mod seed;
pub mod simulate;
pub mod trajfile;

pub use basis::{BasisFunction, Dictionary, LinearModel, ScalarBasis};
pub use increments::{
    assemble_problem, bin_series, linear_increments, quadratic_increments, BinnedData,
    IncrementSeries, RegressionProblem, TargetKind, WeightMode,
};
pub use regression::{cv_report, fit, least_squares, select_model, ssr_path, CvConfig, FitResult};
pub use simulate::{
    project, simulate_ito, simulate_model, simulate_overdamped, Potential, Projection, SimConfig,
    Trajectory,
};

/// Cap the rayon worker pool from the `STOKID_THREADS` environment variable.
/// A no-op when the variable is unset, invalid, or the pool already exists.
pub fn init_threads_from_env() {
    if let Ok(v) = std::env::var("STOKID_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
