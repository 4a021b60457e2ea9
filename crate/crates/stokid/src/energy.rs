//! Generalized potential (free energy) estimation.
//!
//! For a reversible diffusion the drift and diffusion fields are linked by a
//! scalar free energy F through
//!
//! ```text
//! F'(x) = a(x)^-1 ( (1/beta) a'(x) - b(x) )
//! ```
//!
//! so once a diffusion model a(x) is fitted, F' can be regressed directly
//! from the trajectory increments: the data vector per step is
//!
//! ```text
//! Y_l = a(x_l)^-1 ( (1/beta) a'(x_l) - (x_{l+1} - x_l)/s )
//! ```
//!
//! and the design holds the basis *derivatives* f_k'(x). With constant unit
//! diffusion this reduces to the plain overdamped case: the target is the
//! negated drift increment and F coincides with the potential energy.

use thiserror::Error;

use crate::basis::{BasisError, Dictionary, LinearModel};
use crate::increments::{
    bin_series, wrap_angle, BinnedData, EstimatorError, IncrementSeries, RegressionProblem,
    TargetKind, WeightMode,
};
use crate::regression::{fit, least_squares, CvConfig, FitResult, RegressionError};
use crate::simulate::Trajectory;
use nalgebra::DVector;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("diffusion model is not positive at x = {x} (a = {a})")]
    DiffusionNotPositive { x: f64, a: f64 },
    #[error("free-energy estimation needs a 1-dimensional trajectory, got d = {0}")]
    NotScalar(usize),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// A fitted scalar diffusion field a(x) with its inverse temperature.
#[derive(Debug, Clone)]
pub struct DiffusionModel {
    model: LinearModel,
    beta: f64,
}

impl DiffusionModel {
    pub fn new(model: LinearModel, beta: f64) -> Self {
        DiffusionModel { model, beta }
    }

    /// Constant diffusion over a one-entry dictionary (the overdamped case
    /// uses `a = 1/gamma`).
    pub fn constant(value: f64, beta: f64) -> Self {
        let dict = Dictionary::parse("const_diffusion", "const").expect("valid");
        DiffusionModel { model: LinearModel::new(dict, vec![value]), beta }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn a(&self, x: f64) -> f64 {
        self.model.eval_1d(x)
    }

    pub fn a_prime(&self, x: f64) -> f64 {
        self.model.deriv_1d(x)
    }

    /// Check positivity on a set of points (e.g. all bin centers).
    pub fn check_positive(&self, points: &[f64]) -> Result<(), EnergyError> {
        for &x in points {
            let a = self.a(x);
            if a <= 0.0 {
                return Err(EnergyError::DiffusionNotPositive { x, a });
            }
        }
        Ok(())
    }
}

/// Free-energy data vector for every step of a 1D trajectory.
pub fn energy_increments(
    traj: &Trajectory,
    diffusion: &DiffusionModel,
    beta: f64,
) -> Result<IncrementSeries, EnergyError> {
    if traj.d != 1 {
        return Err(EnergyError::NotScalar(traj.d));
    }
    if traj.n_states() < 2 {
        return Err(EnergyError::Estimator(EstimatorError::TooShort(traj.n_states())));
    }
    let n = traj.n_steps();
    let angular = traj.is_angular();
    let inv_beta = 1.0 / beta;
    let mut values = Vec::with_capacity(n);
    for l in 0..n {
        let x = traj.states[l];
        let a = diffusion.a(x);
        if a <= 0.0 {
            return Err(EnergyError::DiffusionNotPositive { x, a });
        }
        let mut d = traj.states[l + 1] - x;
        if angular {
            d = wrap_angle(d);
        }
        let e = d / traj.dt;
        values.push((inv_beta * diffusion.a_prime(x) - e) / a);
    }
    Ok(IncrementSeries {
        kind: TargetKind::FreeEnergy,
        values,
        anchors: traj.states[..n].to_vec(),
        anchor_dim: 1,
        beta,
        angular,
    })
}

/// Assemble the binned free-energy regression problem: targets are the bin
/// averages of the energy data vector, the design holds the basis
/// derivatives at the bin centers.
pub fn assemble_energy_problem(
    dict: &Dictionary,
    binned: &BinnedData,
    weight_mode: WeightMode,
) -> Result<RegressionProblem, EnergyError> {
    let rows: Vec<usize> = binned.occupied().collect();
    if rows.is_empty() {
        return Err(EnergyError::Estimator(EstimatorError::NoRows));
    }
    let coords: Vec<f64> = rows.iter().map(|&i| binned.centers[i]).collect();
    let x = dict.evaluate_gradient_1d(&coords)?;
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| binned.means[i]));
    let w = DVector::from_iterator(rows.len(), rows.iter().map(|&i| binned.weights[i]));
    Ok(RegressionProblem {
        underdetermined: rows.len() < dict.len(),
        x,
        y,
        w,
        row_coords: coords,
        dict_name: dict.name().to_string(),
        target: TargetKind::FreeEnergy,
        weight_mode,
        beta: binned.beta,
        angular: binned.angular,
    })
}

/// Convenience pipeline: increments, binning and assembly in one call.
pub fn energy_problem_from_trajectories(
    trajs: &[Trajectory],
    dict: &Dictionary,
    diffusion: &DiffusionModel,
    beta: f64,
    bins: usize,
    range: Option<(f64, f64)>,
    weight_mode: WeightMode,
) -> Result<(RegressionProblem, BinnedData), EnergyError> {
    let series: Result<Vec<_>, _> =
        trajs.iter().map(|t| energy_increments(t, diffusion, beta)).collect();
    let merged = IncrementSeries::concat(series?).map_err(EnergyError::Estimator)?;
    let binned = bin_series(&merged, bins, range).map_err(EnergyError::Estimator)?;
    let problem = assemble_energy_problem(dict, &binned, weight_mode)?;
    Ok((problem, binned))
}

/// A fitted free energy: F(x) = sum_k v_k f_k(x) with F' = sum_k v_k f_k'.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    model: LinearModel,
}

impl EnergyModel {
    pub fn new(model: LinearModel) -> Self {
        EnergyModel { model }
    }

    pub fn coefficients(&self) -> &[f64] {
        self.model.coefficients()
    }

    pub fn dictionary(&self) -> &Dictionary {
        self.model.dictionary()
    }

    /// F' at x.
    pub fn gradient(&self, x: f64) -> f64 {
        self.model.deriv_1d(x)
    }

    /// F over the queried points, shifted so the minimum is zero (F is only
    /// defined up to an additive constant).
    pub fn evaluate(&self, points: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = points.iter().map(|&x| self.model.eval_1d(x)).collect();
        let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        raw.iter().map(|v| v - min).collect()
    }
}

/// Fit the free-energy coefficients: plain weighted least squares, or the
/// full SSR+CV sparsification when a CV configuration is given.
pub fn fit_free_energy(
    problem: &RegressionProblem,
    dict: &Dictionary,
    cv: Option<&CvConfig>,
) -> Result<(EnergyModel, Option<FitResult>), EnergyError> {
    match cv {
        Some(cfg) => {
            let result = fit(problem, dict, cfg)?;
            let model = EnergyModel::new(result.model());
            Ok((model, Some(result)))
        }
        None => {
            let all: Vec<usize> = (0..problem.n_cols()).collect();
            let sol = least_squares(problem, &all)?;
            let model =
                EnergyModel::new(LinearModel::new(dict.clone(), sol.coeffs.as_slice().to_vec()));
            Ok((model, None))
        }
    }
}
