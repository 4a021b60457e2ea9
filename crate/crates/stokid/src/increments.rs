//! Kramers–Moyal increment series, binning, and regression-problem assembly.
//!
//! From a uniformly sampled trajectory the conditional drift and diffusion
//! are estimated through the scaled increments
//!
//! ```text
//! linear:    Y_l      = (x_{l+1} - x_l) / s
//! quadratic: Y_l      = (beta / 2) (x_{l+1} - x_l)(x'_{l+1} - x'_l) / s
//! ```
//!
//! anchored at the left state x_l. Angular coordinates take the wrapped
//! difference on (-pi, pi] so barrier crossings at +-pi do not produce 2 pi
//! jumps. One-dimensional series are histogrammed into Q bins and averaged,
//! which turns the raw regression into a small weighted problem with one row
//! per occupied bin.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisError, Dictionary};
use crate::simulate::Trajectory;

pub use crate::simulate::wrap_angle;

/// Which conditional moment a series estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetKind {
    /// First moment of component i.
    Drift { i: usize },
    /// Second moment of components (i, j), beta/2 convention.
    Diffusion { i: usize, j: usize },
    /// Free-energy gradient data vector.
    FreeEnergy,
}

impl TargetKind {
    pub fn label(&self) -> String {
        match *self {
            TargetKind::Drift { i: 0 } => "drift".into(),
            TargetKind::Drift { i } => format!("drift[{i}]"),
            TargetKind::Diffusion { i: 0, j: 0 } => "diffusion".into(),
            TargetKind::Diffusion { i, j } => format!("diffusion[{i},{j}]"),
            TargetKind::FreeEnergy => "free_energy".into(),
        }
    }
}

/// A per-step increment series with the states it is anchored at.
#[derive(Debug, Clone)]
pub struct IncrementSeries {
    pub kind: TargetKind,
    pub values: Vec<f64>,
    /// Flat row-major anchor coordinates, `anchor_dim` per value.
    pub anchors: Vec<f64>,
    pub anchor_dim: usize,
    pub beta: f64,
    pub angular: bool,
}

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("trajectory needs at least 2 states, has {0}")]
    TooShort(usize),
    #[error("component {i} out of range for dimension {d}")]
    BadComponent { i: usize, d: usize },
    #[error("binning requires 1-dimensional anchors, got dimension {0}")]
    AnchorsNotScalar(usize),
    #[error("need at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("bin range [{lo}, {hi}] is empty or invalid")]
    BadRange { lo: f64, hi: f64 },
    #[error("no samples fall inside the bin range")]
    NoSamples,
    #[error("degenerate binning: all samples fall into one bin")]
    Degenerate,
    #[error("no occupied bins to assemble a regression problem from")]
    NoRows,
    #[error("series have mismatched kind/beta/dimension and cannot be concatenated")]
    IncompatibleSeries,
    #[error(transparent)]
    Basis(#[from] BasisError),
}

fn check_component(traj: &Trajectory, i: usize) -> Result<(), EstimatorError> {
    if traj.n_states() < 2 {
        return Err(EstimatorError::TooShort(traj.n_states()));
    }
    if i >= traj.d {
        return Err(EstimatorError::BadComponent { i, d: traj.d });
    }
    Ok(())
}

/// Linear (drift) increments of component `i`, anchored at the left state.
pub fn linear_increments(traj: &Trajectory, i: usize) -> Result<IncrementSeries, EstimatorError> {
    check_component(traj, i)?;
    let n = traj.n_steps();
    let angular = traj.is_angular();
    let mut values = Vec::with_capacity(n);
    for l in 0..n {
        let d = traj.state(l + 1)[i] - traj.state(l)[i];
        let d = if angular { wrap_angle(d) } else { d };
        values.push(d / traj.dt);
    }
    Ok(IncrementSeries {
        kind: TargetKind::Drift { i },
        values,
        anchors: traj.states[..n * traj.d].to_vec(),
        anchor_dim: traj.d,
        beta: traj.beta,
        angular,
    })
}

/// Quadratic (diffusion) increments of components `(i, j)` with the beta/2
/// scaling convention.
pub fn quadratic_increments(
    traj: &Trajectory,
    i: usize,
    j: usize,
    beta: f64,
) -> Result<IncrementSeries, EstimatorError> {
    check_component(traj, i)?;
    check_component(traj, j)?;
    let n = traj.n_steps();
    let angular = traj.is_angular();
    let mut values = Vec::with_capacity(n);
    for l in 0..n {
        let mut di = traj.state(l + 1)[i] - traj.state(l)[i];
        let mut dj = traj.state(l + 1)[j] - traj.state(l)[j];
        if angular {
            di = wrap_angle(di);
            dj = wrap_angle(dj);
        }
        values.push(0.5 * beta * di * dj / traj.dt);
    }
    Ok(IncrementSeries {
        kind: TargetKind::Diffusion { i, j },
        values,
        anchors: traj.states[..n * traj.d].to_vec(),
        anchor_dim: traj.d,
        beta,
        angular,
    })
}

impl IncrementSeries {
    /// Concatenate series from independent trajectories of the same kind.
    pub fn concat(series: Vec<IncrementSeries>) -> Result<IncrementSeries, EstimatorError> {
        let mut it = series.into_iter();
        let mut out = it.next().ok_or(EstimatorError::IncompatibleSeries)?;
        for s in it {
            if s.kind != out.kind
                || s.anchor_dim != out.anchor_dim
                || s.beta != out.beta
                || s.angular != out.angular
            {
                return Err(EstimatorError::IncompatibleSeries);
            }
            out.values.extend_from_slice(&s.values);
            out.anchors.extend_from_slice(&s.anchors);
        }
        Ok(out)
    }
}

/// Histogram of a 1D increment series: bin centers, occupation weights and
/// per-bin averaged increments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinnedData {
    pub kind: TargetKind,
    /// Whether the binned coordinate is a wrapped angle.
    pub angular: bool,
    pub q: usize,
    pub lo: f64,
    pub hi: f64,
    /// Per-bin arrays of length q; unoccupied bins carry weight 0.
    pub centers: Vec<f64>,
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub counts: Vec<usize>,
    pub beta: f64,
}

impl BinnedData {
    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.q).filter(|&i| self.counts[i] > 0)
    }

    pub fn n_occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// CSV rows `center,weight,mean` over occupied bins (the marker data of
    /// the comparison plots).
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "center,weight,mean")?;
        for i in self.occupied() {
            writeln!(w, "{},{},{}", self.centers[i], self.weights[i], self.means[i])?;
        }
        Ok(())
    }
}

/// Histogram `series` into `q` uniform bins over `range` (defaults to the
/// data extent, or (-pi, pi] for angular series).
pub fn bin_series(
    series: &IncrementSeries,
    q: usize,
    range: Option<(f64, f64)>,
) -> Result<BinnedData, EstimatorError> {
    if series.anchor_dim != 1 {
        return Err(EstimatorError::AnchorsNotScalar(series.anchor_dim));
    }
    if q < 2 {
        return Err(EstimatorError::TooFewBins(q));
    }
    let (lo, hi) = match range {
        Some(r) => r,
        None if series.angular => (-std::f64::consts::PI, std::f64::consts::PI),
        None => {
            let lo = series.anchors.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = series.anchors.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    if !(hi > lo) {
        return Err(EstimatorError::BadRange { lo, hi });
    }
    let width = (hi - lo) / q as f64;
    let mut counts = vec![0usize; q];
    let mut sums = vec![0.0f64; q];
    for (&x, &y) in series.anchors.iter().zip(&series.values) {
        if x < lo || x > hi {
            continue;
        }
        let idx = (((x - lo) / width) as usize).min(q - 1);
        counts[idx] += 1;
        sums[idx] += y;
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(EstimatorError::NoSamples);
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(EstimatorError::Degenerate);
    }
    let centers = (0..q).map(|i| lo + (i as f64 + 0.5) * width).collect();
    let weights = counts.iter().map(|&c| c as f64 / total as f64).collect();
    let means = counts
        .iter()
        .zip(&sums)
        .map(|(&c, &s)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    Ok(BinnedData {
        kind: series.kind,
        angular: series.angular,
        q,
        lo,
        hi,
        centers,
        weights,
        means,
        counts,
        beta: series.beta,
    })
}

/// How bin weights enter the least-squares objective. `Plain` scales rows by
/// w_i (the literal weighted form); `Sqrt` scales by sqrt(w_i), the usual
/// statistical weighting. Both are exposed, `Plain` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WeightMode {
    #[default]
    Plain,
    Sqrt,
}

impl WeightMode {
    pub fn row_scale(&self, w: f64) -> f64 {
        match self {
            WeightMode::Plain => w,
            WeightMode::Sqrt => w.sqrt(),
        }
    }
}

/// A weighted linear regression problem: design rows are dictionary
/// evaluations, the target is the binned increment average.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Bin weights (fractions of samples), all positive.
    pub w: DVector<f64>,
    /// Anchor coordinates of the rows (occupied bin centers).
    pub row_coords: Vec<f64>,
    pub dict_name: String,
    pub target: TargetKind,
    pub weight_mode: WeightMode,
    /// Inverse temperature the targets were scaled with.
    pub beta: f64,
    /// Whether the row coordinates live on the wrapped circle.
    pub angular: bool,
    /// Set when there are fewer rows than dictionary columns.
    pub underdetermined: bool,
}

impl RegressionProblem {
    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    /// Restriction to a subset of design columns (a sub-dictionary).
    pub fn restrict_cols(&self, cols: &[usize]) -> RegressionProblem {
        let x = DMatrix::from_fn(self.n_rows(), cols.len(), |r, c| self.x[(r, cols[c])]);
        RegressionProblem {
            x,
            y: self.y.clone(),
            w: self.w.clone(),
            row_coords: self.row_coords.clone(),
            dict_name: self.dict_name.clone(),
            target: self.target,
            weight_mode: self.weight_mode,
            beta: self.beta,
            angular: self.angular,
            underdetermined: self.n_rows() < cols.len(),
        }
    }

    /// Restriction to a subset of rows (used by cross-validation folds).
    pub fn restrict_rows(&self, rows: &[usize]) -> RegressionProblem {
        let x = DMatrix::from_fn(rows.len(), self.n_cols(), |r, c| self.x[(rows[r], c)]);
        let y = DVector::from_fn(rows.len(), |r, _| self.y[rows[r]]);
        let w = DVector::from_fn(rows.len(), |r, _| self.w[rows[r]]);
        let row_coords = rows.iter().map(|&r| self.row_coords[r]).collect();
        RegressionProblem {
            x,
            y,
            w,
            row_coords,
            dict_name: self.dict_name.clone(),
            target: self.target,
            weight_mode: self.weight_mode,
            beta: self.beta,
            angular: self.angular,
            underdetermined: rows.len() < self.n_cols(),
        }
    }
}

/// Assemble the weighted regression problem for a binned series: one row per
/// occupied bin, designed on the dictionary values at the bin centers.
pub fn assemble_problem(
    dict: &Dictionary,
    binned: &BinnedData,
    weight_mode: WeightMode,
) -> Result<RegressionProblem, EstimatorError> {
    let rows: Vec<usize> = binned.occupied().collect();
    if rows.is_empty() {
        return Err(EstimatorError::NoRows);
    }
    let coords: Vec<f64> = rows.iter().map(|&i| binned.centers[i]).collect();
    let x = dict.evaluate_1d(&coords)?;
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| binned.means[i]));
    let w = DVector::from_iterator(rows.len(), rows.iter().map(|&i| binned.weights[i]));
    Ok(RegressionProblem {
        underdetermined: rows.len() < dict.len(),
        x,
        y,
        w,
        row_coords: coords,
        dict_name: dict.name().to_string(),
        target: binned.kind,
        weight_mode,
        beta: binned.beta,
        angular: binned.angular,
    })
}

/// Assemble an unbinned problem directly on the raw anchors with uniform
/// weights; this is the path for anchors of dimension above one, where
/// histogramming is not available.
pub fn assemble_raw_problem(
    dict: &Dictionary,
    series: &IncrementSeries,
    weight_mode: WeightMode,
) -> Result<RegressionProblem, EstimatorError> {
    let n = series.values.len();
    if n == 0 {
        return Err(EstimatorError::NoRows);
    }
    let x = dict.evaluate(&series.anchors, series.anchor_dim)?;
    let y = DVector::from_column_slice(&series.values);
    let w = DVector::from_element(n, 1.0 / n as f64);
    Ok(RegressionProblem {
        underdetermined: n < dict.len(),
        x,
        y,
        w,
        row_coords: if series.anchor_dim == 1 { series.anchors.clone() } else { Vec::new() },
        dict_name: dict.name().to_string(),
        target: series.kind,
        weight_mode,
        beta: series.beta,
        angular: series.angular,
    })
}

/// Serialized form of a binned regression problem.
#[derive(Debug, Serialize, Deserialize)]
pub struct BinnedProblemJson {
    pub schema_version: u32,
    pub q: usize,
    pub centers: Vec<f64>,
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub dict_name: String,
    pub target_kind: String,
}

impl BinnedProblemJson {
    pub fn from_parts(binned: &BinnedData, dict_name: &str) -> Self {
        let rows: Vec<usize> = binned.occupied().collect();
        BinnedProblemJson {
            schema_version: 1,
            q: binned.q,
            centers: rows.iter().map(|&i| binned.centers[i]).collect(),
            weights: rows.iter().map(|&i| binned.weights[i]).collect(),
            means: rows.iter().map(|&i| binned.means[i]).collect(),
            dict_name: dict_name.to_string(),
            target_kind: binned.kind.label(),
        }
    }
}
