//! Weighted least squares, the stepwise sparse regressor, and k-fold
//! cross-validation model selection.
//!
//! The stepwise sparse regressor (SSR) starts from the unconstrained
//! weighted least-squares solution and removes one coefficient per
//! iteration, always the one with the smallest magnitude, refitting on the
//! surviving set. Removed coefficients never come back, so the active sets
//! along the path are nested.
//!
//! The solution size n (number of surviving coefficients) is selected by
//! k-fold cross-validation: rows are partitioned into k folds, SSR is
//! trained on k-1 folds, and the held-out weighted squared prediction error
//! is averaged,
//!
//! ```text
//! delta^2[n] = (1/k) sum_i || W_i (Y_i - X_i c_train(n)) ||^2
//! ```
//!
//! repeated over `reps` independent partitions and averaged as
//! delta^2 = mean(delta_rep^2). The selected size is where the ratio
//! delta[n-1]/delta[n] peaks; if the score minimum already sits at n = 1 the
//! single-term model is returned directly.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisError, Dictionary, LinearModel};
use crate::increments::{RegressionProblem, TargetKind, WeightMode};
use crate::seed;

/// Relative threshold on the R diagonal below which the design is treated
/// as rank deficient and the minimum-norm solution is returned instead.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("active set is empty")]
    EmptyActiveSet,
    #[error("regression problem has no rows")]
    NoRows,
    #[error("need at least 2 folds, got {0}")]
    BadFolds(usize),
    #[error("{k} folds cannot partition {rows} rows")]
    FoldsExceedRows { k: usize, rows: usize },
    #[error("after 100 partition attempts a training set still has {train} rows, need {need}")]
    FoldTooSmall { train: usize, need: usize },
    #[error("sparsity {q} out of range for {k} columns")]
    BadSparsity { q: usize, k: usize },
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Solution of one weighted least-squares fit.
#[derive(Debug, Clone)]
pub struct LsSolution {
    /// Full-length coefficient vector; inactive entries are exactly zero.
    pub coeffs: DVector<f64>,
    /// Weighted residual norm on the training rows.
    pub residual: f64,
    /// Set when the active design was rank deficient and the deterministic
    /// minimum-norm solution was used.
    pub rank_deficient: bool,
}

fn scaled_design(
    problem: &RegressionProblem,
    active: &[usize],
) -> (DMatrix<f64>, DVector<f64>) {
    let n = problem.n_rows();
    let scale: Vec<f64> =
        (0..n).map(|r| problem.weight_mode.row_scale(problem.w[r])).collect();
    let xa = DMatrix::from_fn(n, active.len(), |r, c| scale[r] * problem.x[(r, active[c])]);
    let yb = DVector::from_fn(n, |r, _| scale[r] * problem.y[r]);
    (xa, yb)
}

/// Minimize || W (Y - X c) ||_2 over the active columns; inactive
/// coefficients are pinned to zero. Full-rank designs go through QR; rank
/// deficient ones fall back to the SVD minimum-norm solution and are
/// flagged.
pub fn least_squares(
    problem: &RegressionProblem,
    active: &[usize],
) -> Result<LsSolution, RegressionError> {
    if active.is_empty() {
        return Err(RegressionError::EmptyActiveSet);
    }
    if problem.n_rows() == 0 {
        return Err(RegressionError::NoRows);
    }
    let (xa, yb) = scaled_design(problem, active);
    let na = active.len();

    let mut ca: Option<DVector<f64>> = None;
    let mut rank_deficient = false;
    if xa.nrows() >= na {
        let qr = xa.clone().qr();
        let r = qr.r();
        let mut dmax = 0.0f64;
        let mut dmin = f64::INFINITY;
        for i in 0..na {
            let d = r[(i, i)].abs();
            dmax = dmax.max(d);
            dmin = dmin.min(d);
        }
        if dmax > 0.0 && dmin > RANK_TOL * dmax {
            let qty = qr.q().transpose() * &yb;
            ca = r.solve_upper_triangular(&qty);
        }
    }
    if ca.is_none() {
        rank_deficient = true;
        let svd = xa.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let eps = if smax > 0.0 { smax * RANK_TOL } else { f64::EPSILON };
        let sol = svd
            .solve(&yb, eps)
            .map_err(|e| RegressionError::SolveFailed(e.to_string()))?;
        ca = Some(DVector::from_column_slice(sol.as_slice()));
    }
    let ca = ca.expect("solution set above");

    let residual = (&yb - &xa * &ca).norm();
    let mut coeffs = DVector::zeros(problem.n_cols());
    for (slot, &idx) in active.iter().enumerate() {
        coeffs[idx] = ca[slot];
    }
    Ok(LsSolution { coeffs, residual, rank_deficient })
}

/// One sparsity level of an SSR path.
#[derive(Debug, Clone)]
pub struct SsrLevel {
    /// Surviving column indices, ascending.
    pub active: Vec<usize>,
    pub coeffs: DVector<f64>,
    pub residual: f64,
    pub rank_deficient: bool,
}

/// The whole pruning path, from the dense fit (q = 0) down to one surviving
/// function (q = K - 1).
#[derive(Debug, Clone)]
pub struct SsrPath {
    pub levels: Vec<SsrLevel>,
}

impl SsrPath {
    pub fn k(&self) -> usize {
        self.levels.len()
    }

    /// Level with exactly `n` surviving coefficients.
    pub fn level_for_size(&self, n: usize) -> &SsrLevel {
        &self.levels[self.k() - n]
    }
}

/// Run the stepwise sparse regressor over all sparsity levels. Ties in the
/// smallest-magnitude rule are broken toward the lowest index.
pub fn ssr_path(problem: &RegressionProblem) -> Result<SsrPath, RegressionError> {
    let k = problem.n_cols();
    if k == 0 {
        return Err(RegressionError::EmptyActiveSet);
    }
    let mut active: Vec<usize> = (0..k).collect();
    let mut levels = Vec::with_capacity(k);
    loop {
        let sol = least_squares(problem, &active)?;
        let level = SsrLevel {
            active: active.clone(),
            coeffs: sol.coeffs,
            residual: sol.residual,
            rank_deficient: sol.rank_deficient,
        };
        let done = active.len() == 1;
        if !done {
            let victim = *active
                .iter()
                .min_by(|&&a, &&b| {
                    let (ca, cb) = (level.coeffs[a].abs(), level.coeffs[b].abs());
                    ca.partial_cmp(&cb).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
                })
                .expect("active set nonempty");
            active.retain(|&i| i != victim);
        }
        levels.push(level);
        if done {
            break;
        }
    }
    Ok(SsrPath { levels })
}

/// Cross-validation parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CvConfig {
    /// Fold count k.
    pub k: usize,
    /// Independent repetitions, each with its own partition.
    pub reps: usize,
    pub seed: u64,
}

/// Cross-validation score curve with the selected solution size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    /// delta[n - 1] is the CV score of the n-term model, n = 1..=K.
    pub delta: Vec<f64>,
    /// ratios[n - 2] = delta[n-1] / delta[n], defined for n >= 2.
    pub ratios: Vec<f64>,
    pub k: usize,
    pub reps: usize,
    pub seed: u64,
    /// Selected solution size n~.
    pub selected: usize,
}

impl CvReport {
    pub fn score(&self, n: usize) -> f64 {
        self.delta[n - 1]
    }

    pub fn ratio(&self, n: usize) -> f64 {
        self.ratios[n - 2]
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn ratio_of(prev: f64, cur: f64) -> f64 {
    if prev == 0.0 && cur == 0.0 {
        1.0
    } else if cur == 0.0 {
        f64::INFINITY
    } else {
        prev / cur
    }
}

/// Partition `rows` indices into k near-equal folds; retries until every
/// training set keeps at least `min_train` rows (the fold sizes are fixed by
/// the chunking, so in practice the first draw decides).
fn draw_partition(
    rng: &mut rand_chacha::ChaCha12Rng,
    rows: usize,
    k: usize,
    min_train: usize,
) -> Result<Vec<Vec<usize>>, RegressionError> {
    use rand::seq::SliceRandom;
    if k < 2 {
        return Err(RegressionError::BadFolds(k));
    }
    if k > rows {
        return Err(RegressionError::FoldsExceedRows { k, rows });
    }
    let mut indices: Vec<usize> = (0..rows).collect();
    for _attempt in 0..100 {
        indices.shuffle(rng);
        let base = rows / k;
        let extra = rows % k;
        let mut folds = Vec::with_capacity(k);
        let mut start = 0;
        for f in 0..k {
            let len = base + usize::from(f < extra);
            folds.push(indices[start..start + len].to_vec());
            start += len;
        }
        let worst_train = rows - folds.iter().map(Vec::len).max().unwrap_or(0);
        if worst_train >= min_train {
            return Ok(folds);
        }
    }
    let worst = rows - (rows / k + usize::from(rows % k > 0));
    Err(RegressionError::FoldTooSmall { train: worst, need: min_train })
}

fn test_error(problem: &RegressionProblem, rows: &[usize], coeffs: &DVector<f64>) -> f64 {
    let mut err = 0.0;
    for &r in rows {
        let mut pred = 0.0;
        for c in 0..problem.n_cols() {
            pred += problem.x[(r, c)] * coeffs[c];
        }
        let resid = problem.weight_mode.row_scale(problem.w[r]) * (problem.y[r] - pred);
        err += resid * resid;
    }
    err
}

/// Per-repetition squared CV scores for every solution size, averaged in
/// fixed repetition order.
fn cv_curve(
    problem: &RegressionProblem,
    cfg: &CvConfig,
    min_train: usize,
) -> Result<Vec<f64>, RegressionError> {
    let k_cols = problem.n_cols();
    let per_rep: Vec<Result<Vec<f64>, RegressionError>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = seed::rng_from(seed::derive_idx(cfg.seed, "cv", rep as u64));
            let folds = draw_partition(&mut rng, problem.n_rows(), cfg.k, min_train)?;
            let mut sq = vec![0.0f64; k_cols];
            for fold in &folds {
                let train: Vec<usize> =
                    (0..problem.n_rows()).filter(|r| !fold.contains(r)).collect();
                let sub = problem.restrict_rows(&train);
                let path = ssr_path(&sub)?;
                for level in &path.levels {
                    let n = level.active.len();
                    sq[n - 1] += test_error(problem, fold, &level.coeffs) / cfg.k as f64;
                }
            }
            Ok(sq)
        })
        .collect();

    let mut sum = vec![0.0f64; k_cols];
    for rep in per_rep {
        let sq = rep?;
        for (a, b) in sum.iter_mut().zip(&sq) {
            *a += b;
        }
    }
    Ok(sum.iter().map(|s| (s / cfg.reps as f64).sqrt()).collect())
}

/// CV score of the unconstrained least-squares fit on all columns of
/// `problem` (no pruning). Returns the score and whether any training fold
/// hit a rank-deficient design.
pub fn cv_plain(problem: &RegressionProblem, cfg: &CvConfig) -> Result<(f64, bool), RegressionError> {
    let cols: Vec<usize> = (0..problem.n_cols()).collect();
    let per_rep: Vec<Result<(f64, bool), RegressionError>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = seed::rng_from(seed::derive_idx(cfg.seed, "cv", rep as u64));
            let folds = draw_partition(&mut rng, problem.n_rows(), cfg.k, cols.len())?;
            let mut sq = 0.0;
            let mut deficient = false;
            for fold in &folds {
                let train: Vec<usize> =
                    (0..problem.n_rows()).filter(|r| !fold.contains(r)).collect();
                let sub = problem.restrict_rows(&train);
                let sol = least_squares(&sub, &cols)?;
                deficient |= sol.rank_deficient;
                sq += test_error(problem, fold, &sol.coeffs) / cfg.k as f64;
            }
            Ok((sq, deficient))
        })
        .collect();
    let mut sum = 0.0;
    let mut deficient = false;
    for rep in per_rep {
        let (sq, d) = rep?;
        sum += sq;
        deficient |= d;
    }
    Ok(((sum / cfg.reps as f64).sqrt(), deficient))
}

/// CV score of the q-sparse SSR model (q zeroed coefficients).
pub fn cv_score(
    problem: &RegressionProblem,
    sparsity: usize,
    cfg: &CvConfig,
) -> Result<f64, RegressionError> {
    let k_cols = problem.n_cols();
    if sparsity >= k_cols {
        return Err(RegressionError::BadSparsity { q: sparsity, k: k_cols });
    }
    let n = k_cols - sparsity;
    Ok(cv_curve(problem, cfg, n)?[n - 1])
}

/// Compute the full CV score curve and select the transition point.
pub fn cv_report(problem: &RegressionProblem, cfg: &CvConfig) -> Result<CvReport, RegressionError> {
    if cfg.k < 2 {
        return Err(RegressionError::BadFolds(cfg.k));
    }
    let delta = cv_curve(problem, cfg, 1)?;
    let ratios: Vec<f64> =
        (1..delta.len()).map(|i| ratio_of(delta[i - 1], delta[i])).collect();
    let mut report = CvReport {
        delta,
        ratios,
        k: cfg.k,
        reps: cfg.reps,
        seed: cfg.seed,
        selected: 0,
    };
    report.selected = select_model(&report);
    Ok(report)
}

/// Transition-point rule: if the score minimum sits at n = 1, take the
/// single-term model; otherwise take the n maximizing delta[n-1]/delta[n]
/// (ties toward larger n).
pub fn select_model(report: &CvReport) -> usize {
    let k = report.delta.len();
    if k == 1 {
        return 1;
    }
    let mut argmin = 0;
    for (i, &d) in report.delta.iter().enumerate() {
        if d < report.delta[argmin] {
            argmin = i;
        }
    }
    if argmin == 0 {
        return 1;
    }
    let mut best_n = 2;
    let mut best = f64::NEG_INFINITY;
    for n in 2..=k {
        let r = report.ratios[n - 2];
        if r >= best {
            best = r;
            best_n = n;
        }
    }
    best_n
}

/// A complete fit: CV selection plus the refit on the full data.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub dict: Dictionary,
    pub target: TargetKind,
    pub weight_mode: WeightMode,
    pub beta: f64,
    pub angular: bool,
    pub n_selected: usize,
    /// Full-length coefficient vector of the selected model.
    pub coefficients: DVector<f64>,
    pub active: Vec<usize>,
    pub report: CvReport,
    pub path: SsrPath,
}

/// Run SSR with CV selection on `problem` and refit the selected size on the
/// full data.
pub fn fit(
    problem: &RegressionProblem,
    dict: &Dictionary,
    cfg: &CvConfig,
) -> Result<FitResult, RegressionError> {
    let report = cv_report(problem, cfg)?;
    let path = ssr_path(problem)?;
    let level = path.level_for_size(report.selected);
    Ok(FitResult {
        dict: dict.clone(),
        target: problem.target,
        weight_mode: problem.weight_mode,
        beta: problem.beta,
        angular: problem.angular,
        n_selected: report.selected,
        coefficients: level.coeffs.clone(),
        active: level.active.clone(),
        report,
        path,
    })
}

impl FitResult {
    /// The fitted linear combination as an evaluable model.
    pub fn model(&self) -> LinearModel {
        LinearModel::new(self.dict.clone(), self.coefficients.as_slice().to_vec())
    }

    /// CSV of the score curve: `n,delta,ratio` (ratio empty at n = 1).
    pub fn write_delta_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,delta,ratio")?;
        for (i, d) in self.report.delta.iter().enumerate() {
            let n = i + 1;
            if n == 1 {
                writeln!(w, "{n},{d},")?;
            } else {
                writeln!(w, "{n},{d},{}", self.report.ratios[n - 2])?;
            }
        }
        Ok(())
    }

    /// CSV of the sparsity progress matrix: one row per dictionary entry,
    /// one 0/1 column per solution size n = 1..K.
    pub fn write_progress_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let k = self.path.k();
        write!(w, "index,function")?;
        for n in 1..=k {
            write!(w, ",n{n}")?;
        }
        writeln!(w)?;
        for (i, f) in self.dict.functions().iter().enumerate() {
            write!(w, "{i},\"{}\"", f.name())?;
            for n in 1..=k {
                let alive = self.path.level_for_size(n).active.contains(&i);
                write!(w, ",{}", u8::from(alive))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// CSV comparing the fitted curve with the binned markers it was trained
    /// on: `center,binned,fit`.
    pub fn write_fit_vs_binned_csv(
        &self,
        problem: &RegressionProblem,
        mut w: impl Write,
    ) -> std::io::Result<()> {
        let model = self.model();
        writeln!(w, "center,binned,fit")?;
        for r in 0..problem.n_rows() {
            let x = problem.row_coords[r];
            writeln!(w, "{x},{},{}", problem.y[r], model.eval_1d(x))?;
        }
        Ok(())
    }

    /// Dense fitted curve over [lo, hi]: `x,fit`.
    pub fn write_curve_csv(
        &self,
        lo: f64,
        hi: f64,
        points: usize,
        mut w: impl Write,
    ) -> std::io::Result<()> {
        let model = self.model();
        writeln!(w, "x,fit")?;
        for i in 0..points {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            writeln!(w, "{x},{}", model.eval_1d(x))?;
        }
        Ok(())
    }
}

/// Serialized fit result. The dictionary text is embedded so a saved fit can
/// be reloaded as a runnable model.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitResultJson {
    pub schema_version: u32,
    pub dictionary: String,
    pub dictionary_dsl: String,
    pub target: String,
    pub beta: f64,
    /// Whether the model's coordinate is a wrapped angle.
    pub angular: bool,
    pub n_selected: usize,
    pub coefficients: Vec<CoefficientJson>,
    pub delta: Vec<f64>,
    pub ratios: Vec<f64>,
    pub seed: u64,
    pub k: usize,
    pub reps: usize,
    pub weight_mode: WeightMode,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CoefficientJson {
    pub index: usize,
    pub name: String,
    pub value: f64,
}

impl FitResult {
    pub fn to_json(&self) -> Result<FitResultJson, BasisError> {
        let coefficients = self
            .active
            .iter()
            .map(|&i| CoefficientJson {
                index: i,
                name: self.dict.functions()[i].name(),
                value: self.coefficients[i],
            })
            .collect();
        Ok(FitResultJson {
            schema_version: 1,
            dictionary: self.dict.name().to_string(),
            dictionary_dsl: self.dict.to_dsl()?,
            target: self.target.label(),
            beta: self.beta,
            angular: self.angular,
            n_selected: self.n_selected,
            coefficients,
            delta: self.report.delta.clone(),
            ratios: self.report.ratios.clone(),
            seed: self.report.seed,
            k: self.report.k,
            reps: self.report.reps,
            weight_mode: self.weight_mode,
        })
    }
}

impl FitResultJson {
    /// Rebuild the runnable model from the embedded dictionary text.
    pub fn model(&self) -> Result<LinearModel, BasisError> {
        let dict = Dictionary::parse(self.dictionary.clone(), &self.dictionary_dsl)?;
        let mut coeffs = vec![0.0; dict.len()];
        for c in &self.coefficients {
            coeffs[c.index] = c.value;
        }
        Ok(LinearModel::new(dict, coeffs))
    }
}
