//! Greedy sub-dictionary search and the sampling-noise robustness study.
//!
//! Instead of pruning one reference dictionary, the greedy search rates
//! every sub-dictionary of a large pool by the cross-validation score of its
//! plain (unconstrained) least-squares fit. Tabulating the per-size minimum
//! exposes the same transition point the stepwise regressor looks for, and
//! shows which dictionaries miss a needed ingredient.
//!
//! The noise study replaces the measured bin averages with synthetic targets
//! `U'(center) * (1 + eta)`, `eta ~ N(0, zeta)`, where `zeta = f * median`
//! of the observed per-bin relative error. Shrinking `f` mimics longer or
//! colder sampling; the question is at what noise level the stepwise
//! regressor still lands on exactly the generating functions.

use std::collections::HashSet;
use std::io::Write;

use nalgebra::DVector;
use rand::RngExt;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisError, Dictionary};
use crate::increments::{assemble_problem, BinnedData, EstimatorError, WeightMode};
use crate::regression::{cv_plain, fit, CvConfig, RegressionError};
use crate::seed;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("dictionary sizes {lo}..={hi} out of range for a pool of {m}")]
    BadSizes { lo: usize, hi: usize, m: usize },
    #[error("sample budget must be positive")]
    EmptyBudget,
    #[error("random dictionaries need at least {need} entries, asked for {got}")]
    DictTooSmall { need: usize, got: usize },
    #[error("the pool does not contain the analytic entries [1, x, x^2, x^3]")]
    NoAnalyticQuartet,
    #[error("the reference data has no bins with a nonzero gradient")]
    NoUsableBins,
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Binomial coefficient, saturating at u128::MAX.
pub fn binomial(m: usize, n: usize) -> u128 {
    if n > m {
        return 0;
    }
    let n = n.min(m - n);
    let mut out: u128 = 1;
    for i in 0..n {
        out = out.saturating_mul((m - i) as u128) / (i as u128 + 1);
    }
    out
}

/// Per-size subset budget.
#[derive(Debug, Clone, Copy)]
pub enum SampleBudget {
    /// Exhaustive for n in 2..=4 (cheap at reduced pool sizes, and the
    /// regime where the transition point lives), capped sampling elsewhere.
    Auto { cap: usize },
    /// Enumerate when C(M, n) <= m, otherwise sample m distinct subsets.
    Fixed(usize),
}

impl SampleBudget {
    fn for_size(&self, m: usize, n: usize) -> u128 {
        let c = binomial(m, n);
        match *self {
            SampleBudget::Auto { cap } => {
                if (2..=4).contains(&n) {
                    c
                } else {
                    c.min(cap as u128)
                }
            }
            SampleBudget::Fixed(budget) => c.min(budget as u128),
        }
    }
}

/// One evaluated sub-dictionary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreedyRecord {
    /// Ascending indices into the pool.
    pub subset: Vec<usize>,
    pub n: usize,
    pub delta: f64,
    pub contains_analytic: bool,
    /// Some CV training fold hit a rank-deficient design; such records are
    /// kept but excluded from the minimum curve.
    pub rank_deficient: bool,
}

/// Per-size minimum of the score scatter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinCurvePoint {
    pub n: usize,
    pub delta: f64,
    pub subset: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreedySearchResult {
    pub records: Vec<GreedyRecord>,
    pub min_curve: Vec<MinCurvePoint>,
}

impl GreedySearchResult {
    pub fn min_for_size(&self, n: usize) -> Option<&MinCurvePoint> {
        self.min_curve.iter().find(|p| p.n == n)
    }

    /// CSV rows `n,delta,contains_analytic,rank_deficient,subset` with the
    /// subset as space-separated indices (the scatter data).
    pub fn write_records_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,delta,contains_analytic,rank_deficient,subset")?;
        for r in &self.records {
            let subset: Vec<String> = r.subset.iter().map(ToString::to_string).collect();
            writeln!(
                w,
                "{},{},{},{},{}",
                r.n,
                r.delta,
                u8::from(r.contains_analytic),
                u8::from(r.rank_deficient),
                subset.join(" ")
            )?;
        }
        Ok(())
    }

    /// CSV rows `n,min_delta,subset` of the per-size minimum curve.
    pub fn write_min_curve_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,min_delta,subset")?;
        for p in &self.min_curve {
            let subset: Vec<String> = p.subset.iter().map(ToString::to_string).collect();
            writeln!(w, "{},{},{}", p.n, p.delta, subset.join(" "))?;
        }
        Ok(())
    }
}

/// All subsets of 0..m of size n in lexicographic order.
fn enumerate_subsets(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let mut i = n;
        // rightmost index that can still advance
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + m - n {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..n {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `count` distinct size-n subsets drawn uniformly, each sorted ascending;
/// discovery order is the record order.
fn sample_subsets(
    rng: &mut rand_chacha::ChaCha12Rng,
    m: usize,
    n: usize,
    count: usize,
) -> Vec<Vec<usize>> {
    let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut pick: Vec<usize> = rand::seq::index::sample(rng, m, n).into_vec();
        pick.sort_unstable();
        if seen.insert(pick.clone()) {
            out.push(pick);
        }
    }
    out
}

/// Evaluate sub-dictionaries of `pool` against the binned data for each size
/// in `sizes`, recording the CV score of the plain least-squares fit.
pub fn greedy_search(
    pool: &Dictionary,
    binned: &BinnedData,
    weight_mode: WeightMode,
    sizes: std::ops::RangeInclusive<usize>,
    budget: SampleBudget,
    cv: &CvConfig,
    seed: u64,
) -> Result<GreedySearchResult, SearchError> {
    let m = pool.len();
    let (lo, hi) = (*sizes.start(), *sizes.end());
    if lo < 1 || hi > m || lo > hi {
        return Err(SearchError::BadSizes { lo, hi, m });
    }
    if matches!(budget, SampleBudget::Fixed(0)) {
        return Err(SearchError::EmptyBudget);
    }
    let problem = assemble_problem(pool, binned, weight_mode)?;
    let analytic = pool.analytic_quartet();

    let mut records = Vec::new();
    let mut min_curve = Vec::new();
    for n in sizes {
        let target = budget.for_size(m, n);
        let subsets = if binomial(m, n) <= target {
            enumerate_subsets(m, n)
        } else {
            let mut rng = seed::rng_from(seed::derive_idx(seed, "greedy", n as u64));
            sample_subsets(&mut rng, m, n, target as usize)
        };
        let size_records: Vec<Result<GreedyRecord, SearchError>> = subsets
            .into_par_iter()
            .map(|subset| {
                let sub = problem.restrict_cols(&subset);
                let (delta, rank_deficient) = cv_plain(&sub, cv)?;
                let contains_analytic = analytic
                    .map(|q| q.iter().all(|i| subset.contains(i)))
                    .unwrap_or(false);
                Ok(GreedyRecord { subset, n, delta, contains_analytic, rank_deficient })
            })
            .collect();
        let mut best: Option<MinCurvePoint> = None;
        for rec in size_records {
            let rec = rec?;
            if !rec.rank_deficient && rec.delta.is_finite() {
                let better = best.as_ref().map(|b| rec.delta < b.delta).unwrap_or(true);
                if better {
                    best = Some(MinCurvePoint { n, delta: rec.delta, subset: rec.subset.clone() });
                }
            }
            records.push(rec);
        }
        if let Some(b) = best {
            min_curve.push(b);
        }
    }
    Ok(GreedySearchResult { records, min_curve })
}

/// Noise-robustness report: success percentage of the full SSR+CV pipeline
/// per noise scaling factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseReport {
    pub f_values: Vec<f64>,
    pub success_pct: Vec<f64>,
    pub n_dicts: usize,
    pub dict_size: usize,
    pub seed: u64,
    /// Median of the observed per-bin relative errors the noise scale is
    /// set from.
    pub median_eps: f64,
}

impl NoiseReport {
    /// Two-row CSV matching the tabulated layout: log10(f) header (f = 0
    /// maps to `-inf`), success percentages underneath.
    pub fn write_table_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "log10_f")?;
        for &f in &self.f_values {
            if f == 0.0 {
                write!(w, ",-inf")?;
            } else {
                write!(w, ",{}", f.log10())?;
            }
        }
        writeln!(w)?;
        write!(w, "percent")?;
        for p in &self.success_pct {
            write!(w, ",{p}")?;
        }
        writeln!(w)?;
        Ok(())
    }
}

/// Configuration of the noise experiment.
#[derive(Debug, Clone)]
pub struct NoiseConfig {
    pub f_values: Vec<f64>,
    pub n_dicts: usize,
    /// Entries per random dictionary, analytic quartet included.
    pub dict_size: usize,
    pub cv: CvConfig,
    pub seed: u64,
    pub weight_mode: WeightMode,
}

/// Per-bin relative errors of the measured drift against the analytic
/// gradient, `eps_i = |(-mean_i - U'(c_i)) / U'(c_i)|` (the drift is the
/// negated gradient). Bins where U' vanishes are skipped.
pub fn relative_errors(reference: &BinnedData, u_prime: impl Fn(f64) -> f64) -> Vec<f64> {
    reference
        .occupied()
        .filter_map(|i| {
            let up = u_prime(reference.centers[i]);
            if up == 0.0 {
                None
            } else {
                Some(((-reference.means[i] - up) / up).abs())
            }
        })
        .collect()
}

/// Median of a sample (average of the middle two for even lengths).
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Run the noise study: `n_dicts` random `dict_size`-entry dictionaries, all
/// containing the analytic quartet, fitted with SSR+CV against synthetic
/// targets of decreasing noise. Success means the selected active set is
/// exactly the quartet. One standard-normal draw per (dictionary, bin) is
/// shared across all f values, so the trend over f compares like with like.
pub fn noise_experiment(
    pool: &Dictionary,
    reference: &BinnedData,
    u_prime: impl Fn(f64) -> f64 + Sync,
    cfg: &NoiseConfig,
) -> Result<NoiseReport, SearchError> {
    let quartet = pool.analytic_quartet().ok_or(SearchError::NoAnalyticQuartet)?;
    if cfg.dict_size < 5 || cfg.dict_size > pool.len() {
        return Err(SearchError::DictTooSmall { need: 5, got: cfg.dict_size });
    }
    let mut eps = relative_errors(reference, &u_prime);
    if eps.is_empty() {
        return Err(SearchError::NoUsableBins);
    }
    let median_eps = median(&mut eps);

    let occupied: Vec<usize> = reference.occupied().collect();
    let centers: Vec<f64> = occupied.iter().map(|&i| reference.centers[i]).collect();
    let gradient: Vec<f64> = centers.iter().map(|&c| u_prime(c)).collect();
    let others: Vec<usize> = (0..pool.len()).filter(|i| !quartet.contains(i)).collect();

    // per-dictionary success flags for every f, aggregated in index order
    let results: Vec<Result<Vec<bool>, SearchError>> = (0..cfg.n_dicts)
        .into_par_iter()
        .map(|j| {
            let mut dict_rng = seed::rng_from(seed::derive_idx(cfg.seed, "noise-dict", j as u64));
            let extra = rand::seq::index::sample(&mut dict_rng, others.len(), cfg.dict_size - 4);
            let mut indices: Vec<usize> = quartet.to_vec();
            indices.extend(extra.iter().map(|p| others[p]));
            indices.sort_unstable();
            let dict = pool.subset(format!("random-{j}"), &indices)?;
            let local_quartet: Vec<usize> =
                dict.analytic_quartet().expect("quartet kept").to_vec();

            let mut eta_rng = seed::rng_from(seed::derive_idx(cfg.seed, "noise-eta", j as u64));
            let eta: Vec<f64> =
                (0..centers.len()).map(|_| eta_rng.sample(StandardNormal)).collect();

            let design = dict.evaluate_1d(&centers)?;
            let weights = DVector::from_iterator(
                occupied.len(),
                occupied.iter().map(|&i| reference.weights[i]),
            );

            let mut successes = Vec::with_capacity(cfg.f_values.len());
            for (fi, &f) in cfg.f_values.iter().enumerate() {
                let zeta = f * median_eps;
                let y = DVector::from_iterator(
                    centers.len(),
                    gradient.iter().zip(&eta).map(|(&g, &e)| g * (1.0 + zeta * e)),
                );
                let problem = crate::increments::RegressionProblem {
                    x: design.clone(),
                    y,
                    w: weights.clone(),
                    row_coords: centers.clone(),
                    dict_name: dict.name().to_string(),
                    target: reference.kind,
                    weight_mode: cfg.weight_mode,
                    beta: reference.beta,
                    angular: reference.angular,
                    underdetermined: centers.len() < dict.len(),
                };
                let cv = CvConfig {
                    seed: seed::derive_idx(
                        seed::derive_idx(cfg.cv.seed, "noise-cv", j as u64),
                        "f",
                        fi as u64,
                    ),
                    ..cfg.cv
                };
                let result = fit(&problem, &dict, &cv)?;
                successes.push(result.active == local_quartet);
            }
            Ok(successes)
        })
        .collect();

    let mut counts = vec![0usize; cfg.f_values.len()];
    for r in results {
        for (c, ok) in counts.iter_mut().zip(r?) {
            *c += usize::from(ok);
        }
    }
    let success_pct = counts.iter().map(|&c| 100.0 * c as f64 / cfg.n_dicts as f64).collect();
    Ok(NoiseReport {
        f_values: cfg.f_values.clone(),
        success_pct,
        n_dicts: cfg.n_dicts,
        dict_size: cfg.dict_size,
        seed: cfg.seed,
        median_eps,
    })
}
