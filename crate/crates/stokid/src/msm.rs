//! Markov state model validation.
//!
//! Learned dynamics are judged against the original ones by discretizing
//! both trajectories into the same states, estimating transition matrices at
//! a lag, and comparing implied timescales
//!
//! ```text
//! t_i = -tau / ln(lambda_{i+1})
//! ```
//!
//! and stationary distributions. Counts are symmetrized, (C + C^T)/2, before
//! row normalization; that is the simplest estimator consistent with
//! reversible equilibrium data and it guarantees a real spectrum.

use std::io::Write;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::simulate::Trajectory;

#[derive(Debug, Error)]
pub enum MsmError {
    #[error("state discretization needs a 1-dimensional trajectory, got d = {0}")]
    NotScalar(usize),
    #[error("need at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("discretization range [{lo}, {hi}] is empty")]
    BadRange { lo: f64, hi: f64 },
    #[error("lag {lag} needs a label sequence longer than {len}")]
    LagTooLong { lag: usize, len: usize },
    #[error("state space disconnected at this lag; components: {0}")]
    Disconnected(String),
    #[error("histograms have different lengths ({a} vs {b})")]
    BinningMismatch { a: usize, b: usize },
    #[error("histogram has no mass")]
    EmptyHistogram,
}

/// Uniform-bin state labels over `range` (defaults to (-pi, pi] for angular
/// trajectories, the data extent otherwise).
pub fn discretize(
    traj: &Trajectory,
    n_states: usize,
    range: Option<(f64, f64)>,
) -> Result<Vec<usize>, MsmError> {
    if traj.d != 1 {
        return Err(MsmError::NotScalar(traj.d));
    }
    if n_states < 2 {
        return Err(MsmError::TooFewStates(n_states));
    }
    let (lo, hi) = match range {
        Some(r) => r,
        None if traj.is_angular() => (-std::f64::consts::PI, std::f64::consts::PI),
        None => {
            let lo = traj.states.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = traj.states.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    if !(hi > lo) {
        return Err(MsmError::BadRange { lo, hi });
    }
    let width = (hi - lo) / n_states as f64;
    Ok(traj
        .states
        .iter()
        .map(|&x| (((x - lo) / width) as usize).min(n_states - 1))
        .collect())
}

/// An estimated Markov state model at one lag.
#[derive(Debug, Clone)]
pub struct MsmModel {
    /// Requested number of discretization states.
    pub n_states: usize,
    /// Visited state labels; all matrices are indexed by position in here.
    pub active: Vec<usize>,
    pub lag_steps: usize,
    /// Lag in trajectory time units.
    pub lag_time: f64,
    /// Raw sliding-window transition counts on the active set.
    pub counts: DMatrix<f64>,
    /// Row-stochastic transition matrix from the symmetrized counts.
    pub transition: DMatrix<f64>,
    /// Real eigenvalues, descending; the first is 1.
    pub eigenvalues: Vec<f64>,
    /// Stationary distribution on the active set.
    pub stationary: Vec<f64>,
}

/// Estimate a reversible MSM from a label sequence at integer lag
/// `lag_steps`; `dt` converts the lag into time units.
pub fn estimate(
    labels: &[usize],
    n_states: usize,
    lag_steps: usize,
    dt: f64,
) -> Result<MsmModel, MsmError> {
    if lag_steps == 0 || labels.len() <= lag_steps {
        return Err(MsmError::LagTooLong { lag: lag_steps, len: labels.len() });
    }
    let mut counts_full = vec![0.0f64; n_states * n_states];
    for win in 0..labels.len() - lag_steps {
        counts_full[labels[win] * n_states + labels[win + lag_steps]] += 1.0;
    }

    // active states: anything touched by the symmetrized counts
    let mut active = Vec::new();
    for s in 0..n_states {
        let touched = (0..n_states)
            .any(|t| counts_full[s * n_states + t] > 0.0 || counts_full[t * n_states + s] > 0.0);
        if touched {
            active.push(s);
        }
    }
    let na = active.len();
    let counts =
        DMatrix::from_fn(na, na, |r, c| counts_full[active[r] * n_states + active[c]]);
    let sym = (&counts + counts.transpose()) * 0.5;

    // connectivity over the symmetrized graph
    let components = connected_components(&sym);
    if components.len() > 1 {
        let desc: Vec<String> = components
            .iter()
            .map(|comp| {
                let states: Vec<String> =
                    comp.iter().map(|&i| active[i].to_string()).collect();
                format!("[{}]", states.join(" "))
            })
            .collect();
        return Err(MsmError::Disconnected(desc.join(" ")));
    }

    let row_sums: Vec<f64> = (0..na).map(|r| sym.row(r).sum()).collect();
    let total: f64 = row_sums.iter().sum();
    let transition = DMatrix::from_fn(na, na, |r, c| sym[(r, c)] / row_sums[r]);
    let stationary: Vec<f64> = row_sums.iter().map(|&s| s / total).collect();

    // the transition matrix is similar to a symmetric one through the
    // D^(1/2) transform, so the spectrum is real
    let similar = DMatrix::from_fn(na, na, |r, c| {
        sym[(r, c)] / (row_sums[r].sqrt() * row_sums[c].sqrt())
    });
    let mut eigenvalues: Vec<f64> = similar.symmetric_eigen().eigenvalues.iter().cloned().collect();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("finite"));

    Ok(MsmModel {
        n_states,
        active,
        lag_steps,
        lag_time: lag_steps as f64 * dt,
        counts,
        transition,
        eigenvalues,
        stationary,
    })
}

fn connected_components(sym: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = sym.nrows();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(i) = stack.pop() {
            comp.push(i);
            for j in 0..n {
                if !seen[j] && sym[(i, j)] > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

/// Implied timescales t_i = -tau / ln(lambda_{i+1}) for i = 1..=m, in
/// trajectory time units. Eigenvalues outside (0, 1) yield `None`.
pub fn implied_timescales(model: &MsmModel, m: usize) -> Vec<Option<f64>> {
    (1..=m)
        .map(|i| match model.eigenvalues.get(i) {
            Some(&l) if l > 0.0 && l < 1.0 - 1e-12 => Some(-model.lag_time / l.ln()),
            _ => None,
        })
        .collect()
}

/// Occupation histogram of a label sequence (normalized).
pub fn stationary_histogram(labels: &[usize], n_states: usize) -> Vec<f64> {
    let mut hist = vec![0.0f64; n_states];
    for &l in labels {
        hist[l] += 1.0;
    }
    let total = labels.len() as f64;
    for h in &mut hist {
        *h /= total;
    }
    hist
}

/// Per-bin absolute deviations between two normalized histograms.
#[derive(Debug, Clone)]
pub struct StationaryComparison {
    pub per_bin: Vec<f64>,
    pub max_abs: f64,
}

pub fn compare_stationary(a: &[f64], b: &[f64]) -> Result<StationaryComparison, MsmError> {
    if a.len() != b.len() {
        return Err(MsmError::BinningMismatch { a: a.len(), b: b.len() });
    }
    let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
    if sa <= 0.0 || sb <= 0.0 {
        return Err(MsmError::EmptyHistogram);
    }
    let per_bin: Vec<f64> =
        a.iter().zip(b).map(|(&x, &y)| (x / sa - y / sb).abs()).collect();
    let max_abs = per_bin.iter().cloned().fold(0.0, f64::max);
    Ok(StationaryComparison { per_bin, max_abs })
}

/// CSV rows `lag,index,timescale` (one trajectory's timescales over a lag
/// grid); undefined timescales are left empty.
pub fn write_timescales_csv(
    rows: &[(usize, Vec<Option<f64>>)],
    mut w: impl Write,
) -> std::io::Result<()> {
    writeln!(w, "lag,index,timescale")?;
    for (lag, ts) in rows {
        for (i, t) in ts.iter().enumerate() {
            match t {
                Some(v) => writeln!(w, "{lag},{},{v}", i + 1)?,
                None => writeln!(w, "{lag},{},", i + 1)?,
            }
        }
    }
    Ok(())
}

/// CSV rows `bin_center,prob_a,prob_b` comparing two stationary histograms.
pub fn write_stationary_csv(
    centers: &[f64],
    a: &[f64],
    b: &[f64],
    mut w: impl Write,
) -> std::io::Result<()> {
    writeln!(w, "bin_center,prob_a,prob_b")?;
    for i in 0..centers.len() {
        writeln!(w, "{},{},{}", centers[i], a[i], b[i])?;
    }
    Ok(())
}
