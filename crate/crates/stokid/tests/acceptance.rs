//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`, or in the
//! failure report).
//!
//! Benchmarks are simulated once into shared fixtures. All seeds are fixed
//! constants listed next to the fixtures; identical inputs reproduce these
//! numbers bit for bit on any platform.

use std::sync::LazyLock;

use stokid::energy::{self, DiffusionModel};
use stokid::increments::{
    assemble_problem, bin_series, linear_increments, quadratic_increments, IncrementSeries,
    WeightMode,
};
use stokid::msm;
use stokid::regression::{fit, CvConfig, FitResult};
use stokid::search::{self, NoiseConfig, SampleBudget};
use stokid::seed;
use stokid::simulate::{
    project, simulate_ito, simulate_ito_on_circle, simulate_overdamped, Potential, Projection,
    SimConfig, Trajectory,
};
use stokid::{BinnedData, Dictionary, RegressionProblem};

fn u_prime(x: f64) -> f64 {
    2.0 * x.powi(3) - 12.0 * x * x + 18.0 * x - 3.0
}

const DW_SEED: u64 = 7; // trajectories use DW_SEED + rep
const DW_CV_SEED: u64 = 11;
const LEMON_SEED: u64 = 9;
const LEMON_CV_SEED: u64 = 31;
const GREEDY_SEED: u64 = 13;
const NOISE_SEED: u64 = 17;
const ENERGY_CV_SEED: u64 = 23;
const LEMON_ENERGY_CV_SEED: u64 = 29;
const LEARNED_SIM_SEED: u64 = 33;

fn dw_config(seed: u64, steps: usize) -> SimConfig {
    SimConfig {
        dt: 5e-3,
        n_steps: steps,
        beta: 1.0,
        gamma: 1.0,
        seed,
        initial_state: vec![1.0],
        burn_in: 10_000,
    }
}

fn dw_drift_binned(steps: usize) -> BinnedData {
    let series: Vec<IncrementSeries> = (0..5)
        .map(|i| {
            let traj =
                simulate_overdamped(&Potential::DoubleWell, &dw_config(DW_SEED + i, steps))
                    .expect("simulation");
            linear_increments(&traj, 0).expect("increments")
        })
        .collect();
    let merged = IncrementSeries::concat(series).expect("same provenance");
    bin_series(&merged, 90, None).expect("binning")
}

struct DwFixture {
    binned: BinnedData,
    theta: Dictionary,
    theta_problem: RegressionProblem,
    theta_fit: FitResult,
}

/// Criterion 1 run: five 10^6-step trajectories, Q = 90, theta, 5-fold CV
/// with 50 repetitions.
static DW: LazyLock<DwFixture> = LazyLock::new(|| {
    let binned = dw_drift_binned(1_000_000);
    let theta = Dictionary::builtin("theta").expect("builtin");
    let theta_problem = assemble_problem(&theta, &binned, WeightMode::Sqrt).expect("assembly");
    let cv = CvConfig { k: 5, reps: 50, seed: DW_CV_SEED };
    let theta_fit = fit(&theta_problem, &theta, &cv).expect("fit");
    DwFixture { binned, theta, theta_problem, theta_fit }
});

struct LemonFixture {
    phi: Trajectory,
    dict: Dictionary,
    drift_fit: FitResult,
    diffusion_fit: FitResult,
}

/// Criterion 4 run: one 10^6-step 2D trajectory, polar projection, Q = 63,
/// 7-fold CV with 50 repetitions.
static LEMON: LazyLock<LemonFixture> = LazyLock::new(|| {
    let cfg = SimConfig {
        dt: 1e-3,
        n_steps: 1_000_000,
        beta: 1.0,
        gamma: 1.0,
        seed: LEMON_SEED,
        initial_state: vec![1.0, 0.0],
        burn_in: 10_000,
    };
    let traj2d = simulate_overdamped(&Potential::LemonSlice, &cfg).expect("simulation");
    let phi = project(&traj2d, Projection::PolarAngle).expect("projection");
    let dict = Dictionary::builtin("theta_2d").expect("builtin");
    let cv = CvConfig { k: 7, reps: 50, seed: LEMON_CV_SEED };

    let drift_series = linear_increments(&phi, 0).expect("increments");
    let drift_binned = bin_series(&drift_series, 63, None).expect("binning");
    let drift_problem = assemble_problem(&dict, &drift_binned, WeightMode::Sqrt).expect("assembly");
    let drift_fit = fit(&drift_problem, &dict, &cv).expect("drift fit");

    let diff_series = quadratic_increments(&phi, 0, 0, 1.0).expect("increments");
    let diff_binned = bin_series(&diff_series, 63, None).expect("binning");
    let diff_problem = assemble_problem(&dict, &diff_binned, WeightMode::Sqrt).expect("assembly");
    let diffusion_fit = fit(&diff_problem, &dict, &cv).expect("diffusion fit");

    LemonFixture { phi, dict, drift_fit, diffusion_fit }
});

/// Learned lemon dynamics simulated back on the circle with the same
/// parameters as the original run.
static LEARNED: LazyLock<Trajectory> = LazyLock::new(|| {
    let lemon = &*LEMON;
    let b = lemon.drift_fit.model();
    let a = lemon.diffusion_fit.model();
    let cfg = SimConfig {
        dt: 1e-3,
        n_steps: 1_000_000,
        beta: 1.0,
        gamma: 1.0,
        seed: LEARNED_SIM_SEED,
        initial_state: vec![std::f64::consts::PI / 7.0],
        burn_in: 10_000,
    };
    simulate_ito_on_circle(|x| b.eval_1d(x), |x| a.eval_1d(x), &cfg).expect("learned simulation")
});

#[test]
fn criterion_1_double_well_recovery() {
    let dw = &*DW;
    let fit = &dw.theta_fit;
    let quartet = dw.theta.analytic_quartet().expect("theta holds the quartet");
    // reported as the gradient, the negated drift
    let gradient: Vec<f64> = quartet.iter().map(|&i| -fit.coefficients[i]).collect();
    let expected = [-3.0, 18.0, -12.0, 2.0];

    let n_ok = fit.n_selected == 4;
    let set_ok = fit.active == quartet.to_vec();
    let coef_ok =
        gradient.iter().zip(&expected).all(|(g, e)| (g - e).abs() <= 0.25);
    let pass = n_ok && set_ok && coef_ok;
    println!(
        "criterion 1 (double-well recovery): {} — n = {}, active = {:?}, gradient = {:?}",
        if pass { "PASS" } else { "FAIL" },
        fit.n_selected,
        fit.active,
        gradient,
    );
    assert!(pass, "n_ok={n_ok} set_ok={set_ok} coef_ok={coef_ok} gradient={gradient:?}");
}

#[test]
fn criterion_2_cv_gap() {
    let fit = &DW.theta_fit;
    let ratio = fit.report.score(3) / fit.report.score(4);
    let pass = ratio >= 1e2;
    println!(
        "criterion 2 (CV gap): {} — delta[3] = {:.4e}, delta[4] = {:.4e}, ratio = {:.1} (need >= 100)",
        if pass { "PASS" } else { "FAIL" },
        fit.report.score(3),
        fit.report.score(4),
        ratio,
    );
    assert!(
        pass,
        "delta[3]/delta[4] = {ratio:.1} < 100. The held-out score of the correct \
         4-term model is bounded below by the sampling noise of the test bins \
         (~sqrt(Q_test * (2/dt) / N) ≈ 3.8e-2 at N = 5e6), while delta[3] ≈ 0.7 \
         is fixed by the quadratic model's misfit, capping the ratio near 19 at \
         this data size for any held-out-prediction CV."
    );
}

#[test]
fn criterion_3_theta_prime_behavior() {
    let dw = &*DW;
    let dict = Dictionary::builtin("theta_prime").expect("builtin");
    let problem = assemble_problem(&dict, &dw.binned, WeightMode::Sqrt).expect("assembly");
    let cv = CvConfig { k: 5, reps: 50, seed: DW_CV_SEED };
    let prime_fit = fit(&problem, &dict, &cv).expect("fit");

    let n_ok = (5..=10).contains(&prime_fit.n_selected);
    let theta_ratio = dw.theta_fit.report.max_ratio();
    let prime_ratio = prime_fit.report.max_ratio();
    let ratio_ok = prime_ratio <= theta_ratio / 10.0;
    let pass = n_ok && ratio_ok;
    println!(
        "criterion 3 (theta-prime): {} — n' = {} (need 5..=10: {}), max ratio {:.2} vs theta's {:.2} (need <= {:.2}: {})",
        if pass { "PASS" } else { "FAIL" },
        prime_fit.n_selected,
        if n_ok { "ok" } else { "violated" },
        prime_ratio,
        theta_ratio,
        theta_ratio / 10.0,
        if ratio_ok { "ok" } else { "violated" },
    );
    assert!(
        pass,
        "n'={} (in 5..=10: {n_ok}); theta' max ratio {prime_ratio:.2} vs theta/10 = {:.2} \
         (ok: {ratio_ok}). Theta's own maximum ratio is compressed to ~15 by the \
         same held-out noise floor that caps criterion 2, so a further decade \
         below it is not reachable at this data size even though theta-prime's \
         transition (n' = {}) reproduces the reference behavior.",
        prime_fit.n_selected,
        theta_ratio / 10.0,
        prime_fit.n_selected,
    );
}

#[test]
fn criterion_4_lemon_slice() {
    let lemon = &*LEMON;
    let sin7 = lemon
        .dict
        .position_of(&stokid::BasisFunction::scalar(stokid::ScalarBasis::Sin { a: 7.0 }))
        .expect("sin 7 in dictionary");
    let one = lemon
        .dict
        .position_of(&stokid::BasisFunction::scalar(stokid::ScalarBasis::Const))
        .expect("const in dictionary");

    let b = &lemon.drift_fit;
    let b_ok = b.n_selected == 1 && b.active == vec![sin7];
    let b_coef = b.coefficients[sin7];
    let b_coef_ok = (b_coef / 6.61 - 1.0).abs() <= 0.05;

    let a = &lemon.diffusion_fit;
    let a_ok = a.n_selected == 1 && a.active == vec![one];
    let a_coef = a.coefficients[one];
    let a_coef_ok = (a_coef / 0.94 - 1.0).abs() <= 0.05;

    let pass = b_ok && b_coef_ok && a_ok && a_coef_ok;
    println!(
        "criterion 4 (lemon slice): {} — drift n = {} coef = {:.4} (6.61 ± 5%), diffusion n = {} coef = {:.4} (0.94 ± 5%)",
        if pass { "PASS" } else { "FAIL" },
        b.n_selected,
        b_coef,
        a.n_selected,
        a_coef,
    );
    assert!(pass, "b_ok={b_ok} b_coef={b_coef} a_ok={a_ok} a_coef={a_coef}");
}

#[test]
fn criterion_5_greedy_search() {
    // Pool of M = 30 containing the quartet; the underlying data are the
    // full-length trajectories the reference experiment used (the score of
    // the 4-term winner is otherwise noise-limited before the 3-vs-4 gap
    // opens a full decade).
    let binned = dw_drift_binned(10_000_000);
    let pool = Dictionary::builtin("omega")
        .expect("builtin")
        .prefix("omega30", 30)
        .expect("prefix");
    let quartet = pool.analytic_quartet().expect("quartet present");
    let cv = CvConfig { k: 5, reps: 5, seed: seed::derive(GREEDY_SEED, "greedy-cv") };
    let result = search::greedy_search(
        &pool,
        &binned,
        WeightMode::Sqrt,
        3..=4,
        SampleBudget::Auto { cap: 2_000 },
        &cv,
        GREEDY_SEED,
    )
    .expect("greedy search");

    let min3 = result.min_for_size(3).expect("size 3 searched");
    let min4 = result.min_for_size(4).expect("size 4 searched");
    let subset_ok = min4.subset == quartet.to_vec();
    let gap = min3.delta / min4.delta;
    let gap_ok = gap >= 10.0;
    let pass = subset_ok && gap_ok;
    println!(
        "criterion 5 (greedy search): {} — min(4) by {:?} delta {:.4e}, min(3) delta {:.4e}, gap {:.1} (need >= 10)",
        if pass { "PASS" } else { "FAIL" },
        min4.subset,
        min4.delta,
        min3.delta,
        gap,
    );
    assert!(pass, "subset_ok={subset_ok} gap={gap:.2}");
}

#[test]
fn criterion_6_noise_experiment() {
    let dw = &*DW;
    let pool = Dictionary::builtin("omega").expect("builtin");
    let cfg = NoiseConfig {
        f_values: vec![1.0, 1e-3, 1e-6, 1e-9, 0.0],
        n_dicts: 20,
        dict_size: 50,
        cv: CvConfig { k: 5, reps: 20, seed: seed::derive(NOISE_SEED, "noise-cv-root") },
        seed: NOISE_SEED,
        weight_mode: WeightMode::Sqrt,
    };
    let report = search::noise_experiment(&pool, &dw.binned, u_prime, &cfg).expect("noise study");

    let monotone = report.success_pct.windows(2).all(|w| w[1] >= w[0]);
    let at_one = report.success_pct[0] == 0.0;
    let at_zero = *report.success_pct.last().unwrap() >= 70.0;
    let pass = monotone && at_one && at_zero;
    println!(
        "criterion 6 (noise robustness): {} — success % over f = {:?}: {:?} (median eps {:.3e})",
        if pass { "PASS" } else { "FAIL" },
        report.f_values,
        report.success_pct,
        report.median_eps,
    );
    assert!(pass, "monotone={monotone} at_one={at_one} at_zero={at_zero}");
}

#[test]
fn criterion_7_free_energy() {
    // double well: overdamped reduction, a = 1/gamma = 1
    let dw = &*DW;
    let series: Vec<IncrementSeries> = (0..5)
        .map(|i| {
            let traj =
                simulate_overdamped(&Potential::DoubleWell, &dw_config(DW_SEED + i, 1_000_000))
                    .expect("simulation");
            energy::energy_increments(&traj, &DiffusionModel::constant(1.0, 1.0), 1.0)
                .expect("energy increments")
        })
        .collect();
    let merged = IncrementSeries::concat(series).expect("same provenance");
    let binned = bin_series(&merged, 90, None).expect("binning");
    let problem =
        energy::assemble_energy_problem(&dw.theta, &binned, WeightMode::Sqrt).expect("assembly");
    let cv = CvConfig { k: 5, reps: 50, seed: ENERGY_CV_SEED };
    let (model, _) =
        energy::fit_free_energy(&problem, &dw.theta, Some(&cv)).expect("free-energy fit");

    let mut err2 = 0.0;
    let mut ref2 = 0.0;
    for i in binned.occupied() {
        let x = binned.centers[i];
        let w = binned.weights[i];
        let diff = model.gradient(x) - u_prime(x);
        err2 += w * diff * diff;
        ref2 += w * u_prime(x) * u_prime(x);
    }
    let rel_rms = (err2 / ref2).sqrt();
    let dw_ok = rel_rms <= 0.05;

    // lemon slice: two-stage route with the fitted diffusion model
    let lemon = &*LEMON;
    let diffusion = DiffusionModel::new(lemon.diffusion_fit.model(), 1.0);
    let (lemon_problem, _lemon_binned) = energy::energy_problem_from_trajectories(
        std::slice::from_ref(&lemon.phi),
        &lemon.dict,
        &diffusion,
        1.0,
        63,
        None,
        WeightMode::Sqrt,
    )
    .expect("lemon energy problem");
    let cv = CvConfig { k: 7, reps: 50, seed: LEMON_ENERGY_CV_SEED };
    let (lemon_f, _) =
        energy::fit_free_energy(&lemon_problem, &lemon.dict, Some(&cv)).expect("lemon F fit");
    let grid: Vec<f64> = (0..=1024)
        .map(|i| -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / 1024.0)
        .collect();
    let f_vals = lemon_f.evaluate(&grid);
    let amplitude = f_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / 2.0;
    let amp_ok = (amplitude - 1.0).abs() <= 0.1;
    // cos(7 phi) shape: normalized overlap of the centered profile
    let mean = f_vals.iter().sum::<f64>() / f_vals.len() as f64;
    let mut dot = 0.0;
    let mut norm_f = 0.0;
    let mut norm_c = 0.0;
    for (x, f) in grid.iter().zip(&f_vals) {
        let c = (7.0 * x).cos();
        dot += (f - mean) * c;
        norm_f += (f - mean) * (f - mean);
        norm_c += c * c;
    }
    let overlap = dot / (norm_f * norm_c).sqrt();
    let shape_ok = overlap >= 0.95;

    let pass = dw_ok && amp_ok && shape_ok;
    println!(
        "criterion 7 (free energy): {} — dw gradient rel RMS {:.3}% (need <= 5%), lemon amplitude {:.4} (1 ± 10%), cos(7phi) overlap {:.4}",
        if pass { "PASS" } else { "FAIL" },
        100.0 * rel_rms,
        amplitude,
        overlap,
    );
    assert!(pass, "dw_rel_rms={rel_rms} amplitude={amplitude} overlap={overlap}");
}

#[test]
fn criterion_8_msm_validation() {
    let lemon = &*LEMON;
    let learned = &*LEARNED;
    let range = (-std::f64::consts::PI, std::f64::consts::PI);
    let labels_a = msm::discretize(&lemon.phi, 63, Some(range)).expect("labels a");
    let labels_b = msm::discretize(learned, 63, Some(range)).expect("labels b");

    let model_a = msm::estimate(&labels_a, 63, 10, lemon.phi.dt).expect("msm a");
    let model_b = msm::estimate(&labels_b, 63, 10, learned.dt).expect("msm b");
    let ts_a = msm::implied_timescales(&model_a, 6);
    let ts_b = msm::implied_timescales(&model_b, 6);
    let mut ts_ok = true;
    let mut devs = Vec::new();
    for (a, b) in ts_a.iter().zip(&ts_b) {
        match (a, b) {
            (Some(ta), Some(tb)) => {
                let dev = (tb / ta - 1.0).abs();
                devs.push(dev);
                ts_ok &= dev <= 0.15;
            }
            _ => ts_ok = false,
        }
    }

    let hist_a = msm::stationary_histogram(&labels_a, 63);
    let hist_b = msm::stationary_histogram(&labels_b, 63);
    let cmp = msm::compare_stationary(&hist_a, &hist_b).expect("comparable");
    let hist_ok = cmp.max_abs <= 0.05;

    let pass = ts_ok && hist_ok;
    println!(
        "criterion 8 (MSM validation): {} — timescale deviations at lag 10: {:?}, stationary max dev {:.4} (need <= 0.05)",
        if pass { "PASS" } else { "FAIL" },
        devs.iter().map(|d| format!("{:.1}%", 100.0 * d)).collect::<Vec<_>>(),
        cmp.max_abs,
    );
    assert!(pass, "ts_ok={ts_ok} devs={devs:?} hist_max={}", cmp.max_abs);
}

#[test]
fn criterion_9_property_suite() {
    let mut lines = Vec::new();

    // exact k-sparsity and nesting on the real theta path
    let dw = &*DW;
    let path = &dw.theta_fit.path;
    let k = path.k();
    let mut sparsity_ok = true;
    for (q, level) in path.levels.iter().enumerate() {
        sparsity_ok &= level.active.len() == k - q;
        let nonzero = (0..k).filter(|&i| level.coeffs[i] != 0.0).count();
        sparsity_ok &= nonzero == k - q;
    }
    let mut nesting_ok = true;
    for pair in path.levels.windows(2) {
        nesting_ok &= pair[1].active.iter().all(|i| pair[0].active.contains(i));
        nesting_ok &= pair[1].active.len() + 1 == pair[0].active.len();
    }
    lines.push(format!("k-sparsity {sparsity_ok}, nesting {nesting_ok}"));
    assert!(sparsity_ok && nesting_ok);

    // QR vs the normal-equations oracle on random 50 x 8 problems (the
    // oracle itself squares the condition number, so the benchmark
    // dictionaries at kappa ~ 1e7 are outside its own validity)
    let mut worst_rel = 0.0f64;
    for seed_val in [101u64, 102, 103, 104] {
        use rand::RngExt;
        let mut rng = seed::rng_from(seed_val);
        let x = nalgebra::DMatrix::from_fn(50, 8, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let y = nalgebra::DVector::from_fn(50, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        let w = nalgebra::DVector::from_fn(50, |_, _| 0.2 + rng.random::<f64>());
        let problem = RegressionProblem {
            underdetermined: false,
            x,
            y,
            w,
            row_coords: (0..50).map(|r| r as f64).collect(),
            dict_name: "random".into(),
            target: stokid::TargetKind::Drift { i: 0 },
            weight_mode: WeightMode::Plain,
            beta: 1.0,
            angular: false,
        };
        let all: Vec<usize> = (0..8).collect();
        let sol = stokid::least_squares(&problem, &all).expect("ls");
        let oracle = normal_equations(&problem);
        let rel = (0..8).map(|i| (sol.coeffs[i] - oracle[i]).abs()).fold(0.0f64, f64::max)
            / oracle.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
        worst_rel = worst_rel.max(rel);
    }
    lines.push(format!("QR vs normal equations rel {worst_rel:.2e}"));
    assert!(worst_rel <= 1e-8, "normal-equations mismatch {worst_rel}");

    // analytic vs finite-difference basis derivatives over all dictionaries
    let mut fd_ok = true;
    for name in ["theta", "theta_prime", "theta_2d", "omega"] {
        let dict = Dictionary::builtin(name).unwrap();
        for f in dict.functions() {
            for j in 0..20 {
                let x = -5.0 + 10.0 * (j as f64 + 0.5) / 20.0;
                let exact = f.partial(&[x], 0);
                let h = 1e-6;
                let fd = (f.eval(&[x + h]) - f.eval(&[x - h])) / (2.0 * h);
                fd_ok &= (exact - fd).abs() <= 1e-6 * exact.abs() + 1e-7;
            }
        }
    }
    lines.push(format!("derivative finite-difference check {fd_ok}"));
    assert!(fd_ok);

    // seeded bit-determinism of simulate and fit
    let t1 = simulate_overdamped(&Potential::DoubleWell, &dw_config(DW_SEED, 20_000)).unwrap();
    let t2 = simulate_overdamped(&Potential::DoubleWell, &dw_config(DW_SEED, 20_000)).unwrap();
    let sim_det = t1 == t2;
    let cv = CvConfig { k: 5, reps: 50, seed: DW_CV_SEED };
    let refit = fit(&dw.theta_problem, &dw.theta, &cv).expect("refit");
    let fit_det = refit.coefficients == dw.theta_fit.coefficients
        && refit.report.delta == dw.theta_fit.report.delta;
    lines.push(format!("bit determinism: simulate {sim_det}, fit {fit_det}"));
    assert!(sim_det && fit_det);

    // unit-diffusion energy targets are the negated drift targets, bitwise
    let traj = simulate_overdamped(&Potential::DoubleWell, &dw_config(DW_SEED, 50_000)).unwrap();
    let e = energy::energy_increments(&traj, &DiffusionModel::constant(1.0, 1.0), 1.0).unwrap();
    let d = linear_increments(&traj, 0).unwrap();
    let reduction_ok =
        e.values.iter().zip(&d.values).all(|(a, b)| a.to_bits() == (-b).to_bits());
    lines.push(format!("a=1 energy/drift reduction {reduction_ok}"));
    assert!(reduction_ok);

    // Ornstein-Uhlenbeck recovery: drift slope -1 +- 0.05, diffusion level
    // 1 +- 0.05 from the increment estimators
    let cfg = SimConfig {
        dt: 5e-3,
        n_steps: 1_000_000,
        beta: 1.0,
        gamma: 1.0,
        seed: 4242,
        initial_state: vec![0.0],
        burn_in: 5_000,
    };
    let ou = simulate_ito(|x| -x, |_| 1.0, &cfg).expect("ou");
    let drift = linear_increments(&ou, 0).unwrap();
    let db = bin_series(&drift, 40, None).unwrap();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in db.occupied() {
        sxy += db.weights[i] * db.centers[i] * db.means[i];
        sxx += db.weights[i] * db.centers[i] * db.centers[i];
    }
    let slope = sxy / sxx;
    let quad = quadratic_increments(&ou, 0, 0, 1.0).unwrap();
    let qb = bin_series(&quad, 40, None).unwrap();
    let level: f64 = qb.occupied().map(|i| qb.weights[i] * qb.means[i]).sum();
    let ou_ok = (slope + 1.0).abs() <= 0.05 && (level - 1.0).abs() <= 0.05;
    lines.push(format!("OU drift slope {slope:.4}, diffusion level {level:.4}"));
    assert!(ou_ok, "slope={slope} level={level}");

    println!("criterion 9 (property suite): PASS — {}", lines.join("; "));
}

/// Test-only oracle: normal equations (X^T W^2 X) c = X^T W^2 y solved by
/// Gauss-Jordan elimination with partial pivoting.
fn normal_equations(problem: &RegressionProblem) -> Vec<f64> {
    let n = problem.n_cols();
    let rows = problem.n_rows();
    let mut g = vec![vec![0.0f64; n + 1]; n];
    for r in 0..rows {
        let s = problem.weight_mode.row_scale(problem.w[r]);
        let s2 = s * s;
        for a in 0..n {
            for b in 0..n {
                g[a][b] += s2 * problem.x[(r, a)] * problem.x[(r, b)];
            }
            g[a][n] += s2 * problem.x[(r, a)] * problem.y[r];
        }
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| g[a][col].abs().partial_cmp(&g[b][col].abs()).unwrap())
            .unwrap();
        g.swap(col, pivot);
        let p = g[col][col];
        for v in g[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let f = g[row][col];
                for idx in 0..=n {
                    g[row][idx] -= f * g[col][idx];
                }
            }
        }
    }
    (0..n).map(|i| g[i][n]).collect()
}
