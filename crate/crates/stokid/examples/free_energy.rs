//! Learn generalized potentials (free energies) from increments.
//!
//! Double well: with unit diffusion the free-energy regression reduces to
//! the overdamped case and recovers the potential gradient
//! U'(x) = -3 + 18x - 12x^2 + 2x^3 from basis derivatives. Lemon slice: the
//! two-stage route (fit the diffusion first, then solve for grad F) yields
//! F(phi) ~ cos(7 phi).
//!
//! ```bash
//! cargo run --release -p stokid --example free_energy
//! ```

use stokid::energy::{
    assemble_energy_problem, energy_increments, energy_problem_from_trajectories, fit_free_energy,
    DiffusionModel,
};
use stokid::{
    assemble_problem, bin_series, linear_increments, project, quadratic_increments,
    simulate_overdamped, CvConfig, Dictionary, IncrementSeries, Potential, Projection, SimConfig,
    WeightMode,
};

fn main() {
    stokid::init_threads_from_env();

    // ---- double well with the overdamped reduction (a = 1/gamma = 1)
    println!("double well: 2 x 10^6 steps, free energy with unit diffusion");
    let trajs: Vec<_> = (0..2)
        .map(|i| {
            let cfg = SimConfig {
                dt: 5e-3,
                n_steps: 1_000_000,
                beta: 1.0,
                gamma: 1.0,
                seed: 7 + i,
                initial_state: vec![1.0],
                burn_in: 10_000,
            };
            simulate_overdamped(&Potential::DoubleWell, &cfg).expect("simulation")
        })
        .collect();
    let unit = DiffusionModel::constant(1.0, 1.0);
    let series: Vec<IncrementSeries> =
        trajs.iter().map(|t| energy_increments(t, &unit, 1.0).expect("increments")).collect();
    let merged = IncrementSeries::concat(series).expect("same provenance");
    let binned = bin_series(&merged, 90, None).expect("binning");
    let theta = Dictionary::builtin("theta").expect("builtin");
    let problem = assemble_energy_problem(&theta, &binned, WeightMode::Sqrt).expect("assembly");
    let cv = CvConfig { k: 5, reps: 50, seed: 23 };
    let (f_dw, fit) = fit_free_energy(&problem, &theta, Some(&cv)).expect("fit");
    let fit = fit.expect("cv fit present");
    println!("selected n = {}; active entries (gradient shown through derivatives):", fit.n_selected);
    for &i in &fit.active {
        println!("  {:<10} v = {:+.4}", theta.functions()[i].name(), fit.coefficients[i]);
    }
    for x in [0.5, 1.5, 2.5, 3.5] {
        println!(
            "  grad F({x}) = {:+8.4}   U'({x}) = {:+8.4}",
            f_dw.gradient(x),
            2.0 * x.powi(3) - 12.0 * x * x + 18.0 * x - 3.0
        );
    }
    let barrier_grid: Vec<f64> = (0..=600).map(|i| -0.5 + 5.0 * i as f64 / 600.0).collect();
    let f_vals = f_dw.evaluate(&barrier_grid);
    let barrier = f_vals
        .iter()
        .zip(&barrier_grid)
        .filter(|(_, &x)| (1.0..3.5).contains(&x))
        .map(|(v, _)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    println!("  fitted barrier height above the left well: {barrier:.3} (reference 6.35)");

    // ---- lemon slice through the fitted diffusion
    println!("\nlemon slice: 10^6 steps, two-stage free energy");
    let cfg = SimConfig {
        dt: 1e-3,
        n_steps: 1_000_000,
        beta: 1.0,
        gamma: 1.0,
        seed: 9,
        initial_state: vec![1.0, 0.0],
        burn_in: 10_000,
    };
    let traj2d = simulate_overdamped(&Potential::LemonSlice, &cfg).expect("simulation");
    let phi = project(&traj2d, Projection::PolarAngle).expect("projection");
    let dict = Dictionary::builtin("theta_2d").expect("builtin");
    let cv7 = CvConfig { k: 7, reps: 50, seed: 31 };

    let quad = quadratic_increments(&phi, 0, 0, 1.0).expect("increments");
    let qb = bin_series(&quad, 63, None).expect("binning");
    let qp = assemble_problem(&dict, &qb, WeightMode::Sqrt).expect("assembly");
    let a_fit = stokid::fit(&qp, &dict, &cv7).expect("diffusion fit");
    println!("fitted diffusion: n = {}, a = {:.4}", a_fit.n_selected, a_fit.coefficients[0]);

    let drift = linear_increments(&phi, 0).expect("increments");
    let db = bin_series(&drift, 63, None).expect("binning");
    let dp = assemble_problem(&dict, &db, WeightMode::Sqrt).expect("assembly");
    let b_fit = stokid::fit(&dp, &dict, &cv7).expect("drift fit");
    println!("fitted drift: n = {}, b = {:.4} sin(7 phi)", b_fit.n_selected, b_fit.coefficients[11]);

    let diffusion = DiffusionModel::new(a_fit.model(), 1.0);
    let (ep, _) = energy_problem_from_trajectories(
        std::slice::from_ref(&phi),
        &dict,
        &diffusion,
        1.0,
        63,
        None,
        WeightMode::Sqrt,
    )
    .expect("energy problem");
    let (f_lemon, lemon_fit) =
        fit_free_energy(&ep, &dict, Some(&CvConfig { k: 7, reps: 50, seed: 29 })).expect("fit");
    let lemon_fit = lemon_fit.expect("cv fit present");
    println!("free energy: selected n = {}", lemon_fit.n_selected);
    for &i in &lemon_fit.active {
        println!("  {:<10} v = {:+.4}", dict.functions()[i].name(), lemon_fit.coefficients[i]);
    }
    let grid: Vec<f64> = (0..=700)
        .map(|i| -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / 700.0)
        .collect();
    let f_vals = f_lemon.evaluate(&grid);
    let amp = f_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / 2.0;
    println!("amplitude of F over [-pi, pi]: {amp:.4} (reference cos(7 phi) has 1)");
}
