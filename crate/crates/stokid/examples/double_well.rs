//! Recover the drift of an overdamped double-well diffusion from data.
//!
//! Simulates five independent trajectories, bins the drift increments into
//! 90 bins, and runs the stepwise sparse regressor with 5-fold
//! cross-validation over the 20-entry polynomial/oscillatory dictionary.
//! The selected model keeps exactly [1, x, x^2, x^3].
//!
//! ```bash
//! cargo run --release -p stokid --example double_well
//! ```

use stokid::{
    assemble_problem, bin_series, linear_increments, simulate_overdamped, CvConfig, Dictionary,
    IncrementSeries, Potential, SimConfig, WeightMode,
};

fn main() {
    stokid::init_threads_from_env();
    let master_seed = 7u64;
    let steps_per_traj = 1_000_000;
    let n_traj = 5;

    println!("simulating {n_traj} x {steps_per_traj} overdamped double-well steps ...");
    let series: Vec<IncrementSeries> = (0..n_traj)
        .map(|i| {
            let cfg = SimConfig {
                dt: 5e-3,
                n_steps: steps_per_traj,
                beta: 1.0,
                gamma: 1.0,
                seed: master_seed + i,
                initial_state: vec![1.0],
                burn_in: 10_000,
            };
            let traj = simulate_overdamped(&Potential::DoubleWell, &cfg).expect("simulation");
            linear_increments(&traj, 0).expect("increments")
        })
        .collect();
    let merged = IncrementSeries::concat(series).expect("same provenance");

    let binned = bin_series(&merged, 90, None).expect("binning");
    println!("binned {} samples into {} occupied bins", merged.values.len(), binned.n_occupied());

    let dict = Dictionary::builtin("theta").expect("builtin");
    let problem = assemble_problem(&dict, &binned, WeightMode::Sqrt).expect("assembly");
    let cv = CvConfig { k: 5, reps: 50, seed: 11 };
    let fit = stokid::fit(&problem, &dict, &cv).expect("fit");

    println!("\ncross-validation scores:");
    for n in 1..=dict.len() {
        let marker = if n == fit.n_selected { " <- selected" } else { "" };
        println!("  n = {n:>2}: delta = {:10.3e}{marker}", fit.report.score(n));
    }
    println!("\nselected n = {}", fit.n_selected);
    println!("max ratio delta[n-1]/delta[n] = {:.3e}", fit.report.max_ratio());
    println!("active set (the gradient is the negated drift):");
    for &i in &fit.active {
        let name = dict.functions()[i].name();
        let c = fit.coefficients[i];
        println!("  {name:<12} drift {c:>9.4}   gradient {:>9.4}", -c);
    }
    println!("\nreference gradient: -3 + 18x - 12x^2 + 2x^3");
}
