//! Same data, two dictionaries: how the pruning path depends on the basis.
//!
//! The polynomial-led dictionary collapses onto the four generating
//! functions with a sharp score gap; the Gaussian/sigmoid-led variant stops
//! at a less sparse local minimum with a weaker transition, while still
//! approximating the gradient well.
//!
//! ```bash
//! cargo run --release -p stokid --example dictionary_comparison
//! ```

use stokid::{
    assemble_problem, bin_series, linear_increments, simulate_overdamped, CvConfig, Dictionary,
    IncrementSeries, Potential, SimConfig, WeightMode,
};

fn main() {
    stokid::init_threads_from_env();
    println!("simulating 2 x 10^6 double-well steps ...");
    let series: Vec<IncrementSeries> = (0..2)
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
            let traj = simulate_overdamped(&Potential::DoubleWell, &cfg).expect("simulation");
            linear_increments(&traj, 0).expect("increments")
        })
        .collect();
    let merged = IncrementSeries::concat(series).expect("same provenance");
    let binned = bin_series(&merged, 90, None).expect("binning");
    let cv = CvConfig { k: 5, reps: 50, seed: 11 };

    for name in ["theta", "theta_prime"] {
        let dict = Dictionary::builtin(name).expect("builtin");
        let problem = assemble_problem(&dict, &binned, WeightMode::Sqrt).expect("assembly");
        let fit = stokid::fit(&problem, &dict, &cv).expect("fit");
        println!(
            "\n{name}: selected n = {}, delta = {:.3e}, max ratio = {:.2}",
            fit.n_selected,
            fit.report.score(fit.n_selected),
            fit.report.max_ratio()
        );
        for &i in &fit.active {
            println!("  {:<24} gradient {:+9.4}", dict.functions()[i].name(), -fit.coefficients[i]);
        }
    }
    println!("\nboth models track -3 + 18x - 12x^2 + 2x^3; the sparser one is preferred");
}
