//! Learn the projected dynamics of a 2D lemon-slice diffusion.
//!
//! Simulates the two-dimensional potential cos(7 phi) + 10 (r-1)^2 + 1/r,
//! projects onto the polar angle, and fits drift and diffusion of the
//! effective 1D process. The references are b(phi) = 6.61 sin(7 phi) and
//! a(phi) = 0.94.
//!
//! ```bash
//! cargo run --release -p stokid --example lemon_slice
//! ```

use stokid::{
    assemble_problem, bin_series, linear_increments, project, quadratic_increments,
    simulate_overdamped, CvConfig, Dictionary, Potential, Projection, SimConfig, WeightMode,
};

fn main() {
    stokid::init_threads_from_env();
    println!("simulating 10^6 lemon-slice steps and projecting onto the polar angle ...");
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
    let cv = CvConfig { k: 7, reps: 50, seed: 31 };

    let drift = linear_increments(&phi, 0).expect("increments");
    let drift_binned = bin_series(&drift, 63, None).expect("binning");
    let p = assemble_problem(&dict, &drift_binned, WeightMode::Sqrt).expect("assembly");
    let fit_b = stokid::fit(&p, &dict, &cv).expect("drift fit");
    println!("\ndrift: selected n = {}", fit_b.n_selected);
    for &i in &fit_b.active {
        println!("  {:<12} {:+.4}   (reference 6.61 sin(7 phi))", dict.functions()[i].name(), fit_b.coefficients[i]);
    }

    let quad = quadratic_increments(&phi, 0, 0, 1.0).expect("increments");
    let diff_binned = bin_series(&quad, 63, None).expect("binning");
    let p = assemble_problem(&dict, &diff_binned, WeightMode::Sqrt).expect("assembly");
    let fit_a = stokid::fit(&p, &dict, &cv).expect("diffusion fit");
    println!("diffusion: selected n = {}", fit_a.n_selected);
    for &i in &fit_a.active {
        println!("  {:<12} {:+.4}   (reference 0.94)", dict.functions()[i].name(), fit_a.coefficients[i]);
    }
}
