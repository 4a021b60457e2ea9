//! Validate learned dynamics through Markov state model analysis.
//!
//! Learns drift and diffusion of the projected lemon-slice angle, simulates
//! the learned SDE back on the circle, and compares implied timescales and
//! stationary distributions of the two trajectories.
//!
//! ```bash
//! cargo run --release -p stokid --example msm_validation
//! ```

use stokid::msm::{compare_stationary, discretize, estimate, implied_timescales, stationary_histogram};
use stokid::simulate::simulate_ito_on_circle;
use stokid::{
    assemble_problem, bin_series, linear_increments, project, quadratic_increments,
    simulate_overdamped, CvConfig, Dictionary, Potential, Projection, SimConfig, WeightMode,
};

fn main() {
    stokid::init_threads_from_env();
    println!("simulating the original 2D dynamics (10^6 steps) ...");
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
    let drift_fit = {
        let s = linear_increments(&phi, 0).expect("increments");
        let b = bin_series(&s, 63, None).expect("binning");
        let p = assemble_problem(&dict, &b, WeightMode::Sqrt).expect("assembly");
        stokid::fit(&p, &dict, &cv).expect("drift fit")
    };
    let diffusion_fit = {
        let s = quadratic_increments(&phi, 0, 0, 1.0).expect("increments");
        let b = bin_series(&s, 63, None).expect("binning");
        let p = assemble_problem(&dict, &b, WeightMode::Sqrt).expect("assembly");
        stokid::fit(&p, &dict, &cv).expect("diffusion fit")
    };
    let b_model = drift_fit.model();
    let a_model = diffusion_fit.model();
    println!(
        "learned model: b = {:.3} sin(7 phi), a = {:.3}",
        drift_fit.coefficients[11], diffusion_fit.coefficients[0]
    );

    println!("simulating the learned dynamics with the same parameters ...");
    let learned_cfg = SimConfig {
        dt: 1e-3,
        n_steps: 1_000_000,
        beta: 1.0,
        gamma: 1.0,
        seed: 33,
        initial_state: vec![std::f64::consts::PI / 7.0],
        burn_in: 10_000,
    };
    let learned =
        simulate_ito_on_circle(|x| b_model.eval_1d(x), |x| a_model.eval_1d(x), &learned_cfg)
            .expect("learned simulation");

    let range = (-std::f64::consts::PI, std::f64::consts::PI);
    let labels_a = discretize(&phi, 63, Some(range)).expect("labels");
    let labels_b = discretize(&learned, 63, Some(range)).expect("labels");

    println!("\nimplied timescales (t2, slowest) over the lag grid:");
    for lag in [1usize, 2, 5, 10, 20, 50, 100] {
        let ma = estimate(&labels_a, 63, lag, phi.dt).expect("msm");
        let mb = estimate(&labels_b, 63, lag, learned.dt).expect("msm");
        let ta = implied_timescales(&ma, 1)[0].unwrap_or(f64::NAN);
        let tb = implied_timescales(&mb, 1)[0].unwrap_or(f64::NAN);
        println!("  lag {lag:>4}: original {ta:7.3}  learned {tb:7.3}");
    }

    let ma = estimate(&labels_a, 63, 10, phi.dt).expect("msm");
    let mb = estimate(&labels_b, 63, 10, learned.dt).expect("msm");
    println!("\nslowest 6 timescales at lag 10:");
    for (i, (ta, tb)) in
        implied_timescales(&ma, 6).iter().zip(implied_timescales(&mb, 6)).enumerate()
    {
        let (ta, tb) = (ta.unwrap_or(f64::NAN), tb.unwrap_or(f64::NAN));
        println!("  t{}: original {ta:7.3}  learned {tb:7.3}  ({:+.1}%)", i + 2, 100.0 * (tb / ta - 1.0));
    }

    let ha = stationary_histogram(&labels_a, 63);
    let hb = stationary_histogram(&labels_b, 63);
    let cmp = compare_stationary(&ha, &hb).expect("comparable");
    println!("\nstationary distributions: max per-bin deviation = {:.4}", cmp.max_abs);
}
