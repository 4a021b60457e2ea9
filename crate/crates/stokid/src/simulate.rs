//! Langevin / Ito diffusion simulation.
//!
//! Trajectories are generated with the Euler–Maruyama scheme. For the
//! overdamped dynamics
//!
//! ```text
//! X_{l+1} = X_l - (grad U(X_l) / gamma) dt + sqrt(2 dt / (beta gamma)) eta_l
//! ```
//!
//! and for a general one-dimensional Ito process with drift b and diffusion
//! (covariance) a
//!
//! ```text
//! X_{l+1} = X_l + b(X_l) dt + sqrt(2 dt a(X_l) / beta) eta_l
//! ```
//!
//! with eta_l independent standard normals. Runs are bit-reproducible given
//! the seed; the generator name is recorded in the trajectory so files carry
//! their provenance.

use rand::RngExt;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::basis::LinearModel;
use crate::seed;

/// Wrap a difference or angle into (-pi, pi].
pub fn wrap_angle(d: f64) -> f64 {
    let w = d - std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
    if w <= -std::f64::consts::PI {
        w + std::f64::consts::TAU
    } else {
        w
    }
}

/// Potential energy surfaces the simulator knows how to differentiate.
#[derive(Debug, Clone)]
pub enum Potential {
    /// U(x) = x^4/2 - 4x^3 + 9x^2 - 3x, the bistable benchmark.
    DoubleWell,
    /// U(r, phi) = cos(7 phi) + 10 (r - 1)^2 + 1/r in polar form, simulated
    /// in Cartesian coordinates. Singular only at the origin.
    LemonSlice,
    /// U(x) = sum_k c_k f_k(x) for a learned potential.
    DictionaryModel(LinearModel),
}

impl Potential {
    pub fn dim(&self) -> usize {
        match self {
            Potential::DoubleWell => 1,
            Potential::LemonSlice => 2,
            Potential::DictionaryModel(m) => m
                .dictionary()
                .functions()
                .iter()
                .map(|f| f.factors().len())
                .max()
                .unwrap_or(1),
        }
    }

    /// Potential value.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Potential::DoubleWell => {
                let x = x[0];
                0.5 * x.powi(4) - 4.0 * x.powi(3) + 9.0 * x * x - 3.0 * x
            }
            Potential::LemonSlice => {
                let (px, py) = (x[0], x[1]);
                let r = (px * px + py * py).sqrt();
                let phi = py.atan2(px);
                (7.0 * phi).cos() + 10.0 * (r - 1.0) * (r - 1.0) + 1.0 / r
            }
            Potential::DictionaryModel(m) => m.eval(x),
        }
    }

    /// Gradient of the potential.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Potential::DoubleWell => {
                let x = x[0];
                out[0] = 2.0 * x.powi(3) - 12.0 * x * x + 18.0 * x - 3.0;
            }
            Potential::LemonSlice => {
                let (px, py) = (x[0], x[1]);
                let r2 = px * px + py * py;
                let r = r2.sqrt();
                let phi = py.atan2(px);
                let du_dr = 20.0 * (r - 1.0) - 1.0 / r2;
                let du_dphi = -7.0 * (7.0 * phi).sin();
                // dr/dx = x/r, dphi/dx = -y/r^2 and symmetric for y
                out[0] = du_dr * px / r - du_dphi * py / r2;
                out[1] = du_dr * py / r + du_dphi * px / r2;
            }
            Potential::DictionaryModel(m) => m.gradient(x, out),
        }
    }
}

/// Simulation parameters (reduced units).
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Integration time step s.
    pub dt: f64,
    /// Number of recorded steps; the trajectory holds n_steps + 1 states.
    pub n_steps: usize,
    /// Inverse temperature 1/k_B T.
    pub beta: f64,
    /// Friction coefficient.
    pub gamma: f64,
    pub seed: u64,
    pub initial_state: Vec<f64>,
    /// Steps integrated and discarded before recording starts.
    pub burn_in: usize,
}

impl SimConfig {
    fn validate(&self, dim: usize) -> Result<(), SimError> {
        if !(self.dt > 0.0) || !(self.beta > 0.0) || !(self.gamma > 0.0) {
            return Err(SimError::BadConfig);
        }
        if self.initial_state.len() != dim {
            return Err(SimError::DimensionMismatch {
                state: self.initial_state.len(),
                potential: dim,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("dt, beta and gamma must all be positive")]
    BadConfig,
    #[error("initial state has dimension {state}, potential expects {potential}")]
    DimensionMismatch { state: usize, potential: usize },
    #[error("non-finite state at step {step}: integration blew up")]
    NonFinite { step: usize },
    #[error("diffusion model is negative ({value}) at state {state}")]
    NegativeDiffusion { value: f64, state: f64 },
    #[error("polar projection undefined at the origin (step {step})")]
    ProjectionAtOrigin { step: usize },
    #[error("polar projection requires a 2-dimensional trajectory, got {0}")]
    ProjectionDimension(usize),
}

/// A uniformly time-stepped trajectory with its generation provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub d: usize,
    pub dt: f64,
    pub beta: f64,
    pub gamma: f64,
    pub seed: u64,
    /// Generator tag, e.g. `chacha12` or `chacha12;polar_angle` after
    /// projection onto the polar angle.
    pub generator: String,
    /// Row-major flat state buffer of (n_steps + 1) * d values.
    pub states: Vec<f64>,
}

impl Trajectory {
    /// Number of states (steps + 1).
    pub fn n_states(&self) -> usize {
        self.states.len() / self.d
    }

    /// Number of increments (steps).
    pub fn n_steps(&self) -> usize {
        self.n_states() - 1
    }

    pub fn state(&self, l: usize) -> &[f64] {
        &self.states[l * self.d..(l + 1) * self.d]
    }

    /// Whether the single coordinate is a wrapped angle on (-pi, pi].
    pub fn is_angular(&self) -> bool {
        self.generator.contains("polar_angle")
    }
}

/// Coordinate projections applied to trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Identity,
    /// phi = atan2(y, x) in [-pi, pi]; requires d = 2.
    PolarAngle,
}

/// Integrate the overdamped Langevin dynamics in the given potential.
pub fn simulate_overdamped(pot: &Potential, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    let d = pot.dim();
    cfg.validate(d)?;
    let amp = (2.0 * cfg.dt / (cfg.beta * cfg.gamma)).sqrt();
    let mut rng = seed::rng_from(cfg.seed);
    let mut x = cfg.initial_state.clone();
    let mut grad = vec![0.0; d];

    let mut states = Vec::with_capacity((cfg.n_steps + 1) * d);
    let total = cfg.burn_in + cfg.n_steps;
    let record = |x: &[f64], states: &mut Vec<f64>, step: usize| -> Result<(), SimError> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite { step });
        }
        states.extend_from_slice(x);
        Ok(())
    };

    if cfg.burn_in == 0 {
        record(&x, &mut states, 0)?;
    }
    for step in 0..total {
        pot.gradient(&x, &mut grad);
        for i in 0..d {
            let eta: f64 = rng.sample(StandardNormal);
            x[i] = x[i] + (-(grad[i] / cfg.gamma)) * cfg.dt + amp * eta;
        }
        if step + 1 >= cfg.burn_in {
            record(&x, &mut states, step + 1)?;
        }
    }
    Ok(Trajectory {
        d,
        dt: cfg.dt,
        beta: cfg.beta,
        gamma: cfg.gamma,
        seed: cfg.seed,
        generator: seed::GENERATOR_TAG.to_string(),
        states,
    })
}

/// Integrate a one-dimensional Ito diffusion with the given drift and
/// diffusion (covariance) fields.
pub fn simulate_ito<B, A>(drift: B, diffusion: A, cfg: &SimConfig) -> Result<Trajectory, SimError>
where
    B: Fn(f64) -> f64,
    A: Fn(f64) -> f64,
{
    cfg.validate(1)?;
    let mut rng = seed::rng_from(cfg.seed);
    let mut x = cfg.initial_state[0];

    let mut states = Vec::with_capacity(cfg.n_steps + 1);
    let total = cfg.burn_in + cfg.n_steps;
    if cfg.burn_in == 0 {
        states.push(x);
    }
    for step in 0..total {
        let a = diffusion(x);
        if a < 0.0 {
            return Err(SimError::NegativeDiffusion { value: a, state: x });
        }
        let amp = (2.0 * cfg.dt * a / cfg.beta).sqrt();
        let eta: f64 = rng.sample(StandardNormal);
        x = x + drift(x) * cfg.dt + amp * eta;
        if !x.is_finite() {
            return Err(SimError::NonFinite { step: step + 1 });
        }
        if step + 1 >= cfg.burn_in {
            states.push(x);
        }
    }
    Ok(Trajectory {
        d: 1,
        dt: cfg.dt,
        beta: cfg.beta,
        gamma: cfg.gamma,
        seed: cfg.seed,
        generator: seed::GENERATOR_TAG.to_string(),
        states,
    })
}

/// Simulate a learned Ito model (drift plus diffusion linear combinations).
pub fn simulate_model(
    drift: &LinearModel,
    diffusion: &LinearModel,
    cfg: &SimConfig,
) -> Result<Trajectory, SimError> {
    simulate_ito(|x| drift.eval_1d(x), |x| diffusion.eval_1d(x), cfg)
}

/// Like [`simulate_ito`], but the state lives on the circle: every step is
/// wrapped back into (-pi, pi] and the trajectory is marked angular. This is
/// the right integrator for dynamics learned on a projected angle.
pub fn simulate_ito_on_circle<B, A>(
    drift: B,
    diffusion: A,
    cfg: &SimConfig,
) -> Result<Trajectory, SimError>
where
    B: Fn(f64) -> f64,
    A: Fn(f64) -> f64,
{
    cfg.validate(1)?;
    let mut rng = seed::rng_from(cfg.seed);
    let mut x = wrap_angle(cfg.initial_state[0]);

    let mut states = Vec::with_capacity(cfg.n_steps + 1);
    let total = cfg.burn_in + cfg.n_steps;
    if cfg.burn_in == 0 {
        states.push(x);
    }
    for step in 0..total {
        let a = diffusion(x);
        if a < 0.0 {
            return Err(SimError::NegativeDiffusion { value: a, state: x });
        }
        let amp = (2.0 * cfg.dt * a / cfg.beta).sqrt();
        let eta: f64 = rng.sample(StandardNormal);
        x = wrap_angle(x + drift(x) * cfg.dt + amp * eta);
        if !x.is_finite() {
            return Err(SimError::NonFinite { step: step + 1 });
        }
        if step + 1 >= cfg.burn_in {
            states.push(x);
        }
    }
    Ok(Trajectory {
        d: 1,
        dt: cfg.dt,
        beta: cfg.beta,
        gamma: cfg.gamma,
        seed: cfg.seed,
        generator: format!("{};polar_angle", seed::GENERATOR_TAG),
        states,
    })
}

/// Project a trajectory onto a scalar coordinate. Time step and provenance
/// are preserved; the polar angle marks the result as angular.
pub fn project(traj: &Trajectory, proj: Projection) -> Result<Trajectory, SimError> {
    match proj {
        Projection::Identity => Ok(traj.clone()),
        Projection::PolarAngle => {
            if traj.d != 2 {
                return Err(SimError::ProjectionDimension(traj.d));
            }
            let mut states = Vec::with_capacity(traj.n_states());
            for (l, s) in traj.states.chunks_exact(2).enumerate() {
                if s[0] == 0.0 && s[1] == 0.0 {
                    return Err(SimError::ProjectionAtOrigin { step: l });
                }
                states.push(s[1].atan2(s[0]));
            }
            Ok(Trajectory {
                d: 1,
                dt: traj.dt,
                beta: traj.beta,
                gamma: traj.gamma,
                seed: traj.seed,
                generator: format!("{};polar_angle", traj.generator),
                states,
            })
        }
    }
}
