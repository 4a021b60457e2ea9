//! Command-line front end: reproducible simulate / fit / greedy / noise /
//! msm pipelines with manifest emission.
//!
//! Exit codes: 0 success, 2 bad flags (clap), 3 file I/O problems,
//! 4 numerical or degenerate-data errors, 1 anything else.

use std::fmt::Display;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stokid::basis::BasisError;
use stokid::energy::{self, DiffusionModel, EnergyError};
use stokid::increments::{
    assemble_problem, bin_series, linear_increments, quadratic_increments, BinnedProblemJson,
    EstimatorError, IncrementSeries, WeightMode,
};
use stokid::manifest::ManifestBuilder;
use stokid::msm::{self, MsmError};
use stokid::regression::{fit, CvConfig, FitResultJson, RegressionError};
use stokid::search::{self, NoiseConfig, SampleBudget, SearchError};
use stokid::seed;
use stokid::simulate::{
    project, simulate_overdamped, Potential, Projection, SimConfig, SimError,
    Trajectory,
};
use stokid::trajfile::{self, TrajFileError};
use stokid::{Dictionary, LinearModel};

#[derive(Parser)]
#[command(
    name = "stokid",
    version,
    about = "Learn sparse stochastic differential equations from trajectory data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a builtin potential or a learned model and write trajectories
    Simulate(SimulateArgs),
    /// Fit drift, diffusion, or free energy by SSR with CV model selection
    Fit(FitArgs),
    /// Rate sub-dictionaries of a reference pool by plain-regression CV
    Greedy(GreedyArgs),
    /// Noise-robustness study over random dictionaries
    Noise(NoiseArgs),
    /// Markov state model comparison of two trajectories
    Msm(MsmArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Builtin potential: double-well | lemon-slice
    #[arg(long, conflicts_with = "model")]
    potential: Option<String>,
    /// Drift fit JSON for simulating a learned 1D model
    #[arg(long)]
    model: Option<PathBuf>,
    /// Diffusion fit JSON for the learned model (default: constant 1)
    #[arg(long)]
    diffusion_model: Option<PathBuf>,
    /// Steps per trajectory (default 10^6, or 10^7 with --paper-scale)
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 5e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent trajectories (seeds seed, seed+1, ...)
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, default_value_t = 10_000)]
    burn_in: usize,
    /// Initial state, comma separated (defaults per potential)
    #[arg(long)]
    init: Option<String>,
    /// Projection applied before writing: identity | polar-angle
    #[arg(long, default_value = "identity")]
    project: String,
    #[arg(long, default_value = "out/simulate")]
    out_dir: PathBuf,
    /// Also write a CSV copy of each trajectory
    #[arg(long)]
    csv: bool,
    /// Use full-scale defaults (10^7 steps)
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Trajectory file(s); increments are pooled before binning
    #[arg(long, num_args = 1.., required = true)]
    traj: Vec<PathBuf>,
    /// Builtin dictionary name or path to a dictionary file
    #[arg(long, default_value = "theta")]
    dict: String,
    /// Target field: drift | diffusion | free-energy
    #[arg(long, default_value = "drift")]
    target: String,
    /// Component i (drift) or i,j (diffusion)
    #[arg(long, default_value = "0")]
    component: String,
    #[arg(long, default_value_t = 90)]
    bins: usize,
    /// Bin range lo:hi (default: data extent, or -pi:pi for angular data)
    #[arg(long)]
    range: Option<String>,
    /// Force angular (wrapped) treatment regardless of file provenance
    #[arg(long)]
    angular: bool,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weighting of binned rows: sqrt | plain
    #[arg(long, default_value = "sqrt")]
    weights: String,
    /// Diffusion fit JSON (free-energy target)
    #[arg(long)]
    diffusion_fit: Option<PathBuf>,
    /// Constant diffusion value (free-energy target alternative)
    #[arg(long)]
    diffusion_const: Option<f64>,
    #[arg(long, default_value = "out/fit")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GreedyArgs {
    #[arg(long, num_args = 1.., required = true)]
    traj: Vec<PathBuf>,
    /// Reference pool: builtin name or dictionary file
    #[arg(long, default_value = "omega")]
    omega: String,
    /// Sub-dictionary sizes lo:hi
    #[arg(long, default_value = "2:20")]
    sizes: String,
    /// Per-size subset budget: auto | <count>
    #[arg(long, default_value = "auto")]
    samples: String,
    /// Cap for the auto budget outside the exhaustive sizes
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, default_value_t = 90)]
    bins: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sqrt")]
    weights: String,
    #[arg(long, default_value = "out/greedy")]
    out_dir: PathBuf,
    /// Full-scale subset budget (10^5)
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Args)]
struct NoiseArgs {
    /// Double-well trajectory file(s) providing the reference binning
    #[arg(long, num_args = 1.., required = true)]
    traj: Vec<PathBuf>,
    /// Noise scaling factors (0 = exact targets)
    #[arg(long, num_args = 1.., required = true)]
    f: Vec<f64>,
    /// Number of random dictionaries (default 20, 100 with --paper-scale)
    #[arg(long)]
    dicts: Option<usize>,
    #[arg(long, default_value_t = 50)]
    dict_size: usize,
    /// Pool the dictionaries are drawn from
    #[arg(long, default_value = "omega")]
    omega: String,
    #[arg(long, default_value_t = 90)]
    bins: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sqrt")]
    weights: String,
    #[arg(long, default_value = "out/noise")]
    out_dir: PathBuf,
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Args)]
struct MsmArgs {
    #[arg(long)]
    traj_a: PathBuf,
    #[arg(long)]
    traj_b: PathBuf,
    #[arg(long, default_value_t = 63)]
    states: usize,
    /// Lag grid in steps, comma separated
    #[arg(long, default_value = "1,2,5,10,20,50,100", value_delimiter = ',')]
    lags: Vec<usize>,
    /// Discretization range lo:hi (default: -pi:pi for angular data)
    #[arg(long)]
    range: Option<String>,
    /// Implied timescales reported per lag
    #[arg(long, default_value_t = 6)]
    n_timescales: usize,
    #[arg(long, default_value = "out/msm")]
    out_dir: PathBuf,
}

#[derive(Debug)]
enum AppError {
    Io(std::io::Error, String),
    Usage(String),
    Numeric(String),
}

impl Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Io(e, what) => write!(f, "{what}: {e}"),
            AppError::Usage(m) | AppError::Numeric(m) => write!(f, "{m}"),
        }
    }
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Io(..) => 3,
            AppError::Usage(_) => 2,
            AppError::Numeric(_) => 4,
        }
    }

    fn io(e: std::io::Error, what: impl Into<String>) -> Self {
        AppError::Io(e, what.into())
    }
}

macro_rules! numeric_from {
    ($($ty:ty),* $(,)?) => {
        $(impl From<$ty> for AppError {
            fn from(e: $ty) -> Self {
                AppError::Numeric(e.to_string())
            }
        })*
    };
}
numeric_from!(SimError, EstimatorError, RegressionError, SearchError, EnergyError, MsmError, BasisError);

impl From<TrajFileError> for AppError {
    fn from(e: TrajFileError) -> Self {
        match e {
            TrajFileError::Io(io) => AppError::Io(io, "trajectory file".into()),
            other => AppError::Numeric(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    stokid::init_threads_from_env();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Greedy(a) => cmd_greedy(a),
        Command::Noise(a) => cmd_noise(a),
        Command::Msm(a) => cmd_msm(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn command_line() -> Vec<String> {
    std::env::args().collect()
}

fn ensure_dir(dir: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(e, format!("creating {}", dir.display())))
}

fn parse_range(s: &str) -> Result<(f64, f64), AppError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(AppError::Usage(format!("range `{s}` must look like lo:hi")));
    }
    let lo: f64 =
        parts[0].parse().map_err(|_| AppError::Usage(format!("bad range bound {}", parts[0])))?;
    let hi: f64 =
        parts[1].parse().map_err(|_| AppError::Usage(format!("bad range bound {}", parts[1])))?;
    Ok((lo, hi))
}

fn parse_weights(s: &str) -> Result<WeightMode, AppError> {
    match s {
        "sqrt" => Ok(WeightMode::Sqrt),
        "plain" => Ok(WeightMode::Plain),
        other => Err(AppError::Usage(format!("unknown weight mode `{other}` (sqrt | plain)"))),
    }
}

fn load_dictionary(spec: &str) -> Result<Dictionary, AppError> {
    let canonical = spec.replace('-', "_");
    match canonical.as_str() {
        "theta" | "theta_prime" | "theta_2d" | "omega" => {
            Ok(Dictionary::builtin(&canonical).expect("known builtin"))
        }
        "theta2d" => Ok(Dictionary::builtin("theta_2d").expect("known builtin")),
        _ => {
            let path = Path::new(spec);
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::io(e, format!("reading dictionary {spec}")))?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
            Ok(Dictionary::parse(name.unwrap_or_else(|| "custom".into()), &text)?)
        }
    }
}

fn load_trajectories(
    paths: &[PathBuf],
    manifest: &mut ManifestBuilder,
) -> Result<Vec<Trajectory>, AppError> {
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        manifest
            .add_input(p)
            .map_err(|e| AppError::io(e, format!("digesting {}", p.display())))?;
        out.push(trajfile::read_trajectory(p)?);
    }
    Ok(out)
}

fn load_fit_json(path: &Path) -> Result<FitResultJson, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::io(e, format!("reading fit {}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| AppError::Numeric(format!("parsing fit {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), AppError> {
    let mut f = BufWriter::new(
        File::create(path).map_err(|e| AppError::io(e, format!("creating {}", path.display())))?,
    );
    serde_json::to_writer_pretty(&mut f, value)
        .map_err(|e| AppError::io(e.into(), format!("writing {}", path.display())))?;
    use std::io::Write;
    f.write_all(b"\n").map_err(|e| AppError::io(e, format!("writing {}", path.display())))?;
    Ok(())
}

fn write_csv_with(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), AppError> {
    let mut f = BufWriter::new(
        File::create(path).map_err(|e| AppError::io(e, format!("creating {}", path.display())))?,
    );
    write(&mut f).map_err(|e| AppError::io(e, format!("writing {}", path.display())))?;
    use std::io::Write;
    f.flush().map_err(|e| AppError::io(e, format!("writing {}", path.display())))?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), AppError> {
    ensure_dir(&args.out_dir)?;
    let steps = args.steps.unwrap_or(if args.paper_scale { 10_000_000 } else { 1_000_000 });
    let projection = match args.project.as_str() {
        "identity" => Projection::Identity,
        "polar-angle" => Projection::PolarAngle,
        other => return Err(AppError::Usage(format!("unknown projection `{other}`"))),
    };

    enum Source {
        Builtin(Potential),
        Learned { drift: LinearModel, diffusion: Option<LinearModel>, angular: bool },
    }
    let source = match (&args.potential, &args.model) {
        (Some(name), None) => {
            let pot = match name.as_str() {
                "double-well" => Potential::DoubleWell,
                "lemon-slice" => Potential::LemonSlice,
                other => return Err(AppError::Usage(format!("unknown potential `{other}`"))),
            };
            Source::Builtin(pot)
        }
        (None, Some(path)) => {
            let drift_json = load_fit_json(path)?;
            let angular = drift_json.angular;
            let drift = drift_json.model()?;
            let diffusion = match &args.diffusion_model {
                Some(p) => Some(load_fit_json(p)?.model()?),
                None => None,
            };
            Source::Learned { drift, diffusion, angular }
        }
        _ => {
            return Err(AppError::Usage("exactly one of --potential / --model is required".into()))
        }
    };

    let initial = match &args.init {
        Some(text) => {
            let parsed: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse()).collect();
            parsed.map_err(|_| AppError::Usage(format!("bad --init `{text}`")))?
        }
        None => match &source {
            Source::Builtin(Potential::DoubleWell) => vec![1.0],
            Source::Builtin(Potential::LemonSlice) => vec![1.0, 0.0],
            _ => vec![0.0],
        },
    };

    let mut manifest = ManifestBuilder::new(
        command_line(),
        serde_json::json!({
            "command": "simulate",
            "steps": steps, "dt": args.dt, "beta": args.beta, "gamma": args.gamma,
            "reps": args.reps, "burn_in": args.burn_in, "initial": initial,
            "project": args.project, "paper_scale": args.paper_scale,
        }),
        args.seed,
    );
    if let Some(p) = &args.model {
        manifest.add_input(p).map_err(|e| AppError::io(e, "digesting model"))?;
    }
    if let Some(p) = &args.diffusion_model {
        manifest.add_input(p).map_err(|e| AppError::io(e, "digesting diffusion model"))?;
    }

    for rep in 0..args.reps {
        let cfg = SimConfig {
            dt: args.dt,
            n_steps: steps,
            beta: args.beta,
            gamma: args.gamma,
            seed: args.seed + rep,
            initial_state: initial.clone(),
            burn_in: args.burn_in,
        };
        let traj = match &source {
            Source::Builtin(pot) => simulate_overdamped(pot, &cfg)?,
            Source::Learned { drift, diffusion, angular } => {
                let b = |x: f64| drift.eval_1d(x);
                let a = |x: f64| diffusion.as_ref().map(|m| m.eval_1d(x)).unwrap_or(1.0);
                if *angular {
                    stokid::simulate::simulate_ito_on_circle(b, a, &cfg)?
                } else {
                    stokid::simulate_ito(b, a, &cfg)?
                }
            }
        };
        let traj = project(&traj, projection)?;
        let path = args.out_dir.join(format!("traj_{rep:03}.stkj"));
        trajfile::write_trajectory(&path, &traj)?;
        manifest.add_output(&path).map_err(|e| AppError::io(e, "digesting output"))?;
        if args.csv {
            let csv_path = args.out_dir.join(format!("traj_{rep:03}.csv"));
            trajfile::write_trajectory_csv(&csv_path, &traj)?;
            manifest.add_output(&csv_path).map_err(|e| AppError::io(e, "digesting output"))?;
        }
        println!(
            "wrote {} ({} states, d = {}, seed {})",
            path.display(),
            traj.n_states(),
            traj.d,
            cfg.seed
        );
    }
    manifest.write(&args.out_dir).map_err(|e| AppError::io(e, "writing manifest"))?;
    Ok(())
}

fn parse_component(text: &str) -> Result<(usize, usize), AppError> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse_one = |t: &str| {
        t.trim().parse::<usize>().map_err(|_| AppError::Usage(format!("bad component `{text}`")))
    };
    match parts.as_slice() {
        [i] => Ok((parse_one(i)?, parse_one(i)?)),
        [i, j] => Ok((parse_one(i)?, parse_one(j)?)),
        _ => Err(AppError::Usage(format!("bad component `{text}`"))),
    }
}

fn cmd_fit(args: FitArgs) -> Result<(), AppError> {
    ensure_dir(&args.out_dir)?;
    let weight_mode = parse_weights(&args.weights)?;
    let range = args.range.as_deref().map(parse_range).transpose()?;
    let dict = load_dictionary(&args.dict)?;
    let (comp_i, comp_j) = parse_component(&args.component)?;

    let mut manifest = ManifestBuilder::new(
        command_line(),
        serde_json::json!({
            "command": "fit", "dict": args.dict, "target": args.target,
            "bins": args.bins, "folds": args.folds, "reps": args.reps,
            "weights": args.weights, "range": args.range, "angular": args.angular,
        }),
        args.seed,
    );
    let mut trajs = load_trajectories(&args.traj, &mut manifest)?;
    if args.angular {
        for t in &mut trajs {
            if !t.is_angular() {
                t.generator.push_str(";polar_angle");
            }
        }
    }
    let beta = trajs[0].beta;

    let (problem, binned) = match args.target.as_str() {
        "drift" => {
            let series: Result<Vec<IncrementSeries>, _> =
                trajs.iter().map(|t| linear_increments(t, comp_i)).collect();
            let merged = IncrementSeries::concat(series?)?;
            let binned = bin_series(&merged, args.bins, range)?;
            (assemble_problem(&dict, &binned, weight_mode)?, binned)
        }
        "diffusion" => {
            let series: Result<Vec<IncrementSeries>, _> =
                trajs.iter().map(|t| quadratic_increments(t, comp_i, comp_j, t.beta)).collect();
            let merged = IncrementSeries::concat(series?)?;
            let binned = bin_series(&merged, args.bins, range)?;
            (assemble_problem(&dict, &binned, weight_mode)?, binned)
        }
        "free-energy" => {
            let diffusion = match (&args.diffusion_fit, args.diffusion_const) {
                (Some(path), None) => {
                    manifest
                        .add_input(path)
                        .map_err(|e| AppError::io(e, "digesting diffusion fit"))?;
                    let json = load_fit_json(path)?;
                    DiffusionModel::new(json.model()?, json.beta)
                }
                (None, Some(value)) => DiffusionModel::constant(value, beta),
                _ => {
                    return Err(AppError::Usage(
                        "free-energy target needs exactly one of --diffusion-fit / --diffusion-const"
                            .into(),
                    ))
                }
            };
            energy::energy_problem_from_trajectories(
                &trajs,
                &dict,
                &diffusion,
                beta,
                args.bins,
                range,
                weight_mode,
            )?
        }
        other => return Err(AppError::Usage(format!("unknown target `{other}`"))),
    };

    let cv = CvConfig { k: args.folds, reps: args.reps, seed: args.seed };
    let result = fit(&problem, &dict, &cv)?;

    println!(
        "{}: selected n = {} (k = {}, reps = {}), delta = {:.4e}",
        problem.target.label(),
        result.n_selected,
        cv.k,
        cv.reps,
        result.report.score(result.n_selected)
    );
    for &i in &result.active {
        println!("  {:<24} {:+.6}", dict.functions()[i].name(), result.coefficients[i]);
    }

    let fit_path = args.out_dir.join("fit.json");
    write_json(&fit_path, &result.to_json()?)?;
    let binned_path = args.out_dir.join("binned.json");
    write_json(&binned_path, &BinnedProblemJson::from_parts(&binned, dict.name()))?;

    let delta_path = args.out_dir.join("delta_curve.csv");
    write_csv_with(&delta_path, |w| result.write_delta_csv(w))?;
    let progress_path = args.out_dir.join("progress_matrix.csv");
    write_csv_with(&progress_path, |w| result.write_progress_csv(w))?;
    let markers_path = args.out_dir.join("fit_vs_binned.csv");
    write_csv_with(&markers_path, |w| result.write_fit_vs_binned_csv(&problem, w))?;
    let curve_path = args.out_dir.join("fit_curve.csv");
    write_csv_with(&curve_path, |w| result.write_curve_csv(binned.lo, binned.hi, 512, w))?;
    let binned_csv_path = args.out_dir.join("binned.csv");
    write_csv_with(&binned_csv_path, |w| binned.write_csv(w))?;

    for p in [
        &fit_path,
        &binned_path,
        &delta_path,
        &progress_path,
        &markers_path,
        &curve_path,
        &binned_csv_path,
    ] {
        manifest.add_output(p).map_err(|e| AppError::io(e, "digesting output"))?;
    }
    manifest.write(&args.out_dir).map_err(|e| AppError::io(e, "writing manifest"))?;
    Ok(())
}

fn cmd_greedy(args: GreedyArgs) -> Result<(), AppError> {
    ensure_dir(&args.out_dir)?;
    let weight_mode = parse_weights(&args.weights)?;
    let pool = load_dictionary(&args.omega)?;
    let (lo, hi) = {
        let parts: Vec<&str> = args.sizes.split(':').collect();
        if parts.len() != 2 {
            return Err(AppError::Usage(format!("sizes `{}` must look like lo:hi", args.sizes)));
        }
        let lo: usize = parts[0].parse().map_err(|_| AppError::Usage("bad sizes".to_string()))?;
        let hi: usize = parts[1].parse().map_err(|_| AppError::Usage("bad sizes".to_string()))?;
        (lo, hi)
    };
    let cap = args.cap.unwrap_or(if args.paper_scale { 100_000 } else { 2_000 });
    let budget = match args.samples.as_str() {
        "auto" => SampleBudget::Auto { cap },
        text => SampleBudget::Fixed(
            text.parse().map_err(|_| AppError::Usage(format!("bad --samples `{text}`")))?,
        ),
    };

    let mut manifest = ManifestBuilder::new(
        command_line(),
        serde_json::json!({
            "command": "greedy", "omega": args.omega, "sizes": args.sizes,
            "samples": args.samples, "cap": cap, "bins": args.bins,
            "folds": args.folds, "reps": args.reps, "weights": args.weights,
        }),
        args.seed,
    );
    let trajs = load_trajectories(&args.traj, &mut manifest)?;
    let series: Result<Vec<IncrementSeries>, _> =
        trajs.iter().map(|t| linear_increments(t, 0)).collect();
    let merged = IncrementSeries::concat(series?)?;
    let binned = bin_series(&merged, args.bins, None)?;

    let cv = CvConfig { k: args.folds, reps: args.reps, seed: seed::derive(args.seed, "greedy-cv") };
    let result =
        search::greedy_search(&pool, &binned, weight_mode, lo..=hi, budget, &cv, args.seed)?;

    println!("evaluated {} sub-dictionaries over sizes {lo}..={hi}", result.records.len());
    for p in &result.min_curve {
        println!("  n = {:>2}: min delta = {:.4e} subset {:?}", p.n, p.delta, p.subset);
    }

    let records_path = args.out_dir.join("greedy_records.csv");
    write_csv_with(&records_path, |w| result.write_records_csv(w))?;
    let min_path = args.out_dir.join("greedy_min_curve.csv");
    write_csv_with(&min_path, |w| result.write_min_curve_csv(w))?;
    let json_path = args.out_dir.join("greedy.json");
    write_json(&json_path, &result)?;
    for p in [&records_path, &min_path, &json_path] {
        manifest.add_output(p).map_err(|e| AppError::io(e, "digesting output"))?;
    }
    manifest.write(&args.out_dir).map_err(|e| AppError::io(e, "writing manifest"))?;
    Ok(())
}

fn cmd_noise(args: NoiseArgs) -> Result<(), AppError> {
    ensure_dir(&args.out_dir)?;
    let weight_mode = parse_weights(&args.weights)?;
    let pool = load_dictionary(&args.omega)?;
    let n_dicts = args.dicts.unwrap_or(if args.paper_scale { 100 } else { 20 });

    let mut manifest = ManifestBuilder::new(
        command_line(),
        serde_json::json!({
            "command": "noise", "f": args.f, "dicts": n_dicts, "dict_size": args.dict_size,
            "omega": args.omega, "bins": args.bins, "folds": args.folds, "reps": args.reps,
            "weights": args.weights,
        }),
        args.seed,
    );
    let trajs = load_trajectories(&args.traj, &mut manifest)?;
    let series: Result<Vec<IncrementSeries>, _> =
        trajs.iter().map(|t| linear_increments(t, 0)).collect();
    let merged = IncrementSeries::concat(series?)?;
    let binned = bin_series(&merged, args.bins, None)?;

    let cfg = NoiseConfig {
        f_values: args.f.clone(),
        n_dicts,
        dict_size: args.dict_size,
        cv: CvConfig {
            k: args.folds,
            reps: args.reps,
            seed: seed::derive(args.seed, "noise-cv-root"),
        },
        seed: args.seed,
        weight_mode,
    };
    let report = search::noise_experiment(
        &pool,
        &binned,
        |x| 2.0 * x.powi(3) - 12.0 * x * x + 18.0 * x - 3.0,
        &cfg,
    )?;

    println!("median per-bin relative error: {:.3e}", report.median_eps);
    for (f, pct) in report.f_values.iter().zip(&report.success_pct) {
        println!("  f = {f:>8}: {pct:5.1}% of {} dictionaries recover the quartet", report.n_dicts);
    }

    let json_path = args.out_dir.join("noise_report.json");
    write_json(&json_path, &report)?;
    let table_path = args.out_dir.join("noise_table.csv");
    write_csv_with(&table_path, |w| report.write_table_csv(w))?;
    for p in [&json_path, &table_path] {
        manifest.add_output(p).map_err(|e| AppError::io(e, "digesting output"))?;
    }
    manifest.write(&args.out_dir).map_err(|e| AppError::io(e, "writing manifest"))?;
    Ok(())
}

fn cmd_msm(args: MsmArgs) -> Result<(), AppError> {
    ensure_dir(&args.out_dir)?;
    let range = args.range.as_deref().map(parse_range).transpose()?;
    let mut manifest = ManifestBuilder::new(
        command_line(),
        serde_json::json!({
            "command": "msm", "states": args.states, "lags": args.lags,
            "range": args.range, "n_timescales": args.n_timescales,
        }),
        0,
    );
    let trajs = load_trajectories(&[args.traj_a.clone(), args.traj_b.clone()], &mut manifest)?;
    let (a, b) = (&trajs[0], &trajs[1]);

    // shared discretization range so the histograms are comparable
    let shared_range = match range {
        Some(r) => r,
        None if a.is_angular() && b.is_angular() => (-std::f64::consts::PI, std::f64::consts::PI),
        None => {
            let all = a.states.iter().chain(&b.states);
            let lo = all.clone().cloned().fold(f64::INFINITY, f64::min);
            let hi = all.cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    let labels_a = msm::discretize(a, args.states, Some(shared_range))?;
    let labels_b = msm::discretize(b, args.states, Some(shared_range))?;

    let mut rows_a = Vec::new();
    let mut rows_b = Vec::new();
    for &lag in &args.lags {
        let model_a = msm::estimate(&labels_a, args.states, lag, a.dt)?;
        let model_b = msm::estimate(&labels_b, args.states, lag, b.dt)?;
        rows_a.push((lag, msm::implied_timescales(&model_a, args.n_timescales)));
        rows_b.push((lag, msm::implied_timescales(&model_b, args.n_timescales)));
    }

    let hist_a = msm::stationary_histogram(&labels_a, args.states);
    let hist_b = msm::stationary_histogram(&labels_b, args.states);
    let cmp = msm::compare_stationary(&hist_a, &hist_b)?;
    println!("stationary histograms: max per-bin deviation = {:.4}", cmp.max_abs);
    for ((lag, ta), (_, tb)) in rows_a.iter().zip(&rows_b) {
        let show = |v: &Option<f64>| v.map(|t| format!("{t:.3}")).unwrap_or_else(|| "-".into());
        println!("  lag {lag:>4}: t2(a) = {}, t2(b) = {}", show(&ta[0]), show(&tb[0]));
    }

    let ts_a_path = args.out_dir.join("timescales_a.csv");
    write_csv_with(&ts_a_path, |w| msm::write_timescales_csv(&rows_a, w))?;
    let ts_b_path = args.out_dir.join("timescales_b.csv");
    write_csv_with(&ts_b_path, |w| msm::write_timescales_csv(&rows_b, w))?;
    let centers: Vec<f64> = (0..args.states)
        .map(|i| {
            shared_range.0
                + (i as f64 + 0.5) * (shared_range.1 - shared_range.0) / args.states as f64
        })
        .collect();
    let st_path = args.out_dir.join("stationary.csv");
    write_csv_with(&st_path, |w| msm::write_stationary_csv(&centers, &hist_a, &hist_b, w))?;
    for p in [&ts_a_path, &ts_b_path, &st_path] {
        manifest.add_output(p).map_err(|e| AppError::io(e, "digesting output"))?;
    }
    manifest.write(&args.out_dir).map_err(|e| AppError::io(e, "writing manifest"))?;
    Ok(())
}
