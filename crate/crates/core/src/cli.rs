//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O or input format, 3 a run did not
//! converge within `--max-steps`, 4 a fit failed.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytics::{cross_point, stabilization_ratio};
use crate::engine::{self, SimulationConfig, DEFAULT_MAX_STEPS, DEFAULT_SIZE};
use crate::grid::Boundary;
use crate::io::{self, CurveReport, FitReport, ManifestCommand, RunManifest};
use crate::model::{fit_model, paper_model, AnalyticModel, LogisticParams};
use crate::rules::NewsRuleParams;

pub const OUT_DIR_ENV: &str = "NEWSDIFF_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "newsdiff",
    version,
    about = "News-diffusion cellular automaton and logistic model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write its per-step series.
    Simulate(SimulateArgs),
    /// Run seeded simulations and write averaged series and statistics.
    Ensemble(EnsembleArgs),
    /// Evaluate the logistic model over a range of steps.
    EvalModel(EvalModelArgs),
    /// Fit the logistic model to a series CSV.
    Fit(FitArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = DEFAULT_SIZE)]
    pub width: usize,
    #[arg(long, default_value_t = DEFAULT_SIZE)]
    pub height: usize,
    /// Row of the initial Black cell (default: center).
    #[arg(long, requires = "seed_col")]
    pub seed_row: Option<usize>,
    /// Column of the initial Black cell (default: center).
    #[arg(long, requires = "seed_row")]
    pub seed_col: Option<usize>,
    /// `bounded` or `toroidal`.
    #[arg(long, default_value = "bounded")]
    pub boundary: Boundary,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    /// Adoption threshold in `p * m > threshold`.
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
    /// Multiplier applied to p when few Black neighbors are present.
    #[arg(long, default_value_t = 1.5)]
    pub boost_factor: f64,
    /// The boost applies when the Black-neighbor count is below this.
    #[arg(long, default_value_t = 3)]
    pub boost_below: u8,
}

impl SimArgs {
    fn config(&self) -> SimulationConfig<NewsRuleParams> {
        let mut config = SimulationConfig {
            width: self.width,
            height: self.height,
            seed_position: self.seed_row.zip(self.seed_col),
            boundary: self.boundary,
            rng_seed: self.seed,
            max_steps: self.max_steps,
            rule: NewsRuleParams {
                adoption_threshold: self.threshold,
                boost_factor: self.boost_factor,
                boost_below: self.boost_below,
            },
            snapshot_every: None,
        };
        config.seed_position = Some(config.resolved_seed_position());
        config
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Write an ASCII grid snapshot every N steps.
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Also write snapshots as plain graymaps.
    #[arg(long)]
    pub pgm: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Worker threads (default: all cores). Does not affect results.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EvalModelArgs {
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub t_min: i64,
    #[arg(long, default_value_t = 120, allow_hyphen_values = true)]
    pub t_max: i64,
    /// Grey curve as `C,tau,gamma` (default: 0.75,30,0.15).
    #[arg(long, value_parser = parse_params)]
    pub grey: Option<LogisticParams>,
    /// White curve as `C,tau,gamma` (default: 0.75,20,0.25).
    #[arg(long, value_parser = parse_params)]
    pub white: Option<LogisticParams>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Series CSV from `simulate`, `ensemble` or `eval-model`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Worker threads for ensemble manifests.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_params(s: &str) -> Result<LogisticParams, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected `C,tau,gamma`, got `{s}`"));
    }
    let mut v = [0.0; 3];
    for (slot, raw) in v.iter_mut().zip(&parts) {
        *slot = raw
            .parse()
            .map_err(|_| format!("`{raw}` is not a number"))?;
    }
    LogisticParams::new(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    NotConverged(String),
    Fit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Fit(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::NotConverged(m) | CliError::Fit(m) => {
                m
            }
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => {
            let config = SimulationConfig {
                snapshot_every: a.snapshot_every,
                ..a.sim.config()
            };
            simulate(&config, a.pgm, &a.out.out_dir)
        }
        Command::Ensemble(a) => ensemble(&a.sim.config(), a.runs, a.threads, &a.out.out_dir),
        Command::EvalModel(a) => {
            let defaults = paper_model();
            let model = AnalyticModel {
                grey: a.grey.unwrap_or(defaults.grey),
                white: a.white.unwrap_or(defaults.white),
            };
            eval_model(&model, a.t_min, a.t_max, &a.out.out_dir)
        }
        Command::Fit(a) => fit(&a.input, &a.out.out_dir),
        Command::Replay(a) => {
            let text = fs::read_to_string(&a.manifest)
                .map_err(|e| CliError::Io(format!("{}: {e}", a.manifest.display())))?;
            let manifest = RunManifest::from_json(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", a.manifest.display())))?;
            match manifest.command {
                ManifestCommand::Simulate { config, pgm } => simulate(&config, pgm, &a.out.out_dir),
                ManifestCommand::Ensemble { config, runs } => {
                    ensemble(&config, runs, a.threads, &a.out.out_dir)
                }
                ManifestCommand::EvalModel {
                    model,
                    t_min,
                    t_max,
                } => eval_model(&model, t_min, t_max, &a.out.out_dir),
                ManifestCommand::Fit { input } => fit(Path::new(&input), &a.out.out_dir),
            }
        }
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn simulate(
    config: &SimulationConfig<NewsRuleParams>,
    pgm: bool,
    out_dir: &Path,
) -> Result<(), CliError> {
    let traj = engine::run(config).map_err(|e| CliError::Usage(e.to_string()))?;

    write(
        &out_dir.join("series.csv"),
        csv_bytes(|b| io::write_series_csv(b, &traj.counts, traj.field_size)),
    )?;
    for snap in &traj.snapshots {
        let stem = format!("step_{:06}", snap.step);
        write(
            &out_dir.join("snapshots").join(format!("{stem}.txt")),
            snap.grid.to_ascii(),
        )?;
        if pgm {
            write(
                &out_dir.join("snapshots").join(format!("{stem}.pgm")),
                snap.grid.to_pgm(),
            )?;
        }
    }
    let manifest = RunManifest::new(ManifestCommand::Simulate {
        config: config.clone(),
        pgm,
    });
    write(&out_dir.join("manifest.json"), manifest.to_json())?;

    let fractions = traj.fractions();
    let ratio = stabilization_ratio(&fractions).expect("trajectory is non-empty");
    let cross = cross_point(&fractions).expect("trajectory is non-empty");
    match traj.converged_at {
        Some(t) => println!("converged_at: {t}"),
        None => println!("converged_at: none"),
    }
    match traj.black_extinct_at {
        Some(t) => println!("black_extinct_at: {t}"),
        None => println!("black_extinct_at: none"),
    }
    println!(
        "final_grey_white_black: {} : {} : {}",
        io::fmt_sig(ratio.grey, 9),
        io::fmt_sig(ratio.white, 9),
        io::fmt_sig(ratio.black, 9)
    );
    println!(
        "cross_point: step={} level={} spread={}",
        cross.step,
        io::fmt_sig(cross.level, 9),
        io::fmt_sig(cross.spread, 9)
    );

    if traj.is_converged() {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "no fixed point within {} steps",
            config.max_steps
        )))
    }
}

pub fn ensemble(
    config: &SimulationConfig<NewsRuleParams>,
    runs: usize,
    threads: Option<usize>,
    out_dir: &Path,
) -> Result<(), CliError> {
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let config = SimulationConfig {
        snapshot_every: None,
        ..config.clone()
    };
    let result =
        engine::run_ensemble(&config, runs, threads).map_err(|e| CliError::Usage(e.to_string()))?;
    let ratio = stabilization_ratio(&result.mean_series).expect("non-empty");
    let cross = cross_point(&result.mean_series).expect("non-empty");

    write(
        &out_dir.join("mean_series.csv"),
        csv_bytes(|b| io::write_fraction_csv(b, &result.mean_series)),
    )?;
    write(
        &out_dir.join("convergence.csv"),
        csv_bytes(|b| io::write_convergence_csv(b, &result.runs)),
    )?;
    let report = io::ensemble_report(&result, &ratio, &cross);
    write(&out_dir.join("report.txt"), &report)?;
    let manifest = RunManifest::new(ManifestCommand::Ensemble { config, runs });
    write(&out_dir.join("manifest.json"), manifest.to_json())?;
    print!("{report}");

    let failed = result.non_converged();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "{} of {runs} runs did not converge: {failed:?}",
            failed.len()
        )))
    }
}

pub fn eval_model(
    model: &AnalyticModel,
    t_min: i64,
    t_max: i64,
    out_dir: &Path,
) -> Result<(), CliError> {
    if t_max < t_min {
        return Err(CliError::Usage(format!(
            "--t-max ({t_max}) is below --t-min ({t_min})"
        )));
    }
    model
        .grey
        .validate()
        .and(model.white.validate())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    write(
        &out_dir.join("model.csv"),
        csv_bytes(|b| io::write_model_csv(b, model, t_min, t_max)),
    )?;
    let manifest = RunManifest::new(ManifestCommand::EvalModel {
        model: *model,
        t_min,
        t_max,
    });
    write(&out_dir.join("manifest.json"), manifest.to_json())?;
    println!("rows: {}", t_max - t_min + 1);
    Ok(())
}

pub fn fit(input: &Path, out_dir: &Path) -> Result<(), CliError> {
    let file =
        fs::File::open(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let observed =
        io::read_series_csv(file).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;

    let result = fit_model(&observed.grey_points(), &observed.white_points())
        .map_err(|e| CliError::Fit(e.to_string()))?;
    let curve = |r: &Result<crate::model::FitResult, crate::error::FitError>| match r {
        Ok(f) => CurveReport::Fitted(*f),
        Err(e) => CurveReport::Failed {
            error: e.to_string(),
        },
    };
    let report = FitReport {
        points: observed.len(),
        grey: curve(&result.grey),
        white: curve(&result.white),
        black_rmse: result.black_rmse,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("serializable");
    json.push('\n');
    write(&out_dir.join("fit.json"), json)?;
    let manifest = RunManifest::new(ManifestCommand::Fit {
        input: input.display().to_string(),
    });
    write(&out_dir.join("manifest.json"), manifest.to_json())?;

    let Some(model) = result.model() else {
        let mut why = Vec::new();
        if let Err(e) = &result.grey {
            why.push(format!("grey: {e}"));
        }
        if let Err(e) = &result.white {
            why.push(format!("white: {e}"));
        }
        return Err(CliError::Fit(why.join("; ")));
    };
    write(
        &out_dir.join("comparison.csv"),
        csv_bytes(|b| io::write_comparison_csv(b, &observed, &model)),
    )?;

    for (name, r) in [("grey", &result.grey), ("white", &result.white)] {
        let f = r.as_ref().expect("both fits succeeded");
        println!(
            "{name}: C={} tau={} gamma={} rmse={}",
            io::fmt_sig(f.params.c, 9),
            io::fmt_sig(f.params.tau, 9),
            io::fmt_sig(f.params.gamma, 9),
            io::fmt_sig(f.rmse, 9)
        );
    }
    if let Some(b) = result.black_rmse {
        println!("black_rmse: {}", io::fmt_sig(b, 9));
    }
    Ok(())
}
