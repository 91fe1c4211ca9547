//! Synchronous lattice stepper, single-run driver with fixed-point
//! detection, and the seeded ensemble executor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{FractionSeries, Fractions};
use crate::error::ConfigError;
use crate::grid::{self, Boundary, CellKind, Counts, Grid, Position};
use crate::rules::{NewsRuleParams, RandomDraw, Rule};

/// Identifies the random stream so outputs can be reproduced elsewhere.
pub const RNG_ID: &str =
    "ChaCha8Rng(rand_chacha 0.3, seed_from_u64); ensemble run seed = splitmix64(splitmix64(base) + run_index)";

pub const DEFAULT_SIZE: usize = 40;
pub const DEFAULT_MAX_STEPS: usize = 1000;

/// The generator every run uses.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of ensemble member `run_index`.
pub fn derive_run_seed(base_seed: u64, run_index: usize) -> u64 {
    splitmix64(splitmix64(base_seed).wrapping_add(run_index as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig<R = NewsRuleParams> {
    pub width: usize,
    pub height: usize,
    /// `None` places the seed cell at the grid center.
    pub seed_position: Option<Position>,
    pub boundary: Boundary,
    pub rng_seed: u64,
    pub max_steps: usize,
    pub rule: R,
    pub snapshot_every: Option<usize>,
}

impl<R: Default> Default for SimulationConfig<R> {
    fn default() -> Self {
        Self {
            width: DEFAULT_SIZE,
            height: DEFAULT_SIZE,
            seed_position: None,
            boundary: Boundary::Bounded,
            rng_seed: 0,
            max_steps: DEFAULT_MAX_STEPS,
            rule: R::default(),
            snapshot_every: None,
        }
    }
}

impl<R> SimulationConfig<R> {
    pub fn with_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }

    pub fn resolved_seed_position(&self) -> Position {
        self.seed_position
            .unwrap_or_else(|| grid::center(self.width, self.height))
    }

    pub fn field_size(&self) -> usize {
        self.width * self.height
    }
}

impl<R: Rule> SimulationConfig<R> {
    pub fn initial_grid(&self) -> Result<Grid<R::State>, ConfigError> {
        Ok(Grid::seeded(
            self.width,
            self.height,
            self.resolved_seed_position(),
            self.boundary,
        )?)
    }
}

/// Checks a config without running it.
pub trait Validate {
    fn validate(&self) -> Result<(), ConfigError>;
}

impl Validate for SimulationConfig<NewsRuleParams> {
    fn validate(&self) -> Result<(), ConfigError> {
        validate_common(self)?;
        self.rule.validate()
    }
}

impl Validate for SimulationConfig<crate::rules::InnovationRuleParams> {
    fn validate(&self) -> Result<(), ConfigError> {
        validate_common(self)?;
        self.rule.validate()
    }
}

fn validate_common<R>(c: &SimulationConfig<R>) -> Result<(), ConfigError> {
    grid::validate_dimensions(c.width, c.height, c.boundary)?;
    let (row, col) = c.resolved_seed_position();
    if row >= c.height || col >= c.width {
        return Err(crate::error::GridError::OutOfBounds {
            row,
            col,
            width: c.width,
            height: c.height,
        }
        .into());
    }
    if c.max_steps == 0 {
        return Err(ConfigError::ZeroMaxSteps);
    }
    if c.snapshot_every == Some(0) {
        return Err(ConfigError::ZeroSnapshotInterval);
    }
    Ok(())
}

/// Computes the next generation from `grid`.
///
/// Every cell reads the frozen old grid. Cells for which the rule draws
/// consume one uniform `[0, 1)` value each, in row-major order; other cells
/// consume nothing. `step_index` is accepted for rules that depend on time;
/// the built-in rules ignore it.
pub fn step<R: Rule, G: Rng + ?Sized>(
    grid: &Grid<R::State>,
    step_index: usize,
    rng: &mut G,
    rule: &R,
) -> Grid<R::State> {
    let mut next = grid.clone();
    step_into(grid, &mut next, step_index, rng, rule);
    next
}

/// As [`step`], writing into a preallocated grid of the same shape.
/// Returns whether any cell changed.
pub fn step_into<R: Rule, G: Rng + ?Sized>(
    grid: &Grid<R::State>,
    next: &mut Grid<R::State>,
    _step_index: usize,
    rng: &mut G,
    rule: &R,
) -> bool {
    debug_assert_eq!(grid.width(), next.width());
    debug_assert_eq!(grid.height(), next.height());
    let width = grid.width();
    let old = grid.cells();
    let mut changed = false;
    let out = next.cells_mut();
    for row in 0..grid.height() {
        for col in 0..width {
            let i = row * width + col;
            let current = old[i];
            let draw = if rule.draws(current) {
                RandomDraw::new(rng.gen::<f64>()).expect("gen::<f64>() is in [0, 1)")
            } else {
                // never read by the rule
                RandomDraw::new(0.0).unwrap()
            };
            let neighbors = grid.neighborhood_unchecked(row, col);
            let new = rule.next_state(current, &neighbors, draw);
            changed |= new != current;
            out[i] = new;
        }
    }
    changed
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot<S: CellKind> {
    pub step: usize,
    pub grid: Grid<S>,
}

/// Observable record of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory<S: CellKind = grid::CellState> {
    /// `counts[t]` is the state tally after `t` steps; `counts[0]` is the
    /// initial grid.
    pub counts: Vec<Counts>,
    /// First step whose grid is a fixed point with no stochastic moves left.
    pub converged_at: Option<usize>,
    /// First step with no Black cells.
    pub black_extinct_at: Option<usize>,
    pub snapshots: Vec<Snapshot<S>>,
    pub final_grid: Grid<S>,
    pub field_size: usize,
}

impl<S: CellKind> Trajectory<S> {
    pub fn is_converged(&self) -> bool {
        self.converged_at.is_some()
    }

    pub fn final_counts(&self) -> Counts {
        *self
            .counts
            .last()
            .expect("trajectory holds the initial state")
    }

    /// Number of recorded states (steps + 1).
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn fractions(&self) -> FractionSeries {
        crate::analytics::normalize(&self.counts, self.field_size)
            .expect("engine conserves cell counts")
    }
}

/// Runs one simulation until it reaches a fixed point or `max_steps`.
///
/// A run converges at step `T` when the grid at `T` leaves no stochastic
/// move open (for the news rule: no Black cell) and one further step
/// changes nothing. Hitting `max_steps` first is not an error; the returned
/// trajectory has `converged_at == None`.
pub fn run<R>(config: &SimulationConfig<R>) -> Result<Trajectory<R::State>, ConfigError>
where
    R: Rule,
    SimulationConfig<R>: Validate,
{
    config.validate()?;
    let mut rng = rng_from_seed(config.rng_seed);
    let mut grid = config.initial_grid()?;
    let mut next = grid.clone();
    let field_size = config.field_size();

    let mut counts = vec![grid.count_states()];
    let mut snapshots = Vec::new();
    let mut black_extinct_at = (counts[0].black == 0).then_some(0);
    let mut converged_at = None;

    if config.snapshot_every.is_some() {
        snapshots.push(Snapshot {
            step: 0,
            grid: grid.clone(),
        });
    }

    for t in 0..=config.max_steps {
        let quiescent = config.rule.is_quiescent(&grid);
        let changed = step_into(&grid, &mut next, t, &mut rng, &config.rule);
        if quiescent && !changed {
            converged_at = Some(t);
            break;
        }
        if t == config.max_steps {
            break;
        }
        std::mem::swap(&mut grid, &mut next);
        let c = grid.count_states();
        counts.push(c);
        let step_no = t + 1;
        if black_extinct_at.is_none() && c.black == 0 {
            black_extinct_at = Some(step_no);
        }
        if let Some(every) = config.snapshot_every {
            if step_no % every == 0 {
                snapshots.push(Snapshot {
                    step: step_no,
                    grid: grid.clone(),
                });
            }
        }
    }

    Ok(Trajectory {
        counts,
        converged_at,
        black_extinct_at,
        snapshots,
        final_grid: grid,
        field_size,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_index: usize,
    pub seed: u64,
    pub converged_at: Option<usize>,
    pub black_extinct_at: Option<usize>,
    pub steps_recorded: usize,
    pub final_counts: Counts,
}

/// Order statistics over a set of step numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub min: usize,
    pub median: f64,
    pub max: usize,
    pub count: usize,
}

impl StepStats {
    pub fn from_steps(steps: &[usize]) -> Option<Self> {
        if steps.is_empty() {
            return None;
        }
        let mut s = steps.to_vec();
        s.sort_unstable();
        let n = s.len();
        let median = if n % 2 == 1 {
            s[n / 2] as f64
        } else {
            (s[n / 2 - 1] + s[n / 2]) as f64 / 2.0
        };
        Some(Self {
            min: s[0],
            median,
            max: s[n - 1],
            count: n,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Mean fractions per step. Runs that stop early hold their final state
    /// out to the longest run's horizon.
    pub mean_series: FractionSeries,
    pub runs: Vec<RunSummary>,
    /// Statistics over converged runs only.
    pub convergence: Option<StepStats>,
    pub black_extinction: Option<StepStats>,
    pub base_seed: u64,
}

impl EnsembleResult {
    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    /// Indices of runs that hit `max_steps` without converging.
    pub fn non_converged(&self) -> Vec<usize> {
        self.runs
            .iter()
            .filter(|r| r.converged_at.is_none())
            .map(|r| r.run_index)
            .collect()
    }

    pub fn convergence_steps(&self) -> Vec<usize> {
        self.runs.iter().filter_map(|r| r.converged_at).collect()
    }
}

/// Runs `runs` independent simulations seeded from `config.rng_seed` via
/// [`derive_run_seed`] and averages their fraction series.
///
/// `threads` bounds the worker pool (`None` uses rayon's default). The
/// result does not depend on it: runs are collected by index and summed as
/// integers.
pub fn run_ensemble<R>(
    config: &SimulationConfig<R>,
    runs: usize,
    threads: Option<usize>,
) -> Result<EnsembleResult, ConfigError>
where
    R: Rule + Clone,
    SimulationConfig<R>: Validate,
{
    run_ensemble_with(config, runs, threads, |_, _| {})
}

/// As [`run_ensemble`], handing each full trajectory to `inspect` before it
/// is reduced to a summary. `inspect` may be called from worker threads in
/// any order.
pub fn run_ensemble_with<R, F>(
    config: &SimulationConfig<R>,
    runs: usize,
    threads: Option<usize>,
    inspect: F,
) -> Result<EnsembleResult, ConfigError>
where
    R: Rule + Clone,
    SimulationConfig<R>: Validate,
    F: Fn(usize, &Trajectory<R::State>) + Sync,
{
    if runs == 0 {
        return Err(ConfigError::ZeroRuns);
    }
    config.validate()?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| ConfigError::ThreadPool(e.to_string()))?;

    let member = |i: usize| -> Result<(RunSummary, Vec<Counts>), ConfigError> {
        let seed = derive_run_seed(config.rng_seed, i);
        let cfg = SimulationConfig {
            rng_seed: seed,
            snapshot_every: None,
            ..config.clone()
        };
        let traj = run(&cfg)?;
        inspect(i, &traj);
        let summary = RunSummary {
            run_index: i,
            seed,
            converged_at: traj.converged_at,
            black_extinct_at: traj.black_extinct_at,
            steps_recorded: traj.counts.len(),
            final_counts: traj.final_counts(),
        };
        Ok((summary, traj.counts))
    };

    let results: Vec<(RunSummary, Vec<Counts>)> = pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(member)
            .collect::<Result<Vec<_>, _>>()
    })?;

    let horizon = results.iter().map(|(_, c)| c.len()).max().unwrap_or(1);
    let mut totals = vec![[0u64; 3]; horizon];
    for (_, counts) in &results {
        let last = *counts.last().expect("non-empty trajectory");
        for (t, total) in totals.iter_mut().enumerate() {
            let c = counts.get(t).copied().unwrap_or(last);
            total[0] += c.white as u64;
            total[1] += c.grey as u64;
            total[2] += c.black as u64;
        }
    }
    let denom = (runs * config.field_size()) as f64;
    let mean_series = FractionSeries::new(
        totals
            .iter()
            .map(|[w, g, b]| Fractions {
                white: *w as f64 / denom,
                grey: *g as f64 / denom,
                black: *b as f64 / denom,
            })
            .collect(),
    );

    let summaries: Vec<RunSummary> = results.into_iter().map(|(s, _)| s).collect();
    let conv: Vec<usize> = summaries.iter().filter_map(|r| r.converged_at).collect();
    let ext: Vec<usize> = summaries
        .iter()
        .filter_map(|r| r.black_extinct_at)
        .collect();

    Ok(EnsembleResult {
        mean_series,
        convergence: StepStats::from_steps(&conv),
        black_extinction: StepStats::from_steps(&ext),
        runs: summaries,
        base_seed: config.rng_seed,
    })
}
