//! Three-state cellular automaton of news diffusion.
//!
//! A field of cells starts White with one Black ("fresh news") cell. White
//! cells pick up the news from Black neighbors stochastically, Black cells
//! go Grey once surrounded by informed cells, and Grey cells are forgotten
//! (back to White) under the same condition. Alongside the simulator sits a
//! closed-form logistic model of the three state fractions and a fitting
//! pipeline that calibrates it against simulated series.
//!
//! * [`grid`]: lattice, Moore neighborhoods, ASCII/graymap output
//! * [`rules`]: news and innovation transition functions
//! * [`engine`]: synchronous stepper, run driver, ensembles
//! * [`analytics`]: fractions, stabilization ratio, cross-point
//! * [`model`]: logistic model and least-squares fitting
//! * [`io`]: CSV and manifest formats used by the command-line tool

pub mod analytics;
pub mod cli;
pub mod engine;
pub mod error;
pub mod grid;
pub mod io;
pub mod model;
pub mod optim;
pub mod rules;

pub use analytics::{
    cross_point, normalize, stabilization_ratio, CrossPoint, FractionSeries, Fractions,
};
pub use engine::{run, run_ensemble, step, EnsembleResult, SimulationConfig, Trajectory};
pub use error::{AnalyticsError, ConfigError, FitError, GridError};
pub use grid::{new_grid, Adoption, Boundary, CellState, Counts, Grid, Neighborhood};
pub use model::{
    fit_logistic, fit_model, paper_model, AnalyticModel, FitResult, FitShape, LogisticParams,
};
pub use rules::{InnovationRuleParams, NewsRuleParams, RandomDraw};
