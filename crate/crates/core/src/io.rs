//! File formats: series CSVs, model CSVs, and the run manifest.
//!
//! All numeric output goes through `format!`, which never consults the
//! locale, so decimal points are always `.`.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{CrossPoint, FractionSeries, StabilizationRatio};
use crate::engine::{EnsembleResult, RunSummary, SimulationConfig, StepStats, RNG_ID};
use crate::grid::Counts;
use crate::model::{AnalyticModel, FitResult};
use crate::rules::NewsRuleParams;

pub const SERIES_HEADER: &str = "step,white,grey,black,white_frac,grey_frac,black_frac";
pub const FRACTION_HEADER: &str = "step,white_frac,grey_frac,black_frac";
pub const CONVERGENCE_HEADER: &str =
    "run,seed,converged_at,black_extinct_at,final_white,final_grey,final_black";
pub const MODEL_HEADER: &str = "t,x_g,x_w,x_b";
pub const COMPARISON_HEADER: &str =
    "step,sim_white,sim_grey,sim_black,model_white,model_grey,model_black";

/// How the adoption probability is sampled; echoed into manifests.
pub const P_SAMPLING: &str =
    "p ~ Uniform[0,1), drawn fresh for every White cell at every step in row-major order";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

/// Formats `x` with `digits` significant digits in plain decimal notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit (9.99.. -> 10.0..)
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded != 0.0 && rounded.abs().log10().floor() as i64 > magnitude && decimals > 0 {
        let decimals = decimals - 1;
        format!("{x:.decimals$}")
    } else {
        s
    }
}

/// Per-step counts plus fractions (9 significant digits).
pub fn write_series_csv<W: Write>(
    mut w: W,
    counts: &[Counts],
    field_size: usize,
) -> io::Result<()> {
    writeln!(w, "{SERIES_HEADER}")?;
    let n = field_size as f64;
    for (step, c) in counts.iter().enumerate() {
        writeln!(
            w,
            "{step},{},{},{},{},{},{}",
            c.white,
            c.grey,
            c.black,
            fmt_sig(c.white as f64 / n, 9),
            fmt_sig(c.grey as f64 / n, 9),
            fmt_sig(c.black as f64 / n, 9),
        )?;
    }
    Ok(())
}

pub fn write_fraction_csv<W: Write>(mut w: W, series: &FractionSeries) -> io::Result<()> {
    writeln!(w, "{FRACTION_HEADER}")?;
    for (step, f) in series.iter().enumerate() {
        writeln!(
            w,
            "{step},{},{},{}",
            fmt_sig(f.white, 9),
            fmt_sig(f.grey, 9),
            fmt_sig(f.black, 9)
        )?;
    }
    Ok(())
}

pub fn write_convergence_csv<W: Write>(mut w: W, runs: &[RunSummary]) -> io::Result<()> {
    writeln!(w, "{CONVERGENCE_HEADER}")?;
    let opt = |v: Option<usize>| v.map(|s| s.to_string()).unwrap_or_default();
    for r in runs {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.run_index,
            r.seed,
            opt(r.converged_at),
            opt(r.black_extinct_at),
            r.final_counts.white,
            r.final_counts.grey,
            r.final_counts.black,
        )?;
    }
    Ok(())
}

/// Model curves at integer steps `t_min..=t_max`, full precision.
pub fn write_model_csv<W: Write>(
    mut w: W,
    model: &AnalyticModel,
    t_min: i64,
    t_max: i64,
) -> io::Result<()> {
    writeln!(w, "{MODEL_HEADER}")?;
    for t in t_min..=t_max {
        let f = model.eval(t as f64);
        writeln!(w, "{t},{},{},{}", f.grey, f.white, f.black)?;
    }
    Ok(())
}

/// Simulated fractions next to modeled ones, step by step.
pub fn write_comparison_csv<W: Write>(
    mut w: W,
    observed: &ObservedSeries,
    model: &AnalyticModel,
) -> io::Result<()> {
    writeln!(w, "{COMPARISON_HEADER}")?;
    for i in 0..observed.len() {
        let t = observed.steps[i];
        let m = model.eval(t);
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            t,
            fmt_sig(observed.white[i], 9),
            fmt_sig(observed.grey[i], 9),
            fmt_sig(observed.black[i], 9),
            fmt_sig(m.white, 9),
            fmt_sig(m.grey, 9),
            fmt_sig(m.black, 9),
        )?;
    }
    Ok(())
}

/// Fraction series read back from any of the CSVs this crate writes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservedSeries {
    pub steps: Vec<f64>,
    pub white: Vec<f64>,
    pub grey: Vec<f64>,
    pub black: Vec<f64>,
}

impl ObservedSeries {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn grey_points(&self) -> Vec<(f64, f64)> {
        self.steps
            .iter()
            .copied()
            .zip(self.grey.iter().copied())
            .collect()
    }

    pub fn white_points(&self) -> Vec<(f64, f64)> {
        self.steps
            .iter()
            .copied()
            .zip(self.white.iter().copied())
            .collect()
    }
}

/// Reads a series CSV. The step column may be `step` or `t`; fractions are
/// taken from `*_frac` columns, `x_*` columns, or derived from integer
/// `white,grey,black` counts, in that order of preference. A missing black
/// column is filled in as `1 - white - grey`.
pub fn read_series_csv<R: Read>(reader: R) -> Result<ObservedSeries, FormatError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);

    let step_col = col("step")
        .or_else(|| col("t"))
        .ok_or_else(|| parse_err(1, "no `step` or `t` column".into()))?;
    enum Source {
        Fractions(usize, usize, Option<usize>),
        Counts(usize, usize, usize),
    }
    let source = if let (Some(w), Some(g)) = (col("white_frac"), col("grey_frac")) {
        Source::Fractions(w, g, col("black_frac"))
    } else if let (Some(w), Some(g)) = (col("x_w"), col("x_g")) {
        Source::Fractions(w, g, col("x_b"))
    } else if let (Some(w), Some(g), Some(b)) = (col("white"), col("grey"), col("black")) {
        Source::Counts(w, g, b)
    } else {
        return Err(parse_err(
            1,
            "need white_frac/grey_frac, x_w/x_g, or white/grey/black columns".into(),
        ));
    };

    let mut out = ObservedSeries::default();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| -> Result<f64, FormatError> {
            let raw = record
                .get(i)
                .ok_or_else(|| parse_err(line, format!("missing column {}", i + 1)))?;
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_err(line, format!("`{raw}` is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line, format!("`{raw}` is not finite")))
            }
        };
        out.steps.push(field(step_col)?);
        match source {
            Source::Fractions(w, g, b) => {
                let (xw, xg) = (field(w)?, field(g)?);
                let xb = match b {
                    Some(b) => field(b)?,
                    None => 1.0 - xw - xg,
                };
                out.white.push(xw);
                out.grey.push(xg);
                out.black.push(xb);
            }
            Source::Counts(w, g, b) => {
                let (cw, cg, cb) = (field(w)?, field(g)?, field(b)?);
                let total = cw + cg + cb;
                if total <= 0.0 {
                    return Err(parse_err(line, "counts sum to zero".into()));
                }
                out.white.push(cw / total);
                out.grey.push(cg / total);
                out.black.push(cb / total);
            }
        }
    }
    Ok(out)
}

fn parse_err(line: u64, message: String) -> FormatError {
    FormatError::Parse { line, message }
}

/// Everything needed to reproduce one command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub p_sampling: String,
    #[serde(flatten)]
    pub command: ManifestCommand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ManifestCommand {
    Simulate {
        config: SimulationConfig<NewsRuleParams>,
        pgm: bool,
    },
    Ensemble {
        config: SimulationConfig<NewsRuleParams>,
        runs: usize,
    },
    EvalModel {
        model: AnalyticModel,
        t_min: i64,
        t_max: i64,
    },
    Fit {
        input: String,
    },
}

impl RunManifest {
    pub fn new(command: ManifestCommand) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rng: RNG_ID.into(),
            p_sampling: P_SAMPLING.into(),
            command,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest is serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Summary of an ensemble as `key: value` lines.
pub fn ensemble_report(
    result: &EnsembleResult,
    ratio: &StabilizationRatio,
    cross: &CrossPoint,
) -> String {
    let stats = |s: &Option<StepStats>| match s {
        Some(s) => format!(
            "min={} median={} max={} n={}",
            s.min, s.median, s.max, s.count
        ),
        None => "none".into(),
    };
    let steps = result.convergence_steps();
    let in_window = steps.iter().filter(|&&s| (80..=150).contains(&s)).count();
    let mut out = String::new();
    out.push_str(&format!("runs: {}\n", result.run_count()));
    out.push_str(&format!("base_seed: {}\n", result.base_seed));
    out.push_str(&format!("converged_runs: {}\n", steps.len()));
    out.push_str(&format!(
        "non_converged_runs: {:?}\n",
        result.non_converged()
    ));
    out.push_str(&format!(
        "convergence_steps: {}\n",
        stats(&result.convergence)
    ));
    out.push_str(&format!(
        "black_extinction_steps: {}\n",
        stats(&result.black_extinction)
    ));
    out.push_str(&format!(
        "runs_converged_in_80_150: {in_window}/{}\n",
        result.run_count()
    ));
    out.push_str(&format!(
        "stabilization_grey_white_black: {} : {} : {}\n",
        fmt_sig(ratio.grey, 9),
        fmt_sig(ratio.white, 9),
        fmt_sig(ratio.black, 9)
    ));
    out.push_str(&format!(
        "cross_point: step={} level={} spread={}\n",
        cross.step,
        fmt_sig(cross.level, 9),
        fmt_sig(cross.spread, 9)
    ));
    out
}

/// Fitted parameters and residuals as pretty JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub points: usize,
    pub grey: CurveReport,
    pub white: CurveReport,
    pub black_rmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveReport {
    Fitted(FitResult),
    Failed { error: String },
}
