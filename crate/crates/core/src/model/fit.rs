//! Least-squares fitting of logistic curves to observed fraction series.

use serde::{Deserialize, Serialize};

use super::{logistic, AnalyticModel, LogisticParams};
use crate::error::FitError;
use crate::optim::{nelder_mead, NelderMeadOptions};

pub const MIN_FIT_POINTS: usize = 4;

/// Which side of the sigmoid the data follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitShape {
    /// `logistic(t)` (grey).
    Rising,
    /// `1 - logistic(t)` (white).
    Falling,
}

impl FitShape {
    fn model(self, t: f64, p: &LogisticParams) -> f64 {
        match self {
            FitShape::Rising => logistic(t, p),
            FitShape::Falling => 1.0 - logistic(t, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: LogisticParams,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Fits `shape` to `(t, value)` samples by minimizing the sum of squared
/// residuals over `(C, tau, gamma)`.
///
/// The search starts from data-derived guesses (plateau height, the
/// half-plateau crossing, and four times the steepest slope over the
/// plateau) and runs a Nelder–Mead search over `(C, tau, ln gamma)` with
/// `C` kept in `(0, 1]`.
pub fn fit_logistic(series: &[(f64, f64)], shape: FitShape) -> Result<FitResult, FitError> {
    if series.len() < MIN_FIT_POINTS {
        return Err(FitError::TooFewPoints {
            required: MIN_FIT_POINTS,
            actual: series.len(),
        });
    }
    if let Some(i) = series
        .iter()
        .position(|(t, v)| !t.is_finite() || !v.is_finite())
    {
        return Err(FitError::NonFinite(i));
    }

    // Work on the rising form y = logistic(t) in both cases.
    let mut pts: Vec<(f64, f64)> = series
        .iter()
        .map(|&(t, v)| match shape {
            FitShape::Rising => (t, v),
            FitShape::Falling => (t, 1.0 - v),
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    if hi - lo < 1e-9 {
        return Err(FitError::Degenerate("series is constant".into()));
    }
    if hi <= 0.0 {
        return Err(FitError::Degenerate("no positive level to fit".into()));
    }

    let c0 = hi.min(1.0);
    let half = c0 / 2.0;
    let tau0 = pts
        .windows(2)
        .find(|w| w[0].1 < half && w[1].1 >= half)
        .map(|w| {
            let (t0, y0) = w[0];
            let (t1, y1) = w[1];
            t0 + (half - y0) * (t1 - t0) / (y1 - y0)
        })
        .unwrap_or(pts[pts.len() / 2].0);
    let max_slope = pts
        .windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_slope.is_nan() || max_slope <= 0.0 {
        return Err(FitError::Degenerate(format!(
            "no {} segment",
            match shape {
                FitShape::Rising => "rising",
                FitShape::Falling => "falling",
            }
        )));
    }
    let gamma0 = 4.0 * max_slope / c0;
    let span = pts[pts.len() - 1].0 - pts[0].0;

    let objective = |x: &[f64]| -> f64 {
        let p = LogisticParams {
            c: x[0],
            tau: x[1],
            gamma: x[2].exp(),
        };
        if !(p.c > 0.0 && p.c <= 1.0) || !p.gamma.is_finite() {
            return f64::INFINITY;
        }
        series
            .iter()
            .map(|&(t, v)| {
                let r = shape.model(t, &p) - v;
                r * r
            })
            .sum()
    };

    let x0 = [c0, tau0, gamma0.ln()];
    let steps = [0.1 * c0, (0.05 * span).max(1.0), 0.25];
    let min = nelder_mead(objective, &x0, &steps, &NelderMeadOptions::default());

    let params = LogisticParams {
        c: min.x[0],
        tau: min.x[1],
        gamma: min.x[2].exp(),
    };
    Ok(FitResult {
        params,
        rmse: (min.value / series.len() as f64).sqrt(),
        iterations: min.iterations,
        converged: min.converged,
    })
}

/// Outcome of fitting both curves. Each curve succeeds or fails on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit {
    pub grey: Result<FitResult, FitError>,
    pub white: Result<FitResult, FitError>,
    /// RMSE of the implied black curve against `1 - grey - white` of the
    /// data; present only when both fits succeeded.
    pub black_rmse: Option<f64>,
}

impl ModelFit {
    pub fn model(&self) -> Option<AnalyticModel> {
        match (&self.grey, &self.white) {
            (Ok(g), Ok(w)) => Some(AnalyticModel {
                grey: g.params,
                white: w.params,
            }),
            _ => None,
        }
    }
}

/// Fits grey as a rising and white as a falling logistic, independently.
/// The series must be aligned: same length, same step at each index.
pub fn fit_model(grey: &[(f64, f64)], white: &[(f64, f64)]) -> Result<ModelFit, FitError> {
    if grey.len() != white.len() {
        return Err(FitError::LengthMismatch {
            grey: grey.len(),
            white: white.len(),
        });
    }
    let (g, w) = rayon::join(
        || fit_logistic(grey, FitShape::Rising),
        || fit_logistic(white, FitShape::Falling),
    );

    let mut fit = ModelFit {
        grey: g,
        white: w,
        black_rmse: None,
    };
    if let Some(model) = fit.model() {
        let sse: f64 = grey
            .iter()
            .zip(white)
            .map(|(&(t, xg), &(_, xw))| {
                let r = model.eval_black(t) - (1.0 - xg - xw);
                r * r
            })
            .sum();
        fit.black_rmse = Some((sse / grey.len() as f64).sqrt());
    }
    Ok(fit)
}
