//! Closed-form logistic model of the three state fractions.
//!
//! Sign convention: `logistic(t) = C / (1 + exp(-gamma * (t - tau)))` with
//! `gamma > 0`, an increasing sigmoid. Grey follows `logistic` directly,
//! white follows `1 - logistic`, and black is whatever remains, i.e.
//! `logistic_white - logistic_grey`. Black can dip slightly below zero when
//! the white curve lags the grey one, and is returned unclamped.

mod fit;

pub use fit::{fit_logistic, fit_model, FitResult, FitShape, ModelFit, MIN_FIT_POINTS};

use serde::{Deserialize, Serialize};

use crate::analytics::Fractions;
use crate::error::FitError;

/// Plateau `c`, midpoint `tau` (steps) and slope `gamma` (per step).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub c: f64,
    pub tau: f64,
    pub gamma: f64,
}

impl LogisticParams {
    pub fn new(c: f64, tau: f64, gamma: f64) -> Result<Self, FitError> {
        let p = Self { c, tau, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(FitError::InvalidParams(format!(
                "C must be in (0, 1], got {}",
                self.c
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(FitError::InvalidParams(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !self.tau.is_finite() {
            return Err(FitError::InvalidParams("tau must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        logistic(t, self)
    }
}

/// `C / (1 + exp(-gamma (t - tau)))`, evaluated without overflow for any
/// finite argument.
#[inline]
pub fn logistic(t: f64, p: &LogisticParams) -> f64 {
    let z = p.gamma * (t - p.tau);
    if z >= 0.0 {
        p.c / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        p.c * e / (1.0 + e)
    }
}

/// Grey and white curves; black is implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticModel {
    pub grey: LogisticParams,
    pub white: LogisticParams,
}

impl AnalyticModel {
    /// The reference parameterization: grey `(0.75, 30, 0.15)`, white
    /// `(0.75, 20, 0.25)`.
    pub fn paper() -> Self {
        Self {
            grey: LogisticParams {
                c: 0.75,
                tau: 30.0,
                gamma: 0.15,
            },
            white: LogisticParams {
                c: 0.75,
                tau: 20.0,
                gamma: 0.25,
            },
        }
    }

    pub fn eval_grey(&self, t: f64) -> f64 {
        logistic(t, &self.grey)
    }

    pub fn eval_white(&self, t: f64) -> f64 {
        1.0 - logistic(t, &self.white)
    }

    /// Signed; see the module docs.
    pub fn eval_black(&self, t: f64) -> f64 {
        logistic(t, &self.white) - logistic(t, &self.grey)
    }

    pub fn eval(&self, t: f64) -> Fractions {
        Fractions {
            white: self.eval_white(t),
            grey: self.eval_grey(t),
            black: self.eval_black(t),
        }
    }
}

pub fn paper_model() -> AnalyticModel {
    AnalyticModel::paper()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GREY: LogisticParams = LogisticParams {
        c: 0.75,
        tau: 30.0,
        gamma: 0.15,
    };

    #[test]
    fn logistic_examples() {
        assert_eq!(logistic(30.0, &GREY), 0.375);
        assert!((logistic(1e6, &GREY) - 0.75).abs() < 1e-12);
        // 0.75 / (1 + e^4.5)
        assert!((logistic(0.0, &GREY) - 0.008_240_206_972_944_885).abs() < 1e-15);
    }

    #[test]
    fn logistic_saturates_without_overflow() {
        let steep = LogisticParams {
            c: 0.6,
            tau: 0.0,
            gamma: 1.0,
        };
        for z in [700.0, 710.0, 1e6, f64::MAX / 2.0] {
            assert_eq!(logistic(z, &steep), 0.6);
            let low = logistic(-z, &steep);
            assert!((0.0..1e-300).contains(&low));
        }
    }

    #[test]
    fn reference_parameters() {
        let m = paper_model();
        assert_eq!(m.grey.tau, 30.0);
        assert_eq!(m.white.gamma, 0.25);
        assert_eq!(m.eval_grey(30.0), 0.375);
        assert_eq!(m.eval_white(20.0), 0.625);
        assert!((m.eval_grey(1e4) - 0.75).abs() < 1e-12);
        assert!((m.eval_white(1e4) - 0.25).abs() < 1e-12);
        assert!(m.eval_black(1e4).abs() < 1e-12);
        assert!(m.eval_black(0.0) < 0.0);
    }

    #[test]
    fn reference_curve_shapes() {
        let m = paper_model();
        let ts: Vec<f64> = (0..=120).map(f64::from).collect();
        for w in ts.windows(2) {
            assert!(m.eval_grey(w[1]) > m.eval_grey(w[0]));
            assert!(m.eval_white(w[1]) < m.eval_white(w[0]));
        }
        let black: Vec<f64> = ts.iter().map(|&t| m.eval_black(t)).collect();
        let report = crate::analytics::unimodality(&black).unwrap();
        assert!(report.is_unimodal());
        assert!(report.peak > 0 && report.peak < 120);
    }

    #[test]
    fn param_validation() {
        assert!(LogisticParams::new(0.75, 30.0, 0.15).is_ok());
        assert!(LogisticParams::new(0.0, 30.0, 0.15).is_err());
        assert!(LogisticParams::new(1.2, 30.0, 0.15).is_err());
        assert!(LogisticParams::new(0.5, 30.0, -0.1).is_err());
        assert!(LogisticParams::new(0.5, f64::NAN, 0.1).is_err());
    }

    fn arb_params() -> impl Strategy<Value = LogisticParams> {
        (0.01f64..=1.0, -200.0f64..200.0, 0.001f64..5.0)
            .prop_map(|(c, tau, gamma)| LogisticParams { c, tau, gamma })
    }

    proptest! {
        #[test]
        fn point_symmetry(p in arb_params(), d in -500.0f64..500.0) {
            let s = logistic(p.tau + d, &p) + logistic(p.tau - d, &p);
            prop_assert!((s - p.c).abs() < 1e-12);
        }

        #[test]
        fn bounded_and_increasing(p in arb_params(), t in -1e3f64..1e3, dt in 1e-3f64..10.0) {
            let a = logistic(t, &p);
            let b = logistic(t + dt, &p);
            prop_assert!(a >= 0.0 && a <= p.c);
            prop_assert!(b >= a);
        }

        #[test]
        fn fractions_sum_to_one(g in arb_params(), w in arb_params(), t in -1e4f64..1e4) {
            let m = AnalyticModel { grey: g, white: w };
            prop_assert!((m.eval(t).sum() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn black_vanishes_at_both_ends_for_equal_plateaus(g in arb_params(), w in arb_params()) {
            let m = AnalyticModel { grey: g, white: LogisticParams { c: g.c, ..w } };
            prop_assert!(m.eval_black(1e7).abs() < 1e-9);
            prop_assert!(m.eval_black(-1e7).abs() < 1e-9);
        }
    }
}
