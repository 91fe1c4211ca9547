//! Post-processing of count series: normalization to fractions,
//! conservation audit, stabilization ratio, cross-point and shape checks.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::AnalyticsError;
use crate::grid::Counts;

/// Share of the field in each state at one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Fractions {
    pub white: f64,
    pub grey: f64,
    pub black: f64,
}

impl Fractions {
    pub fn sum(&self) -> f64 {
        self.white + self.grey + self.black
    }

    /// Largest pairwise absolute difference between the three components.
    pub fn spread(&self) -> f64 {
        let [a, b, c] = [self.white, self.grey, self.black];
        (a - b).abs().max((a - c).abs()).max((b - c).abs())
    }

    pub fn mean(&self) -> f64 {
        self.sum() / 3.0
    }
}

/// Per-step fractions, indexed by step.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FractionSeries(Vec<Fractions>);

impl FractionSeries {
    pub fn new(steps: Vec<Fractions>) -> Self {
        Self(steps)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Fractions> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Fractions] {
        &self.0
    }

    pub fn last(&self) -> Option<&Fractions> {
        self.0.last()
    }

    pub fn white(&self) -> Vec<f64> {
        self.0.iter().map(|f| f.white).collect()
    }

    pub fn grey(&self) -> Vec<f64> {
        self.0.iter().map(|f| f.grey).collect()
    }

    pub fn black(&self) -> Vec<f64> {
        self.0.iter().map(|f| f.black).collect()
    }
}

impl Index<usize> for FractionSeries {
    type Output = Fractions;

    fn index(&self, i: usize) -> &Fractions {
        &self.0[i]
    }
}

impl FromIterator<Fractions> for FractionSeries {
    fn from_iter<I: IntoIterator<Item = Fractions>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Fails on the first step whose counts do not add up to `field_size`.
pub fn audit_conservation(counts: &[Counts], field_size: usize) -> Result<(), AnalyticsError> {
    for (step, c) in counts.iter().enumerate() {
        if c.total() != field_size {
            return Err(AnalyticsError::Conservation {
                step,
                expected: field_size,
                actual: c.total(),
            });
        }
    }
    Ok(())
}

/// Divides every count by `field_size`.
pub fn normalize(counts: &[Counts], field_size: usize) -> Result<FractionSeries, AnalyticsError> {
    if field_size == 0 {
        return Err(AnalyticsError::ZeroFieldSize);
    }
    audit_conservation(counts, field_size)?;
    let n = field_size as f64;
    Ok(counts
        .iter()
        .map(|c| Fractions {
            white: c.white as f64 / n,
            grey: c.grey as f64 / n,
            black: c.black as f64 / n,
        })
        .collect())
}

/// Final grey : white : black proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilizationRatio {
    pub grey: f64,
    pub white: f64,
    pub black: f64,
}

pub fn stabilization_ratio(series: &FractionSeries) -> Result<StabilizationRatio, AnalyticsError> {
    let f = series.last().ok_or(AnalyticsError::EmptySeries)?;
    Ok(StabilizationRatio {
        grey: f.grey,
        white: f.white,
        black: f.black,
    })
}

/// The step where the three curves are mutually closest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossPoint {
    pub step: usize,
    /// Mean of the three fractions at `step`.
    pub level: f64,
    /// Largest pairwise difference at `step`.
    pub spread: f64,
}

/// Minimax-spread step on the discrete grid; ties go to the earlier step.
pub fn cross_point(series: &FractionSeries) -> Result<CrossPoint, AnalyticsError> {
    let mut best: Option<CrossPoint> = None;
    for (step, f) in series.iter().enumerate() {
        let spread = f.spread();
        if best.is_none_or(|b| spread < b.spread) {
            best = Some(CrossPoint {
                step,
                level: f.mean(),
                spread,
            });
        }
    }
    best.ok_or(AnalyticsError::EmptySeries)
}

/// Trailing moving average; the output is `window - 1` shorter than the
/// input (empty if the input is shorter than `window`).
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || values.len() < window {
        return Vec::new();
    }
    values
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}

/// Where a sequence stops being unimodal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnimodalityReport {
    /// Index of the (first) maximum.
    pub peak: usize,
    /// Indices `i` before the peak with `v[i+1] < v[i]`.
    pub rises_broken: usize,
    /// Indices `i` after the peak with `v[i+1] > v[i]`.
    pub falls_broken: usize,
    /// Largest single upward step after the peak.
    pub max_rebound: f64,
    /// Index `i + 1` of the first upward step after the peak.
    pub first_rebound: Option<usize>,
}

impl UnimodalityReport {
    pub fn is_unimodal(&self) -> bool {
        self.rises_broken == 0 && self.falls_broken == 0
    }
}

/// Checks that `values` is nonstrictly increasing up to its maximum and
/// nonstrictly decreasing afterwards.
pub fn unimodality(values: &[f64]) -> Option<UnimodalityReport> {
    if values.is_empty() {
        return None;
    }
    let peak = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best });
    let rises_broken = values[..=peak].windows(2).filter(|w| w[1] < w[0]).count();
    let mut falls_broken = 0;
    let mut max_rebound: f64 = 0.0;
    let mut first_rebound = None;
    for (i, w) in values[peak..].windows(2).enumerate() {
        if w[1] > w[0] {
            falls_broken += 1;
            first_rebound.get_or_insert(peak + i + 1);
            max_rebound = max_rebound.max(w[1] - w[0]);
        }
    }
    Some(UnimodalityReport {
        peak,
        rises_broken,
        falls_broken,
        max_rebound,
        first_rebound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(white: usize, grey: usize, black: usize) -> Counts {
        Counts { white, grey, black }
    }

    fn f(white: f64, grey: f64, black: f64) -> Fractions {
        Fractions { white, grey, black }
    }

    #[test]
    fn normalize_examples() {
        let s = normalize(&[c(1599, 0, 1)], 1600).unwrap();
        assert_eq!(s[0], f(0.999375, 0.0, 0.000625));
        let s = normalize(&[c(0, 1200, 400)], 1600).unwrap();
        assert_eq!(s[0], f(0.0, 0.75, 0.25));
        assert_eq!(
            normalize(&[c(1599, 0, 1), c(1598, 0, 1)], 1600),
            Err(AnalyticsError::Conservation {
                step: 1,
                expected: 1600,
                actual: 1599
            })
        );
        assert_eq!(normalize(&[], 0), Err(AnalyticsError::ZeroFieldSize));
    }

    #[test]
    fn stabilization_examples() {
        let s = FractionSeries::new(vec![f(0.9, 0.05, 0.05), f(0.25, 0.75, 0.0)]);
        let r = stabilization_ratio(&s).unwrap();
        assert_eq!((r.grey, r.white, r.black), (0.75, 0.25, 0.0));
        let one = FractionSeries::new(vec![f(0.5, 0.3, 0.2)]);
        let r = stabilization_ratio(&one).unwrap();
        assert_eq!((r.grey, r.white, r.black), (0.3, 0.5, 0.2));
        assert_eq!(
            stabilization_ratio(&FractionSeries::default()),
            Err(AnalyticsError::EmptySeries)
        );
    }

    #[test]
    fn cross_point_constant_thirds() {
        let third = 1.0 / 3.0;
        let s = FractionSeries::new(vec![f(third, third, third); 5]);
        let cp = cross_point(&s).unwrap();
        assert_eq!(cp.step, 0);
        assert_eq!(cp.spread, 0.0);
        assert!((cp.level - third).abs() < 1e-15);
    }

    #[test]
    fn cross_point_is_total() {
        let s = FractionSeries::new(vec![f(1.0, 0.0, 0.0), f(0.8, 0.2, 0.0), f(0.9, 0.1, 0.0)]);
        let cp = cross_point(&s).unwrap();
        assert_eq!(cp.step, 1);
        assert!((cp.spread - 0.8).abs() < 1e-12);
        assert!(cross_point(&FractionSeries::default()).is_err());
    }

    #[test]
    fn unimodality_checks() {
        assert!(unimodality(&[0.0, 1.0, 2.0, 2.0, 1.0, 0.0])
            .unwrap()
            .is_unimodal());
        let r = unimodality(&[0.0, 2.0, 1.0, 1.5, 0.0]).unwrap();
        assert_eq!((r.peak, r.falls_broken), (1, 1));
        assert!((r.max_rebound - 0.5).abs() < 1e-15);
        assert_eq!(r.first_rebound, Some(3));
        assert_eq!(unimodality(&[0.0, 1.0, 0.5, 3.0]).unwrap().rises_broken, 1);
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 3), vec![2.0, 3.0]);
        assert!(moving_average(&[1.0], 3).is_empty());
    }

    fn arb_counts(field: usize) -> impl Strategy<Value = Vec<Counts>> {
        proptest::collection::vec((0..=field, 0..=field), 1..40).prop_map(move |v| {
            v.into_iter()
                .map(|(a, b)| {
                    let (lo, hi) = (a.min(b), a.max(b));
                    c(lo, hi - lo, field - hi)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn normalize_round_trips(counts in arb_counts(1600)) {
            let s = normalize(&counts, 1600).unwrap();
            for (fr, c) in s.iter().zip(&counts) {
                prop_assert_eq!((fr.white * 1600.0).round() as usize, c.white);
                prop_assert_eq!((fr.grey * 1600.0).round() as usize, c.grey);
                prop_assert_eq!((fr.black * 1600.0).round() as usize, c.black);
                prop_assert!((fr.sum() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn cross_point_permutation_invariant(counts in arb_counts(997)) {
            let s = normalize(&counts, 997).unwrap();
            let rotated: FractionSeries = s.iter().map(|x| f(x.grey, x.black, x.white)).collect();
            let swapped: FractionSeries = s.iter().map(|x| f(x.black, x.grey, x.white)).collect();
            let a = cross_point(&s).unwrap();
            for other in [cross_point(&rotated).unwrap(), cross_point(&swapped).unwrap()] {
                prop_assert_eq!(a.step, other.step);
                prop_assert_eq!(a.spread, other.spread);
                prop_assert!((a.level - other.level).abs() < 1e-15);
            }
        }
    }
}
