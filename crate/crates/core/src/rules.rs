//! Transition functions for the two automata.
//!
//! Both rules are pure: the random draw is an explicit argument, so the
//! engine decides when randomness is consumed.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::grid::{Adoption, CellKind, CellState, Neighborhood};

/// A probability sampled in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RandomDraw(f64);

impl RandomDraw {
    /// Returns `None` outside `[0, 1)`.
    pub fn new(p: f64) -> Option<Self> {
        (0.0..1.0).contains(&p).then_some(Self(p))
    }

    #[inline]
    pub fn p(self) -> f64 {
        self.0
    }
}

/// Parameters of the news adoption test `p' * m > threshold`, with
/// `p' = p * boost_factor` when `m < boost_below`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewsRuleParams {
    pub adoption_threshold: f64,
    pub boost_factor: f64,
    pub boost_below: u8,
}

impl Default for NewsRuleParams {
    fn default() -> Self {
        Self {
            adoption_threshold: 1.0,
            boost_factor: 1.5,
            boost_below: 3,
        }
    }
}

impl NewsRuleParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.adoption_threshold > 0.0 && self.adoption_threshold.is_finite()) {
            return Err(ConfigError::RuleParams(format!(
                "adoption_threshold must be positive, got {}",
                self.adoption_threshold
            )));
        }
        if !(self.boost_factor >= 1.0 && self.boost_factor.is_finite()) {
            return Err(ConfigError::RuleParams(format!(
                "boost_factor must be >= 1, got {}",
                self.boost_factor
            )));
        }
        if self.boost_below > 8 {
            return Err(ConfigError::RuleParams(format!(
                "boost_below must be in 0..=8, got {}",
                self.boost_below
            )));
        }
        Ok(())
    }
}

/// Parameters of the innovation adoption test `p * m > threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnovationRuleParams {
    pub threshold: f64,
}

impl Default for InnovationRuleParams {
    fn default() -> Self {
        Self { threshold: 1.0 }
    }
}

impl InnovationRuleParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(ConfigError::RuleParams(format!(
                "threshold must be positive, got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Whether a White cell with `m` Black neighbors picks up the news.
#[inline]
pub fn adopts_news(m: usize, p: f64, params: &NewsRuleParams) -> bool {
    let effective = if m < params.boost_below as usize {
        p * params.boost_factor
    } else {
        p
    };
    effective * m as f64 > params.adoption_threshold
}

#[inline]
pub fn adopts_innovation(m: usize, p: f64, params: &InnovationRuleParams) -> bool {
    p * m as f64 > params.threshold
}

/// One synchronous update of a news cell.
///
/// White may turn Black; Black turns Grey once no White neighbor is left;
/// Grey turns White (forgotten) under the same condition. The draw is only
/// read for White cells.
pub fn next_news_state(
    current: CellState,
    neighbors: &Neighborhood<CellState>,
    draw: RandomDraw,
    params: &NewsRuleParams,
) -> CellState {
    match current {
        CellState::White => {
            if adopts_news(neighbors.count(CellState::Black), draw.p(), params) {
                CellState::Black
            } else {
                CellState::White
            }
        }
        CellState::Black if !neighbors.contains(CellState::White) => CellState::Grey,
        CellState::Grey if !neighbors.contains(CellState::White) => CellState::White,
        other => other,
    }
}

pub fn next_innovation_state(
    current: Adoption,
    neighbors: &Neighborhood<Adoption>,
    draw: RandomDraw,
    params: &InnovationRuleParams,
) -> Adoption {
    match current {
        Adoption::Adopted => Adoption::Adopted,
        Adoption::NotAdopted => {
            if adopts_innovation(neighbors.count(Adoption::Adopted), draw.p(), params) {
                Adoption::Adopted
            } else {
                Adoption::NotAdopted
            }
        }
    }
}

/// A transition rule the engine can drive.
pub trait Rule: Send + Sync {
    type State: CellKind;

    /// Whether a cell in this state consumes a random draw each step.
    fn draws(&self, state: Self::State) -> bool;

    fn next_state(
        &self,
        current: Self::State,
        neighbors: &Neighborhood<Self::State>,
        draw: RandomDraw,
    ) -> Self::State;

    /// True when no cell in `grid` could still change stochastically, so
    /// the remaining dynamics are deterministic.
    fn is_quiescent(&self, grid: &crate::grid::Grid<Self::State>) -> bool;
}

impl Rule for NewsRuleParams {
    type State = CellState;

    #[inline]
    fn draws(&self, state: CellState) -> bool {
        state == CellState::White
    }

    #[inline]
    fn next_state(
        &self,
        current: CellState,
        neighbors: &Neighborhood<CellState>,
        draw: RandomDraw,
    ) -> CellState {
        next_news_state(current, neighbors, draw, self)
    }

    fn is_quiescent(&self, grid: &crate::grid::Grid<CellState>) -> bool {
        // White -> Black needs at least one Black neighbor.
        !grid.cells().contains(&CellState::Black)
    }
}

impl Rule for InnovationRuleParams {
    type State = Adoption;

    #[inline]
    fn draws(&self, state: Adoption) -> bool {
        state == Adoption::NotAdopted
    }

    #[inline]
    fn next_state(
        &self,
        current: Adoption,
        neighbors: &Neighborhood<Adoption>,
        draw: RandomDraw,
    ) -> Adoption {
        next_innovation_state(current, neighbors, draw, self)
    }

    fn is_quiescent(&self, grid: &crate::grid::Grid<Adoption>) -> bool {
        // p < 1, so a cell with m adopted neighbors can only flip if m > threshold.
        (0..grid.height()).all(|row| {
            (0..grid.width()).all(|col| {
                grid.cells()[row * grid.width() + col] == Adoption::Adopted
                    || grid
                        .neighborhood_unchecked(row, col)
                        .count(Adoption::Adopted) as f64
                        <= self.threshold
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn news() -> NewsRuleParams {
        NewsRuleParams::default()
    }

    fn draw(p: f64) -> RandomDraw {
        RandomDraw::new(p).unwrap()
    }

    #[test]
    fn news_adoption_examples() {
        assert!(!adopts_news(0, 0.99, &news()));
        // 0.4 * 1.5 * 2 = 1.2
        assert!(adopts_news(2, 0.4, &news()));
        // 0.3 * 1.5 * 2 = 0.9
        assert!(!adopts_news(2, 0.3, &news()));
        // no boost at m = 8: 0.2 * 8 = 1.6
        assert!(adopts_news(8, 0.2, &news()));
    }

    #[test]
    fn strict_inequality() {
        // 0.5 * 2 == 1 exactly, not adopted
        assert!(!adopts_news(
            2,
            0.5,
            &NewsRuleParams {
                boost_factor: 1.0,
                ..news()
            }
        ));
        assert!(!adopts_innovation(
            4,
            0.25,
            &InnovationRuleParams::default()
        ));
    }

    #[test]
    fn innovation_adoption_examples() {
        let r = InnovationRuleParams::default();
        assert!(!adopts_innovation(0, 0.9, &r));
        assert!(adopts_innovation(5, 0.25, &r));
        assert!(!adopts_innovation(8, 0.1, &r));
    }

    #[test]
    fn news_transitions() {
        use CellState::*;
        let all_grey = Neighborhood::from_states(&[Grey; 8]);
        let one_white =
            Neighborhood::from_states(&[Grey, Grey, White, Black, Black, Grey, Grey, Grey]);
        let no_black = Neighborhood::from_states(&[White; 8]);
        for p in [0.0, 0.5, 0.999] {
            assert_eq!(next_news_state(Black, &all_grey, draw(p), &news()), Grey);
            assert_eq!(next_news_state(Black, &one_white, draw(p), &news()), Black);
            assert_eq!(next_news_state(Grey, &all_grey, draw(p), &news()), White);
            assert_eq!(next_news_state(Grey, &one_white, draw(p), &news()), Grey);
            assert_eq!(next_news_state(White, &no_black, draw(p), &news()), White);
        }
        // empty neighborhood: the "no White around" condition holds vacuously
        let empty = Neighborhood::<CellState>::from_states(&[]);
        assert_eq!(next_news_state(Black, &empty, draw(0.1), &news()), Grey);
        assert_eq!(next_news_state(Grey, &empty, draw(0.1), &news()), White);
    }

    #[test]
    fn innovation_transitions() {
        use Adoption::*;
        let r = InnovationRuleParams::default();
        let none = Neighborhood::from_states(&[NotAdopted; 8]);
        let five = Neighborhood::from_states(&[
            Adopted, Adopted, Adopted, Adopted, Adopted, NotAdopted, NotAdopted, NotAdopted,
        ]);
        assert_eq!(
            next_innovation_state(Adopted, &none, draw(0.0), &r),
            Adopted
        );
        assert_eq!(
            next_innovation_state(NotAdopted, &none, draw(0.99), &r),
            NotAdopted
        );
        assert_eq!(
            next_innovation_state(NotAdopted, &five, draw(0.25), &r),
            Adopted
        );
    }

    #[test]
    fn param_validation() {
        assert!(news().validate().is_ok());
        assert!(NewsRuleParams {
            adoption_threshold: 0.0,
            ..news()
        }
        .validate()
        .is_err());
        assert!(NewsRuleParams {
            boost_factor: 0.5,
            ..news()
        }
        .validate()
        .is_err());
        assert!(NewsRuleParams {
            boost_below: 9,
            ..news()
        }
        .validate()
        .is_err());
        assert!(InnovationRuleParams { threshold: -1.0 }.validate().is_err());
        assert!(RandomDraw::new(1.0).is_none());
        assert!(RandomDraw::new(-0.1).is_none());
    }

    fn arb_state() -> impl Strategy<Value = CellState> {
        prop_oneof![
            Just(CellState::White),
            Just(CellState::Grey),
            Just(CellState::Black)
        ]
    }

    proptest! {
        #[test]
        fn news_adoption_monotone(m in 0usize..8, p in 0.0f64..1.0, dp in 0.0f64..1.0) {
            let r = news();
            let p2 = (p + dp * (1.0 - p)).min(0.999_999);
            if adopts_news(m, p, &r) {
                prop_assert!(adopts_news(m + 1, p, &r));
                prop_assert!(adopts_news(m, p2, &r));
            }
        }

        #[test]
        fn only_legal_news_transitions(
            cur in arb_state(),
            ns in proptest::collection::vec(arb_state(), 0..=8),
            p in 0.0f64..1.0,
        ) {
            use CellState::*;
            let next = next_news_state(cur, &Neighborhood::from_states(&ns), draw(p), &news());
            let legal = next == cur
                || matches!((cur, next), (White, Black) | (Black, Grey) | (Grey, White));
            prop_assert!(legal, "{:?} -> {:?}", cur, next);
        }

        #[test]
        fn news_rule_is_pure(
            cur in arb_state(),
            ns in proptest::collection::vec(arb_state(), 0..=8),
            p in 0.0f64..1.0,
        ) {
            let n = Neighborhood::from_states(&ns);
            prop_assert_eq!(
                next_news_state(cur, &n, draw(p), &news()),
                next_news_state(cur, &n, draw(p), &news())
            );
        }
    }
}
