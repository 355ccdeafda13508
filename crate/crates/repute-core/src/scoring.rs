//! Per-review quality scores and their combination into a review score.
//!
//! Three component scores live here — helpfulness (log-scaled vote count),
//! recency (linear decay with a floor), and reviewer credibility (sigmoid of
//! the reviewer's helpful-vote rate) — together with the uniform and
//! weighted averages that fuse them with a sentiment strength into one
//! review score in [0, 1].

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("review '{review_id}' is dated {posting_year}, after the current year {current_year}")]
    FutureDatedReview {
        review_id: String,
        posting_year: i32,
        current_year: i32,
    },
    #[error("reviewer has zero recorded reviews")]
    NoReviewerHistory,
    #[error("score weights must be positive and sum to a positive value, got ({0}, {1}, {2})")]
    InvalidWeights(f64, f64, f64),
}

/// Helpfulness floor used by the uniform-average pipeline.
pub const DEFAULT_FLOOR_UNIFORM: f64 = 0.75;
/// Helpfulness floor used by the weighted (credibility) pipeline.
pub const DEFAULT_FLOOR_WEIGHTED: f64 = 0.8;

/// Age (in years) at which the time score bottoms out.
const TIME_DECAY_HORIZON: i32 = 100;
/// Time score at and beyond the horizon.
const TIME_FLOOR: f64 = 0.8;
/// Per-year decay of the time score.
const TIME_DECAY_PER_YEAR: f64 = 0.002;

/// Log-scaled helpfulness of one review: ln(votes)/ln(corpus max), clamped
/// below at `floor`. Reviews with no votes, and corpora too small for the
/// log ratio to be meaningful (max ≤ 1), sit at the floor.
pub fn helpfulness_score(helpful_votes: u64, max_votes: u64, floor: f64) -> f64 {
    if helpful_votes == 0 || max_votes <= 1 {
        return floor;
    }
    let ratio = (helpful_votes as f64).ln() / (max_votes as f64).ln();
    if ratio <= floor {
        floor
    } else {
        ratio
    }
}

/// Recency of one review: 1 when posted this year, minus 0.002 per year of
/// age, never below 0.8 (reached at 100 years). Posting years in the future
/// are rejected.
pub fn time_score(
    posting_year: i32,
    current_year: i32,
    review_id: &str,
) -> Result<f64, ScoringError> {
    if posting_year > current_year {
        return Err(ScoringError::FutureDatedReview {
            review_id: review_id.to_string(),
            posting_year,
            current_year,
        });
    }
    let age = current_year - posting_year;
    if age >= TIME_DECAY_HORIZON {
        Ok(TIME_FLOOR)
    } else {
        Ok(1.0 - age as f64 * TIME_DECAY_PER_YEAR)
    }
}

/// Reviewer credibility: sigmoid of helpful votes per review,
/// 1/(1 + e^(−h/n)). A reviewer with no recorded reviews is an error;
/// callers with no reviewer statistics at all should use
/// [`NEUTRAL_CREDIBILITY`] instead of calling this.
pub fn credibility_score(helpful_votes: u64, review_count: u64) -> Result<f64, ScoringError> {
    if review_count == 0 {
        return Err(ScoringError::NoReviewerHistory);
    }
    let rate = helpful_votes as f64 / review_count as f64;
    Ok(1.0 / (1.0 + (-rate).exp()))
}

/// Credibility assigned when a review carries no reviewer statistics —
/// the sigmoid's value at rate 0.
pub const NEUTRAL_CREDIBILITY: f64 = 0.5;

/// Uniform average of helpfulness, time, and sentiment strength.
pub fn review_score_uniform(h: f64, t: f64, s: f64) -> f64 {
    (h + t + s) / 3.0
}

/// Positive weights for [`review_score_weighted`], normalized by their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub helpfulness: f64,
    pub time: f64,
    pub credibility: f64,
}

impl ScoreWeights {
    pub fn new(helpfulness: f64, time: f64, credibility: f64) -> Result<Self, ScoringError> {
        let all_finite =
            helpfulness.is_finite() && time.is_finite() && credibility.is_finite();
        if !all_finite || helpfulness <= 0.0 || time <= 0.0 || credibility <= 0.0 {
            return Err(ScoringError::InvalidWeights(helpfulness, time, credibility));
        }
        Ok(ScoreWeights {
            helpfulness,
            time,
            credibility,
        })
    }

    pub fn sum(&self) -> f64 {
        self.helpfulness + self.time + self.credibility
    }
}

impl Default for ScoreWeights {
    /// Helpfulness 0.4, time 0.35, credibility 0.25.
    fn default() -> Self {
        ScoreWeights {
            helpfulness: 0.4,
            time: 0.35,
            credibility: 0.25,
        }
    }
}

/// Weighted average of helpfulness, time, and credibility:
/// (αH + βT + γC) / (α + β + γ).
pub fn review_score_weighted(h: f64, t: f64, c: f64, weights: &ScoreWeights) -> f64 {
    (weights.helpfulness * h + weights.time * t + weights.credibility * c) / weights.sum()
}

/// All per-review score components, as computed by a pipeline run. Fields
/// not used by the active pipeline stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewScoreBreakdown {
    pub review_id: String,
    pub helpfulness: f64,
    pub time: f64,
    pub sentiment_strength: Option<f64>,
    pub credibility: Option<f64>,
    pub review_score: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const TOL: f64 = 1e-6;

    #[test]
    fn helpfulness_at_the_maximum_is_one() {
        assert_abs_diff_eq!(helpfulness_score(100, 100, 0.75), 1.0, epsilon = TOL);
    }

    #[test]
    fn helpfulness_log_ratio() {
        // ln(50)/ln(100) = 0.849485...
        assert_abs_diff_eq!(helpfulness_score(50, 100, 0.75), 0.849485, epsilon = TOL);
    }

    #[test]
    fn helpfulness_floors_zero_votes_and_tiny_corpora() {
        assert_eq!(helpfulness_score(0, 100, 0.75), 0.75);
        assert_eq!(helpfulness_score(5, 1, 0.75), 0.75);
        assert_eq!(helpfulness_score(0, 0, 0.8), 0.8);
        // ln(1)/ln(100) = 0 < floor.
        assert_eq!(helpfulness_score(1, 100, 0.75), 0.75);
    }

    #[test]
    fn time_score_decays_linearly_to_a_floor() {
        assert_abs_diff_eq!(time_score(2020, 2020, "r").unwrap(), 1.0, epsilon = TOL);
        assert_abs_diff_eq!(time_score(2010, 2020, "r").unwrap(), 0.98, epsilon = TOL);
        assert_abs_diff_eq!(time_score(2000, 2020, "r").unwrap(), 0.96, epsilon = TOL);
        assert_abs_diff_eq!(time_score(1900, 2020, "r").unwrap(), 0.8, epsilon = TOL);
        assert_abs_diff_eq!(time_score(1800, 2020, "r").unwrap(), 0.8, epsilon = TOL);
    }

    #[test]
    fn future_posting_year_is_rejected() {
        let err = time_score(2021, 2020, "r9").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("r9") && message.contains("2021"), "{message}");
    }

    #[test]
    fn credibility_is_a_sigmoid_of_the_vote_rate() {
        assert_abs_diff_eq!(credibility_score(0, 5).unwrap(), 0.5, epsilon = TOL);
        assert_abs_diff_eq!(
            credibility_score(10, 10).unwrap(),
            0.7310586,
            epsilon = TOL
        );
        assert!(matches!(
            credibility_score(3, 0),
            Err(ScoringError::NoReviewerHistory)
        ));
    }

    #[test]
    fn uniform_review_scores_match_hand_computed_rows() {
        let rows: &[(f64, f64, f64, f64)] = &[
            (1.0, 0.968, 0.99732805, 0.98844268),
            (0.75, 0.982, 0.99679191, 0.9095973),
            (0.87468842, 0.974, 0.99608659, 0.94825834),
            (0.91100877, 0.964, 0.9970323, 0.95734702),
            (0.77448754, 0.96, 0.99694509, 0.91047754),
        ];
        for &(h, t, s, expected) in rows {
            assert_abs_diff_eq!(review_score_uniform(h, t, s), expected, epsilon = TOL);
        }
    }

    #[test]
    fn weighted_review_scores_match_hand_computed_rows() {
        let w = ScoreWeights::default();
        let rows: &[(f64, f64, f64, f64)] = &[
            (1.0, 0.994, 1.0, 0.9979),
            (0.8, 0.994, 0.97861669, 0.91255417),
            (0.8, 0.994, 0.99991620, 0.91787905),
            (0.8, 0.996, 1.0, 0.9186),
            (0.96668280, 1.0, 0.95257412, 0.97481665),
        ];
        for &(h, t, c, expected) in rows {
            assert_abs_diff_eq!(review_score_weighted(h, t, c, &w), expected, epsilon = TOL);
        }
    }

    #[test]
    fn invalid_weights_are_rejected() {
        assert!(ScoreWeights::new(0.0, 0.35, 0.25).is_err());
        assert!(ScoreWeights::new(0.4, -0.1, 0.25).is_err());
        assert!(ScoreWeights::new(0.4, f64::NAN, 0.25).is_err());
        assert!(ScoreWeights::new(0.4, 0.35, 0.25).is_ok());
    }

    proptest! {
        #[test]
        fn helpfulness_is_monotone_and_floored(
            votes_a in 0u64..10_000,
            votes_b in 0u64..10_000,
            max in 2u64..10_000,
            floor in 0.0f64..0.95,
        ) {
            let (lo, hi) = if votes_a <= votes_b { (votes_a, votes_b) } else { (votes_b, votes_a) };
            let s_lo = helpfulness_score(lo, max, floor);
            let s_hi = helpfulness_score(hi, max, floor);
            prop_assert!(s_lo <= s_hi + 1e-12);
            prop_assert!(s_lo >= floor);
            if hi == max {
                prop_assert!(s_hi >= 1.0 - 1e-12);
            }
        }

        #[test]
        fn time_score_is_nonincreasing_in_age(age_a in 0i32..300, age_b in 0i32..300) {
            let year = 2020;
            let (young, old) = if age_a <= age_b { (age_a, age_b) } else { (age_b, age_a) };
            let s_young = time_score(year - young, year, "r").unwrap();
            let s_old = time_score(year - old, year, "r").unwrap();
            prop_assert!(s_old <= s_young + 1e-12);
            prop_assert!((0.8..=1.0).contains(&s_old));
        }

        #[test]
        fn credibility_increases_with_the_vote_rate(
            h_lo in 0u64..1_000,
            h_hi in 0u64..1_000,
            n in 1u64..100,
        ) {
            let (lo, hi) = if h_lo <= h_hi { (h_lo, h_hi) } else { (h_hi, h_lo) };
            let c_lo = credibility_score(lo, n).unwrap();
            let c_hi = credibility_score(hi, n).unwrap();
            prop_assert!(c_lo <= c_hi + 1e-15);
            prop_assert!((0.5..=1.0).contains(&c_lo));
        }

        #[test]
        fn combined_scores_stay_between_their_inputs(
            h in 0.0f64..=1.0,
            t in 0.8f64..=1.0,
            x in 0.0f64..=1.0,
        ) {
            let lo = h.min(t).min(x);
            let hi = h.max(t).max(x);
            let uniform = review_score_uniform(h, t, x);
            prop_assert!(uniform >= lo - 1e-12 && uniform <= hi + 1e-12);
            let weighted = review_score_weighted(h, t, x, &ScoreWeights::default());
            prop_assert!(weighted >= lo - 1e-12 && weighted <= hi + 1e-12);
        }

        #[test]
        fn equal_weights_reduce_to_the_uniform_average(
            h in 0.0f64..=1.0,
            t in 0.0f64..=1.0,
            c in 0.0f64..=1.0,
        ) {
            let w = ScoreWeights::new(1.0, 1.0, 1.0).unwrap();
            let diff = review_score_weighted(h, t, c, &w) - review_score_uniform(h, t, c);
            prop_assert!(diff.abs() < 1e-12);
        }
    }

    #[test]
    fn time_decay_is_continuous_at_the_horizon() {
        let at_99 = time_score(1921, 2020, "r").unwrap();
        let at_100 = time_score(1920, 2020, "r").unwrap();
        assert_abs_diff_eq!(at_99, 0.802, epsilon = 1e-12);
        assert_abs_diff_eq!(at_100, 0.8, epsilon = 1e-12);
    }
}
