//! Aggregation of opinion groups and per-review scores into one reputation
//! value per entity, plus the category distribution and top-k rankings the
//! report presents.
//!
//! Four aggregators cover the four pipelines: a per-polarity group mean
//! fused by a weighted arithmetic mean (cascade pipeline), a per-class
//! custom score weighted by class size (fine-grained pipeline), and a
//! review-score-weighted rating mean shared by the attribute-aggregation
//! and credibility pipelines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grouping::OpinionGroup;
use crate::sentiment::FineGrainedLabel;

#[derive(Debug, Error)]
pub enum ReputationError {
    #[error("cannot aggregate zero opinion groups")]
    NoGroups,
    #[error("cannot aggregate zero reviews")]
    NoReviews,
    #[error("opinion group '{seed_review_id}' has no members")]
    MalformedGroup { seed_review_id: String },
    #[error("the {polarity} polarity reports {count} reviews but {rep} reputation value(s)")]
    InconsistentPolarity {
        polarity: &'static str,
        count: usize,
        rep: usize,
    },
    #[error("both polarities are empty")]
    BothPolaritiesEmpty,
    #[error("got {scores} scores but {ratings} ratings")]
    LengthMismatch { scores: usize, ratings: usize },
    #[error("maximum rating must be positive, got {0}")]
    InvalidMaxRating(f64),
    #[error("rating scale must span at least 1, got {0}")]
    InvalidScale(u32),
}

/// Mean over opinion groups of (rating sum × similarity sum) / size²:
/// each group contributes its similarity-weighted average rating, damped
/// by how coherent the group is.
pub fn group_reputation(groups: &[OpinionGroup]) -> Result<f64, ReputationError> {
    if groups.is_empty() {
        return Err(ReputationError::NoGroups);
    }
    let mut total = 0.0;
    for group in groups {
        if group.n == 0 {
            return Err(ReputationError::MalformedGroup {
                seed_review_id: group.seed_review_id.clone(),
            });
        }
        total += group.sv * group.ss / (group.n * group.n) as f64;
    }
    Ok(total / groups.len() as f64)
}

/// Weighted arithmetic mean of the two polarity reputations, weighted by
/// their review counts. A polarity with no reviews passes `None`; at least
/// one polarity must be populated.
pub fn final_reputation(
    rep_positive: Option<f64>,
    count_positive: usize,
    rep_negative: Option<f64>,
    count_negative: usize,
) -> Result<f64, ReputationError> {
    let check = |rep: &Option<f64>, count: usize, polarity: &'static str| {
        if rep.is_some() == (count > 0) {
            Ok(())
        } else {
            Err(ReputationError::InconsistentPolarity {
                polarity,
                count,
                rep: usize::from(rep.is_some()),
            })
        }
    };
    check(&rep_positive, count_positive, "positive")?;
    check(&rep_negative, count_negative, "negative")?;
    match (rep_positive, rep_negative) {
        (Some(p), Some(n)) => {
            let total = (count_positive + count_negative) as f64;
            Ok((p * count_positive as f64 + n * count_negative as f64) / total)
        }
        (Some(p), None) => Ok(p),
        (None, Some(n)) => Ok(n),
        (None, None) => Err(ReputationError::BothPolaritiesEmpty),
    }
}

/// Per-class custom score: (max rating × similarity sum + rating sum)
/// divided by twice the class size — the midpoint of the class's coherence
/// (scaled to the rating range) and its average rating.
pub fn class_custom_score(
    max_rating: f64,
    group: &OpinionGroup,
) -> Result<f64, ReputationError> {
    if !max_rating.is_finite() || max_rating <= 0.0 {
        return Err(ReputationError::InvalidMaxRating(max_rating));
    }
    if group.n == 0 {
        return Err(ReputationError::MalformedGroup {
            seed_review_id: group.seed_review_id.clone(),
        });
    }
    Ok((max_rating * group.ss + group.sv) / (2.0 * group.n as f64))
}

/// Class scores fused by class size: Σ score·n / Σ n.
pub fn reputation_from_class_scores(
    scores: &[(f64, usize)],
) -> Result<f64, ReputationError> {
    let total: usize = scores.iter().map(|(_, n)| n).sum();
    if total == 0 {
        return Err(ReputationError::NoReviews);
    }
    let weighted: f64 = scores.iter().map(|(s, n)| s * *n as f64).sum();
    Ok(weighted / total as f64)
}

/// Review-score-weighted mean rating: Σ score·rating / number of reviews.
pub fn reputation_from_scores(
    review_scores: &[f64],
    ratings: &[f64],
) -> Result<f64, ReputationError> {
    if review_scores.len() != ratings.len() {
        return Err(ReputationError::LengthMismatch {
            scores: review_scores.len(),
            ratings: ratings.len(),
        });
    }
    if ratings.is_empty() {
        return Err(ReputationError::NoReviews);
    }
    let weighted: f64 = review_scores
        .iter()
        .zip(ratings)
        .map(|(s, v)| s * v)
        .sum();
    Ok(weighted / ratings.len() as f64)
}

/// Display names of the five rating categories, most negative first.
pub const CATEGORY_LABELS: [&str; 5] = ["very bad", "bad", "neutral", "good", "very good"];

/// One slice of the category distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryShare {
    pub label: String,
    pub count: u64,
    /// Share of all reviews, in percent, rounded to two decimals.
    pub percent: f64,
}

/// Rounds to `decimals` places, halves away from zero.
pub fn round_half_away(value: f64, decimals: u32) -> f64 {
    let factor = 10f64.powi(decimals as i32);
    (value * factor).round() / factor
}

/// The category bucket (0 = very bad … 4 = very good) a rating falls into:
/// the scale is split into five equal spans, fractional ratings rounding
/// half away from zero first. On a 5-point scale the buckets are the five
/// ratings themselves; on a 10-point scale they are {1–2, …, 9–10}.
pub fn rating_bucket(rating: f64, scale_max: u32) -> Result<usize, ReputationError> {
    if scale_max == 0 {
        return Err(ReputationError::InvalidScale(scale_max));
    }
    let rounded = rating.round().clamp(1.0, scale_max as f64);
    let bucket = (5.0 * rounded / scale_max as f64).ceil() as usize - 1;
    Ok(bucket.min(4))
}

fn shares_from_counts(counts: [u64; 5]) -> Result<Vec<CategoryShare>, ReputationError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(ReputationError::NoReviews);
    }
    Ok(CATEGORY_LABELS
        .iter()
        .zip(counts)
        .map(|(label, count)| CategoryShare {
            label: label.to_string(),
            count,
            percent: round_half_away(100.0 * count as f64 / total as f64, 2),
        })
        .collect())
}

/// Buckets every rating and reports count and percentage per category,
/// most negative category first.
pub fn category_distribution(
    ratings: &[f64],
    scale_max: u32,
) -> Result<Vec<CategoryShare>, ReputationError> {
    let mut counts = [0u64; 5];
    for &rating in ratings {
        counts[rating_bucket(rating, scale_max)?] += 1;
    }
    shares_from_counts(counts)
}

/// Category distribution over predicted five-point sentiment classes
/// instead of ratings: each class maps onto the category at its own
/// position of the scale.
pub fn category_distribution_from_labels(
    labels: &[FineGrainedLabel],
) -> Result<Vec<CategoryShare>, ReputationError> {
    let mut counts = [0u64; 5];
    for &label in labels {
        counts[label.index()] += 1;
    }
    shares_from_counts(counts)
}

/// A review as the ranking stage sees it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedReview {
    pub review_id: String,
    /// The pipeline's per-review score (review score, or sentiment
    /// strength for the pipelines that rank by classifier confidence).
    pub score: f64,
    pub helpful_votes: u64,
    pub posting_year: Option<i32>,
    /// Position in the input corpus; the final tie-breaker.
    pub input_index: usize,
}

/// The top k reviews by score, ties broken by helpful votes, then by
/// recency (unknown years last), then by input order.
pub fn top_k_reviews(candidates: &[RankedReview], k: usize) -> Vec<RankedReview> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| b.helpful_votes.cmp(&a.helpful_votes))
            .then_with(|| b.posting_year.cmp(&a.posting_year))
            .then_with(|| a.input_index.cmp(&b.input_index))
    });
    sorted.truncate(k);
    sorted
}
