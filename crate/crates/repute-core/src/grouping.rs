//! Fusion of individual reviews into opinion groups.
//!
//! Reviews arrive in corpus order. The first review opens a group and
//! becomes its seed; every later review joins the earliest-seeded group
//! whose seed it resembles at least as strongly as the similarity threshold
//! t0, or opens a new group of its own. A group carries the three numbers
//! the reputation stage consumes: its size, its similarity sum (the seed
//! counts as exactly 1), and its rating sum.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{cosine, DocVector};
use crate::sentiment::FineGrainedLabel;

#[derive(Debug, Error)]
pub enum GroupingError {
    #[error("similarity threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("no vector for review '{review_id}'")]
    MissingVector { review_id: String },
    #[error("no rating for review '{review_id}'")]
    MissingRating { review_id: String },
    #[error("vector for review '{review_id}' has dimension {got}, expected {expected}")]
    DimensionMismatch {
        review_id: String,
        expected: usize,
        got: usize,
    },
    #[error("got {left} {left_name} but {right} {right_name}")]
    LengthMismatch {
        left: usize,
        left_name: &'static str,
        right: usize,
        right_name: &'static str,
    },
    #[error("review index {index} outside a corpus of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("review index {index} appears in both polarity sets")]
    OverlappingPolaritySets { index: usize },
    #[error("cannot compute statistics of an empty group")]
    EmptyGroup,
}

/// Parameters of the fusion pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupingConfig {
    /// Minimum cosine similarity to the seed for joining its group.
    pub t0: f64,
}

impl GroupingConfig {
    pub fn new(t0: f64) -> Result<Self, GroupingError> {
        if !t0.is_finite() || !(0.0..=1.0).contains(&t0) {
            return Err(GroupingError::InvalidThreshold(t0));
        }
        Ok(GroupingConfig { t0 })
    }
}

/// One fused opinion group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionGroup {
    pub seed_review_id: String,
    /// Members in joining order; the seed is always first.
    pub member_review_ids: Vec<String>,
    /// Number of members, seed included.
    pub n: usize,
    /// Similarity sum: 1 for the seed plus each member's (nonnegative)
    /// cosine similarity to the seed.
    pub ss: f64,
    /// Sum of the members' ratings.
    pub sv: f64,
}

/// Groups `ids` (in the given order) by greedy threshold fusion. Every id
/// must have a vector and a rating; vectors must share one dimension.
pub fn fuse_and_group(
    ids: &[String],
    vectors: &HashMap<String, DocVector>,
    ratings: &HashMap<String, f64>,
    config: &GroupingConfig,
) -> Result<Vec<OpinionGroup>, GroupingError> {
    GroupingConfig::new(config.t0)?;
    let mut dim: Option<usize> = None;
    let mut groups: Vec<OpinionGroup> = Vec::new();
    let mut seed_vectors: Vec<&DocVector> = Vec::new();

    for id in ids {
        let vector = vectors
            .get(id)
            .ok_or_else(|| GroupingError::MissingVector {
                review_id: id.clone(),
            })?;
        let expected = *dim.get_or_insert(vector.len());
        if vector.len() != expected {
            return Err(GroupingError::DimensionMismatch {
                review_id: id.clone(),
                expected,
                got: vector.len(),
            });
        }
        let rating = *ratings
            .get(id)
            .ok_or_else(|| GroupingError::MissingRating {
                review_id: id.clone(),
            })?;

        let joined = seed_vectors
            .iter()
            .position(|seed| cosine(seed, vector) >= config.t0);
        match joined {
            Some(g) => {
                let similarity = cosine(seed_vectors[g], vector).max(0.0);
                let group = &mut groups[g];
                group.member_review_ids.push(id.clone());
                group.n += 1;
                group.ss += similarity;
                group.sv += rating;
            }
            None => {
                groups.push(OpinionGroup {
                    seed_review_id: id.clone(),
                    member_review_ids: vec![id.clone()],
                    n: 1,
                    ss: 1.0,
                    sv: rating,
                });
                seed_vectors.push(vector);
            }
        }
    }
    Ok(groups)
}

/// Statistics of one already-formed group, first member as seed:
/// (size, similarity sum, rating sum).
pub fn group_statistics(
    vectors: &[DocVector],
    ratings: &[f64],
) -> Result<(usize, f64, f64), GroupingError> {
    if vectors.is_empty() {
        return Err(GroupingError::EmptyGroup);
    }
    if vectors.len() != ratings.len() {
        return Err(GroupingError::LengthMismatch {
            left: vectors.len(),
            left_name: "vectors",
            right: ratings.len(),
            right_name: "ratings",
        });
    }
    let seed = &vectors[0];
    let mut ss = 1.0;
    for v in &vectors[1..] {
        if v.len() != seed.len() {
            return Err(GroupingError::DimensionMismatch {
                review_id: String::new(),
                expected: seed.len(),
                got: v.len(),
            });
        }
        ss += cosine(seed, v).max(0.0);
    }
    Ok((vectors.len(), ss, ratings.iter().sum()))
}

/// Fuses the positive and negative subsets of a corpus separately. The two
/// index sets must be disjoint and in range; they need not cover the corpus.
#[allow(clippy::too_many_arguments)]
pub fn group_by_polarity(
    ids: &[String],
    vectors: &HashMap<String, DocVector>,
    ratings: &HashMap<String, f64>,
    positive: &[usize],
    negative: &[usize],
    config: &GroupingConfig,
) -> Result<(Vec<OpinionGroup>, Vec<OpinionGroup>), GroupingError> {
    let mut seen = vec![false; ids.len()];
    for &index in positive.iter().chain(negative) {
        if index >= ids.len() {
            return Err(GroupingError::IndexOutOfRange {
                index,
                len: ids.len(),
            });
        }
        if seen[index] {
            return Err(GroupingError::OverlappingPolaritySets { index });
        }
        seen[index] = true;
    }
    let subset = |indices: &[usize]| -> Vec<String> {
        let mut picked: Vec<usize> = indices.to_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| ids[i].clone()).collect()
    };
    let positive_groups = fuse_and_group(&subset(positive), vectors, ratings, config)?;
    let negative_groups = fuse_and_group(&subset(negative), vectors, ratings, config)?;
    Ok((positive_groups, negative_groups))
}

/// Treats each predicted five-point class as one opinion group, seeded by
/// its first review in corpus order. Classes with no reviews are absent
/// from the result.
pub fn group_by_fine_grained(
    ids: &[String],
    labels: &[FineGrainedLabel],
    vectors: &HashMap<String, DocVector>,
    ratings: &HashMap<String, f64>,
) -> Result<BTreeMap<FineGrainedLabel, OpinionGroup>, GroupingError> {
    if ids.len() != labels.len() {
        return Err(GroupingError::LengthMismatch {
            left: ids.len(),
            left_name: "reviews",
            right: labels.len(),
            right_name: "labels",
        });
    }
    let mut by_class: BTreeMap<FineGrainedLabel, Vec<&String>> = BTreeMap::new();
    for (id, &label) in ids.iter().zip(labels) {
        by_class.entry(label).or_default().push(id);
    }
    let mut out = BTreeMap::new();
    for (label, members) in by_class {
        let mut member_vectors = Vec::with_capacity(members.len());
        let mut member_ratings = Vec::with_capacity(members.len());
        for id in &members {
            member_vectors.push(
                vectors
                    .get(*id)
                    .ok_or_else(|| GroupingError::MissingVector {
                        review_id: (*id).clone(),
                    })?
                    .clone(),
            );
            member_ratings.push(*ratings.get(*id).ok_or_else(|| {
                GroupingError::MissingRating {
                    review_id: (*id).clone(),
                }
            })?);
        }
        let (n, ss, sv) = group_statistics(&member_vectors, &member_ratings)?;
        out.insert(
            label,
            OpinionGroup {
                seed_review_id: members[0].clone(),
                member_review_ids: members.into_iter().cloned().collect(),
                n,
                ss,
                sv,
            },
        );
    }
    Ok(out)
}
