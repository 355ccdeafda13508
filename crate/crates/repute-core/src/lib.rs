//! Reputation-generation engine for customer reviews.
//!
//! The crate mines a set of reviews for one entity (text, star rating,
//! helpfulness votes, posting year, author statistics) and produces a single
//! numerical reputation value plus the material for a report: an
//! opinion-category distribution and the top-k positive and negative reviews.
//!
//! Four pipelines are provided, selected by [`pipeline::PipelineKind`]:
//!
//! * **cascade-fusion** — binary polarity via a Naive Bayes / rating / SVM
//!   cascade, opinion fusion into principal opinion sets per polarity, and a
//!   weighted mean over both polarities.
//! * **fine-grained** — five-way sentiment intensity classes, one opinion
//!   group per class, and a class-size-weighted mean of class scores.
//! * **attribute-aggregation** — per-review helpfulness/time/sentiment
//!   scores averaged into a review score that scales the review's rating.
//! * **credibility** — helpfulness/time/user-credibility scores combined by
//!   fixed weights instead of a plain mean.

pub mod corpus;
pub mod evaluation;
pub mod features;
pub mod grouping;
pub mod pipeline;
pub mod report;
pub mod reputation;
pub mod scoring;
pub mod sentiment;
