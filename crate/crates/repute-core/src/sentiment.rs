//! Sentiment classification: multinomial Naive Bayes, a linear SVM trained
//! by stochastic subgradient descent, and the three-stage cascade that
//! combines them with the review's own star rating.
//!
//! Two label families are supported. Binary polarity (`negative` /
//! `positive`) drives the cascade and opinion fusion; the five-point scale
//! (`strongly_negative` … `strongly_positive`) drives fine-grained scoring.
//! Class orders are fixed — most negative first — so posteriors, argmax
//! tie-breaking, and serialized models are stable across runs.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::{DocVector, Vocabulary};

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("got {docs} documents but {labels} labels")]
    LengthMismatch { docs: usize, labels: usize },
    #[error("class '{0}' has no training examples")]
    MissingClass(String),
    #[error("training data contains fewer than two distinct classes")]
    SingleClass,
    #[error("label '{0}' is not a recognized class label")]
    UnknownLabel(String),
    #[error("smoothing strength must be a positive finite number, got {0}")]
    InvalidAlpha(f64),
    #[error("at least one training epoch is required")]
    NoEpochs,
    #[error("regularization strength must be finite and nonnegative, got {0}")]
    InvalidLambda(f64),
    #[error("vector has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model distinguishes {got} classes where a binary polarity model is required")]
    NotBinary { got: usize },
    #[error("model distinguishes {got} classes where a five-point model is required")]
    NotFineGrained { got: usize },
    #[error("cannot evaluate an empty prediction set")]
    EmptyEvaluation,
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: invalid model file: {source}")]
    InvalidModelFile {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: file holds a '{found}' model, expected '{expected}'")]
    WrongModelKind {
        path: String,
        found: String,
        expected: String,
    },
    #[error("{path}: unsupported model format version {found}, this build reads version {supported}")]
    UnsupportedFormatVersion {
        path: String,
        found: u32,
        supported: u32,
    },
    #[error("{path}: model was trained against a different vocabulary")]
    VocabularyMismatch { path: String },
    #[error("label column mixes zero-based and one-based numeric conventions")]
    MixedLabelConventions,
}

/// Binary polarity classes, most negative first.
pub const BINARY_LABELS: [&str; 2] = ["negative", "positive"];

/// Five-point sentiment classes, most negative first.
pub const FINE_GRAINED_LABELS: [&str; 5] = [
    "strongly_negative",
    "weakly_negative",
    "neutral",
    "weakly_positive",
    "strongly_positive",
];

/// Binary sentiment polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Negative,
    Positive,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Negative => "negative",
            Polarity::Positive => "positive",
        })
    }
}

impl FromStr for Polarity {
    type Err = SentimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "negative" => Ok(Polarity::Negative),
            "positive" => Ok(Polarity::Positive),
            other => Err(SentimentError::UnknownLabel(other.to_string())),
        }
    }
}

/// One step of the five-point sentiment scale. The derived order runs from
/// most negative to most positive.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum FineGrainedLabel {
    StronglyNegative,
    WeaklyNegative,
    Neutral,
    WeaklyPositive,
    StronglyPositive,
}

impl FineGrainedLabel {
    pub const ALL: [FineGrainedLabel; 5] = [
        FineGrainedLabel::StronglyNegative,
        FineGrainedLabel::WeaklyNegative,
        FineGrainedLabel::Neutral,
        FineGrainedLabel::WeaklyPositive,
        FineGrainedLabel::StronglyPositive,
    ];

    /// Position on the scale, 0 (most negative) through 4 (most positive).
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).expect("member of ALL")
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Polarity of this class; `None` for neutral.
    pub fn polarity(self) -> Option<Polarity> {
        match self {
            FineGrainedLabel::StronglyNegative | FineGrainedLabel::WeaklyNegative => {
                Some(Polarity::Negative)
            }
            FineGrainedLabel::Neutral => None,
            FineGrainedLabel::WeaklyPositive | FineGrainedLabel::StronglyPositive => {
                Some(Polarity::Positive)
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        FINE_GRAINED_LABELS[self.index()]
    }
}

impl fmt::Display for FineGrainedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FineGrainedLabel {
    type Err = SentimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FINE_GRAINED_LABELS
            .iter()
            .position(|&l| l == s)
            .and_then(Self::from_index)
            .ok_or_else(|| SentimentError::UnknownLabel(s.to_string()))
    }
}

/// Maps a whole column of raw dataset labels onto the five-point scale.
/// Canonical names pass through; numeric labels are interpreted against the
/// column as a whole — any "0" marks the column zero-based, any "5" marks
/// it one-based (mixing both is an error, and zero-based is assumed when
/// neither endpoint appears).
pub fn map_fine_labels(raw: &[String]) -> Result<Vec<FineGrainedLabel>, SentimentError> {
    let has_zero = raw.iter().any(|l| l == "0");
    let has_five = raw.iter().any(|l| l == "5");
    if has_zero && has_five {
        return Err(SentimentError::MixedLabelConventions);
    }
    let offset = usize::from(has_five);
    raw.iter()
        .map(|label| {
            if let Ok(named) = label.parse::<FineGrainedLabel>() {
                return Ok(named);
            }
            label
                .parse::<usize>()
                .ok()
                .and_then(|n| n.checked_sub(offset))
                .and_then(FineGrainedLabel::from_index)
                .ok_or_else(|| SentimentError::UnknownLabel(label.clone()))
        })
        .collect()
}

/// A classifier's output for one document: the winning label plus the full
/// posterior distribution, aligned with `classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    pub classes: Vec<String>,
    pub posteriors: Vec<f64>,
}

impl Prediction {
    pub fn posterior_of(&self, label: &str) -> Option<f64> {
        self.classes
            .iter()
            .position(|c| c == label)
            .map(|i| self.posteriors[i])
    }

    /// Sentiment strength: the winning class's posterior.
    pub fn strength(&self) -> f64 {
        self.posteriors
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Picks the class order for a training label set: the fixed binary or
/// five-point order when the labels belong to one of those families
/// (requiring every family member to be present), otherwise the distinct
/// labels sorted lexicographically.
fn canonical_classes(labels: &[String]) -> Result<Vec<String>, SentimentError> {
    let observed: BTreeSet<&str> = labels.iter().map(|s| s.as_str()).collect();
    if observed.is_empty() {
        return Err(SentimentError::EmptyCorpus);
    }
    for family in [&BINARY_LABELS[..], &FINE_GRAINED_LABELS[..]] {
        if observed.iter().all(|l| family.contains(l)) {
            if let Some(missing) = family.iter().find(|c| !observed.contains(*c)) {
                return Err(SentimentError::MissingClass(missing.to_string()));
            }
            return Ok(family.iter().map(|s| s.to_string()).collect());
        }
    }
    if observed.len() < 2 {
        return Err(SentimentError::SingleClass);
    }
    Ok(observed.into_iter().map(|s| s.to_string()).collect())
}

fn check_dims(docs: &[DocVector], labels_len: usize) -> Result<usize, SentimentError> {
    if docs.is_empty() {
        return Err(SentimentError::EmptyCorpus);
    }
    if docs.len() != labels_len {
        return Err(SentimentError::LengthMismatch {
            docs: docs.len(),
            labels: labels_len,
        });
    }
    let dim = docs[0].len();
    for doc in docs {
        if doc.len() != dim {
            return Err(SentimentError::DimensionMismatch {
                expected: dim,
                got: doc.len(),
            });
        }
    }
    Ok(dim)
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Multinomial Naive Bayes with additive smoothing, trained on term-count
/// vectors and evaluated in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    classes: Vec<String>,
    log_priors: Vec<f64>,
    /// Per class: log P(term | class), aligned with the vocabulary.
    log_likelihoods: Vec<Vec<f64>>,
    vocab_size: usize,
    alpha: f64,
}

impl NaiveBayesModel {
    pub fn train(
        docs: &[DocVector],
        labels: &[String],
        alpha: f64,
    ) -> Result<Self, SentimentError> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(SentimentError::InvalidAlpha(alpha));
        }
        let dim = check_dims(docs, labels.len())?;
        let classes = canonical_classes(labels)?;
        let class_index = |label: &str| {
            classes
                .iter()
                .position(|c| c == label)
                .expect("canonical_classes covers every training label")
        };

        let mut class_counts = vec![0u64; classes.len()];
        let mut term_counts = vec![vec![0.0f64; dim]; classes.len()];
        for (doc, label) in docs.iter().zip(labels) {
            let c = class_index(label);
            class_counts[c] += 1;
            for (t, &count) in doc.iter().enumerate() {
                term_counts[c][t] += count;
            }
        }

        let n_docs = docs.len() as f64;
        let log_priors = class_counts
            .iter()
            .map(|&n| (n as f64 / n_docs).ln())
            .collect();
        let log_likelihoods = term_counts
            .iter()
            .map(|counts| {
                let total: f64 = counts.iter().sum();
                let denom = total + alpha * dim as f64;
                counts.iter().map(|&c| ((c + alpha) / denom).ln()).collect()
            })
            .collect();

        Ok(NaiveBayesModel {
            classes,
            log_priors,
            log_likelihoods,
            vocab_size: dim,
            alpha,
        })
    }

    pub fn predict(&self, doc: &DocVector) -> Result<Prediction, SentimentError> {
        if doc.len() != self.vocab_size {
            return Err(SentimentError::DimensionMismatch {
                expected: self.vocab_size,
                got: doc.len(),
            });
        }
        let scores: Vec<f64> = self
            .log_priors
            .iter()
            .zip(&self.log_likelihoods)
            .map(|(prior, likes)| {
                prior
                    + doc
                        .iter()
                        .zip(likes)
                        .filter(|(&count, _)| count != 0.0)
                        .map(|(&count, &ll)| count * ll)
                        .sum::<f64>()
            })
            .collect();
        let posteriors = softmax(&scores);
        // First maximum wins ties, i.e. the more negative class.
        let best = posteriors
            .iter()
            .enumerate()
            .rev()
            .max_by(|(_, a), (_, b)| a.partial_cmp(b).expect("posteriors are finite"))
            .map(|(i, _)| i)
            .expect("at least one class");
        Ok(Prediction {
            label: self.classes[best].clone(),
            classes: self.classes.clone(),
            posteriors,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_binary(&self) -> bool {
        self.classes == BINARY_LABELS
    }

    pub fn is_fine_grained(&self) -> bool {
        self.classes == FINE_GRAINED_LABELS
    }
}

/// A linear max-margin classifier over binary polarity, trained by seeded
/// stochastic subgradient descent on the hinge loss with L2 regularization.
/// The kept weights are the epoch snapshot with the lowest regularized
/// objective, so more epochs never return a worse model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    weights: Vec<f64>,
    bias: f64,
    lambda: f64,
    epochs: usize,
    seed: u64,
    epoch_objectives: Vec<f64>,
}

/// A margin classifier's output: the winning polarity and the signed
/// distance behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginPrediction {
    pub label: Polarity,
    pub decision_value: f64,
}

impl LinearSvmModel {
    pub fn train(
        docs: &[DocVector],
        labels: &[String],
        lambda: f64,
        epochs: usize,
        seed: u64,
    ) -> Result<Self, SentimentError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(SentimentError::InvalidLambda(lambda));
        }
        if epochs == 0 {
            return Err(SentimentError::NoEpochs);
        }
        let dim = check_dims(docs, labels.len())?;
        let classes = canonical_classes(labels)?;
        if classes != BINARY_LABELS {
            return Err(SentimentError::NotBinary { got: classes.len() });
        }
        let targets: Vec<f64> = labels
            .iter()
            .map(|l| if l == "positive" { 1.0 } else { -1.0 })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = vec![0.0f64; dim];
        let mut bias = 0.0f64;
        let mut order: Vec<usize> = (0..docs.len()).collect();
        let mut step: u64 = 0;
        let mut best: Option<(Vec<f64>, f64, f64)> = None;
        let mut epoch_objectives = Vec::with_capacity(epochs);

        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                step += 1;
                let eta = if lambda > 0.0 {
                    1.0 / (lambda * step as f64)
                } else {
                    1.0 / (step as f64).sqrt()
                };
                let margin =
                    targets[i] * (dot(&weights, &docs[i]) + bias);
                let shrink = 1.0 - eta * lambda;
                for w in &mut weights {
                    *w *= shrink;
                }
                if margin < 1.0 {
                    for (w, &x) in weights.iter_mut().zip(&docs[i]) {
                        *w += eta * targets[i] * x;
                    }
                    bias += eta * targets[i];
                }
            }
            let objective = regularized_objective(&weights, bias, lambda, docs, &targets);
            epoch_objectives.push(objective);
            if best.as_ref().map_or(true, |(_, _, b)| objective < *b) {
                best = Some((weights.clone(), bias, objective));
            }
        }

        let (weights, bias, _) = best.expect("at least one epoch ran");
        Ok(LinearSvmModel {
            weights,
            bias,
            lambda,
            epochs,
            seed,
            epoch_objectives,
        })
    }

    pub fn predict(&self, doc: &DocVector) -> Result<MarginPrediction, SentimentError> {
        if doc.len() != self.weights.len() {
            return Err(SentimentError::DimensionMismatch {
                expected: self.weights.len(),
                got: doc.len(),
            });
        }
        let decision_value = dot(&self.weights, doc) + self.bias;
        let label = if decision_value > 0.0 {
            Polarity::Positive
        } else {
            Polarity::Negative
        };
        Ok(MarginPrediction {
            label,
            decision_value,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Full-dataset regularized objective recorded at the end of each
    /// training epoch; the kept snapshot attains the minimum.
    pub fn epoch_objectives(&self) -> &[f64] {
        &self.epoch_objectives
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn regularized_objective(
    weights: &[f64],
    bias: f64,
    lambda: f64,
    docs: &[DocVector],
    targets: &[f64],
) -> f64 {
    let norm_sq: f64 = weights.iter().map(|w| w * w).sum();
    let hinge: f64 = docs
        .iter()
        .zip(targets)
        .map(|(doc, &y)| (1.0 - y * (dot(weights, doc) + bias)).max(0.0))
        .sum::<f64>()
        / docs.len() as f64;
    lambda / 2.0 * norm_sq + hinge
}

/// The rating midpoint separating positive from negative on an N-point
/// scale: ratings strictly above it count as positive.
pub fn default_midpoint(scale_max: u32) -> f64 {
    (scale_max as f64 / 2.0).ceil()
}

/// How one review moved through the classification cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeDecision {
    pub review_index: usize,
    pub text_label: Polarity,
    pub rating_label: Polarity,
    /// Populated only when the margin classifier had to arbitrate.
    pub margin_label: Option<Polarity>,
    /// 1: text and rating agreed. 2: margin classifier agreed with the
    /// text classifier. 3: the rating decided.
    pub stage: u8,
    pub final_label: Polarity,
    /// Posterior confidence of the text classifier's winning class.
    pub strength: f64,
}

/// The cascade's verdict for every input review, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    pub decisions: Vec<CascadeDecision>,
}

impl CascadeOutcome {
    pub fn indices_with(&self, polarity: Polarity) -> Vec<usize> {
        self.decisions
            .iter()
            .filter(|d| d.final_label == polarity)
            .map(|d| d.review_index)
            .collect()
    }
}

/// Classifies every review by the three-stage cascade: the probabilistic
/// text classifier and the star rating decide together when they agree;
/// otherwise the margin classifier arbitrates, and when it sides with
/// neither (disagreeing with the text classifier), the rating wins.
/// Ratings strictly above `midpoint` count as positive.
pub fn cascade_classify(
    docs: &[DocVector],
    ratings: &[f64],
    nb: &NaiveBayesModel,
    svm: &LinearSvmModel,
    midpoint: f64,
) -> Result<CascadeOutcome, SentimentError> {
    if docs.len() != ratings.len() {
        return Err(SentimentError::LengthMismatch {
            docs: docs.len(),
            labels: ratings.len(),
        });
    }
    if !nb.is_binary() {
        return Err(SentimentError::NotBinary {
            got: nb.classes().len(),
        });
    }
    let mut decisions = Vec::with_capacity(docs.len());
    for (i, (doc, &rating)) in docs.iter().zip(ratings).enumerate() {
        let prediction = nb.predict(doc)?;
        let text_label: Polarity = prediction.label.parse()?;
        let strength = prediction.strength();
        let rating_label = if rating > midpoint {
            Polarity::Positive
        } else {
            Polarity::Negative
        };
        let (margin_label, stage, final_label) = if text_label == rating_label {
            (None, 1, text_label)
        } else {
            let arbiter = svm.predict(doc)?.label;
            if arbiter == text_label {
                (Some(arbiter), 2, text_label)
            } else {
                (Some(arbiter), 3, rating_label)
            }
        };
        decisions.push(CascadeDecision {
            review_index: i,
            text_label,
            rating_label,
            margin_label,
            stage,
            final_label,
            strength,
        });
    }
    Ok(CascadeOutcome { decisions })
}

/// Runs a five-point model over every review.
pub fn classify_fine_grained(
    docs: &[DocVector],
    nb: &NaiveBayesModel,
) -> Result<Vec<Prediction>, SentimentError> {
    if !nb.is_fine_grained() {
        return Err(SentimentError::NotFineGrained {
            got: nb.classes().len(),
        });
    }
    docs.iter().map(|doc| nb.predict(doc)).collect()
}

/// Precision, recall, and F1 for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Classifier quality over a labeled evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classes: Vec<String>,
    /// `confusion[g][p]`: documents of gold class `g` predicted as `p`.
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// F1 averaged with each class weighted by its gold support.
    pub weighted_f1: f64,
}

/// Compares predictions against gold labels. Classes are the sorted union
/// of both label sets; empty-denominator metrics are reported as 0.
pub fn evaluate_classifier(
    predicted: &[String],
    gold: &[String],
) -> Result<EvaluationReport, SentimentError> {
    if predicted.is_empty() {
        return Err(SentimentError::EmptyEvaluation);
    }
    if predicted.len() != gold.len() {
        return Err(SentimentError::LengthMismatch {
            docs: gold.len(),
            labels: predicted.len(),
        });
    }
    let classes: Vec<String> = predicted
        .iter()
        .chain(gold)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect();
    let idx = |label: &String| classes.iter().position(|c| c == label).expect("in union");

    let n = classes.len();
    let mut confusion = vec![vec![0u64; n]; n];
    for (p, g) in predicted.iter().zip(gold) {
        confusion[idx(g)][idx(p)] += 1;
    }

    let safe_div = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let mut per_class = Vec::with_capacity(n);
    for c in 0..n {
        let tp = confusion[c][c] as f64;
        let gold_total: u64 = confusion[c].iter().sum();
        let pred_total: u64 = (0..n).map(|g| confusion[g][c]).sum();
        let precision = safe_div(tp, pred_total as f64);
        let recall = safe_div(tp, gold_total as f64);
        let f1 = safe_div(2.0 * precision * recall, precision + recall);
        per_class.push(ClassMetrics {
            label: classes[c].clone(),
            precision,
            recall,
            f1,
            support: gold_total,
        });
    }

    let total = predicted.len() as f64;
    let correct: u64 = (0..n).map(|c| confusion[c][c]).sum();
    let macro_avg = |f: fn(&ClassMetrics) -> f64| {
        per_class.iter().map(f).sum::<f64>() / n as f64
    };
    let macro_precision = macro_avg(|m| m.precision);
    let macro_recall = macro_avg(|m| m.recall);
    let macro_f1 = macro_avg(|m| m.f1);
    let weighted_f1 = per_class
        .iter()
        .map(|m| m.f1 * m.support as f64)
        .sum::<f64>()
        / total;

    Ok(EvaluationReport {
        classes,
        confusion,
        per_class,
        accuracy: correct as f64 / total,
        macro_precision,
        macro_recall,
        macro_f1,
        weighted_f1,
    })
}

/// Version written into model files; bumped on any incompatible change.
pub const MODEL_FORMAT_VERSION: u32 = 1;

const NB_KIND: &str = "naive_bayes";
const SVM_KIND: &str = "linear_svm";

#[derive(Serialize, Deserialize)]
struct ModelEnvelope<M> {
    format_version: u32,
    kind: String,
    vocab_sha256: String,
    model: M,
}

/// Hex SHA-256 of the vocabulary's canonical byte encoding. Stored inside
/// model files so a model is never applied against a different term space.
pub fn vocabulary_digest(vocab: &Vocabulary) -> String {
    let mut hasher = Sha256::new();
    hasher.update(vocab.fingerprint_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn save_model<M: Serialize>(
    model: &M,
    kind: &str,
    vocab: &Vocabulary,
    path: &Path,
) -> Result<(), SentimentError> {
    let envelope = ModelEnvelope {
        format_version: MODEL_FORMAT_VERSION,
        kind: kind.to_string(),
        vocab_sha256: vocabulary_digest(vocab),
        model,
    };
    let json = serde_json::to_string_pretty(&envelope).expect("models serialize");
    std::fs::write(path, json + "\n").map_err(|source| SentimentError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn load_model<M: serde::de::DeserializeOwned>(
    kind: &str,
    vocab: &Vocabulary,
    path: &Path,
) -> Result<M, SentimentError> {
    let path_str = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|source| SentimentError::Read {
        path: path_str.clone(),
        source,
    })?;
    // Decode the envelope with an untyped payload first, so that version,
    // kind, and vocabulary problems are reported as such instead of as
    // field errors from the wrong model shape.
    let envelope: ModelEnvelope<serde_json::Value> =
        serde_json::from_str(&content).map_err(|source| SentimentError::InvalidModelFile {
            path: path_str.clone(),
            source,
        })?;
    if envelope.format_version != MODEL_FORMAT_VERSION {
        return Err(SentimentError::UnsupportedFormatVersion {
            path: path_str,
            found: envelope.format_version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    if envelope.kind != kind {
        return Err(SentimentError::WrongModelKind {
            path: path_str,
            found: envelope.kind,
            expected: kind.to_string(),
        });
    }
    if envelope.vocab_sha256 != vocabulary_digest(vocab) {
        return Err(SentimentError::VocabularyMismatch { path: path_str });
    }
    serde_json::from_value(envelope.model).map_err(|source| SentimentError::InvalidModelFile {
        path: path_str,
        source,
    })
}

pub fn save_naive_bayes(
    model: &NaiveBayesModel,
    vocab: &Vocabulary,
    path: &Path,
) -> Result<(), SentimentError> {
    save_model(model, NB_KIND, vocab, path)
}

pub fn load_naive_bayes(
    path: &Path,
    vocab: &Vocabulary,
) -> Result<NaiveBayesModel, SentimentError> {
    load_model(NB_KIND, vocab, path)
}

pub fn save_linear_svm(
    model: &LinearSvmModel,
    vocab: &Vocabulary,
    path: &Path,
) -> Result<(), SentimentError> {
    save_model(model, SVM_KIND, vocab, path)
}

pub fn load_linear_svm(
    path: &Path,
    vocab: &Vocabulary,
) -> Result<LinearSvmModel, SentimentError> {
    load_model(SVM_KIND, vocab, path)
}
