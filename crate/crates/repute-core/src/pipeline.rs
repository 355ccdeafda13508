//! End-to-end orchestration: from a loaded review dataset to a finished
//! reputation report, for each of the four pipelines.
//!
//! * `cascade-fusion` — binary polarity by the classifier cascade, opinion
//!   fusion per polarity, group aggregation fused by review counts.
//! * `fine-grained` — five-point classification; each predicted class forms
//!   one opinion group scored by coherence and ratings, fused by class size.
//! * `attribute-aggregation` — per-review helpfulness, recency, and
//!   sentiment strength averaged uniformly into a review score that weights
//!   the rating mean. The default pipeline.
//! * `credibility` — per-review helpfulness, recency, and reviewer
//!   credibility combined by fixed weights; sentiment strength is surfaced
//!   in the report but does not enter the review score.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    impute_missing_ratings, preprocess, CorpusError, PreprocessOptions, ReviewDataset,
};
use crate::features::{
    build_vocabulary, embed, lsa_fit, vectorize, DocVector, FeatureError, Vocabulary, Weighting,
};
use crate::grouping::{
    group_by_fine_grained, group_by_polarity, GroupingConfig, GroupingError,
};
use crate::report::{Components, ReportError, ReputationReport, TopReview};
use crate::reputation::{
    category_distribution, category_distribution_from_labels, class_custom_score,
    final_reputation, group_reputation, reputation_from_class_scores, reputation_from_scores,
    top_k_reviews, RankedReview, ReputationError,
};
use crate::scoring::{
    credibility_score, helpfulness_score, review_score_uniform, review_score_weighted,
    time_score, ReviewScoreBreakdown, ScoreWeights, ScoringError, DEFAULT_FLOOR_UNIFORM,
    DEFAULT_FLOOR_WEIGHTED, NEUTRAL_CREDIBILITY,
};
use crate::sentiment::{
    cascade_classify, classify_fine_grained, default_midpoint, load_linear_svm,
    load_naive_bayes, CascadeOutcome, FineGrainedLabel, LinearSvmModel, NaiveBayesModel,
    Polarity, SentimentError, BINARY_LABELS,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Sentiment(#[from] SentimentError),
    #[error(transparent)]
    Grouping(#[from] GroupingError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Reputation(#[from] ReputationError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("unknown pipeline '{0}'; expected one of cascade-fusion, fine-grained, attribute-aggregation, credibility")]
    UnknownPipeline(String),
    #[error("the {pipeline} pipeline needs {what}; train models with `repute train` or point the config at existing ones")]
    MissingModels {
        pipeline: PipelineKind,
        what: &'static str,
    },
    #[error("no imported probability for review '{review_id}'")]
    MissingProbability { review_id: String },
    #[error("no imported vector for review '{review_id}'")]
    MissingVector { review_id: String },
    #[error("review '{review_id}' has no posting year, required by the {pipeline} pipeline")]
    MissingPostingYear {
        review_id: String,
        pipeline: PipelineKind,
    },
    #[error("the {pipeline} pipeline needs the current year; pass --current-year or set it in the config")]
    MissingCurrentYear { pipeline: PipelineKind },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

/// The four reputation pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineKind {
    CascadeFusion,
    FineGrained,
    AttributeAggregation,
    Credibility,
}

impl PipelineKind {
    pub const ALL: [PipelineKind; 4] = [
        PipelineKind::CascadeFusion,
        PipelineKind::FineGrained,
        PipelineKind::AttributeAggregation,
        PipelineKind::Credibility,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PipelineKind::CascadeFusion => "cascade-fusion",
            PipelineKind::FineGrained => "fine-grained",
            PipelineKind::AttributeAggregation => "attribute-aggregation",
            PipelineKind::Credibility => "credibility",
        }
    }

    /// The helpfulness floor this pipeline uses unless overridden.
    pub fn default_floor(self) -> f64 {
        match self {
            PipelineKind::Credibility => DEFAULT_FLOOR_WEIGHTED,
            _ => DEFAULT_FLOOR_UNIFORM,
        }
    }
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PipelineKind {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PipelineKind::ALL
            .into_iter()
            .find(|kind| kind.as_str() == s)
            .ok_or_else(|| PipelineError::UnknownPipeline(s.to_string()))
    }
}

/// Everything a pipeline run can be told. Fields irrelevant to the chosen
/// pipeline are ignored (the CLI warns about them).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pipeline: PipelineKind,
    /// Opinion fusion threshold (cascade-fusion only). The default is the
    /// operating point at which the threshold study bottoms out.
    pub t0: f64,
    pub scale_max: u32,
    /// Reference year for recency scoring; falls back to the dataset's own.
    pub current_year: Option<i32>,
    /// Reviews per top list.
    pub top_k: usize,
    /// Latent dimensionality; `None` picks min(100, min(docs, |V|) − 1),
    /// falling back to raw TF-IDF vectors when that is below 1.
    pub lsa_rank: Option<usize>,
    /// Helpfulness floor; `None` uses the pipeline default.
    pub floor_h: Option<f64>,
    /// Component weights for the credibility pipeline.
    pub weights: ScoreWeights,
    /// Rating midpoint for the cascade; `None` derives it from the scale.
    pub midpoint: Option<f64>,
    pub preprocess: PreprocessOptions,
    pub min_df: u64,
    pub ngram_orders: Vec<usize>,
    pub entity_name: Option<String>,
    /// Copied into the report verbatim; never a clock reading.
    pub generated_at: Option<String>,
}

impl RunConfig {
    pub fn for_pipeline(pipeline: PipelineKind) -> Self {
        RunConfig {
            pipeline,
            t0: 0.95,
            scale_max: 10,
            current_year: None,
            top_k: 3,
            lsa_rank: None,
            floor_h: None,
            weights: ScoreWeights::default(),
            midpoint: None,
            preprocess: PreprocessOptions::default(),
            min_df: 1,
            ngram_orders: vec![1],
            entity_name: None,
            generated_at: None,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !self.t0.is_finite() || !(0.0..=1.0).contains(&self.t0) {
            return Err(PipelineError::InvalidConfig(format!(
                "t0 {} outside [0, 1]",
                self.t0
            )));
        }
        if self.scale_max == 0 {
            return Err(PipelineError::InvalidConfig(
                "scale_max must be at least 1".to_string(),
            ));
        }
        if let Some(floor) = self.floor_h {
            if !floor.is_finite() || !(0.0..1.0).contains(&floor) {
                return Err(PipelineError::InvalidConfig(format!(
                    "floor_h {floor} outside [0, 1)"
                )));
            }
        }
        if let Some(midpoint) = self.midpoint {
            if !midpoint.is_finite() || midpoint < 0.0 || midpoint > self.scale_max as f64 {
                return Err(PipelineError::InvalidConfig(format!(
                    "midpoint {midpoint} outside [0, scale_max]"
                )));
            }
        }
        if self.ngram_orders.is_empty() || self.ngram_orders.iter().all(|&n| n == 0) {
            return Err(PipelineError::InvalidConfig(
                "at least one n-gram order is required".to_string(),
            ));
        }
        Ok(())
    }

    fn effective_floor(&self) -> f64 {
        self.floor_h.unwrap_or_else(|| self.pipeline.default_floor())
    }

    fn effective_midpoint(&self) -> f64 {
        self.midpoint.unwrap_or_else(|| default_midpoint(self.scale_max))
    }
}

/// File names inside a model directory.
pub const VOCABULARY_FILE: &str = "vocabulary.json";
pub const POLARITY_NB_FILE: &str = "polarity-nb.json";
pub const POLARITY_SVM_FILE: &str = "polarity-svm.json";
pub const FINE_NB_FILE: &str = "fine-nb.json";

/// Trained models and imported per-review data a run may draw on. Any
/// subset may be present; each pipeline checks for what it needs.
#[derive(Debug, Clone, Default)]
pub struct PipelineModels {
    pub vocabulary: Option<Vocabulary>,
    pub nb_binary: Option<NaiveBayesModel>,
    pub svm: Option<LinearSvmModel>,
    pub nb_fine: Option<NaiveBayesModel>,
    /// review id → (P(negative), P(positive)) from an external classifier.
    pub probabilities: Option<BTreeMap<String, (f64, f64)>>,
    /// review id → document vector from an external embedding.
    pub vectors: Option<BTreeMap<String, DocVector>>,
}

impl PipelineModels {
    /// Loads whichever model files exist in `dir`. The vocabulary is
    /// required as soon as any model file is present.
    pub fn load_dir(dir: &Path) -> Result<Self, PipelineError> {
        let mut models = PipelineModels::default();
        let vocab_path = dir.join(VOCABULARY_FILE);
        if vocab_path.exists() {
            let content =
                std::fs::read_to_string(&vocab_path).map_err(|source| PipelineError::Read {
                    path: vocab_path.display().to_string(),
                    source,
                })?;
            let vocabulary: Vocabulary =
                serde_json::from_str(&content).map_err(|e| PipelineError::Parse {
                    path: vocab_path.display().to_string(),
                    line: 0,
                    message: e.to_string(),
                })?;
            models.vocabulary = Some(vocabulary);
        }
        if let Some(vocab) = &models.vocabulary {
            let nb_path = dir.join(POLARITY_NB_FILE);
            if nb_path.exists() {
                models.nb_binary = Some(load_naive_bayes(&nb_path, vocab)?);
            }
            let svm_path = dir.join(POLARITY_SVM_FILE);
            if svm_path.exists() {
                models.svm = Some(load_linear_svm(&svm_path, vocab)?);
            }
            let fine_path = dir.join(FINE_NB_FILE);
            if fine_path.exists() {
                models.nb_fine = Some(load_naive_bayes(&fine_path, vocab)?);
            }
        }
        Ok(models)
    }
}

/// Reads one probability pair per line: `review_id P(negative) P(positive)`,
/// whitespace-separated. The pair must be a distribution.
pub fn load_probabilities(
    path: &Path,
) -> Result<BTreeMap<String, (f64, f64)>, PipelineError> {
    let path_str = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|source| PipelineError::Read {
        path: path_str.clone(),
        source,
    })?;
    let mut probabilities = BTreeMap::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| PipelineError::Parse {
            path: path_str.clone(),
            line: i + 1,
            message,
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(format!(
                "expected 'review_id P_neg P_pos', got {} fields",
                parts.len()
            )));
        }
        let p_neg: f64 = parts[1]
            .parse()
            .map_err(|_| parse_err(format!("invalid probability '{}'", parts[1])))?;
        let p_pos: f64 = parts[2]
            .parse()
            .map_err(|_| parse_err(format!("invalid probability '{}'", parts[2])))?;
        for p in [p_neg, p_pos] {
            if !(0.0..=1.0).contains(&p) {
                return Err(parse_err(format!("probability {p} outside [0, 1]")));
            }
        }
        if (p_neg + p_pos - 1.0).abs() > 1e-3 {
            return Err(parse_err(format!(
                "probabilities sum to {}, expected 1",
                p_neg + p_pos
            )));
        }
        if probabilities
            .insert(parts[0].to_string(), (p_neg, p_pos))
            .is_some()
        {
            return Err(parse_err(format!("duplicate review id '{}'", parts[0])));
        }
    }
    Ok(probabilities)
}

/// The result of one reputation run.
#[derive(Debug, Clone)]
pub struct ReputationOutcome {
    pub reputation: f64,
    pub report: ReputationReport,
    /// Per-review score components (attribute-aggregation / credibility).
    pub score_breakdowns: Vec<ReviewScoreBreakdown>,
    /// Per-review predicted classes (fine-grained).
    pub fine_labels: Vec<(String, FineGrainedLabel)>,
    /// Per-review cascade decisions (cascade-fusion).
    pub cascade: Option<CascadeOutcome>,
}

/// One review's sentiment as seen by the attribute-aggregation and
/// credibility pipelines.
struct SentimentView {
    strength: f64,
    polarity: Polarity,
    p_negative: f64,
    p_positive: f64,
}

fn tokenize_all(dataset: &ReviewDataset, options: &PreprocessOptions) -> Vec<Vec<String>> {
    dataset
        .reviews
        .iter()
        .map(|r| preprocess(&r.text, options))
        .collect()
}

/// Per-review sentiment from the best available source: imported
/// probabilities when present, otherwise the binary polarity model.
fn sentiment_views(
    dataset: &ReviewDataset,
    models: &PipelineModels,
    config: &RunConfig,
) -> Result<Vec<SentimentView>, PipelineError> {
    if let Some(probabilities) = &models.probabilities {
        return dataset
            .reviews
            .iter()
            .map(|review| {
                let (p_neg, p_pos) = probabilities.get(&review.id).copied().ok_or_else(|| {
                    PipelineError::MissingProbability {
                        review_id: review.id.clone(),
                    }
                })?;
                Ok(SentimentView {
                    strength: p_neg.max(p_pos),
                    polarity: if p_pos > p_neg {
                        Polarity::Positive
                    } else {
                        Polarity::Negative
                    },
                    p_negative: p_neg,
                    p_positive: p_pos,
                })
            })
            .collect();
    }
    let (vocab, nb) = match (&models.vocabulary, &models.nb_binary) {
        (Some(vocab), Some(nb)) => (vocab, nb),
        _ => {
            return Err(PipelineError::MissingModels {
                pipeline: config.pipeline,
                what: "a polarity model or an imported probability file",
            })
        }
    };
    let tokens = tokenize_all(dataset, &config.preprocess);
    tokens
        .iter()
        .map(|toks| {
            let doc = vectorize(toks, vocab, Weighting::Count);
            let prediction = nb.predict(&doc)?;
            let polarity: Polarity = prediction.label.parse()?;
            Ok(SentimentView {
                strength: prediction.strength(),
                polarity,
                p_negative: prediction.posteriors[0],
                p_positive: prediction.posteriors[1],
            })
        })
        .collect()
}

/// Document vectors for grouping: imported ones when provided, otherwise
/// TF-IDF over the entity's own reviews, projected into latent space when
/// the corpus is big enough to support one.
fn grouping_vectors(
    dataset: &ReviewDataset,
    models: &PipelineModels,
    config: &RunConfig,
) -> Result<(HashMap<String, DocVector>, serde_json::Value), PipelineError> {
    if let Some(imported) = &models.vectors {
        let mut map = HashMap::new();
        for review in &dataset.reviews {
            let vector =
                imported
                    .get(&review.id)
                    .ok_or_else(|| PipelineError::MissingVector {
                        review_id: review.id.clone(),
                    })?;
            map.insert(review.id.clone(), vector.clone());
        }
        return Ok((map, serde_json::json!("imported")));
    }

    let tokens = tokenize_all(dataset, &config.preprocess);
    let vocabulary = build_vocabulary(&tokens, &config.ngram_orders, config.min_df)?;
    let tfidf: Vec<DocVector> = tokens
        .iter()
        .map(|t| vectorize(t, &vocabulary, Weighting::Tfidf))
        .collect();

    let cap = dataset.reviews.len().min(vocabulary.len()).saturating_sub(1);
    let rank = match config.lsa_rank {
        Some(k) => Some(k),
        None => (cap >= 1).then(|| cap.min(100)),
    };
    let (vectors, source) = match rank {
        Some(k) => {
            let matrix = crate::features::doc_term_matrix(
                &tokens,
                &vocabulary,
                Weighting::Tfidf,
            );
            let space = lsa_fit(&matrix, k)?;
            let embedded: Result<Vec<DocVector>, FeatureError> =
                tfidf.iter().map(|v| embed(v, &space)).collect();
            (embedded?, serde_json::json!(format!("lsa-{k}")))
        }
        None => (tfidf, serde_json::json!("tf-idf")),
    };
    let map = dataset
        .reviews
        .iter()
        .zip(vectors)
        .map(|(review, vector)| (review.id.clone(), vector))
        .collect();
    Ok((map, source))
}

fn ranked_candidate(
    dataset: &ReviewDataset,
    index: usize,
    score: f64,
) -> RankedReview {
    let review = &dataset.reviews[index];
    RankedReview {
        review_id: review.id.clone(),
        score,
        helpful_votes: review.helpful_votes,
        posting_year: review.posting_year,
        input_index: index,
    }
}

fn top_review(
    dataset: &ReviewDataset,
    by_id: &HashMap<String, usize>,
    ranked: &RankedReview,
    components: Components,
) -> TopReview {
    let review = &dataset.reviews[by_id[&ranked.review_id]];
    TopReview {
        review_id: review.id.clone(),
        text: review.text.clone(),
        rating: review.rating.expect("ratings imputed before ranking"),
        review_score: ranked.score,
        components,
    }
}

fn current_year_for(
    dataset: &ReviewDataset,
    config: &RunConfig,
) -> Result<i32, PipelineError> {
    config
        .current_year
        .or(dataset.current_year)
        .ok_or(PipelineError::MissingCurrentYear {
            pipeline: config.pipeline,
        })
}

fn posting_year_for(
    review_id: &str,
    posting_year: Option<i32>,
    pipeline: PipelineKind,
) -> Result<i32, PipelineError> {
    posting_year.ok_or_else(|| PipelineError::MissingPostingYear {
        review_id: review_id.to_string(),
        pipeline,
    })
}

/// Runs the configured pipeline over one entity and assembles the report.
pub fn run_reputation(
    dataset: &ReviewDataset,
    models: &PipelineModels,
    config: &RunConfig,
) -> Result<ReputationOutcome, PipelineError> {
    config.validate()?;
    let dataset = impute_missing_ratings(dataset)?;
    let ratings: Vec<f64> = dataset
        .reviews
        .iter()
        .map(|r| r.rating.expect("just imputed"))
        .collect();
    let ids: Vec<String> = dataset.reviews.iter().map(|r| r.id.clone()).collect();
    let by_id: HashMap<String, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i))
        .collect();
    let rating_of: HashMap<String, f64> = ids
        .iter()
        .cloned()
        .zip(ratings.iter().copied())
        .collect();

    let mut effective: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    effective.insert("pipeline".into(), serde_json::json!(config.pipeline.as_str()));
    effective.insert("scale_max".into(), serde_json::json!(config.scale_max));
    effective.insert("top_k".into(), serde_json::json!(config.top_k));

    let mut score_breakdowns = Vec::new();
    let mut fine_labels = Vec::new();
    let mut cascade_outcome = None;

    // Per pipeline: the reputation value, the category shares, and one
    // ranked candidate per review with its polarity and components.
    let (reputation, categories, candidates): (
        f64,
        Vec<crate::reputation::CategoryShare>,
        Vec<(RankedReview, Option<Polarity>, Components)>,
    ) = match config.pipeline {
        PipelineKind::CascadeFusion => {
            let (vocab, nb, svm) = match (&models.vocabulary, &models.nb_binary, &models.svm) {
                (Some(vocab), Some(nb), Some(svm)) => (vocab, nb, svm),
                _ => {
                    return Err(PipelineError::MissingModels {
                        pipeline: config.pipeline,
                        what: "binary polarity models (probabilistic and max-margin)",
                    })
                }
            };
            let tokens = tokenize_all(&dataset, &config.preprocess);
            let count_docs: Vec<DocVector> = tokens
                .iter()
                .map(|t| vectorize(t, vocab, Weighting::Count))
                .collect();
            let tfidf_docs: Vec<DocVector> = tokens
                .iter()
                .map(|t| vectorize(t, vocab, Weighting::Tfidf))
                .collect();
            let midpoint = config.effective_midpoint();
            let outcome = cascade_with_split_features(
                &count_docs,
                &tfidf_docs,
                &ratings,
                nb,
                svm,
                midpoint,
            )?;
            let positive = outcome.indices_with(Polarity::Positive);
            let negative = outcome.indices_with(Polarity::Negative);

            let (vectors, vector_source) = grouping_vectors(&dataset, models, config)?;
            let grouping_config = GroupingConfig::new(config.t0)?;
            let (positive_groups, negative_groups) = group_by_polarity(
                &ids,
                &vectors,
                &rating_of,
                &positive,
                &negative,
                &grouping_config,
            )?;
            let rep_pos = match positive_groups.is_empty() {
                true => None,
                false => Some(group_reputation(&positive_groups)?),
            };
            let rep_neg = match negative_groups.is_empty() {
                true => None,
                false => Some(group_reputation(&negative_groups)?),
            };
            let reputation =
                final_reputation(rep_pos, positive.len(), rep_neg, negative.len())?;

            let candidates = outcome
                .decisions
                .iter()
                .map(|d| {
                    let components = Components {
                        helpfulness: None,
                        time: None,
                        sentiment: Some(d.strength),
                        credibility: None,
                    };
                    (
                        ranked_candidate(&dataset, d.review_index, d.strength),
                        Some(d.final_label),
                        components,
                    )
                })
                .collect();

            effective.insert("t0".into(), serde_json::json!(config.t0));
            effective.insert("midpoint".into(), serde_json::json!(midpoint));
            effective.insert("vector_source".into(), vector_source);
            insert_text_options(&mut effective, config);
            cascade_outcome = Some(outcome);
            (
                reputation,
                category_distribution(&ratings, config.scale_max)?,
                candidates,
            )
        }
        PipelineKind::FineGrained => {
            let (vocab, nb) = match (&models.vocabulary, &models.nb_fine) {
                (Some(vocab), Some(nb)) => (vocab, nb),
                _ => {
                    return Err(PipelineError::MissingModels {
                        pipeline: config.pipeline,
                        what: "a five-point sentiment model",
                    })
                }
            };
            let tokens = tokenize_all(&dataset, &config.preprocess);
            let count_docs: Vec<DocVector> = tokens
                .iter()
                .map(|t| vectorize(t, vocab, Weighting::Count))
                .collect();
            let predictions = classify_fine_grained(&count_docs, nb)?;
            let labels: Vec<FineGrainedLabel> = predictions
                .iter()
                .map(|p| p.label.parse())
                .collect::<Result<_, _>>()?;

            let (vectors, vector_source) = grouping_vectors(&dataset, models, config)?;
            let groups = group_by_fine_grained(&ids, &labels, &vectors, &rating_of)?;
            let class_scores: Vec<(f64, usize)> = groups
                .values()
                .map(|group| {
                    class_custom_score(config.scale_max as f64, group).map(|cs| (cs, group.n))
                })
                .collect::<Result<_, _>>()?;
            let reputation = reputation_from_class_scores(&class_scores)?;

            let candidates = predictions
                .iter()
                .zip(&labels)
                .enumerate()
                .map(|(i, (prediction, label))| {
                    let components = Components {
                        helpfulness: None,
                        time: None,
                        sentiment: Some(prediction.strength()),
                        credibility: None,
                    };
                    (
                        ranked_candidate(&dataset, i, prediction.strength()),
                        label.polarity(),
                        components,
                    )
                })
                .collect();

            effective.insert("vector_source".into(), vector_source);
            insert_text_options(&mut effective, config);
            fine_labels = ids.iter().cloned().zip(labels.iter().copied()).collect();
            (
                reputation,
                category_distribution_from_labels(&labels)?,
                candidates,
            )
        }
        PipelineKind::AttributeAggregation => {
            let views = sentiment_views(&dataset, models, config)?;
            let year = current_year_for(&dataset, config)?;
            let floor = config.effective_floor();
            let max_votes = dataset
                .reviews
                .iter()
                .map(|r| r.helpful_votes)
                .max()
                .unwrap_or(0);

            let mut scores = Vec::with_capacity(views.len());
            let mut candidates = Vec::with_capacity(views.len());
            for (i, (review, view)) in dataset.reviews.iter().zip(&views).enumerate() {
                let h = helpfulness_score(review.helpful_votes, max_votes, floor);
                let posting =
                    posting_year_for(&review.id, review.posting_year, config.pipeline)?;
                let t = time_score(posting, year, &review.id)?;
                let rs = review_score_uniform(h, t, view.strength);
                scores.push(rs);
                score_breakdowns.push(ReviewScoreBreakdown {
                    review_id: review.id.clone(),
                    helpfulness: h,
                    time: t,
                    sentiment_strength: Some(view.strength),
                    credibility: None,
                    review_score: rs,
                });
                let components = Components {
                    helpfulness: Some(h),
                    time: Some(t),
                    sentiment: Some(view.strength),
                    credibility: None,
                };
                candidates.push((
                    ranked_candidate(&dataset, i, rs),
                    Some(view.polarity),
                    components,
                ));
            }
            let reputation = reputation_from_scores(&scores, &ratings)?;
            effective.insert("floor_h".into(), serde_json::json!(floor));
            effective.insert("current_year".into(), serde_json::json!(year));
            effective.insert(
                "sentiment_source".into(),
                serde_json::json!(sentiment_source_name(models)),
            );
            (
                reputation,
                category_distribution(&ratings, config.scale_max)?,
                candidates,
            )
        }
        PipelineKind::Credibility => {
            let views = sentiment_views(&dataset, models, config)?;
            let year = current_year_for(&dataset, config)?;
            let floor = config.effective_floor();
            let max_votes = dataset
                .reviews
                .iter()
                .map(|r| r.helpful_votes)
                .max()
                .unwrap_or(0);

            let mut scores = Vec::with_capacity(views.len());
            let mut candidates = Vec::with_capacity(views.len());
            for (i, (review, view)) in dataset.reviews.iter().zip(&views).enumerate() {
                let h = helpfulness_score(review.helpful_votes, max_votes, floor);
                let posting =
                    posting_year_for(&review.id, review.posting_year, config.pipeline)?;
                let t = time_score(posting, year, &review.id)?;
                let c = match (review.user_helpful_votes, review.user_review_count) {
                    (Some(votes), Some(count)) => credibility_score(votes, count)?,
                    _ => NEUTRAL_CREDIBILITY,
                };
                let rs = review_score_weighted(h, t, c, &config.weights);
                scores.push(rs);
                score_breakdowns.push(ReviewScoreBreakdown {
                    review_id: review.id.clone(),
                    helpfulness: h,
                    time: t,
                    sentiment_strength: Some(view.strength),
                    credibility: Some(c),
                    review_score: rs,
                });
                let components = Components {
                    helpfulness: Some(h),
                    time: Some(t),
                    sentiment: Some(view.strength),
                    credibility: Some(c),
                };
                candidates.push((
                    ranked_candidate(&dataset, i, rs),
                    Some(view.polarity),
                    components,
                ));
            }
            let reputation = reputation_from_scores(&scores, &ratings)?;
            effective.insert("floor_h".into(), serde_json::json!(floor));
            effective.insert("current_year".into(), serde_json::json!(year));
            effective.insert(
                "weights".into(),
                serde_json::json!({
                    "helpfulness": config.weights.helpfulness,
                    "time": config.weights.time,
                    "credibility": config.weights.credibility,
                }),
            );
            effective.insert(
                "sentiment_source".into(),
                serde_json::json!(sentiment_source_name(models)),
            );
            (
                reputation,
                category_distribution(&ratings, config.scale_max)?,
                candidates,
            )
        }
    };

    let components_of: HashMap<String, Components> = candidates
        .iter()
        .map(|(ranked, _, components)| (ranked.review_id.clone(), components.clone()))
        .collect();
    let side = |polarity: Polarity| -> Vec<TopReview> {
        let pool: Vec<RankedReview> = candidates
            .iter()
            .filter(|(_, p, _)| *p == Some(polarity))
            .map(|(ranked, _, _)| ranked.clone())
            .collect();
        top_k_reviews(&pool, config.top_k)
            .iter()
            .map(|ranked| {
                top_review(&dataset, &by_id, ranked, components_of[&ranked.review_id].clone())
            })
            .collect()
    };
    let top_positive = side(Polarity::Positive);
    let top_negative = side(Polarity::Negative);

    let report = ReputationReport {
        entity_id: dataset.entity_id.clone(),
        entity_name: config.entity_name.clone(),
        pipeline: config.pipeline.to_string(),
        reputation,
        scale_max: config.scale_max,
        categories,
        top_positive,
        top_negative,
        config: effective,
        generated_at: config.generated_at.clone(),
    };

    Ok(ReputationOutcome {
        reputation,
        report,
        score_breakdowns,
        fine_labels,
        cascade: cascade_outcome,
    })
}

/// The cascade feeds count vectors to the probabilistic classifier and
/// TF-IDF vectors to the margin classifier, so it cannot call the shared
/// single-representation entry point directly.
fn cascade_with_split_features(
    count_docs: &[DocVector],
    tfidf_docs: &[DocVector],
    ratings: &[f64],
    nb: &NaiveBayesModel,
    svm: &LinearSvmModel,
    midpoint: f64,
) -> Result<CascadeOutcome, PipelineError> {
    // Run the cascade on the probabilistic representation, then replay the
    // margin stages against the TF-IDF representation.
    let mut outcome = cascade_classify(count_docs, ratings, nb, svm, midpoint)?;
    for decision in &mut outcome.decisions {
        if decision.margin_label.is_some() {
            let margin = svm.predict(&tfidf_docs[decision.review_index])?.label;
            decision.margin_label = Some(margin);
            let (stage, final_label) = if margin == decision.text_label {
                (2, decision.text_label)
            } else {
                (3, decision.rating_label)
            };
            decision.stage = stage;
            decision.final_label = final_label;
        }
    }
    Ok(outcome)
}

fn sentiment_source_name(models: &PipelineModels) -> &'static str {
    if models.probabilities.is_some() {
        "imported-probabilities"
    } else {
        "polarity-model"
    }
}

fn insert_text_options(
    effective: &mut BTreeMap<String, serde_json::Value>,
    config: &RunConfig,
) {
    effective.insert(
        "stopwords".into(),
        serde_json::json!(config.preprocess.remove_stopwords),
    );
    effective.insert("stemming".into(), serde_json::json!(config.preprocess.stem));
    effective.insert("min_df".into(), serde_json::json!(config.min_df));
    effective.insert(
        "ngram_orders".into(),
        serde_json::json!(config.ngram_orders),
    );
}

/// Per-review classifier output for the `classify` command.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationOutput {
    pub classes: Vec<String>,
    pub rows: Vec<ClassifiedReview>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedReview {
    pub review_id: String,
    pub label: String,
    /// Aligned with `ClassificationOutput::classes`.
    pub posteriors: Vec<f64>,
}

/// Labels every review of the dataset with the classifier the configured
/// pipeline would use: the cascade's final polarity, the five-point model,
/// or the plain sentiment source.
pub fn classify_dataset(
    dataset: &ReviewDataset,
    models: &PipelineModels,
    config: &RunConfig,
) -> Result<ClassificationOutput, PipelineError> {
    config.validate()?;
    match config.pipeline {
        PipelineKind::CascadeFusion => {
            let (vocab, nb, svm) = match (&models.vocabulary, &models.nb_binary, &models.svm) {
                (Some(vocab), Some(nb), Some(svm)) => (vocab, nb, svm),
                _ => {
                    return Err(PipelineError::MissingModels {
                        pipeline: config.pipeline,
                        what: "binary polarity models (probabilistic and max-margin)",
                    })
                }
            };
            let dataset = impute_missing_ratings(dataset)?;
            let ratings: Vec<f64> = dataset
                .reviews
                .iter()
                .map(|r| r.rating.expect("just imputed"))
                .collect();
            let tokens = tokenize_all(&dataset, &config.preprocess);
            let count_docs: Vec<DocVector> = tokens
                .iter()
                .map(|t| vectorize(t, vocab, Weighting::Count))
                .collect();
            let tfidf_docs: Vec<DocVector> = tokens
                .iter()
                .map(|t| vectorize(t, vocab, Weighting::Tfidf))
                .collect();
            let outcome = cascade_with_split_features(
                &count_docs,
                &tfidf_docs,
                &ratings,
                nb,
                svm,
                config.effective_midpoint(),
            )?;
            let rows = dataset
                .reviews
                .iter()
                .zip(&count_docs)
                .zip(&outcome.decisions)
                .map(|((review, doc), decision)| {
                    let prediction = nb.predict(doc)?;
                    Ok(ClassifiedReview {
                        review_id: review.id.clone(),
                        label: decision.final_label.to_string(),
                        posteriors: prediction.posteriors,
                    })
                })
                .collect::<Result<_, PipelineError>>()?;
            Ok(ClassificationOutput {
                classes: BINARY_LABELS.iter().map(|s| s.to_string()).collect(),
                rows,
            })
        }
        PipelineKind::FineGrained => {
            let (vocab, nb) = match (&models.vocabulary, &models.nb_fine) {
                (Some(vocab), Some(nb)) => (vocab, nb),
                _ => {
                    return Err(PipelineError::MissingModels {
                        pipeline: config.pipeline,
                        what: "a five-point sentiment model",
                    })
                }
            };
            let tokens = tokenize_all(dataset, &config.preprocess);
            let rows = dataset
                .reviews
                .iter()
                .zip(&tokens)
                .map(|(review, toks)| {
                    let doc = vectorize(toks, vocab, Weighting::Count);
                    let prediction = nb.predict(&doc)?;
                    Ok(ClassifiedReview {
                        review_id: review.id.clone(),
                        label: prediction.label,
                        posteriors: prediction.posteriors,
                    })
                })
                .collect::<Result<_, PipelineError>>()?;
            Ok(ClassificationOutput {
                classes: crate::sentiment::FINE_GRAINED_LABELS
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
                rows,
            })
        }
        PipelineKind::AttributeAggregation | PipelineKind::Credibility => {
            let views = sentiment_views(dataset, models, config)?;
            let rows = dataset
                .reviews
                .iter()
                .zip(&views)
                .map(|(review, view)| ClassifiedReview {
                    review_id: review.id.clone(),
                    label: view.polarity.to_string(),
                    posteriors: vec![view.p_negative, view.p_positive],
                })
                .collect();
            Ok(ClassificationOutput {
                classes: BINARY_LABELS.iter().map(|s| s.to_string()).collect(),
                rows,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Review;
    use approx::assert_abs_diff_eq;

    fn review(
        id: &str,
        text: &str,
        rating: f64,
        votes: u64,
        year: i32,
        user: (&str, Option<u64>, Option<u64>),
    ) -> Review {
        Review {
            id: id.to_string(),
            text: text.to_string(),
            rating: Some(rating),
            helpful_votes: votes,
            posting_year: Some(year),
            user_id: user.0.to_string(),
            user_review_count: user.1,
            user_helpful_votes: user.2,
            gold_label: None,
        }
    }

    fn dataset(reviews: Vec<Review>) -> ReviewDataset {
        ReviewDataset {
            entity_id: "entity-1".to_string(),
            scale_max: 10,
            reviews,
            current_year: Some(2020),
        }
    }

    /// Polarity models trained on a tiny but cleanly separable corpus.
    fn polarity_models() -> PipelineModels {
        let texts = [
            ("awful terrible boring mess", "negative"),
            ("terrible acting awful script", "negative"),
            ("dreadful boring waste", "negative"),
            ("wonderful amazing brilliant film", "positive"),
            ("brilliant moving masterpiece", "positive"),
            ("amazing wonderful story", "positive"),
        ];
        let options = PreprocessOptions::default();
        let tokens: Vec<Vec<String>> =
            texts.iter().map(|(t, _)| preprocess(t, &options)).collect();
        let labels: Vec<String> = texts.iter().map(|(_, l)| l.to_string()).collect();
        let vocab = build_vocabulary(&tokens, &[1], 1).unwrap();
        let counts: Vec<DocVector> = tokens
            .iter()
            .map(|t| vectorize(t, &vocab, Weighting::Count))
            .collect();
        let tfidf: Vec<DocVector> = tokens
            .iter()
            .map(|t| vectorize(t, &vocab, Weighting::Tfidf))
            .collect();
        let nb = NaiveBayesModel::train(&counts, &labels, 1.0).unwrap();
        let svm = LinearSvmModel::train(&tfidf, &labels, 0.01, 30, 7).unwrap();
        PipelineModels {
            vocabulary: Some(vocab),
            nb_binary: Some(nb),
            svm: Some(svm),
            ..PipelineModels::default()
        }
    }

    fn worked_entity() -> ReviewDataset {
        dataset(vec![
            review("r1", "flawless service", 10.0, 100, 2020, ("u1", None, None)),
            review("r2", "very comfortable", 10.0, 50, 2010, ("u2", None, None)),
            review("r3", "good location", 10.0, 1, 2000, ("u3", None, None)),
        ])
    }

    fn worked_probabilities() -> BTreeMap<String, (f64, f64)> {
        [
            ("r1".to_string(), (0.002, 0.998)),
            ("r2".to_string(), (0.003, 0.997)),
            ("r3".to_string(), (0.004, 0.996)),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn attribute_aggregation_reproduces_the_worked_entity() {
        let models = PipelineModels {
            probabilities: Some(worked_probabilities()),
            ..PipelineModels::default()
        };
        let config = RunConfig::for_pipeline(PipelineKind::AttributeAggregation);
        let outcome = run_reputation(&worked_entity(), &models, &config).unwrap();

        let expected_h = [1.0, 50f64.ln() / 100f64.ln(), 0.75];
        let expected_t = [1.0, 0.98, 0.96];
        let expected_s = [0.998, 0.997, 0.996];
        let mut expected_rep = 0.0;
        for (breakdown, ((h, t), s)) in outcome.score_breakdowns.iter().zip(
            expected_h
                .iter()
                .zip(&expected_t)
                .zip(&expected_s),
        ) {
            assert_abs_diff_eq!(breakdown.helpfulness, *h, epsilon = 1e-9);
            assert_abs_diff_eq!(breakdown.time, *t, epsilon = 1e-9);
            assert_abs_diff_eq!(breakdown.sentiment_strength.unwrap(), *s, epsilon = 1e-9);
            let rs = review_score_uniform(*h, *t, *s);
            assert_abs_diff_eq!(breakdown.review_score, rs, epsilon = 1e-12);
            expected_rep += rs * 10.0;
        }
        expected_rep /= 3.0;
        assert_abs_diff_eq!(outcome.reputation, expected_rep, epsilon = 1e-12);
        // The documented value for this entity rounds each product to two
        // decimals first; the unrounded pipeline lands within 5e-3 of it.
        assert!((outcome.reputation - 9.4767).abs() < 5e-3);
        assert_eq!(outcome.report.top_positive.len(), 3);
        assert!(outcome.report.top_negative.is_empty());
        assert_eq!(outcome.report.top_positive[0].review_id, "r1");
    }

    #[test]
    fn credibility_pipeline_weights_components_and_surfaces_sentiment() {
        let ds = dataset(vec![
            review("r1", "excellent stay", 10.0, 20, 2017, ("u1", Some(1), Some(1000))),
            review("r2", "broken heating", 2.0, 0, 2018, ("u2", None, None)),
        ]);
        let models = PipelineModels {
            probabilities: Some(
                [
                    ("r1".to_string(), (0.01, 0.99)),
                    ("r2".to_string(), (0.97, 0.03)),
                ]
                .into_iter()
                .collect(),
            ),
            ..PipelineModels::default()
        };
        let config = RunConfig::for_pipeline(PipelineKind::Credibility);
        let outcome = run_reputation(&ds, &models, &config).unwrap();

        let first = &outcome.score_breakdowns[0];
        // Reviewer with 1000 helpful votes over 1 review saturates the
        // credibility sigmoid.
        assert_abs_diff_eq!(first.credibility.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(first.helpfulness, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(first.time, 0.994, epsilon = 1e-12);
        assert_abs_diff_eq!(first.review_score, 0.9979, epsilon = 1e-9);

        let second = &outcome.score_breakdowns[1];
        assert_abs_diff_eq!(second.credibility.unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(second.helpfulness, 0.8, epsilon = 1e-12);

        // Sentiment strength shows up in the report components but not in
        // the review score.
        let top = &outcome.report.top_positive[0];
        assert_abs_diff_eq!(top.components.sentiment.unwrap(), 0.99, epsilon = 1e-12);
        assert_abs_diff_eq!(top.components.credibility.unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(outcome.report.top_negative[0].review_id, "r2");
    }

    #[test]
    fn cascade_pipeline_runs_end_to_end() {
        let ds = dataset(vec![
            review("r1", "wonderful amazing film", 9.0, 5, 2019, ("u1", None, None)),
            review("r2", "brilliant masterpiece", 8.0, 2, 2018, ("u2", None, None)),
            review("r3", "awful boring mess", 2.0, 7, 2019, ("u3", None, None)),
            review("r4", "terrible script", 3.0, 1, 2020, ("u4", None, None)),
        ]);
        let models = polarity_models();
        let mut config = RunConfig::for_pipeline(PipelineKind::CascadeFusion);
        config.t0 = 0.5;
        let outcome = run_reputation(&ds, &models, &config).unwrap();

        let cascade = outcome.cascade.as_ref().unwrap();
        let positive = cascade.indices_with(Polarity::Positive);
        let negative = cascade.indices_with(Polarity::Negative);
        assert_eq!(positive, vec![0, 1]);
        assert_eq!(negative, vec![2, 3]);
        assert!(outcome.reputation >= 0.0 && outcome.reputation <= 10.0);
        assert_eq!(outcome.report.pipeline, "cascade-fusion");
        assert_eq!(outcome.report.top_positive.len(), 2);
        assert_eq!(outcome.report.top_negative.len(), 2);
        assert_eq!(outcome.report.config["t0"], serde_json::json!(0.5));
    }

    #[test]
    fn fine_grained_pipeline_scores_classes_by_size() {
        // Five-point model over a tiny five-way corpus.
        let texts = [
            ("atrocious unwatchable disaster", "strongly_negative"),
            ("bad weak plot", "weakly_negative"),
            ("average acceptable fine", "neutral"),
            ("good enjoyable solid", "weakly_positive"),
            ("magnificent perfect sublime", "strongly_positive"),
        ];
        let options = PreprocessOptions::default();
        let tokens: Vec<Vec<String>> =
            texts.iter().map(|(t, _)| preprocess(t, &options)).collect();
        let labels: Vec<String> = texts.iter().map(|(_, l)| l.to_string()).collect();
        let vocab = build_vocabulary(&tokens, &[1], 1).unwrap();
        let counts: Vec<DocVector> = tokens
            .iter()
            .map(|t| vectorize(t, &vocab, Weighting::Count))
            .collect();
        let nb = NaiveBayesModel::train(&counts, &labels, 1.0).unwrap();
        let models = PipelineModels {
            vocabulary: Some(vocab),
            nb_fine: Some(nb),
            ..PipelineModels::default()
        };

        let ds = dataset(vec![
            review("r1", "magnificent perfect", 9.0, 3, 2019, ("u1", None, None)),
            review("r2", "sublime magnificent", 10.0, 1, 2020, ("u2", None, None)),
            review("r3", "atrocious disaster", 1.0, 2, 2018, ("u3", None, None)),
            review("r4", "average fine", 5.0, 0, 2020, ("u4", None, None)),
        ]);
        let config = RunConfig::for_pipeline(PipelineKind::FineGrained);
        let outcome = run_reputation(&ds, &models, &config).unwrap();

        assert_eq!(outcome.fine_labels.len(), 4);
        assert_eq!(
            outcome.fine_labels[0].1,
            FineGrainedLabel::StronglyPositive
        );
        assert_eq!(
            outcome.fine_labels[2].1,
            FineGrainedLabel::StronglyNegative
        );
        // Categories count predicted classes, not ratings.
        let very_good = &outcome.report.categories[4];
        assert_eq!(very_good.count, 2);
        // The neutral review appears in neither top list.
        let listed: Vec<&str> = outcome
            .report
            .top_positive
            .iter()
            .chain(&outcome.report.top_negative)
            .map(|t| t.review_id.as_str())
            .collect();
        assert!(!listed.contains(&"r4"));
        assert!(outcome.reputation >= 0.0 && outcome.reputation <= 10.0);
    }

    #[test]
    fn missing_inputs_fail_with_actionable_errors() {
        let config = RunConfig::for_pipeline(PipelineKind::AttributeAggregation);
        let err = run_reputation(&worked_entity(), &PipelineModels::default(), &config)
            .unwrap_err();
        assert!(err.to_string().contains("repute train"), "{err}");

        // A review without a posting year is named.
        let mut ds = worked_entity();
        ds.reviews[1].posting_year = None;
        let models = PipelineModels {
            probabilities: Some(worked_probabilities()),
            ..PipelineModels::default()
        };
        let err = run_reputation(&ds, &models, &config).unwrap_err();
        assert!(err.to_string().contains("r2"), "{err}");

        // Missing current year is a config problem, not a panic.
        let mut ds = worked_entity();
        ds.current_year = None;
        let err = run_reputation(&ds, &models, &config).unwrap_err();
        assert!(err.to_string().contains("current-year"), "{err}");

        // A probability file that skips a review is caught.
        let mut probabilities = worked_probabilities();
        probabilities.remove("r3");
        let models = PipelineModels {
            probabilities: Some(probabilities),
            ..PipelineModels::default()
        };
        let err = run_reputation(&worked_entity(), &models, &config).unwrap_err();
        assert!(err.to_string().contains("r3"), "{err}");
    }

    #[test]
    fn reruns_are_byte_identical() {
        let models = PipelineModels {
            probabilities: Some(worked_probabilities()),
            ..PipelineModels::default()
        };
        let config = RunConfig::for_pipeline(PipelineKind::AttributeAggregation);
        let first = run_reputation(&worked_entity(), &models, &config).unwrap();
        let second = run_reputation(&worked_entity(), &models, &config).unwrap();
        assert_eq!(
            serde_json::to_string(&first.report).unwrap(),
            serde_json::to_string(&second.report).unwrap()
        );
    }

    #[test]
    fn classification_follows_the_pipeline_choice() {
        let ds = dataset(vec![
            review("r1", "wonderful amazing film", 9.0, 5, 2019, ("u1", None, None)),
            review("r2", "awful boring mess", 2.0, 7, 2019, ("u2", None, None)),
        ]);
        let models = polarity_models();
        let cascade_config = RunConfig::for_pipeline(PipelineKind::CascadeFusion);
        let output = classify_dataset(&ds, &models, &cascade_config).unwrap();
        assert_eq!(output.classes, BINARY_LABELS);
        assert_eq!(output.rows[0].label, "positive");
        assert_eq!(output.rows[1].label, "negative");
        for row in &output.rows {
            let sum: f64 = row.posteriors.iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-9);
        }

        let plain_config = RunConfig::for_pipeline(PipelineKind::AttributeAggregation);
        let plain = classify_dataset(&ds, &models, &plain_config).unwrap();
        assert_eq!(plain.rows[0].label, "positive");
        assert_eq!(plain.rows[1].label, "negative");
    }

    #[test]
    fn pipeline_names_parse_and_print() {
        for kind in PipelineKind::ALL {
            let parsed: PipelineKind = kind.as_str().parse().unwrap();
            assert_eq!(parsed, kind);
        }
        assert!("chapter-two".parse::<PipelineKind>().is_err());
    }

    #[test]
    fn imported_vectors_drive_the_grouping() {
        let ds = dataset(vec![
            review("r1", "wonderful amazing film", 9.0, 5, 2019, ("u1", None, None)),
            review("r2", "brilliant masterpiece", 8.0, 2, 2018, ("u2", None, None)),
        ]);
        let mut models = polarity_models();
        models.vectors = Some(
            [
                ("r1".to_string(), vec![1.0, 0.0]),
                ("r2".to_string(), vec![0.0, 1.0]),
            ]
            .into_iter()
            .collect(),
        );
        let mut config = RunConfig::for_pipeline(PipelineKind::CascadeFusion);
        config.t0 = 0.9;
        let outcome = run_reputation(&ds, &models, &config).unwrap();
        assert_eq!(
            outcome.report.config["vector_source"],
            serde_json::json!("imported")
        );
        // Orthogonal vectors at a high threshold: two singleton groups,
        // so the positive reputation is the mean of the two ratings.
        assert_abs_diff_eq!(outcome.reputation, 8.5, epsilon = 1e-9);
    }
}
