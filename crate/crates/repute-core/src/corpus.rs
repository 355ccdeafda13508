//! Dataset model, file ingestion, and text preprocessing.
//!
//! A [`ReviewDataset`] is the unit every pipeline operates on: all reviews of
//! one entity, on one rating scale. Datasets come from CSV files with the
//! column layout described at [`ColumnSchema`]; labeled training corpora can
//! also come from tab-separated `label<TAB>text` lines via
//! [`load_labeled_lines`].
//!
//! Preprocessing is deliberately self-contained: lowercasing, punctuation
//! and numeral stripping, an embedded stopword list, and an in-repo Porter
//! stemmer — no external NLP dependencies, so token streams are stable
//! across environments.

pub mod porter;

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
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
    #[error("{path}: missing column '{column}'")]
    MissingColumn { path: String, column: String },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: rating {rating} outside [1, {scale_max}]")]
    RatingOutOfRange {
        path: String,
        line: u64,
        rating: f64,
        scale_max: u32,
    },
    #[error("{path}: no reviews")]
    NoReviews { path: String },
    #[error("cannot impute ratings: every rating is absent")]
    CannotImpute,
}

/// One customer opinion: the text plus the attributes the scoring pipelines
/// consume (rating, helpfulness votes, posting year, author statistics).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub text: String,
    /// Star rating in `[1, scale_max]`; absent ratings can be filled in by
    /// [`impute_missing_ratings`].
    pub rating: Option<f64>,
    /// Helpfulness votes this review received (`rh`).
    pub helpful_votes: u64,
    /// Year the review was posted; absent when the source row had no date.
    pub posting_year: Option<i32>,
    pub user_id: String,
    /// Lifetime number of reviews by this author (`n`), when known.
    pub user_review_count: Option<u64>,
    /// Lifetime helpfulness votes earned by this author (`h`), when known.
    pub user_helpful_votes: Option<u64>,
    /// Gold sentiment label for training/evaluation corpora.
    pub gold_label: Option<String>,
}

/// All reviews of one entity, in input order, plus the scale they share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewDataset {
    pub entity_id: String,
    /// Upper end of the rating scale (5 or 10).
    pub scale_max: u32,
    pub reviews: Vec<Review>,
    /// The "today" used by time scoring. Never read from the wall clock;
    /// set it from configuration so runs are reproducible.
    pub current_year: Option<i32>,
}

/// A review reduced to its token stream.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedReview {
    pub review_id: String,
    pub tokens: Vec<String>,
}

/// Column names for [`load_dataset`]. The defaults match the canonical
/// header `id,text,rating,helpful_votes,date,user_id,user_review_count,
/// user_helpful_votes,gold_label`; override fields to ingest files with
/// different spellings. Optional values are empty strings in the file.
#[derive(Debug, Clone)]
pub struct ColumnSchema {
    pub id: String,
    pub text: String,
    pub rating: String,
    pub helpful_votes: String,
    pub date: String,
    pub user_id: String,
    pub user_review_count: String,
    pub user_helpful_votes: String,
    pub gold_label: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        ColumnSchema {
            id: "id".into(),
            text: "text".into(),
            rating: "rating".into(),
            helpful_votes: "helpful_votes".into(),
            date: "date".into(),
            user_id: "user_id".into(),
            user_review_count: "user_review_count".into(),
            user_helpful_votes: "user_helpful_votes".into(),
            gold_label: "gold_label".into(),
        }
    }
}

/// Loads a review dataset from a CSV file with a header row.
///
/// The entity id defaults to the file stem. Input order is preserved, absent
/// optional fields stay absent, and every present rating is validated
/// against `[1, scale_max]`. Dates may be a bare year or an ISO date; only
/// the year is kept.
pub fn load_dataset(
    path: &Path,
    schema: &ColumnSchema,
    scale_max: u32,
) -> Result<ReviewDataset, CorpusError> {
    let path_str = path.display().to_string();
    let read_err = |source| CorpusError::Read {
        path: path_str.clone(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => read_err(source),
            other => CorpusError::Malformed {
                path: path_str.clone(),
                line: 1,
                message: format!("{other:?}"),
            },
        })?;

    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Malformed {
            path: path_str.clone(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| -> Result<usize, CorpusError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CorpusError::MissingColumn {
                path: path_str.clone(),
                column: name.to_string(),
            })
    };
    let idx_id = column(&schema.id)?;
    let idx_text = column(&schema.text)?;
    let idx_rating = column(&schema.rating)?;
    let idx_votes = column(&schema.helpful_votes)?;
    let idx_date = column(&schema.date)?;
    let idx_user = column(&schema.user_id)?;
    let idx_user_reviews = column(&schema.user_review_count)?;
    let idx_user_votes = column(&schema.user_helpful_votes)?;
    let idx_gold = column(&schema.gold_label)?;

    let mut reviews = Vec::new();
    let mut seen_ids = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| CorpusError::Malformed {
            path: path_str.clone(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |message: String| CorpusError::Malformed {
            path: path_str.clone(),
            line,
            message,
        };
        let field = |idx: usize| record.get(idx).unwrap_or("").trim();

        let id = field(idx_id).to_string();
        if id.is_empty() {
            return Err(malformed("empty review id".into()));
        }
        if !seen_ids.insert(id.clone()) {
            return Err(malformed(format!("duplicate review id '{id}'")));
        }

        let rating = parse_optional(field(idx_rating), "rating", &malformed)?;
        if let Some(r) = rating {
            if !(1.0..=scale_max as f64).contains(&r) {
                return Err(CorpusError::RatingOutOfRange {
                    path: path_str.clone(),
                    line,
                    rating: r,
                    scale_max,
                });
            }
        }
        let helpful_votes = match field(idx_votes) {
            "" => 0,
            s => s
                .parse::<u64>()
                .map_err(|_| malformed(format!("invalid helpful_votes '{s}'")))?,
        };
        let posting_year = parse_year(field(idx_date), &malformed)?;
        let user_review_count = parse_optional::<u64>(field(idx_user_reviews), "user_review_count", &malformed)?;
        if user_review_count == Some(0) {
            return Err(malformed("user_review_count must be at least 1".into()));
        }
        let user_helpful_votes =
            parse_optional::<u64>(field(idx_user_votes), "user_helpful_votes", &malformed)?;
        let gold_label = match field(idx_gold) {
            "" => None,
            s => Some(s.to_string()),
        };

        reviews.push(Review {
            id,
            text: record.get(idx_text).unwrap_or("").to_string(),
            rating,
            helpful_votes,
            posting_year,
            user_id: field(idx_user).to_string(),
            user_review_count,
            user_helpful_votes,
            gold_label,
        });
    }

    if reviews.is_empty() {
        return Err(CorpusError::NoReviews { path: path_str });
    }
    let entity_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path_str.clone());
    Ok(ReviewDataset {
        entity_id,
        scale_max,
        reviews,
        current_year: None,
    })
}

fn parse_optional<T: std::str::FromStr>(
    raw: &str,
    what: &str,
    malformed: &dyn Fn(String) -> CorpusError,
) -> Result<Option<T>, CorpusError> {
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<T>()
        .map(Some)
        .map_err(|_| malformed(format!("invalid {what} '{raw}'")))
}

/// Accepts a bare year ("2020") or an ISO date ("2020-07-14"); only the
/// year matters to the time score.
fn parse_year(
    raw: &str,
    malformed: &dyn Fn(String) -> CorpusError,
) -> Result<Option<i32>, CorpusError> {
    if raw.is_empty() {
        return Ok(None);
    }
    let year_part = raw.split('-').next().unwrap_or(raw);
    year_part
        .parse::<i32>()
        .map(Some)
        .map_err(|_| malformed(format!("invalid date '{raw}'")))
}

/// Writes a dataset back out in the canonical CSV layout; loading the
/// result reproduces the dataset field for field.
pub fn save_dataset(ds: &ReviewDataset, path: &Path) -> Result<(), CorpusError> {
    let path_str = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| CorpusError::Write {
        path: path_str.clone(),
        source: match e.into_kind() {
            csv::ErrorKind::Io(source) => source,
            other => std::io::Error::other(format!("{other:?}")),
        },
    })?;
    let io_err = |e: csv::Error| CorpusError::Write {
        path: path_str.clone(),
        source: std::io::Error::other(e.to_string()),
    };
    writer
        .write_record([
            "id",
            "text",
            "rating",
            "helpful_votes",
            "date",
            "user_id",
            "user_review_count",
            "user_helpful_votes",
            "gold_label",
        ])
        .map_err(io_err)?;
    for r in &ds.reviews {
        writer
            .write_record([
                r.id.as_str(),
                r.text.as_str(),
                &r.rating.map(format_number).unwrap_or_default(),
                &r.helpful_votes.to_string(),
                &r.posting_year.map(|y| y.to_string()).unwrap_or_default(),
                r.user_id.as_str(),
                &r.user_review_count.map(|n| n.to_string()).unwrap_or_default(),
                &r.user_helpful_votes.map(|h| h.to_string()).unwrap_or_default(),
                r.gold_label.as_deref().unwrap_or(""),
            ])
            .map_err(io_err)?;
    }
    writer.flush().map_err(|e| CorpusError::Write {
        path: path_str,
        source: e,
    })
}

fn format_number(x: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{x}");
    s
}

/// Loads a `label<TAB>text` file (one example per line). Lines may also use
/// the `__label__N text` convention. Returns (label, text) pairs verbatim;
/// mapping labels onto a class set is the caller's business.
pub fn load_labeled_lines(path: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let path_str = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|source| CorpusError::Read {
        path: path_str.clone(),
        source,
    })?;
    let mut pairs = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let (label, text) = if let Some(rest) = line.strip_prefix("__label__") {
            rest.split_once(char::is_whitespace).ok_or_else(|| {
                CorpusError::Malformed {
                    path: path_str.clone(),
                    line: i as u64 + 1,
                    message: "no text after label".into(),
                }
            })?
        } else {
            line.split_once('\t').ok_or_else(|| CorpusError::Malformed {
                path: path_str.clone(),
                line: i as u64 + 1,
                message: "expected 'label<TAB>text'".into(),
            })?
        };
        pairs.push((label.trim().to_string(), text.trim().to_string()));
    }
    if pairs.is_empty() {
        return Err(CorpusError::NoReviews { path: path_str });
    }
    Ok(pairs)
}

/// Replaces absent ratings with the arithmetic mean of the present ones.
/// Present ratings are never touched.
pub fn impute_missing_ratings(ds: &ReviewDataset) -> Result<ReviewDataset, CorpusError> {
    let present: Vec<f64> = ds.reviews.iter().filter_map(|r| r.rating).collect();
    if present.is_empty() {
        return Err(CorpusError::CannotImpute);
    }
    let mean = present.iter().sum::<f64>() / present.len() as f64;
    let mut out = ds.clone();
    for r in &mut out.reviews {
        if r.rating.is_none() {
            r.rating = Some(mean);
        }
    }
    Ok(out)
}

/// Switches for [`preprocess`]. Both default to on, matching the pipelines'
/// default text treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocessOptions {
    pub remove_stopwords: bool,
    pub stem: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            remove_stopwords: true,
            stem: true,
        }
    }
}

/// Lowercases, strips punctuation and numerals, tokenizes on whitespace,
/// drops stopwords and Porter-stems (each when enabled).
///
/// Deterministic, and idempotent on its own output joined by spaces: the
/// stemmer runs to a fixed point, and a token whose stem lands on the
/// stopword list (e.g. "whiles" → "while") is also dropped, so a second
/// pass has nothing left to change.
pub fn preprocess(text: &str, opts: &PreprocessOptions) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    for raw in lowered.split(|c: char| !c.is_alphabetic()) {
        if raw.is_empty() || (opts.remove_stopwords && is_stopword(raw)) {
            continue;
        }
        let token = if opts.stem {
            porter::stem_stable(raw)
        } else {
            raw.to_string()
        };
        if opts.remove_stopwords && is_stopword(&token) {
            continue;
        }
        tokens.push(token);
    }
    tokens
}

/// Tokenizes every review of a dataset, preserving order.
pub fn tokenize_dataset(ds: &ReviewDataset, opts: &PreprocessOptions) -> Vec<TokenizedReview> {
    ds.reviews
        .iter()
        .map(|r| TokenizedReview {
            review_id: r.id.clone(),
            tokens: preprocess(&r.text, opts),
        })
        .collect()
}

/// The embedded English stopword list (sorted; see README). Shipping a
/// fixed list keeps token streams identical across environments.
const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me",
    "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only",
    "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should",
    "so", "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "would", "you", "your", "yours", "yourself", "yourselves",
];

fn is_stopword(word: &str) -> bool {
    STOPWORDS.binary_search(&word).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use tempfile::tempdir;

    fn write_csv(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        path
    }

    const HEADER: &str =
        "id,text,rating,helpful_votes,date,user_id,user_review_count,user_helpful_votes,gold_label\n";

    #[test]
    fn loads_rows_in_order() {
        let dir = tempdir().unwrap();
        let path = write_csv(
            &dir,
            "phone.csv",
            &format!(
                "{HEADER}r1,Great phone,10,3,2020,u1,5,12,positive\n\
                 r2,It broke,10,0,2019-06-01,u2,,,negative\n\
                 r3,Okay,10,1,2018,u3,2,0,\n"
            ),
        );
        let ds = load_dataset(&path, &ColumnSchema::default(), 10).unwrap();
        assert_eq!(ds.entity_id, "phone");
        assert_eq!(ds.scale_max, 10);
        assert_eq!(ds.reviews.len(), 3);
        assert_eq!(ds.reviews[0].id, "r1");
        assert_eq!(ds.reviews[0].rating, Some(10.0));
        assert_eq!(ds.reviews[1].posting_year, Some(2019));
        assert_eq!(ds.reviews[1].user_review_count, None);
        assert_eq!(ds.reviews[2].gold_label, None);
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = tempdir().unwrap();
        let path = write_csv(&dir, "empty.csv", HEADER);
        let err = load_dataset(&path, &ColumnSchema::default(), 10).unwrap_err();
        assert!(matches!(err, CorpusError::NoReviews { .. }), "{err}");
    }

    #[test]
    fn out_of_range_rating_names_the_row() {
        let dir = tempdir().unwrap();
        let path = write_csv(
            &dir,
            "bad.csv",
            &format!("{HEADER}r1,fine,10,0,2020,u1,,,\nr2,impossible,11,0,2020,u2,,,\n"),
        );
        let err = load_dataset(&path, &ColumnSchema::default(), 10).unwrap_err();
        match err {
            CorpusError::RatingOutOfRange { line, rating, .. } => {
                assert_eq!(line, 3);
                assert_eq!(rating, 11.0);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let dir = tempdir().unwrap();
        let path = write_csv(
            &dir,
            "dup.csv",
            &format!("{HEADER}r1,a,5,0,2020,u1,,,\nr1,b,5,0,2020,u2,,,\n"),
        );
        let err = load_dataset(&path, &ColumnSchema::default(), 10).unwrap_err();
        assert!(err.to_string().contains("duplicate review id"), "{err}");
    }

    #[test]
    fn round_trips_through_save() {
        let dir = tempdir().unwrap();
        let path = write_csv(
            &dir,
            "rt.csv",
            &format!(
                "{HEADER}r1,\"Loved it, truly\",9.5,3,2020,u1,5,12,positive\n\
                 r2,meh,,0,,u2,,,\n"
            ),
        );
        let ds = load_dataset(&path, &ColumnSchema::default(), 10).unwrap();
        let out = dir.path().join("rt.csv");
        save_dataset(&ds, &out).unwrap();
        let reloaded = load_dataset(&out, &ColumnSchema::default(), 10).unwrap();
        assert_eq!(ds, reloaded);
    }

    #[test]
    fn imputes_mean_of_present_ratings() {
        let ds = dataset_with_ratings(&[Some(8.0), None, Some(10.0)]);
        let filled = impute_missing_ratings(&ds).unwrap();
        let ratings: Vec<f64> = filled.reviews.iter().map(|r| r.rating.unwrap()).collect();
        assert_eq!(ratings, vec![8.0, 9.0, 10.0]);
    }

    #[test]
    fn imputation_leaves_complete_datasets_alone() {
        let ds = dataset_with_ratings(&[Some(7.0), Some(7.0), Some(7.0)]);
        assert_eq!(impute_missing_ratings(&ds).unwrap(), ds);
    }

    #[test]
    fn imputation_needs_at_least_one_rating() {
        let ds = dataset_with_ratings(&[None, None]);
        assert!(matches!(
            impute_missing_ratings(&ds),
            Err(CorpusError::CannotImpute)
        ));
    }

    fn dataset_with_ratings(ratings: &[Option<f64>]) -> ReviewDataset {
        ReviewDataset {
            entity_id: "e".into(),
            scale_max: 10,
            current_year: None,
            reviews: ratings
                .iter()
                .enumerate()
                .map(|(i, &rating)| Review {
                    id: format!("r{i}"),
                    text: String::new(),
                    rating,
                    helpful_votes: 0,
                    posting_year: None,
                    user_id: String::new(),
                    user_review_count: None,
                    user_helpful_votes: None,
                    gold_label: None,
                })
                .collect(),
        }
    }

    #[test]
    fn preprocess_strips_and_stems() {
        let opts = PreprocessOptions::default();
        assert_eq!(preprocess("The movie was GOOD!!", &opts), vec!["movi", "good"]);
        assert_eq!(preprocess("", &opts), Vec::<String>::new());
        assert_eq!(preprocess("12345 ...", &opts), Vec::<String>::new());
    }

    #[test]
    fn preprocess_flags_are_independent() {
        let keep_all = PreprocessOptions {
            remove_stopwords: false,
            stem: false,
        };
        assert_eq!(
            preprocess("The movie was GOOD!!", &keep_all),
            vec!["the", "movie", "was", "good"]
        );
        let stop_only = PreprocessOptions {
            remove_stopwords: true,
            stem: false,
        };
        assert_eq!(
            preprocess("The movie was GOOD!!", &stop_only),
            vec!["movie", "good"]
        );
    }

    #[test]
    fn stemmed_stopwords_are_dropped_too() {
        // "whiles" stems to "while", which is a stopword; a second pass must
        // see the same token stream, so the first pass already drops it.
        let opts = PreprocessOptions::default();
        assert_eq!(preprocess("whiles ago", &opts), vec!["ago"]);
    }

    #[test]
    fn stopword_list_is_sorted_for_binary_search() {
        for pair in STOPWORDS.windows(2) {
            assert!(pair[0] < pair[1], "{:?} out of order", pair);
        }
    }

    proptest! {
        #[test]
        fn preprocess_is_idempotent(text in "[a-zA-Z0-9 ,.!?';:-]{0,80}") {
            let opts = PreprocessOptions::default();
            let once = preprocess(&text, &opts);
            let again = preprocess(&once.join(" "), &opts);
            prop_assert_eq!(once, again);
        }

        #[test]
        fn preprocess_is_idempotent_without_stemming(text in "[a-zA-Z0-9 ,.!?';:-]{0,80}") {
            let opts = PreprocessOptions { remove_stopwords: true, stem: false };
            let once = preprocess(&text, &opts);
            let again = preprocess(&once.join(" "), &opts);
            prop_assert_eq!(once, again);
        }

        #[test]
        fn tokens_are_purely_alphabetic(text in "\\PC{0,80}") {
            for token in preprocess(&text, &PreprocessOptions::default()) {
                prop_assert!(!token.is_empty());
                prop_assert!(token.chars().all(|c| c.is_alphabetic()));
            }
        }

        #[test]
        fn imputation_preserves_present_ratings(
            ratings in proptest::collection::vec(
                proptest::option::of(1.0f64..=10.0), 1..20
            )
        ) {
            let ds = dataset_with_ratings(&ratings);
            let present: Vec<f64> = ratings.iter().flatten().copied().collect();
            match impute_missing_ratings(&ds) {
                Ok(filled) => {
                    let lo = present.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    for (orig, new) in ratings.iter().zip(&filled.reviews) {
                        match orig {
                            Some(r) => prop_assert_eq!(new.rating, Some(*r)),
                            None => {
                                let v = new.rating.unwrap();
                                prop_assert!(v >= lo && v <= hi);
                            }
                        }
                    }
                }
                Err(_) => prop_assert!(present.is_empty()),
            }
        }
    }
}
