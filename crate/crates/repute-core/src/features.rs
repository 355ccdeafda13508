//! N-gram vectorization, latent semantic embedding, and cosine similarity.
//!
//! This is the semantic backbone the grouping stage runs on: reviews become
//! count or TF-IDF vectors over an n-gram [`Vocabulary`], optionally
//! projected into a low-rank [`EmbeddingSpace`] obtained by truncated SVD of
//! the document-term matrix. Precomputed vectors from another system can be
//! swapped in through [`load_external_vectors`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("at least one n-gram order is required")]
    NoOrders,
    #[error("rank {k} outside [1, {max}]")]
    RankOutOfRange { k: usize, max: usize },
    #[error("vector has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
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

/// A dense vector representation of one document — raw term weights of
/// length |V|, or an embedded vector of length k.
pub type DocVector = Vec<f64>;

/// Term weighting for [`vectorize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Raw term frequencies.
    Count,
    /// tf × (ln((1+N)/(1+df)) + 1), L2-normalized.
    Tfidf,
}

/// Term → dense index map with document frequencies, for a fixed set of
/// n-gram orders. Indices are assigned in lexicographic term order, so two
/// builds over the same corpus are identical regardless of document order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<u64>,
    n_docs: usize,
    orders: Vec<usize>,
}

/// Serialized form of [`Vocabulary`]; the term → index map is rebuilt on
/// load so the on-disk encoding stays canonical.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct VocabularyData {
    terms: Vec<String>,
    doc_freq: Vec<u64>,
    n_docs: usize,
    orders: Vec<usize>,
}

impl From<VocabularyData> for Vocabulary {
    fn from(data: VocabularyData) -> Self {
        let index = data
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            terms: data.terms,
            index,
            doc_freq: data.doc_freq,
            n_docs: data.n_docs,
            orders: data.orders,
        }
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData {
            terms: v.terms,
            doc_freq: v.doc_freq,
            n_docs: v.n_docs,
            orders: v.orders,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, idx: usize) -> u64 {
        self.doc_freq[idx]
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// The n-grams of `tokens` for this vocabulary's orders (in-vocabulary
    /// or not), joined by single spaces.
    pub fn grams(&self, tokens: &[String]) -> Vec<String> {
        grams_for_orders(tokens, &self.orders)
    }

    /// Smoothed inverse document frequency of term `idx`.
    pub fn idf(&self, idx: usize) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.doc_freq[idx] as f64)).ln() + 1.0
    }

    /// A canonical byte encoding of the vocabulary, hashed into model files
    /// so a model is never applied against a different term space.
    pub fn fingerprint_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(format!("docs={};orders={:?};", self.n_docs, self.orders).as_bytes());
        for (term, df) in self.terms.iter().zip(&self.doc_freq) {
            bytes.extend_from_slice(term.as_bytes());
            bytes.push(0);
            bytes.extend_from_slice(format!("{df}\n").as_bytes());
        }
        bytes
    }
}

fn grams_for_orders(tokens: &[String], orders: &[usize]) -> Vec<String> {
    let mut grams = Vec::new();
    for &n in orders {
        if n == 0 || tokens.len() < n {
            continue;
        }
        for window in tokens.windows(n) {
            grams.push(window.join(" "));
        }
    }
    grams
}

/// Builds the vocabulary of all n-grams (of the requested orders) whose
/// document frequency is at least `min_df`.
pub fn build_vocabulary(
    docs: &[Vec<String>],
    orders: &[usize],
    min_df: u64,
) -> Result<Vocabulary, FeatureError> {
    if docs.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    if orders.is_empty() || orders.iter().all(|&n| n == 0) {
        return Err(FeatureError::NoOrders);
    }
    let mut df: BTreeMap<String, u64> = BTreeMap::new();
    for doc in docs {
        let unique: HashSet<String> = grams_for_orders(doc, orders).into_iter().collect();
        for gram in unique {
            *df.entry(gram).or_insert(0) += 1;
        }
    }
    let mut terms = Vec::new();
    let mut doc_freq = Vec::new();
    for (term, freq) in df {
        if freq >= min_df {
            terms.push(term);
            doc_freq.push(freq);
        }
    }
    let index = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        terms,
        index,
        doc_freq,
        n_docs: docs.len(),
        orders: orders.to_vec(),
    })
}

/// Turns one token stream into a dense |V|-dimensional vector.
/// Out-of-vocabulary grams are ignored.
pub fn vectorize(tokens: &[String], vocab: &Vocabulary, weighting: Weighting) -> DocVector {
    let mut v = vec![0.0; vocab.len()];
    for gram in vocab.grams(tokens) {
        if let Some(idx) = vocab.index_of(&gram) {
            v[idx] += 1.0;
        }
    }
    if weighting == Weighting::Tfidf {
        for (idx, x) in v.iter_mut().enumerate() {
            *x *= vocab.idf(idx);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
    }
    v
}

/// Stacks one vector per document into a (docs × |V|) matrix.
pub fn doc_term_matrix(
    docs: &[Vec<String>],
    vocab: &Vocabulary,
    weighting: Weighting,
) -> DMatrix<f64> {
    let rows: Vec<DocVector> = docs
        .iter()
        .map(|doc| vectorize(doc, vocab, weighting))
        .collect();
    DMatrix::from_fn(docs.len(), vocab.len(), |i, j| rows[i][j])
}

/// A fitted latent semantic space: the top-k right singular vectors of the
/// document-term matrix, plus the singular values.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    rank: usize,
    /// |V| × k: column j is the j-th right singular vector.
    projection: DMatrix<f64>,
    /// Nonincreasing, nonnegative.
    singular_values: Vec<f64>,
    fitted_docs: usize,
}

impl EmbeddingSpace {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn fitted_docs(&self) -> usize {
        self.fitted_docs
    }

    pub fn term_dimension(&self) -> usize {
        self.projection.nrows()
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }
}

/// Truncated SVD of a (docs × |V|) matrix. Among all rank-k factorizations
/// this minimizes Frobenius reconstruction error; the property tests hold
/// the solver to that, not to a particular algorithm.
pub fn lsa_fit(matrix: &DMatrix<f64>, k: usize) -> Result<EmbeddingSpace, FeatureError> {
    let max = matrix.nrows().min(matrix.ncols());
    if k == 0 || k > max {
        return Err(FeatureError::RankOutOfRange { k, max });
    }
    let svd = matrix.clone().svd(false, true);
    let v_t = svd
        .v_t
        .expect("right singular vectors were requested from the solver");

    // Defensive: order components by descending singular value so the
    // truncation really keeps the largest ones.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("singular values are finite")
    });

    let dim = matrix.ncols();
    let mut projection = DMatrix::zeros(dim, k);
    let mut singular_values = Vec::with_capacity(k);
    for (col, &component) in order.iter().take(k).enumerate() {
        singular_values.push(svd.singular_values[component]);
        for row in 0..dim {
            projection[(row, col)] = v_t[(component, row)];
        }
    }
    Ok(EmbeddingSpace {
        rank: k,
        projection,
        singular_values,
        fitted_docs: matrix.nrows(),
    })
}

/// Projects a |V|-dimensional document vector into the k-dimensional
/// latent space.
pub fn embed(doc: &DocVector, space: &EmbeddingSpace) -> Result<DocVector, FeatureError> {
    if doc.len() != space.term_dimension() {
        return Err(FeatureError::DimensionMismatch {
            expected: space.term_dimension(),
            got: doc.len(),
        });
    }
    let mut out = vec![0.0; space.rank];
    for (col, slot) in out.iter_mut().enumerate() {
        *slot = (0..doc.len())
            .map(|row| space.projection[(row, col)] * doc[row])
            .sum();
    }
    Ok(out)
}

/// Cosine similarity. Zero vectors compare as 0 to everything.
///
/// Both vectors must have the same dimension; that is the caller's
/// contract, violating it is a bug.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "cosine over mismatched dimensions");
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Reads one vector per line: `review_id` followed by whitespace-separated
/// decimal components. All vectors must share one dimension.
pub fn load_external_vectors(path: &Path) -> Result<BTreeMap<String, DocVector>, FeatureError> {
    let path_str = path.display().to_string();
    let content = std::fs::read_to_string(path).map_err(|source| FeatureError::Read {
        path: path_str.clone(),
        source,
    })?;
    let mut vectors = BTreeMap::new();
    let mut dim: Option<usize> = None;
    for (i, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| FeatureError::Parse {
            path: path_str.clone(),
            line: i + 1,
            message,
        };
        let mut parts = line.split_whitespace();
        let id = parts.next().expect("non-empty line has a first token");
        let components: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| parse_err(format!("invalid component '{p}'")))
            })
            .collect::<Result<_, _>>()?;
        if components.is_empty() {
            return Err(parse_err("vector has no components".into()));
        }
        match dim {
            None => dim = Some(components.len()),
            Some(d) if d != components.len() => {
                return Err(parse_err(format!(
                    "vector has dimension {}, expected {d}",
                    components.len()
                )));
            }
            _ => {}
        }
        if vectors.insert(id.to_string(), components).is_some() {
            return Err(parse_err(format!("duplicate review id '{id}'")));
        }
    }
    Ok(vectors)
}
