//! Similarity engine and relevance classifier: term vectors, cosine
//! similarity against the topic query, and a two-class multinomial
//! naive-Bayes model with Laplace smoothing.
//!
//! Vocabulary indexing is lexicographic and all structures are immutable
//! after fit/train, so scores are bit-reproducible and safe to share.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Term universe observed at fit time: dense lexicographic indices plus
/// per-term document frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    index: BTreeMap<String, usize>,
    document_frequency: Vec<u32>,
    n_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn df(&self, term_index: usize) -> u32 {
        self.document_frequency[term_index]
    }

    /// Terms in index order.
    pub fn terms(&self) -> impl Iterator<Item = (&str, usize)> {
        self.index.iter().map(|(t, i)| (t.as_str(), *i))
    }
}

/// Sparse non-negative weight vector over vocabulary indices. Zero weights
/// are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermVector {
    weights: BTreeMap<usize, f64>,
}

impl TermVector {
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.weights.get(&index).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().map(|(i, w)| (*i, *w))
    }

    #[cfg(test)]
    pub fn from_pairs(pairs: &[(usize, f64)]) -> TermVector {
        let mut weights = BTreeMap::new();
        for &(i, w) in pairs {
            if w != 0.0 {
                weights.insert(i, w);
            }
        }
        TermVector { weights }
    }
}

/// The benchmark topic: raw tokens plus their vector under the run's
/// vocabulary.
#[derive(Debug, Clone)]
pub struct TopicQuery {
    pub tokens: Vec<String>,
    pub vector: TermVector,
}

impl TopicQuery {
    pub fn new(tokens: Vec<String>, vocab: &Vocabulary) -> Result<TopicQuery> {
        if tokens.is_empty() {
            return Err(Error::Config("topic query must be non-empty".to_string()));
        }
        let vector = build_vector(&tokens, vocab, Weighting::TfIdf);
        Ok(TopicQuery { tokens, vector })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Tf,
    TfIdf,
}

/// Build the vocabulary over a corpus of token sequences. Term order (and
/// therefore index assignment) is lexicographic.
pub fn vocab_fit(corpus: &[Vec<String>]) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for doc in corpus {
        let mut seen: Vec<&str> = doc.iter().map(|s| s.as_str()).collect();
        seen.sort_unstable();
        seen.dedup();
        for term in seen {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let mut index = BTreeMap::new();
    let mut document_frequency = Vec::with_capacity(df.len());
    for (i, (term, count)) in df.into_iter().enumerate() {
        index.insert(term.to_string(), i);
        document_frequency.push(count);
    }
    Ok(Vocabulary {
        index,
        document_frequency,
        n_docs: corpus.len(),
    })
}

/// Vectorize a token sequence. Out-of-vocabulary tokens are dropped.
///
/// tf: raw term count. tfidf: tf * (ln((1 + n_docs) / (1 + df)) + 1),
/// the smoothed-idf damping of boilerplate terms.
pub fn build_vector(tokens: &[String], vocab: &Vocabulary, weighting: Weighting) -> TermVector {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for token in tokens {
        if let Some(i) = vocab.index_of(token) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    if weighting == Weighting::TfIdf {
        let n = vocab.n_docs() as f64;
        for (i, w) in counts.iter_mut() {
            let df = vocab.df(*i) as f64;
            *w *= ((1.0 + n) / (1.0 + df)).ln() + 1.0;
        }
    }
    counts.retain(|_, w| *w != 0.0);
    TermVector { weights: counts }
}

/// Cosine of two non-negative sparse vectors; 0 when either is empty.
pub fn cosine_sim(a: &TermVector, b: &TermVector) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    for (i, w) in a.iter() {
        norm_a += w * w;
        dot += w * b.get(i);
    }
    let mut norm_b = 0.0;
    for (_, w) in b.iter() {
        norm_b += w * w;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    dot / (norm_a.sqrt() * norm_b.sqrt())
}

// ---------------------------------------------------------------------------
// Naive Bayes
// ---------------------------------------------------------------------------

/// Two-class multinomial naive-Bayes model in log space.
#[derive(Debug, Clone)]
pub struct NBModel {
    pub alpha: f64,
    /// log P(class): [relevant, irrelevant]
    pub class_log_prior: [f64; 2],
    /// per-term log P(term | class), indexed by vocabulary index
    pub term_log_likelihood: [Vec<f64>; 2],
    pub vocabulary: Vocabulary,
}

pub const CLASS_RELEVANT: usize = 0;
pub const CLASS_IRRELEVANT: usize = 1;

/// Train on labeled token sequences. Pure counting, so training order never
/// matters. Needs at least one document of each class.
pub fn nb_train(docs: &[(Vec<String>, bool)], alpha: f64, vocab: &Vocabulary) -> Result<NBModel> {
    if alpha <= 0.0 {
        return Err(Error::InvalidParam(format!("alpha must be > 0, got {alpha}")));
    }
    let n_rel = docs.iter().filter(|(_, label)| *label).count();
    let n_irr = docs.len() - n_rel;
    if n_rel == 0 || n_irr == 0 {
        return Err(Error::SingleClass);
    }

    let v = vocab.len();
    let mut counts = [vec![0u64; v], vec![0u64; v]];
    let mut totals = [0u64; 2];
    for (tokens, label) in docs {
        let class = if *label { CLASS_RELEVANT } else { CLASS_IRRELEVANT };
        for token in tokens {
            if let Some(i) = vocab.index_of(token) {
                counts[class][i] += 1;
                totals[class] += 1;
            }
        }
    }

    let total_docs = docs.len() as f64;
    let class_log_prior = [
        (n_rel as f64 / total_docs).ln(),
        (n_irr as f64 / total_docs).ln(),
    ];
    let term_log_likelihood = [0, 1].map(|class| {
        let denom = totals[class] as f64 + alpha * v as f64;
        counts[class]
            .iter()
            .map(|&c| ((c as f64 + alpha) / denom).ln())
            .collect()
    });

    Ok(NBModel {
        alpha,
        class_log_prior,
        term_log_likelihood,
        vocabulary: vocab.clone(),
    })
}

/// Posterior probability of relevance via log-space Bayes over in-vocabulary
/// tokens. An empty or all-out-of-vocabulary token list returns the prior.
pub fn nb_posterior(model: &NBModel, tokens: &[String]) -> f64 {
    let mut log_rel = model.class_log_prior[CLASS_RELEVANT];
    let mut log_irr = model.class_log_prior[CLASS_IRRELEVANT];
    for token in tokens {
        if let Some(i) = model.vocabulary.index_of(token) {
            log_rel += model.term_log_likelihood[CLASS_RELEVANT][i];
            log_irr += model.term_log_likelihood[CLASS_IRRELEVANT][i];
        }
    }
    // normalize across the two classes without leaving log space too early
    let max = log_rel.max(log_irr);
    let e_rel = (log_rel - max).exp();
    let e_irr = (log_irr - max).exp();
    e_rel / (e_rel + e_irr)
}

// ---------------------------------------------------------------------------
// Model file format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    format_version: u32,
    alpha: f64,
    log_prior_relevant: f64,
    log_prior_irrelevant: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelTermLine {
    term: String,
    ll_relevant: f64,
    ll_irrelevant: f64,
}

/// Write the model as a line file: a header with alpha and class priors,
/// then one line per term with both log-likelihoods, in term order.
pub fn save_model(model: &NBModel, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    let header = ModelHeader {
        format_version: 1,
        alpha: model.alpha,
        log_prior_relevant: model.class_log_prior[CLASS_RELEVANT],
        log_prior_irrelevant: model.class_log_prior[CLASS_IRRELEVANT],
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for (term, i) in model.vocabulary.terms() {
        let line = ModelTermLine {
            term: term.to_string(),
            ll_relevant: model.term_log_likelihood[CLASS_RELEVANT][i],
            ll_irrelevant: model.term_log_likelihood[CLASS_IRRELEVANT][i],
        };
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
    }
    fs::write(path, out)?;
    Ok(())
}

/// Load a model saved by [`save_model`]. The reconstructed vocabulary keeps
/// lexicographic indexing; document frequencies are not part of the format.
pub fn load_model(path: &Path) -> Result<NBModel> {
    let data = fs::read_to_string(path)?;
    let mut lines = data.lines().enumerate();
    let (_, header_line) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty model file".to_string(),
    })?;
    let header: ModelHeader = serde_json::from_str(header_line).map_err(|e| Error::Parse {
        line: 1,
        msg: format!("bad model header: {e}"),
    })?;

    let mut terms: Vec<ModelTermLine> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ModelTermLine = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("bad model term line: {e}"),
        })?;
        terms.push(parsed);
    }
    terms.sort_by(|a, b| a.term.cmp(&b.term));

    let mut index = BTreeMap::new();
    let mut ll = [Vec::with_capacity(terms.len()), Vec::with_capacity(terms.len())];
    for (i, t) in terms.iter().enumerate() {
        if index.insert(t.term.clone(), i).is_some() {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("duplicate model term: {}", t.term),
            });
        }
        ll[CLASS_RELEVANT].push(t.ll_relevant);
        ll[CLASS_IRRELEVANT].push(t.ll_irrelevant);
    }
    let n_terms = index.len();
    Ok(NBModel {
        alpha: header.alpha,
        class_log_prior: [header.log_prior_relevant, header.log_prior_irrelevant],
        term_log_likelihood: ll,
        vocabulary: Vocabulary {
            index,
            document_frequency: vec![0; n_terms],
            n_docs: 0,
        },
    })
}
