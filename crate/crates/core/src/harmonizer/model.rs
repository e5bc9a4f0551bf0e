use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::representation::{validate_sequence, vocabulary, Emotion, Event, Representation, TokenSequence, Vocabulary};

use super::HarmonizeError;

/// A conditional next-token distribution over a closed vocabulary.
pub trait SequenceModel {
    fn vocabulary(&self) -> &Vocabulary;

    /// Probabilities for every vocabulary id given a prefix of ids. Sums to 1.
    fn next_distribution(&self, prefix: &[usize]) -> Vec<f64>;

    fn representation(&self) -> Representation {
        self.vocabulary().representation()
    }

    fn encode_prefix(&self, prefix: &[Event]) -> Result<Vec<usize>, HarmonizeError> {
        prefix
            .iter()
            .map(|e| self.vocabulary().id(e).ok_or_else(|| HarmonizeError::UnknownToken(e.to_string())))
            .collect()
    }
}

pub const DEFAULT_ORDER: usize = 6;
/// Weight of the labeled corpus in the count mixture.
pub const DEFAULT_LAMBDA: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NGramConfig {
    pub representation: Representation,
    /// Longest n-gram, i.e. contexts of up to `order - 1` tokens.
    pub order: usize,
    pub lambda: f64,
}

impl NGramConfig {
    pub fn new(representation: Representation) -> Self {
        NGramConfig { representation, order: DEFAULT_ORDER, lambda: DEFAULT_LAMBDA }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContextCounts {
    pub total: f64,
    pub next: BTreeMap<usize, f64>,
}

/// Witten-Bell interpolated n-gram over token ids.
///
/// `P(w | h) = c(h)/(c(h)+T(h)) * c(h,w)/c(h) + T(h)/(c(h)+T(h)) * P(w | h')`
/// where `h'` drops the oldest token of `h`, `T(h)` counts distinct
/// continuations, and the recursion bottoms out in the uniform distribution.
/// Unseen contexts pass the lower-order estimate through unchanged.
#[derive(Debug, Clone)]
pub struct NGramModel {
    config: NGramConfig,
    vocab: Vocabulary,
    contexts: BTreeMap<Vec<usize>, ContextCounts>,
}

impl NGramModel {
    pub fn config(&self) -> NGramConfig {
        self.config
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    /// Weighted counts for an exact context, if it was observed.
    pub fn counts(&self, context: &[usize]) -> Option<&ContextCounts> {
        self.contexts.get(context)
    }

    pub fn context_count(&self) -> usize {
        self.contexts.len()
    }

    pub fn probability(&self, prefix: &[usize], token: usize) -> f64 {
        self.next_distribution(prefix)[token]
    }
}

impl SequenceModel for NGramModel {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_distribution(&self, prefix: &[usize]) -> Vec<f64> {
        let v = self.vocab.len();
        let mut dist = vec![1.0 / v as f64; v];
        let longest = prefix.len().min(self.config.order - 1);
        for k in 0..=longest {
            let context = &prefix[prefix.len() - k..];
            let Some(stats) = self.contexts.get(context) else { continue };
            let types = stats.next.len() as f64;
            let keep = stats.total / (stats.total + types);
            for p in dist.iter_mut() {
                *p *= 1.0 - keep;
            }
            for (&id, &count) in &stats.next {
                dist[id] += keep * count / stats.total;
            }
        }
        dist
    }
}

fn check_corpus(corpus: &[TokenSequence], repr: Representation, unlabeled: bool) -> Result<(), HarmonizeError> {
    for (i, ts) in corpus.iter().enumerate() {
        if ts.representation != repr {
            return Err(HarmonizeError::RepresentationMismatch { expected: repr, found: ts.representation });
        }
        validate_sequence(ts).map_err(|v| HarmonizeError::Corpus { index: i, reason: v.to_string() })?;
        if unlabeled && ts.tokens.first() != Some(&Event::Emotion(Emotion::Unlabeled)) {
            return Err(HarmonizeError::Corpus {
                index: i,
                reason: "unlabeled clips must start with Emotion_None".into(),
            });
        }
    }
    Ok(())
}

/// Maximum-likelihood counting over both corpora.
///
/// Labeled counts are weighted by `lambda` and unlabeled counts by
/// `1 - lambda`; weights are rescaled so the larger active one is 1, which
/// keeps the Witten-Bell discount independent of the overall scale.
pub fn train(
    config: NGramConfig,
    unlabeled: &[TokenSequence],
    labeled: &[TokenSequence],
) -> Result<NGramModel, HarmonizeError> {
    if config.order == 0 {
        return Err(HarmonizeError::InvalidConfig("order must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&config.lambda) {
        return Err(HarmonizeError::InvalidConfig(format!("lambda {} outside [0, 1]", config.lambda)));
    }
    let repr = config.representation;
    check_corpus(unlabeled, repr, true)?;
    check_corpus(labeled, repr, false)?;

    let w_labeled = if labeled.is_empty() { 0.0 } else { config.lambda };
    let w_unlabeled = if unlabeled.is_empty() { 0.0 } else { 1.0 - config.lambda };
    let scale = w_labeled.max(w_unlabeled);
    if scale == 0.0 {
        return Err(HarmonizeError::EmptyCorpus);
    }

    let vocab = vocabulary(repr);
    let mut contexts: BTreeMap<Vec<usize>, ContextCounts> = BTreeMap::new();
    for (corpus, weight) in [(unlabeled, w_unlabeled / scale), (labeled, w_labeled / scale)] {
        if weight == 0.0 {
            continue;
        }
        for ts in corpus {
            let ids: Vec<usize> = ts
                .tokens
                .iter()
                .map(|t| vocab.id(t).ok_or_else(|| HarmonizeError::UnknownToken(t.to_string())))
                .collect::<Result<_, _>>()?;
            for (i, &next) in ids.iter().enumerate() {
                for k in 0..=i.min(config.order - 1) {
                    let entry = contexts.entry(ids[i - k..i].to_vec()).or_default();
                    entry.total += weight;
                    *entry.next.entry(next).or_insert(0.0) += weight;
                }
            }
        }
    }
    // Sum in id order so a saved and reloaded model is bit-identical.
    for counts in contexts.values_mut() {
        counts.total = counts.next.values().sum();
    }
    Ok(NGramModel { config, vocab, contexts })
}

const FORMAT: &str = "leadsheet-ngram";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    representation: String,
    order: usize,
    lambda: f64,
    vocabulary_size: usize,
    vocabulary_hash: String,
    contexts: Vec<ContextEntry>,
}

#[derive(Serialize, Deserialize)]
struct ContextEntry {
    context: Vec<usize>,
    next: Vec<(usize, f64)>,
}

impl NGramModel {
    pub fn save_json<W: Write>(&self, writer: W) -> Result<(), HarmonizeError> {
        let file = ModelFile {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            representation: self.config.representation.name().into(),
            order: self.config.order,
            lambda: self.config.lambda,
            vocabulary_size: self.vocab.len(),
            vocabulary_hash: self.vocab.hash(),
            contexts: self
                .contexts
                .iter()
                .map(|(context, counts)| ContextEntry {
                    context: context.clone(),
                    next: counts.next.iter().map(|(k, v)| (*k, *v)).collect(),
                })
                .collect(),
        };
        serde_json::to_writer(writer, &file).map_err(|e| HarmonizeError::ModelFile(e.to_string()))
    }

    pub fn load_json<R: Read>(reader: R) -> Result<NGramModel, HarmonizeError> {
        let file: ModelFile = serde_json::from_reader(reader).map_err(|e| HarmonizeError::ModelFile(e.to_string()))?;
        if file.format != FORMAT || file.version != FORMAT_VERSION {
            return Err(HarmonizeError::ModelFile(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        let representation: Representation = file.representation.parse().map_err(HarmonizeError::ModelFile)?;
        let vocab = vocabulary(representation);
        if vocab.hash() != file.vocabulary_hash || vocab.len() != file.vocabulary_size {
            return Err(HarmonizeError::ModelFile("vocabulary hash mismatch".into()));
        }
        if file.order == 0 || !(0.0..=1.0).contains(&file.lambda) {
            return Err(HarmonizeError::ModelFile("invalid order or lambda".into()));
        }
        let mut contexts = BTreeMap::new();
        for entry in file.contexts {
            if entry.context.len() >= file.order || entry.context.iter().any(|&id| id >= vocab.len()) {
                return Err(HarmonizeError::ModelFile("context outside the model".into()));
            }
            let mut counts = ContextCounts::default();
            for (id, c) in entry.next {
                if id >= vocab.len() || c.is_nan() || c <= 0.0 {
                    return Err(HarmonizeError::ModelFile("bad continuation count".into()));
                }
                counts.total += c;
                counts.next.insert(id, c);
            }
            contexts.insert(entry.context, counts);
        }
        Ok(NGramModel {
            config: NGramConfig { representation, order: file.order, lambda: file.lambda },
            vocab,
            contexts,
        })
    }
}
