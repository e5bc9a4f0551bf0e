//! Emotion-conditioned melody harmonization.
//!
//! A [`SequenceModel`] scores the next token of the interleaved stream. Keys
//! are chosen by [`decide_key`] and chord bars are sampled slot by slot with
//! [`generate_chords`], under a grammar mask so every output is well formed.

mod generate;
mod model;
mod sampler;

use thiserror::Error;

use crate::representation::{CodecError, Representation};

pub use generate::{decide_key, degree_policy_for, generate_chords, harmonize, predict_key, Harmonization, KeyPolicy};
pub use model::{train, ContextCounts, NGramConfig, NGramModel, SequenceModel, DEFAULT_LAMBDA, DEFAULT_ORDER};
pub use sampler::{nucleus_sample, nucleus_set, SampleError, SamplerConfig, DEFAULT_TEMPERATURE, DEFAULT_TOP_P};

#[derive(Debug, Error)]
pub enum HarmonizeError {
    #[error("token {0} is not in the model vocabulary")]
    UnknownToken(String),
    #[error("expected {expected} sequences, found {found}")]
    RepresentationMismatch { expected: Representation, found: Representation },
    #[error("corpus clip {index}: {reason}")]
    Corpus { index: usize, reason: String },
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("both training corpora are empty")]
    EmptyCorpus,
    #[error("model file: {0}")]
    ModelFile(String),
    #[error("the model-based key policy needs a trained model")]
    MissingModel,
    #[error("the model assigns zero mass to every key")]
    NoKeyMass,
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}
