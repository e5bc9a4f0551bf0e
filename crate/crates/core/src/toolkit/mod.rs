//! Corpus files, manifests, MIDI export, corpus statistics and the
//! experiment runner.

mod experiment;
mod files;
mod manifest;
mod midi;
mod quality;
mod stats;
mod synth;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::harmonizer::HarmonizeError;
use crate::metrics::MetricError;
use crate::representation::CodecError;

pub use experiment::{
    run_experiment, run_experiment_file, ExperimentConfig, ExperimentReport, Variant, VariantResult,
    PUBLISHED_REAL_ROW, REAL_ROW_TOLERANCE,
};
pub use files::{
    lead_sheet_from_json, lead_sheet_to_json, read_lead_sheet, write_lead_sheet, ChordEntry, KeyEntry, LeadSheetFile,
    NoteEntry,
};
pub use manifest::{load_corpus, CorpusClip, CorpusManifest, ManifestEntry, Split};
pub use midi::{export_midi, midi_bytes, TEMPO_BPM, TICKS_PER_BAR, TICKS_PER_QUARTER, TICKS_PER_SUB_BEAT};
pub use quality::simplify_quality;
pub use stats::{stats, CorpusStats};
pub use synth::{synthetic_clip, synthetic_corpus};

#[derive(Debug, Error)]
pub enum ToolkitError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: field `{field}`: {message}")]
    Schema { path: PathBuf, field: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("unmappable chord quality `{0}`")]
    Quality(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Harmonize(#[from] HarmonizeError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl ToolkitError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        ToolkitError::Io { path: path.into(), source }
    }

    /// True for failures of the file system rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, ToolkitError::Io { .. })
    }
}
