//! Key-aware functional token representation for 4/4 lead sheets.
//!
//! - [`theory`]: keys, scale degrees, chord templates.
//! - [`representation`]: REMI and functional token codecs, grammar, vocabularies.
//! - [`metrics`]: harmonicity, key-scale and distribution metrics.
//! - [`harmonizer`]: n-gram sequence model, nucleus sampling, key decision and
//!   bar-by-bar chord generation.
//! - [`toolkit`]: JSON corpus files, MIDI export, corpus statistics and the
//!   experiment runner.

pub mod harmonizer;
pub mod metrics;
pub mod representation;
pub mod theory;
pub mod toolkit;
