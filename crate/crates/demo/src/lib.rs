//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes and returns JSON strings. The `*_json` functions hold
//! the logic and are plain Rust so they can be tested natively.

use std::path::Path;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use leadsheet_core::harmonizer::{self, nucleus_set, KeyPolicy, NGramConfig, NGramModel, SamplerConfig};
use leadsheet_core::metrics;
use leadsheet_core::representation::{encode, rekey, Emotion, LeadSheet, Representation};
use leadsheet_core::theory::{DegreePolicy, Key};
use leadsheet_core::toolkit::{lead_sheet_from_json, synthetic_clip, synthetic_corpus, LeadSheetFile};

const TRAINING_CLIPS: usize = 200;
const TRAINING_SEED: u64 = 0;

fn model() -> &'static NGramModel {
    static MODEL: OnceLock<NGramModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let repr = Representation::Functional;
        let seqs: Vec<_> = synthetic_corpus(TRAINING_CLIPS, TRAINING_SEED)
            .iter()
            .enumerate()
            .map(|(i, ls)| encode(ls, repr, &mut DegreePolicy::seeded(i as u64)).expect("synthetic clips encode"))
            .collect();
        harmonizer::train(NGramConfig::new(repr), &[], &seqs).expect("built-in corpus trains")
    })
}

fn parse(lead_sheet: &str) -> Result<LeadSheet, String> {
    lead_sheet_from_json(lead_sheet, Path::new("input")).map_err(|e| e.to_string())
}

fn token_list(ls: &LeadSheet, seed: u64) -> Result<Vec<String>, String> {
    let ts = encode(ls, Representation::Functional, &mut DegreePolicy::seeded(seed)).map_err(|e| e.to_string())?;
    Ok(ts.tokens.iter().map(|t| t.to_string()).collect())
}

fn sheet_value(ls: &LeadSheet) -> Value {
    serde_json::to_value(LeadSheetFile::from(ls)).expect("lead sheets serialize")
}

/// A synthetic clip to start from.
pub fn example_json(seed: u64, negative: bool) -> String {
    let emotion = if negative { Emotion::Negative } else { Emotion::Positive };
    let ls = synthetic_clip(&mut ChaCha8Rng::seed_from_u64(seed), emotion);
    serde_json::to_string_pretty(&LeadSheetFile::from(&ls)).expect("lead sheets serialize")
}

/// Re-spells the clip in `key` keeping every scale degree.
pub fn variation_json(lead_sheet: &str, key: &str, seed: u64) -> Result<String, String> {
    let ls = parse(lead_sheet)?;
    let key = Key::parse_token_name(key).map_err(|e| e.to_string())?;
    let moved = rekey(&ls, key, &mut DegreePolicy::seeded(seed)).map_err(|e| e.to_string())?;
    let out = json!({
        "key": key.token_name(),
        "original_tokens": token_list(&ls, seed)?,
        "tokens": token_list(&moved, seed)?,
        "lead_sheet": sheet_value(&moved),
    });
    Ok(out.to_string())
}

/// The tokens nucleus sampling keeps for a comma-separated distribution.
pub fn nucleus_json(probs: &str, temperature: f64, top_p: f64) -> Result<String, String> {
    let dist: Vec<f64> = probs
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", s.trim())))
        .collect::<Result<_, _>>()?;
    if dist.iter().any(|p| *p < 0.0) {
        return Err("probabilities must be non-negative".into());
    }
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        return Err("probabilities must not all be zero".into());
    }
    let dist: Vec<f64> = dist.iter().map(|p| p / total).collect();
    let config = SamplerConfig { temperature, top_p, seed: 0 };
    let set = nucleus_set(&dist, &config, &vec![true; dist.len()]).map_err(|e| e.to_string())?;
    let kept: Vec<Value> = set.iter().map(|(i, p)| json!({ "index": i, "probability": p })).collect();
    Ok(json!({ "input": dist, "kept": kept }).to_string())
}

/// Harmonizes the melody with the built-in model.
pub fn harmonize_json(lead_sheet: &str, emotion: &str, policy: &str, seed: u64) -> Result<String, String> {
    let ls = parse(lead_sheet)?;
    let emotion: Emotion = emotion.parse()?;
    let policy: KeyPolicy = policy.parse()?;
    let h = harmonizer::harmonize(&ls, emotion, policy, model(), &SamplerConfig::with_seed(seed))
        .map_err(|e| e.to_string())?;
    let chords: Vec<String> =
        h.lead_sheet.chords.iter().map(|c| c.map_or_else(|| "-".to_string(), |c| c.to_string())).collect();
    let out = json!({
        "key": h.key.token_name(),
        "tokens": h.tokens.tokens.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "chords": chords,
        "metrics": metrics::report(&h.lead_sheet),
        "lead_sheet": sheet_value(&h.lead_sheet),
    });
    Ok(out.to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn example(seed: u32, negative: bool) -> String {
    example_json(seed.into(), negative)
}

#[wasm_bindgen]
pub fn variation(lead_sheet: &str, key: &str, seed: u32) -> Result<String, JsError> {
    js(variation_json(lead_sheet, key, seed.into()))
}

#[wasm_bindgen]
pub fn nucleus(probs: &str, temperature: f64, top_p: f64) -> Result<String, JsError> {
    js(nucleus_json(probs, temperature, top_p))
}

#[wasm_bindgen]
pub fn harmonize(lead_sheet: &str, emotion: &str, policy: &str, seed: u32) -> Result<String, JsError> {
    js(harmonize_json(lead_sheet, emotion, policy, seed.into()))
}
