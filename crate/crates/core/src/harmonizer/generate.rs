use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::representation::{
    decode, header_events, melody_bar_events, rekey, transpose_to_c, Emotion, Event, GrammarState, LeadSheet,
    Representation, TokenSequence,
};
use crate::theory::{DegreePolicy, Key, Mode};

use super::sampler::{draw, nucleus_set, SampleError, SamplerConfig};
use super::{HarmonizeError, SequenceModel};

const KEY_STREAM: u64 = 1;
const CHORD_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyPolicy {
    KeepOriginal,
    RuleBased,
    ModelBased,
}

impl KeyPolicy {
    pub const ALL: [KeyPolicy; 3] = [KeyPolicy::KeepOriginal, KeyPolicy::RuleBased, KeyPolicy::ModelBased];

    pub fn name(self) -> &'static str {
        match self {
            KeyPolicy::KeepOriginal => "keep",
            KeyPolicy::RuleBased => "rule",
            KeyPolicy::ModelBased => "model",
        }
    }
}

impl std::fmt::Display for KeyPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for KeyPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "keep" | "keep-original" => Ok(KeyPolicy::KeepOriginal),
            "rule" | "rule-based" => Ok(KeyPolicy::RuleBased),
            "model" | "model-based" => Ok(KeyPolicy::ModelBased),
            _ => Err(format!("unknown key policy `{s}`")),
        }
    }
}

/// Degree policy used when re-spelling melodies during generation.
pub fn degree_policy_for(seed: u64) -> DegreePolicy {
    DegreePolicy::seeded(seed ^ 0x9e37_79b9_7f4a_7c15)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples a key from the model at the position after `Emotion_e`.
///
/// A `remi-trans` model only ever saw C major and c minor, so the draw is
/// restricted to those two keys.
pub fn predict_key<M: SequenceModel + ?Sized>(
    model: &M,
    emotion: Emotion,
    sampler: &SamplerConfig,
) -> Result<Key, HarmonizeError> {
    let vocab = model.vocabulary();
    let prefix = model.encode_prefix(&[Event::Emotion(emotion)])?;
    let dist = model.next_distribution(&prefix);
    let only_c = model.representation() == Representation::RemiTrans;
    let mask: Vec<bool> =
        vocab.tokens().iter().map(|t| matches!(t, Event::Key(k) if !only_c || k.tonic.value() == 0)).collect();
    let set = nucleus_set(&dist, sampler, &mask).map_err(|e| match e {
        SampleError::ZeroMass | SampleError::EmptyMask => HarmonizeError::NoKeyMass,
        other => HarmonizeError::Sample(other),
    })?;
    let id = draw(&set, &mut rng_for(sampler.seed, KEY_STREAM));
    match vocab.event(id) {
        Event::Key(k) => Ok(k),
        _ => unreachable!("mask admits only keys"),
    }
}

pub fn decide_key<M: SequenceModel + ?Sized>(
    original: Key,
    emotion: Emotion,
    policy: KeyPolicy,
    model: Option<&M>,
    sampler: &SamplerConfig,
) -> Result<Key, HarmonizeError> {
    match policy {
        KeyPolicy::KeepOriginal => Ok(original),
        KeyPolicy::RuleBased => {
            let mode = if emotion == Emotion::Positive { Mode::Major } else { Mode::Minor };
            Ok(Key::new(original.tonic, mode))
        }
        KeyPolicy::ModelBased => predict_key(model.ok_or(HarmonizeError::MissingModel)?, emotion, sampler),
    }
}

/// A generated lead sheet together with the token stream it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonization {
    pub key: Key,
    pub tokens: TokenSequence,
    pub lead_sheet: LeadSheet,
}

/// Generates chords for the melody of `ls` in key `key`.
///
/// The melody is first re-spelled in `key` keeping its degrees. The stream
/// `Emotion Key` is then extended bar by bar: melody tokens are copied in
/// verbatim and the chord bar is sampled one token at a time, with every
/// token the grammar rejects masked out. When the model puts no mass on any
/// legal token the draw falls back to uniform over the legal set.
pub fn generate_chords<M: SequenceModel + ?Sized>(
    model: &M,
    emotion: Emotion,
    key: Key,
    ls: &LeadSheet,
    sampler: &SamplerConfig,
) -> Result<Harmonization, HarmonizeError> {
    sampler.validate()?;
    let repr = model.representation();
    let vocab = model.vocabulary();
    let mut degrees = degree_policy_for(sampler.seed);
    let mut rng = rng_for(sampler.seed, CHORD_STREAM);

    let mut source = ls.melody_only();
    if repr == Representation::RemiTrans {
        source = transpose_to_c(&source);
    }
    let melody = rekey(&source, key, &mut degrees)?;
    let event_repr = if repr == Representation::RemiTrans { Representation::Remi } else { repr };

    let mut state = GrammarState::new(repr);
    let mut tokens: Vec<Event> = Vec::new();
    let mut ids: Vec<usize> = Vec::new();
    let push = |event: Event, state: &mut GrammarState, tokens: &mut Vec<Event>, ids: &mut Vec<usize>| {
        state.push(&event).map_err(|v| HarmonizeError::Codec(v.into()))?;
        ids.push(vocab.id(&event).ok_or_else(|| HarmonizeError::UnknownToken(event.to_string()))?);
        tokens.push(event);
        Ok::<(), HarmonizeError>(())
    };

    for event in header_events(emotion, key) {
        push(event, &mut state, &mut tokens, &mut ids)?;
    }
    for bar in 0..melody.num_bars {
        for event in melody_bar_events(melody.bar_notes(bar), key, event_repr, &mut degrees)? {
            push(event, &mut state, &mut tokens, &mut ids)?;
        }
        push(Event::TrackChord, &mut state, &mut tokens, &mut ids)?;
        push(Event::Bar, &mut state, &mut tokens, &mut ids)?;
        while state.chord_slots() < crate::representation::BEATS_PER_BAR || !state.in_chord_bar() {
            let mask: Vec<bool> = vocab.tokens().iter().map(|t| state.accepts(t)).collect();
            let legal: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
            let id = match legal.as_slice() {
                [] => return Err(SampleError::EmptyMask.into()),
                [only] => *only,
                _ => {
                    let dist = model.next_distribution(&ids);
                    match nucleus_set(&dist, sampler, &mask) {
                        Ok(set) => draw(&set, &mut rng),
                        Err(SampleError::ZeroMass) => {
                            log::warn!(
                                "model has no mass on legal tokens at position {}; sampling uniformly",
                                ids.len()
                            );
                            let uniform: Vec<(usize, f64)> =
                                legal.iter().map(|&i| (i, 1.0 / legal.len() as f64)).collect();
                            draw(&uniform, &mut rng)
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            };
            push(vocab.event(id), &mut state, &mut tokens, &mut ids)?;
        }
    }
    push(Event::Eos, &mut state, &mut tokens, &mut ids)?;

    let tokens = TokenSequence::new(tokens, repr);
    let lead_sheet = decode(&tokens)?;
    Ok(Harmonization { key, tokens, lead_sheet })
}

/// Decides the key, then generates chords for the melody of `ls`.
///
/// For `remi-trans` models the clip is moved to C first, so every key the
/// policy can produce has tonic C.
pub fn harmonize<M: SequenceModel + ?Sized>(
    ls: &LeadSheet,
    target: Emotion,
    policy: KeyPolicy,
    model: &M,
    sampler: &SamplerConfig,
) -> Result<Harmonization, HarmonizeError> {
    let original = if model.representation() == Representation::RemiTrans {
        Key::new(crate::theory::PitchClass::wrapping(0), ls.key.mode)
    } else {
        ls.key
    };
    let key = decide_key(original, target, policy, Some(model), sampler)?;
    generate_chords(model, target, key, ls, sampler)
}
