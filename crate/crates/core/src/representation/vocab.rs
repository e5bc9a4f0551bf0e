use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::theory::{ChordLabel, ChordQuality, FunctionalChord, Key, PitchClass, RomanDegree};

use super::{ChordToken, Emotion, Event, Representation};

/// The closed token set of one representation, with a dense id per token.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    representation: Representation,
    tokens: Vec<Event>,
    ids: HashMap<Event, usize>,
}

impl Vocabulary {
    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn tokens(&self) -> &[Event] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, event: &Event) -> Option<usize> {
        self.ids.get(event).copied()
    }

    pub fn event(&self, id: usize) -> Event {
        self.tokens[id]
    }

    /// Hex SHA-256 of the newline-joined token spellings.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.to_string().as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Enumerates the token set for `representation`.
///
/// Functional: 3 emotion + 24 key + 1 bar + 16 sub-beat + 16 duration +
/// 2 track + 1 EOS + 133 chord (incl. `Chord_None`) + 8 octave + 12 degree +
/// 1 padding = 217. The pitch-based encodings swap octave/degree for 88
/// pitch tokens and carry no padding token: 284.
pub fn vocabulary(representation: Representation) -> Vocabulary {
    let mut tokens = Vec::new();
    tokens.extend(Emotion::ALL.map(Event::Emotion));
    tokens.extend(Key::all().map(Event::Key));
    tokens.push(Event::Bar);
    tokens.extend((0..16).map(Event::SubBeat));
    tokens.extend((1..=16).map(Event::Duration));
    tokens.push(Event::TrackMelody);
    tokens.push(Event::TrackChord);
    tokens.push(Event::Eos);

    tokens.push(Event::Chord(ChordToken::NoChord));
    if representation.functional_chords() {
        for degree in RomanDegree::ALL {
            for quality in ChordQuality::ALL {
                tokens.push(Event::Chord(ChordToken::Functional(FunctionalChord { degree, quality })));
            }
        }
    } else {
        for root in PitchClass::all() {
            for quality in ChordQuality::ALL {
                tokens.push(Event::Chord(ChordToken::Letter(ChordLabel { root, quality })));
            }
        }
    }

    if representation.degree_melody() {
        tokens.extend((0..8).map(Event::Octave));
        tokens.extend(RomanDegree::ALL.map(Event::Degree));
        tokens.push(Event::Pad);
    } else {
        tokens.extend((21..=108).map(Event::Pitch));
    }

    let ids = tokens.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    Vocabulary { representation, tokens, ids }
}
