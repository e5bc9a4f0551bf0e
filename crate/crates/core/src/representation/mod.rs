//! Token alphabets and codecs for 4/4 lead sheets.
//!
//! Four encodings share one bar-interleaved layout:
//!
//! ```text
//! Emotion_* Key_* (Track_Melody Bar <notes> Track_Chord Bar <4 chord slots>)+ EOS
//! ```
//!
//! They differ only in how a melody note and a chord are spelled:
//!
//! | tag                  | note                       | chord              |
//! |----------------------|----------------------------|--------------------|
//! | `remi`               | `Pitch_p`                  | `Chord_F_major`    |
//! | `remi-trans`         | `Pitch_p`, clip moved to C | `Chord_F_major`    |
//! | `functional`         | `Octave_o Degree_d`        | `Chord_IV_major`   |
//! | `functional-ablated` | `Pitch_p`                  | `Chord_IV_major`   |

mod codec;
mod event;
mod grammar;
mod vocab;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::theory::{ChordLabel, Key, TheoryError, MAX_PITCH, MIN_PITCH};

pub use codec::{
    chord_bar_events, decode, decode_functional, decode_remi, encode, encode_functional, encode_functional_ablated,
    encode_remi, encode_remi_trans, header_events, melody_bar_events, rekey, transpose_to_c, transposition_offset,
};
pub use event::{ChordToken, Event};
pub use grammar::{validate_sequence, GrammarState, Violation};
pub use vocab::{vocabulary, Vocabulary};

pub const SUB_BEATS_PER_BAR: u32 = 16;
pub const BEATS_PER_BAR: u32 = 4;
pub const SUB_BEATS_PER_BEAT: u32 = 4;
pub const MAX_DURATION: u8 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("invalid lead sheet: {0}")]
    LeadSheet(String),
    #[error(transparent)]
    Grammar(#[from] Violation),
    #[error("line {line}: unknown token `{text}`")]
    UnknownToken { line: usize, text: String },
    #[error("cannot infer the representation of a sequence without notes or chords")]
    AmbiguousRepresentation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Emotion {
    Positive,
    Negative,
    /// Clips without an emotion label (pretraining data).
    Unlabeled,
}

impl Emotion {
    pub const ALL: [Emotion; 3] = [Emotion::Positive, Emotion::Negative, Emotion::Unlabeled];

    pub fn token_name(self) -> &'static str {
        match self {
            Emotion::Positive => "Positive",
            Emotion::Negative => "Negative",
            Emotion::Unlabeled => "None",
        }
    }

    /// Lower-case name used in files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Emotion::Positive => "positive",
            Emotion::Negative => "negative",
            Emotion::Unlabeled => "none",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "positive" => Ok(Emotion::Positive),
            "negative" => Ok(Emotion::Negative),
            "none" => Ok(Emotion::Unlabeled),
            _ => Err(format!("unknown emotion `{s}`")),
        }
    }
}

/// A melody note on the sixteenth-note grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Note {
    /// Sixteenth steps from the start of the clip.
    pub onset: u32,
    pub pitch: u8,
    /// Sixteenth steps, 1..=16.
    pub duration: u8,
}

impl Note {
    pub fn new(onset: u32, pitch: u8, duration: u8) -> Self {
        Note { onset, pitch, duration }
    }

    pub fn bar(&self) -> u32 {
        self.onset / SUB_BEATS_PER_BAR
    }

    pub fn sub_beat(&self) -> u8 {
        (self.onset % SUB_BEATS_PER_BAR) as u8
    }

    pub fn beat(&self) -> u32 {
        self.onset / SUB_BEATS_PER_BEAT
    }
}

/// The chord sounding on one quarter-note beat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeatChord {
    pub beat_index: u32,
    pub chord: Option<ChordLabel>,
}

/// A 4/4 lead sheet: a monophonic melody plus one chord slot per beat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadSheet {
    pub emotion: Emotion,
    pub key: Key,
    pub num_bars: u32,
    /// Sorted by strictly increasing onset.
    pub melody: Vec<Note>,
    /// Exactly `4 * num_bars` entries; `None` is a beat with no chord.
    pub chords: Vec<Option<ChordLabel>>,
}

impl LeadSheet {
    pub fn new(
        emotion: Emotion,
        key: Key,
        num_bars: u32,
        melody: Vec<Note>,
        chords: Vec<Option<ChordLabel>>,
    ) -> Result<Self, CodecError> {
        let ls = LeadSheet { emotion, key, num_bars, melody, chords };
        ls.validate()?;
        Ok(ls)
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        let bad = |msg: String| Err(CodecError::LeadSheet(msg));
        if self.num_bars == 0 {
            return bad("num_bars must be at least 1".into());
        }
        let beats = (self.num_bars * BEATS_PER_BAR) as usize;
        if self.chords.len() != beats {
            return bad(format!("{} bars need {beats} chord slots, found {}", self.num_bars, self.chords.len()));
        }
        let end = self.num_bars * SUB_BEATS_PER_BAR;
        let mut prev: Option<u32> = None;
        for (i, note) in self.melody.iter().enumerate() {
            if !(MIN_PITCH..=MAX_PITCH).contains(&note.pitch) {
                return bad(format!("note {i}: pitch {} outside {MIN_PITCH}..={MAX_PITCH}", note.pitch));
            }
            if !(1..=MAX_DURATION).contains(&note.duration) {
                return bad(format!("note {i}: duration {} outside 1..={MAX_DURATION}", note.duration));
            }
            if note.onset >= end {
                return bad(format!("note {i}: onset {} past the last bar", note.onset));
            }
            if prev.is_some_and(|p| note.onset <= p) {
                return bad(format!("note {i}: onsets must strictly increase"));
            }
            prev = Some(note.onset);
        }
        Ok(())
    }

    pub fn beat_chords(&self) -> impl Iterator<Item = BeatChord> + '_ {
        self.chords.iter().enumerate().map(|(i, c)| BeatChord { beat_index: i as u32, chord: *c })
    }

    /// The chord covering a note's onset.
    pub fn chord_at(&self, note: &Note) -> Option<ChordLabel> {
        self.chords.get(note.beat() as usize).copied().flatten()
    }

    pub fn bar_notes(&self, bar: u32) -> impl Iterator<Item = &Note> {
        self.melody.iter().filter(move |n| n.bar() == bar)
    }

    pub fn bar_chords(&self, bar: u32) -> &[Option<ChordLabel>] {
        let start = (bar * BEATS_PER_BAR) as usize;
        &self.chords[start..start + BEATS_PER_BAR as usize]
    }

    /// Copy with the melody kept and every chord slot emptied.
    pub fn melody_only(&self) -> LeadSheet {
        LeadSheet { chords: vec![None; self.chords.len()], ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Representation {
    Remi,
    RemiTrans,
    Functional,
    FunctionalAblated,
}

impl Representation {
    pub const ALL: [Representation; 4] = [
        Representation::Remi,
        Representation::RemiTrans,
        Representation::Functional,
        Representation::FunctionalAblated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Remi => "remi",
            Representation::RemiTrans => "remi-trans",
            Representation::Functional => "functional",
            Representation::FunctionalAblated => "functional-ablated",
        }
    }

    /// Melody notes are `Octave`/`Degree` pairs rather than `Pitch`.
    pub fn degree_melody(self) -> bool {
        self == Representation::Functional
    }

    /// Chords are spelled with Roman degrees rather than letter roots.
    pub fn functional_chords(self) -> bool {
        matches!(self, Representation::Functional | Representation::FunctionalAblated)
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Representation::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| format!("unknown representation `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<Event>,
    pub representation: Representation,
}

impl TokenSequence {
    pub fn new(tokens: Vec<Event>, representation: Representation) -> Self {
        TokenSequence { tokens, representation }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// One token per line, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the line format. Blank lines are skipped. Without an explicit
    /// tag the representation is inferred from the note and chord spellings.
    pub fn from_text(text: &str, representation: Option<Representation>) -> Result<Self, CodecError> {
        let mut tokens = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let ev =
                line.parse::<Event>().map_err(|_| CodecError::UnknownToken { line: i + 1, text: line.to_string() })?;
            tokens.push(ev);
        }
        let representation = match representation {
            Some(r) => r,
            None => infer_representation(&tokens)?,
        };
        Ok(TokenSequence { tokens, representation })
    }
}

fn infer_representation(tokens: &[Event]) -> Result<Representation, CodecError> {
    let mut pitch = false;
    let mut degree = false;
    let mut functional_chord = false;
    let mut letter_chord = false;
    for t in tokens {
        match t {
            Event::Pitch(_) => pitch = true,
            Event::Octave(_) | Event::Degree(_) => degree = true,
            Event::Chord(ChordToken::Functional(_)) => functional_chord = true,
            Event::Chord(ChordToken::Letter(_)) => letter_chord = true,
            _ => {}
        }
    }
    Ok(match (degree, pitch, functional_chord, letter_chord) {
        (true, _, _, _) => Representation::Functional,
        (false, _, true, _) if pitch => Representation::FunctionalAblated,
        (false, _, _, true) => Representation::Remi,
        (false, true, false, false) => Representation::Remi,
        (false, false, true, false) => Representation::Functional,
        _ => return Err(CodecError::AmbiguousRepresentation),
    })
}
