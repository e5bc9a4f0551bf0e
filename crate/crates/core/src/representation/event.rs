use std::fmt;
use std::str::FromStr;

use crate::theory::{ChordLabel, ChordQuality, FunctionalChord, Key, PitchClass, RomanDegree};

use super::Emotion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChordToken {
    NoChord,
    Functional(FunctionalChord),
    Letter(ChordLabel),
}

/// One token of the closed alphabet. Text form is `Kind_Value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    Emotion(Emotion),
    Key(Key),
    Bar,
    /// Position 0..16 within the bar.
    SubBeat(u8),
    /// Sixteenth steps, 1..=16.
    Duration(u8),
    TrackMelody,
    TrackChord,
    Eos,
    Pad,
    Chord(ChordToken),
    Octave(u8),
    Degree(RomanDegree),
    Pitch(u8),
}

impl Event {
    pub fn is_chord(&self) -> bool {
        matches!(self, Event::Chord(_))
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Emotion(e) => write!(f, "Emotion_{}", e.token_name()),
            Event::Key(k) => write!(f, "Key_{}", k.token_name()),
            Event::Bar => f.write_str("Bar"),
            Event::SubBeat(s) => write!(f, "SubBeat_{s}"),
            Event::Duration(d) => write!(f, "Duration_{d}"),
            Event::TrackMelody => f.write_str("Track_Melody"),
            Event::TrackChord => f.write_str("Track_Chord"),
            Event::Eos => f.write_str("EOS"),
            Event::Pad => f.write_str("PAD"),
            Event::Chord(ChordToken::NoChord) => f.write_str("Chord_None"),
            Event::Chord(ChordToken::Functional(c)) => write!(f, "Chord_{c}"),
            Event::Chord(ChordToken::Letter(c)) => write!(f, "Chord_{c}"),
            Event::Octave(o) => write!(f, "Octave_{o}"),
            Event::Degree(d) => write!(f, "Degree_{d}"),
            Event::Pitch(p) => write!(f, "Pitch_{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseEventError(pub String);

impl fmt::Display for ParseEventError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown token `{}`", self.0)
    }
}

impl std::error::Error for ParseEventError {}

fn ranged(value: &str, lo: u8, hi: u8) -> Option<u8> {
    // Reject leading zeros and signs so text stays canonical.
    if value.is_empty() || (value.len() > 1 && value.starts_with('0')) {
        return None;
    }
    value.parse::<u8>().ok().filter(|v| (lo..=hi).contains(v))
}

fn parse_chord(body: &str) -> Option<ChordToken> {
    if body == "None" {
        return Some(ChordToken::NoChord);
    }
    let (root, quality) = body.split_once('_')?;
    let quality = quality.parse::<ChordQuality>().ok()?;
    if let Ok(degree) = root.parse::<RomanDegree>() {
        return Some(ChordToken::Functional(FunctionalChord { degree, quality }));
    }
    let root = root.parse::<PitchClass>().ok()?;
    Some(ChordToken::Letter(ChordLabel { root, quality }))
}

impl FromStr for Event {
    type Err = ParseEventError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = || ParseEventError(s.to_string());
        let ev = match s {
            "Bar" => Event::Bar,
            "Track_Melody" => Event::TrackMelody,
            "Track_Chord" => Event::TrackChord,
            "EOS" => Event::Eos,
            "PAD" => Event::Pad,
            _ => {
                let (kind, value) = s.split_once('_').ok_or_else(fail)?;
                match kind {
                    "Emotion" => {
                        Event::Emotion(Emotion::ALL.into_iter().find(|e| e.token_name() == value).ok_or_else(fail)?)
                    }
                    "Key" => Event::Key(Key::parse_token_name(value).map_err(|_| fail())?),
                    "SubBeat" => Event::SubBeat(ranged(value, 0, 15).ok_or_else(fail)?),
                    "Duration" => Event::Duration(ranged(value, 1, 16).ok_or_else(fail)?),
                    "Chord" => Event::Chord(parse_chord(value).ok_or_else(fail)?),
                    "Octave" => Event::Octave(ranged(value, 0, 7).ok_or_else(fail)?),
                    "Degree" => Event::Degree(value.parse().map_err(|_| fail())?),
                    "Pitch" => Event::Pitch(ranged(value, 21, 108).ok_or_else(fail)?),
                    _ => return Err(fail()),
                }
            }
        };
        Ok(ev)
    }
}
