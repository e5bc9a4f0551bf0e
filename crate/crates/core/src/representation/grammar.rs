use std::fmt;

use thiserror::Error;

use crate::theory::{degree_pitch_to_pitch, DegreePitch, Key};

use super::{ChordToken, Event, Representation, TokenSequence, BEATS_PER_BAR, SUB_BEATS_PER_BEAT};

/// First token that breaks the sequence grammar.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("token {index} ({token}): {rule}")]
pub struct Violation {
    pub index: usize,
    pub rule: &'static str,
    pub token: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Emotion,
    Key,
    /// Between bars: `Track_Melody`, or `EOS` once a bar exists.
    BarStart,
    MelodyBar,
    /// Inside a melody bar: a `SubBeat` or `Track_Chord`.
    MelodyBody,
    NoteOctave,
    NoteDegree(u8),
    NotePitch,
    NoteDuration,
    ChordBar,
    ChordSubBeat,
    ChordSymbol,
    Done,
}

/// Incremental checker for the interleaved token grammar.
///
/// Feeding tokens one at a time lets a generator ask which tokens may come
/// next without re-validating the whole prefix.
#[derive(Debug, Clone)]
pub struct GrammarState {
    representation: Representation,
    stage: Stage,
    key: Option<Key>,
    last_sub_beat: Option<u8>,
    chord_slots: u32,
    bars: u32,
    index: usize,
}

impl GrammarState {
    pub fn new(representation: Representation) -> Self {
        GrammarState {
            representation,
            stage: Stage::Emotion,
            key: None,
            last_sub_beat: None,
            chord_slots: 0,
            bars: 0,
            index: 0,
        }
    }

    pub fn key(&self) -> Option<Key> {
        self.key
    }

    pub fn bars(&self) -> u32 {
        self.bars
    }

    pub fn is_complete(&self) -> bool {
        self.stage == Stage::Done
    }

    /// Number of chord slots already filled in the current chord bar.
    pub fn chord_slots(&self) -> u32 {
        self.chord_slots
    }

    pub fn in_chord_bar(&self) -> bool {
        matches!(self.stage, Stage::ChordSubBeat | Stage::ChordSymbol)
    }

    /// Would `event` be accepted next?
    pub fn accepts(&self, event: &Event) -> bool {
        self.clone().push(event).is_ok()
    }

    pub fn push(&mut self, event: &Event) -> Result<(), Violation> {
        let next = self.step(event).map_err(|rule| Violation { index: self.index, rule, token: event.to_string() })?;
        self.stage = next;
        self.index += 1;
        Ok(())
    }

    fn step(&mut self, event: &Event) -> Result<Stage, &'static str> {
        use Stage::*;
        let repr = self.representation;
        match (self.stage, event) {
            (Done, Event::Pad) => Ok(Done),
            (Done, _) => Err("only padding may follow EOS"),

            (Emotion, Event::Emotion(_)) => Ok(Key),
            (Emotion, _) => Err("sequence must start with an Emotion token"),

            (Key, Event::Key(k)) => {
                if repr == Representation::RemiTrans && k.tonic.value() != 0 {
                    return Err("remi-trans sequences must be in C major or c minor");
                }
                self.key = Some(*k);
                Ok(BarStart)
            }
            (Key, _) => Err("Key token must follow the Emotion token"),

            (BarStart, Event::TrackMelody) => Ok(MelodyBar),
            (BarStart, Event::Eos) if self.bars > 0 => Ok(Done),
            (BarStart, Event::Eos) => Err("a lead sheet needs at least one bar"),
            (BarStart, _) => Err("expected Track_Melody or EOS"),

            (MelodyBar, Event::Bar) => {
                self.last_sub_beat = None;
                Ok(MelodyBody)
            }
            (MelodyBar, _) => Err("Track_Melody must be followed by Bar"),

            (MelodyBody, Event::SubBeat(s)) => {
                if self.last_sub_beat.is_some_and(|p| *s <= p) {
                    return Err("sub-beats must strictly increase within a bar");
                }
                self.last_sub_beat = Some(*s);
                Ok(if repr.degree_melody() { NoteOctave } else { NotePitch })
            }
            (MelodyBody, Event::TrackChord) => Ok(ChordBar),
            (MelodyBody, _) => Err("expected a note SubBeat or Track_Chord"),

            (NoteOctave, Event::Octave(o)) => Ok(NoteDegree(*o)),
            (NoteOctave, _) => Err("a functional note starts with Octave"),
            (NoteDegree(octave), Event::Degree(degree)) => {
                let key = self.key.expect("key is set before any bar");
                degree_pitch_to_pitch(DegreePitch { octave, degree: *degree }, key)
                    .map_err(|_| "octave and degree decode outside the pitch range")?;
                Ok(NoteDuration)
            }
            (NoteDegree(_), _) => Err("Octave must be followed by Degree"),
            (NotePitch, Event::Pitch(_)) => Ok(NoteDuration),
            (NotePitch, _) => Err("a note SubBeat must be followed by Pitch"),
            (NoteDuration, Event::Duration(_)) => Ok(MelodyBody),
            (NoteDuration, _) => Err("note must end with Duration"),

            (ChordBar, Event::Bar) => {
                self.chord_slots = 0;
                Ok(ChordSubBeat)
            }
            (ChordBar, _) => Err("Track_Chord must be followed by Bar"),

            (ChordSubBeat, Event::SubBeat(s)) => {
                if self.chord_slots >= BEATS_PER_BAR {
                    return Err("a chord bar has exactly four slots");
                }
                if u32::from(*s) != self.chord_slots * SUB_BEATS_PER_BEAT {
                    return Err("chord slots sit on sub-beats 0, 4, 8, 12 in order");
                }
                Ok(ChordSymbol)
            }
            (ChordSubBeat, Event::TrackMelody | Event::Eos) if self.chord_slots == BEATS_PER_BAR => {
                self.bars += 1;
                if *event == Event::Eos {
                    Ok(Done)
                } else {
                    Ok(MelodyBar)
                }
            }
            (ChordSubBeat, _) if self.chord_slots < BEATS_PER_BAR => Err("a chord bar has exactly four slots"),
            (ChordSubBeat, _) => Err("expected Track_Melody or EOS after a chord bar"),

            (ChordSymbol, Event::Chord(c)) => {
                let family_ok = match c {
                    ChordToken::NoChord => true,
                    ChordToken::Functional(_) => repr.functional_chords(),
                    ChordToken::Letter(_) => !repr.functional_chords(),
                };
                if !family_ok {
                    return Err("chord spelling does not match the representation");
                }
                self.chord_slots += 1;
                Ok(ChordSubBeat)
            }
            (ChordSymbol, _) => Err("a chord SubBeat must be followed by a Chord token"),
        }
    }

    /// Closes the sequence; fails unless EOS was reached.
    pub fn finish(&self) -> Result<(), Violation> {
        if self.stage == Stage::Done {
            Ok(())
        } else {
            Err(Violation { index: self.index, rule: "sequence must end with EOS", token: "<end>".into() })
        }
    }
}

pub fn validate_sequence(ts: &TokenSequence) -> Result<(), Violation> {
    let mut state = GrammarState::new(ts.representation);
    for t in &ts.tokens {
        state.push(t)?;
    }
    state.finish()
}

impl fmt::Display for GrammarState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} after {} tokens", self.stage, self.index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{ChordQuality, FunctionalChord, RomanDegree};

    fn parse(lines: &str) -> Vec<Event> {
        lines.split_whitespace().map(|t| t.parse().unwrap()).collect()
    }

    const VALID: &str = "Emotion_Positive Key_Dmajor Track_Melody Bar SubBeat_0 Octave_4 Degree_I Duration_4 \
        Track_Chord Bar SubBeat_0 Chord_I_major SubBeat_4 Chord_I_major SubBeat_8 Chord_V_major \
        SubBeat_12 Chord_V_major EOS";

    #[test]
    fn accepts_valid() {
        let ts = TokenSequence::new(parse(VALID), Representation::Functional);
        assert_eq!(validate_sequence(&ts), Ok(()));
        let mut padded = ts.clone();
        padded.tokens.extend([Event::Pad, Event::Pad]);
        assert_eq!(validate_sequence(&padded), Ok(()));
    }

    fn rule_of(text: &str, repr: Representation) -> (usize, &'static str) {
        let v = validate_sequence(&TokenSequence::new(parse(text), repr)).unwrap_err();
        (v.index, v.rule)
    }

    #[test]
    fn duration_before_degree() {
        let text = VALID.replace("Degree_I Duration_4", "Duration_4 Degree_I");
        assert_eq!(rule_of(&text, Representation::Functional).0, 6);
    }

    #[test]
    fn truncated() {
        let text = VALID.trim_end_matches(" EOS");
        let v = validate_sequence(&TokenSequence::new(parse(text), Representation::Functional)).unwrap_err();
        assert_eq!(v.rule, "sequence must end with EOS");
    }

    #[test]
    fn header_rules() {
        assert_eq!(rule_of("Key_Dmajor EOS", Representation::Functional).0, 0);
        assert_eq!(rule_of("Emotion_Positive Track_Melody", Representation::Functional).0, 1);
        assert_eq!(rule_of("Emotion_Positive Key_Dmajor EOS", Representation::Functional).0, 2);
    }

    #[test]
    fn chord_slot_rules() {
        let three = "Emotion_Positive Key_Cmajor Track_Melody Bar Track_Chord Bar SubBeat_0 Chord_None \
            SubBeat_4 Chord_None SubBeat_8 Chord_None EOS";
        assert_eq!(rule_of(three, Representation::Functional), (12, "a chord bar has exactly four slots"));
        let off_grid = "Emotion_Positive Key_Cmajor Track_Melody Bar Track_Chord Bar SubBeat_1 Chord_None";
        assert_eq!(rule_of(off_grid, Representation::Functional).0, 6);
        let letter = "Emotion_Positive Key_Cmajor Track_Melody Bar Track_Chord Bar SubBeat_0 Chord_C_major";
        assert_eq!(rule_of(letter, Representation::Functional).0, 7);
        let roman = "Emotion_Positive Key_Cmajor Track_Melody Bar Track_Chord Bar SubBeat_0 Chord_I_major";
        assert_eq!(rule_of(roman, Representation::Remi).0, 7);
    }

    #[test]
    fn melody_rules() {
        let repeat = "Emotion_Positive Key_Cmajor Track_Melody Bar SubBeat_4 Pitch_60 Duration_1 \
            SubBeat_4 Pitch_62 Duration_1";
        assert_eq!(rule_of(repeat, Representation::Remi).0, 7);
        let octave_in_remi = "Emotion_Positive Key_Cmajor Track_Melody Bar SubBeat_0 Octave_4";
        assert_eq!(rule_of(octave_in_remi, Representation::Remi).0, 5);
        // Octave 0 / degree I in C decodes to MIDI 12.
        let low = "Emotion_Positive Key_Cmajor Track_Melody Bar SubBeat_0 Octave_0 Degree_I";
        assert_eq!(rule_of(low, Representation::Functional).0, 6);
    }

    #[test]
    fn remi_trans_key_must_be_c() {
        let text = "Emotion_Positive Key_Dmajor Track_Melody Bar";
        assert_eq!(rule_of(text, Representation::RemiTrans).0, 1);
    }

    #[test]
    fn incremental_accepts() {
        let mut g = GrammarState::new(Representation::Functional);
        for t in parse("Emotion_Positive Key_Dmajor Track_Melody Bar Track_Chord Bar SubBeat_0") {
            g.push(&t).unwrap();
        }
        let chord = Event::Chord(ChordToken::Functional(FunctionalChord {
            degree: RomanDegree::V,
            quality: ChordQuality::Dominant7,
        }));
        assert!(g.accepts(&chord));
        assert!(g.accepts(&Event::Chord(ChordToken::NoChord)));
        assert!(!g.accepts(&Event::SubBeat(4)));
        assert!(g.in_chord_bar());
    }
}
