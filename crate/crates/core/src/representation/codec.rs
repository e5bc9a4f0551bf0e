use crate::theory::{
    chord_to_functional, degree_pitch_to_pitch, functional_to_chord, pitch_to_degree_pitch, ChordLabel, DegreePitch,
    DegreePolicy, Key, PitchClass, MAX_PITCH, MIN_PITCH,
};

use super::grammar::validate_sequence;
use super::{
    ChordToken, CodecError, Emotion, Event, LeadSheet, Note, Representation, TokenSequence, BEATS_PER_BAR,
    MAX_DURATION, SUB_BEATS_PER_BAR, SUB_BEATS_PER_BEAT,
};

pub fn header_events(emotion: Emotion, key: Key) -> [Event; 2] {
    [Event::Emotion(emotion), Event::Key(key)]
}

/// `Track_Melody Bar` followed by the notes of one bar.
pub fn melody_bar_events<'a>(
    notes: impl IntoIterator<Item = &'a Note>,
    key: Key,
    representation: Representation,
    policy: &mut DegreePolicy,
) -> Result<Vec<Event>, CodecError> {
    let mut out = vec![Event::TrackMelody, Event::Bar];
    for note in notes {
        out.push(Event::SubBeat(note.sub_beat()));
        if representation.degree_melody() {
            let dp = pitch_to_degree_pitch(note.pitch, key, policy)?;
            out.push(Event::Octave(dp.octave));
            out.push(Event::Degree(dp.degree));
        } else {
            out.push(Event::Pitch(note.pitch));
        }
        out.push(Event::Duration(note.duration.min(MAX_DURATION)));
    }
    Ok(out)
}

pub fn chord_token(
    chord: Option<ChordLabel>,
    key: Key,
    representation: Representation,
    policy: &mut DegreePolicy,
) -> ChordToken {
    match chord {
        None => ChordToken::NoChord,
        Some(c) if representation.functional_chords() => ChordToken::Functional(chord_to_functional(c, key, policy)),
        Some(c) => ChordToken::Letter(c),
    }
}

/// `Track_Chord Bar` followed by four `SubBeat`/`Chord` slots.
pub fn chord_bar_events(
    chords: &[Option<ChordLabel>],
    key: Key,
    representation: Representation,
    policy: &mut DegreePolicy,
) -> Vec<Event> {
    let mut out = vec![Event::TrackChord, Event::Bar];
    for (beat, chord) in chords.iter().enumerate() {
        out.push(Event::SubBeat((beat as u32 * SUB_BEATS_PER_BEAT) as u8));
        out.push(Event::Chord(chord_token(*chord, key, representation, policy)));
    }
    out
}

/// Encodes `ls` in the given representation. `remi-trans` first moves the
/// clip to C major / c minor.
pub fn encode(
    ls: &LeadSheet,
    representation: Representation,
    policy: &mut DegreePolicy,
) -> Result<TokenSequence, CodecError> {
    ls.validate()?;
    if representation == Representation::RemiTrans {
        let moved = transpose_to_c(ls);
        let mut ts = encode(&moved, Representation::Remi, policy)?;
        ts.representation = Representation::RemiTrans;
        return Ok(ts);
    }

    let mut tokens = header_events(ls.emotion, ls.key).to_vec();
    for bar in 0..ls.num_bars {
        tokens.extend(melody_bar_events(ls.bar_notes(bar), ls.key, representation, policy)?);
        tokens.extend(chord_bar_events(ls.bar_chords(bar), ls.key, representation, policy));
    }
    tokens.push(Event::Eos);
    Ok(TokenSequence::new(tokens, representation))
}

pub fn encode_functional(ls: &LeadSheet, policy: &mut DegreePolicy) -> Result<TokenSequence, CodecError> {
    encode(ls, Representation::Functional, policy)
}

pub fn encode_functional_ablated(ls: &LeadSheet, policy: &mut DegreePolicy) -> Result<TokenSequence, CodecError> {
    encode(ls, Representation::FunctionalAblated, policy)
}

pub fn encode_remi(ls: &LeadSheet) -> Result<TokenSequence, CodecError> {
    // No degree decisions are made, so any policy works.
    encode(ls, Representation::Remi, &mut DegreePolicy::always_lower())
}

pub fn encode_remi_trans(ls: &LeadSheet) -> Result<TokenSequence, CodecError> {
    encode(ls, Representation::RemiTrans, &mut DegreePolicy::always_lower())
}

/// Decodes any representation. The sequence is validated first, so decoding
/// rejects exactly what [`validate_sequence`] rejects.
pub fn decode(ts: &TokenSequence) -> Result<LeadSheet, CodecError> {
    validate_sequence(ts)?;

    let mut emotion = Emotion::Unlabeled;
    let mut key = Key::major(0);
    let mut melody = Vec::new();
    let mut chords = Vec::new();
    let mut bar: i64 = -1;
    let mut in_melody = false;
    let mut sub_beat = 0u32;
    let mut octave = 0u8;
    let mut pitch = 0u8;

    for t in &ts.tokens {
        match *t {
            Event::Emotion(e) => emotion = e,
            Event::Key(k) => key = k,
            Event::TrackMelody => {
                bar += 1;
                in_melody = true;
            }
            Event::TrackChord => in_melody = false,
            Event::SubBeat(s) => sub_beat = s.into(),
            Event::Octave(o) => octave = o,
            Event::Degree(degree) => pitch = degree_pitch_to_pitch(DegreePitch { octave, degree }, key)?,
            Event::Pitch(p) => pitch = p,
            Event::Duration(d) if in_melody => {
                melody.push(Note::new(bar as u32 * SUB_BEATS_PER_BAR + sub_beat, pitch, d));
            }
            Event::Chord(c) => chords.push(match c {
                ChordToken::NoChord => None,
                ChordToken::Letter(l) => Some(l),
                ChordToken::Functional(f) => Some(functional_to_chord(f, key)),
            }),
            _ => {}
        }
    }

    let num_bars = (bar + 1) as u32;
    debug_assert_eq!(chords.len() as u32, num_bars * BEATS_PER_BAR);
    LeadSheet::new(emotion, key, num_bars, melody, chords)
}

pub fn decode_functional(ts: &TokenSequence) -> Result<LeadSheet, CodecError> {
    decode(ts)
}

pub fn decode_remi(ts: &TokenSequence) -> Result<LeadSheet, CodecError> {
    decode(ts)
}

/// Semitone shift that moves `tonic` to C with the least motion, in -6..=5.
pub fn transposition_offset(tonic: PitchClass) -> i32 {
    let up = (12 - tonic.value() as i32) % 12;
    if up > 5 {
        up - 12
    } else {
        up
    }
}

fn fold_pitch(pitch: i32) -> u8 {
    let mut p = pitch;
    while p < MIN_PITCH as i32 {
        p += 12;
    }
    while p > MAX_PITCH as i32 {
        p -= 12;
    }
    p as u8
}

/// Moves the clip to C major or c minor, keeping the mode.
pub fn transpose_to_c(ls: &LeadSheet) -> LeadSheet {
    let delta = transposition_offset(ls.key.tonic);
    LeadSheet {
        emotion: ls.emotion,
        key: Key::new(PitchClass::wrapping(0), ls.key.mode),
        num_bars: ls.num_bars,
        melody: ls.melody.iter().map(|n| Note { pitch: fold_pitch(n.pitch as i32 + delta), ..*n }).collect(),
        chords: ls
            .chords
            .iter()
            .map(|c| c.map(|c| ChordLabel { root: c.root.transpose(delta), quality: c.quality }))
            .collect(),
    }
}

/// Re-spells the clip in `new_key` keeping every scale degree: melody notes
/// keep their octave/degree pair and chords keep their Roman degree, while
/// pitches and roots follow the new key. Moving to the parallel key is the
/// melodic-variation case.
pub fn rekey(ls: &LeadSheet, new_key: Key, policy: &mut DegreePolicy) -> Result<LeadSheet, CodecError> {
    let mut melody = Vec::with_capacity(ls.melody.len());
    for note in &ls.melody {
        let dp = pitch_to_degree_pitch(note.pitch, ls.key, policy)?;
        melody.push(Note { pitch: degree_pitch_to_pitch(dp, new_key)?, ..*note });
    }
    let chords = ls
        .chords
        .iter()
        .map(|c| c.map(|c| functional_to_chord(chord_to_functional(c, ls.key, policy), new_key)))
        .collect();
    LeadSheet::new(ls.emotion, new_key, ls.num_bars, melody, chords)
}
