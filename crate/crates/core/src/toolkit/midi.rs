use std::fs;
use std::path::Path;

use midly::num::{u15, u24, u28, u4, u7};
use midly::{Format, Header, MetaMessage, MidiMessage, Smf, Timing, TrackEvent, TrackEventKind};

use crate::representation::{LeadSheet, SUB_BEATS_PER_BAR, SUB_BEATS_PER_BEAT};
use crate::theory::{chord_tones, ChordLabel};

use super::ToolkitError;

pub const TICKS_PER_QUARTER: u32 = 480;
pub const TICKS_PER_SUB_BEAT: u32 = TICKS_PER_QUARTER / SUB_BEATS_PER_BEAT;
pub const TICKS_PER_BAR: u32 = TICKS_PER_SUB_BEAT * SUB_BEATS_PER_BAR;
pub const TEMPO_BPM: u32 = 110;

const MELODY_CHANNEL: u8 = 0;
const CHORD_CHANNEL: u8 = 1;
const MELODY_VELOCITY: u8 = 100;
const CHORD_VELOCITY: u8 = 70;
const CHORD_BASE: u8 = 48;

/// `(tick, is_on, key)`; sorting puts note-offs before note-ons at a tick.
type NoteEvent = (u32, bool, u8);

fn micros_per_quarter() -> u32 {
    (60_000_000 + TEMPO_BPM / 2) / TEMPO_BPM
}

/// Root-position block voicing from octave 3 upward.
fn voicing(chord: ChordLabel) -> Vec<u8> {
    let mut keys: Vec<u8> = Vec::new();
    for pc in chord_tones(chord) {
        let mut key = CHORD_BASE + pc.value();
        if let Some(&prev) = keys.last() {
            while key <= prev {
                key += 12;
            }
        }
        keys.push(key);
    }
    keys
}

fn melody_events(ls: &LeadSheet, end: u32) -> Vec<NoteEvent> {
    let mut out = Vec::new();
    for (i, note) in ls.melody.iter().enumerate() {
        let on = note.onset * TICKS_PER_SUB_BEAT;
        let mut off = (note.onset + u32::from(note.duration)) * TICKS_PER_SUB_BEAT;
        // Monophonic line: a note stops when the next one starts.
        if let Some(next) = ls.melody.get(i + 1) {
            off = off.min(next.onset * TICKS_PER_SUB_BEAT);
        }
        off = off.min(end);
        out.push((on, true, note.pitch));
        out.push((off, false, note.pitch));
    }
    out
}

/// One block per run of identical consecutive beats.
fn chord_events(ls: &LeadSheet) -> Vec<NoteEvent> {
    let beat_ticks = TICKS_PER_SUB_BEAT * SUB_BEATS_PER_BEAT;
    let mut out = Vec::new();
    let mut beat = 0;
    while beat < ls.chords.len() {
        let chord = ls.chords[beat];
        let mut run_end = beat + 1;
        while run_end < ls.chords.len() && ls.chords[run_end] == chord {
            run_end += 1;
        }
        if let Some(chord) = chord {
            for key in voicing(chord) {
                out.push((beat as u32 * beat_ticks, true, key));
                out.push((run_end as u32 * beat_ticks, false, key));
            }
        }
        beat = run_end;
    }
    out
}

fn track<'a>(name: &'a [u8], channel: u8, velocity: u8, mut events: Vec<NoteEvent>, end: u32) -> Vec<TrackEvent<'a>> {
    events.sort();
    let mut out = vec![TrackEvent { delta: u28::new(0), kind: TrackEventKind::Meta(MetaMessage::TrackName(name)) }];
    let mut now = 0;
    for (tick, on, key) in events {
        let message = if on {
            MidiMessage::NoteOn { key: u7::new(key), vel: u7::new(velocity) }
        } else {
            MidiMessage::NoteOff { key: u7::new(key), vel: u7::new(0) }
        };
        out.push(TrackEvent {
            delta: u28::new(tick - now),
            kind: TrackEventKind::Midi { channel: u4::new(channel), message },
        });
        now = tick;
    }
    out.push(TrackEvent { delta: u28::new(end - now), kind: TrackEventKind::Meta(MetaMessage::EndOfTrack) });
    out
}

/// Standard MIDI File, format 1: a tempo track, the melody on track 1 and
/// block chords on track 2. Every track ends at `num_bars * 1920` ticks.
pub fn midi_bytes(ls: &LeadSheet) -> Vec<u8> {
    let end = ls.num_bars * TICKS_PER_BAR;
    let conductor = vec![
        TrackEvent { delta: u28::new(0), kind: TrackEventKind::Meta(MetaMessage::TrackName(b"tempo")) },
        TrackEvent {
            delta: u28::new(0),
            kind: TrackEventKind::Meta(MetaMessage::Tempo(u24::new(micros_per_quarter()))),
        },
        TrackEvent { delta: u28::new(0), kind: TrackEventKind::Meta(MetaMessage::TimeSignature(4, 2, 24, 8)) },
        TrackEvent { delta: u28::new(end), kind: TrackEventKind::Meta(MetaMessage::EndOfTrack) },
    ];
    let mut smf = Smf::new(Header::new(Format::Parallel, Timing::Metrical(u15::new(TICKS_PER_QUARTER as u16))));
    smf.tracks.push(conductor);
    smf.tracks.push(track(b"melody", MELODY_CHANNEL, MELODY_VELOCITY, melody_events(ls, end), end));
    smf.tracks.push(track(b"chords", CHORD_CHANNEL, CHORD_VELOCITY, chord_events(ls), end));
    let mut bytes = Vec::new();
    smf.write_std(&mut bytes).expect("writing to memory cannot fail");
    bytes
}

pub fn export_midi(ls: &LeadSheet, path: &Path) -> Result<(), ToolkitError> {
    ls.validate()?;
    fs::write(path, midi_bytes(ls)).map_err(|e| ToolkitError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representation::{Emotion, Note};
    use crate::theory::{ChordQuality, Key};

    type Span = (usize, u8, u32, u32);

    /// `(track, key, on, off)` for every note, plus each track's length.
    fn spans(bytes: &[u8]) -> (Vec<Span>, Vec<u32>) {
        let smf = Smf::parse(bytes).unwrap();
        assert_eq!(smf.header.format, Format::Parallel);
        assert_eq!(smf.header.timing, Timing::Metrical(u15::new(480)));
        let mut notes = Vec::new();
        let mut lengths = Vec::new();
        for (t, track) in smf.tracks.iter().enumerate() {
            let mut now = 0;
            let mut open: Vec<(u8, u32)> = Vec::new();
            for ev in track {
                now += ev.delta.as_int();
                if let TrackEventKind::Midi { message, .. } = ev.kind {
                    match message {
                        MidiMessage::NoteOn { key, vel } if vel > 0 => open.push((key.as_int(), now)),
                        MidiMessage::NoteOff { key, .. } | MidiMessage::NoteOn { key, .. } => {
                            let i =
                                open.iter().position(|(k, _)| *k == key.as_int()).expect("note-off without note-on");
                            let (k, on) = open.remove(i);
                            notes.push((t, k, on, now));
                        }
                        _ => {}
                    }
                }
            }
            assert!(open.is_empty(), "unmatched note-on");
            lengths.push(now);
        }
        (notes, lengths)
    }

    #[test]
    fn one_note_tick_arithmetic() {
        let ls = LeadSheet::new(Emotion::Positive, Key::major(0), 2, vec![Note::new(0, 60, 4)], vec![None; 8]).unwrap();
        let (notes, lengths) = spans(&midi_bytes(&ls));
        assert_eq!(notes, vec![(1, 60, 0, 480)]);
        assert_eq!(lengths, vec![3840; 3]);
    }

    #[test]
    fn chord_only_file() {
        let c = Some(ChordLabel::new(0, ChordQuality::Major));
        let g7 = Some(ChordLabel::new(7, ChordQuality::Dominant7));
        let ls = LeadSheet::new(Emotion::Positive, Key::major(0), 1, vec![], vec![c, c, None, g7]).unwrap();
        let (mut notes, lengths) = spans(&midi_bytes(&ls));
        notes.sort();
        assert_eq!(
            notes,
            vec![
                (2, 48, 0, 960),
                (2, 52, 0, 960),
                (2, 55, 0, 960),
                (2, 55, 1440, 1920),
                (2, 59, 1440, 1920),
                (2, 62, 1440, 1920),
                (2, 65, 1440, 1920),
            ]
        );
        assert_eq!(lengths, vec![1920; 3]);
    }

    #[test]
    fn tempo_and_overlap() {
        assert_eq!(micros_per_quarter(), 545_455);
        let ls = LeadSheet::new(
            Emotion::Positive,
            Key::major(0),
            1,
            vec![Note::new(0, 60, 8), Note::new(4, 60, 16)],
            vec![None; 4],
        )
        .unwrap();
        let (notes, _) = spans(&midi_bytes(&ls));
        assert_eq!(notes, vec![(1, 60, 0, 480), (1, 60, 480, 1920)]);
    }
}
