use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::representation::{Emotion, LeadSheet, Note, BEATS_PER_BAR, SUB_BEATS_PER_BAR};
use crate::theory::{chord_tones, scale_pcs, ChordLabel, ChordQuality, Key, PitchClass};

use ChordQuality::*;

/// Chord roots relative to the tonic, one chord per half bar.
const MAJOR_PROGRESSIONS: &[[(u8, ChordQuality); 4]] = &[
    [(0, Major), (7, Major), (9, Minor), (5, Major)],
    [(0, Major), (5, Major), (7, Dominant7), (0, Major)],
    [(0, Major7), (9, Minor7), (2, Minor7), (7, Dominant7)],
    [(5, Major), (7, Major), (4, Minor), (9, Minor)],
    [(0, Major), (2, Minor), (5, Suspend2), (7, Major)],
];

const MINOR_PROGRESSIONS: &[[(u8, ChordQuality); 4]] = &[
    [(0, Minor), (8, Major), (3, Major), (10, Major)],
    [(0, Minor), (5, Minor), (7, Major), (0, Minor)],
    [(0, Minor7), (5, Minor7), (10, Dominant7), (3, Major7)],
    [(0, Minor), (10, Major), (8, Major), (7, Suspend4)],
    [(0, Minor), (2, Diminish), (7, Dominant7), (0, Minor)],
];

/// `(onset, duration)` patterns within one bar.
const RHYTHMS: &[&[(u32, u8)]] = &[
    &[(0, 4), (4, 4), (8, 4), (12, 4)],
    &[(0, 2), (2, 2), (4, 4), (8, 8)],
    &[(0, 6), (6, 2), (8, 4), (12, 4)],
    &[(0, 8), (8, 8)],
    &[(0, 3), (3, 1), (4, 2), (6, 2), (8, 8)],
    &[(2, 2), (4, 4), (10, 2), (12, 4)],
];

const LOW: i32 = 57;
const HIGH: i32 = 81;

fn nearest_with_pc(prev: i32, pc: PitchClass) -> i32 {
    let mut best = i32::MAX;
    for p in LOW..=HIGH {
        if PitchClass::of_pitch(p as u8) == pc && (p - prev).abs() < (best - prev).abs() {
            best = p;
        }
    }
    best
}

/// A clip whose melody leans on chord tones of a stock progression:
/// positive clips are in major keys and negative clips in minor keys.
pub fn synthetic_clip<R: Rng + ?Sized>(rng: &mut R, emotion: Emotion) -> LeadSheet {
    let tonic = rng.gen_range(0..12u8);
    let (key, pool) = if emotion == Emotion::Negative {
        (Key::minor(tonic), MINOR_PROGRESSIONS)
    } else {
        (Key::major(tonic), MAJOR_PROGRESSIONS)
    };
    let progression = pool.choose(rng).expect("pool is not empty");
    let num_bars = rng.gen_range(2..=4u32);

    let half = (BEATS_PER_BAR / 2) as usize;
    let chords: Vec<Option<ChordLabel>> = (0..num_bars as usize * 2)
        .flat_map(|h| {
            let (rel, q) = progression[h % 4];
            std::iter::repeat_n(Some(ChordLabel::new((tonic + rel) % 12, q)), half)
        })
        .collect();

    let scale = scale_pcs(key);
    let mut melody = Vec::new();
    let mut prev = 60 + i32::from(tonic % 12).min(7);
    for bar in 0..num_bars {
        for &(onset, duration) in *RHYTHMS.choose(rng).expect("rhythms are not empty") {
            let at = bar * SUB_BEATS_PER_BAR + onset;
            let chord = chords[(at / 4) as usize].expect("every beat has a chord");
            let on_beat = onset % 4 == 0;
            let pc = if on_beat || rng.gen_bool(0.5) {
                *chord_tones(chord).choose(rng).expect("chords have tones")
            } else {
                *scale.choose(rng).expect("scales are not empty")
            };
            prev = nearest_with_pc(prev, pc);
            melody.push(Note::new(at, prev as u8, duration));
        }
    }
    LeadSheet::new(emotion, key, num_bars, melody, chords).expect("synthetic clips are valid")
}

/// `n` clips alternating positive and negative, reproducible from `seed`.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<LeadSheet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let emotion = if i % 2 == 0 { Emotion::Positive } else { Emotion::Negative };
            synthetic_clip(&mut rng, emotion)
        })
        .collect()
}
