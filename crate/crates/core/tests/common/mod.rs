#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use leadsheet_core::representation::{Emotion, LeadSheet, Note};
use leadsheet_core::theory::{functionally_representable, ChordLabel, ChordQuality, Key, MAX_PITCH, MIN_PITCH};

pub const EMOTIONS: [Emotion; 3] = [Emotion::Positive, Emotion::Negative, Emotion::Unlabeled];

pub fn random_key<R: Rng>(rng: &mut R) -> Key {
    Key::from_index(rng.gen_range(0..24)).unwrap()
}

pub fn random_chord<R: Rng>(rng: &mut R) -> ChordLabel {
    ChordLabel::new(rng.gen_range(0..12), *ChordQuality::ALL.choose(rng).unwrap())
}

/// A random valid lead sheet. Every melody pitch can be written as octave
/// plus degree in `key`, so all representations accept it.
pub fn random_clip<R: Rng>(rng: &mut R, key: Key, bars: u32) -> LeadSheet {
    let mut melody = Vec::new();
    let mut onset = 0;
    while onset < bars * 16 {
        if rng.gen_bool(0.4) {
            let pitch = loop {
                let p = rng.gen_range(MIN_PITCH..=MAX_PITCH);
                if functionally_representable(p, key) {
                    break p;
                }
            };
            let duration = rng.gen_range(1..=16);
            melody.push(Note::new(onset, pitch, duration));
            onset += rng.gen_range(1..=duration as u32);
        } else {
            onset += 1;
        }
    }
    let chords = (0..bars * 4).map(|_| rng.gen_bool(0.85).then(|| random_chord(rng))).collect();
    LeadSheet::new(*EMOTIONS.choose(rng).unwrap(), key, bars, melody, chords).unwrap()
}

pub fn random_any_clip<R: Rng>(rng: &mut R) -> LeadSheet {
    let key = random_key(rng);
    let bars = rng.gen_range(1..=4);
    random_clip(rng, key, bars)
}

/// Brute-force metric implementations with their own tables.
pub mod oracle {
    use leadsheet_core::representation::LeadSheet;
    use leadsheet_core::theory::{ChordLabel, Mode};

    fn quality_steps(name: &str) -> Vec<u8> {
        match name {
            "major" => vec![0, 4, 7],
            "minor" => vec![0, 3, 7],
            "augment" => vec![0, 4, 8],
            "diminish" => vec![0, 3, 6],
            "suspend2" => vec![0, 2, 7],
            "suspend4" => vec![0, 5, 7],
            "major7" => vec![0, 4, 7, 11],
            "minor7" => vec![0, 3, 7, 10],
            "dominant7" => vec![0, 4, 7, 10],
            "diminish7" => vec![0, 3, 6, 9],
            "half-diminish7" => vec![0, 3, 6, 10],
            other => panic!("unknown quality {other}"),
        }
    }

    pub fn tones(chord: &ChordLabel) -> Vec<u8> {
        quality_steps(chord.quality.name()).iter().map(|s| (chord.root.value() + s) % 12).collect()
    }

    fn chord_covering(ls: &LeadSheet, onset: u32) -> Option<ChordLabel> {
        for beat in 0..ls.chords.len() as u32 {
            if onset >= beat * 4 && onset < beat * 4 + 4 {
                return ls.chords[beat as usize];
            }
        }
        None
    }

    fn in_key(pc: u8, ls: &LeadSheet) -> bool {
        let steps: [u8; 7] = match ls.key.mode {
            Mode::Major => [0, 2, 4, 5, 7, 9, 11],
            Mode::Minor => [0, 2, 3, 5, 7, 8, 10],
        };
        steps.iter().any(|s| (ls.key.tonic.value() + s) % 12 == pc)
    }

    pub fn ctnctr(ls: &LeadSheet) -> Option<f64> {
        let (mut tone, mut other, mut passing) = (0.0, 0.0, 0.0);
        for (i, n) in ls.melody.iter().enumerate() {
            let Some(c) = chord_covering(ls, n.onset) else { continue };
            if tones(&c).contains(&(n.pitch % 12)) {
                tone += 1.0;
            } else {
                other += 1.0;
                if let Some(next) = ls.melody.get(i + 1) {
                    if (n.pitch as i32 - next.pitch as i32).abs() <= 2 {
                        passing += 1.0;
                    }
                }
            }
        }
        if tone + other == 0.0 {
            None
        } else {
            Some((tone + passing) / (tone + other))
        }
    }

    pub fn pcs(ls: &LeadSheet) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for n in &ls.melody {
            let Some(c) = chord_covering(ls, n.onset) else { continue };
            let t = tones(&c);
            let mut s = 0.0;
            for pc in &t {
                let interval = (n.pitch as i32 - *pc as i32).rem_euclid(12);
                s += if [0, 3, 4, 7, 8, 9].contains(&interval) {
                    1.0
                } else if interval == 5 {
                    0.0
                } else {
                    -1.0
                };
            }
            num += n.duration as f64 * s / t.len() as f64;
            den += n.duration as f64;
        }
        (den > 0.0).then(|| num / den)
    }

    pub fn centroid(pcs: &[u8]) -> [f64; 6] {
        let w = 1.0 / pcs.len() as f64;
        let pi = std::f64::consts::PI;
        let mut c = [0.0; 6];
        for &pc in pcs {
            let l = pc as f64;
            c[0] += w * (l * 7.0 * pi / 6.0).sin();
            c[1] += w * (l * 7.0 * pi / 6.0).cos();
            c[2] += w * (l * 3.0 * pi / 2.0).sin();
            c[3] += w * (l * 3.0 * pi / 2.0).cos();
            c[4] += w * 0.5 * (l * 2.0 * pi / 3.0).sin();
            c[5] += w * 0.5 * (l * 2.0 * pi / 3.0).cos();
        }
        c
    }

    pub fn mctd(ls: &LeadSheet) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for n in &ls.melody {
            let Some(c) = chord_covering(ls, n.onset) else { continue };
            let mut t = tones(&c);
            t.sort();
            t.dedup();
            let a = centroid(&[n.pitch % 12]);
            let b = centroid(&t);
            let d: f64 = (0..6).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum::<f64>().sqrt();
            num += n.duration as f64 * d;
            den += n.duration as f64;
        }
        (den > 0.0).then(|| num / den)
    }

    pub fn rr(ls: &LeadSheet) -> Option<f64> {
        let chords: Vec<ChordLabel> = ls.chords.iter().flatten().copied().collect();
        let hits = chords.iter().filter(|c| in_key(c.root.value(), ls)).count();
        (!chords.is_empty()).then(|| hits as f64 / chords.len() as f64)
    }

    pub fn nr(ls: &LeadSheet) -> Option<f64> {
        let all: Vec<u8> = ls.chords.iter().flatten().flat_map(tones).collect();
        let hits = all.iter().filter(|pc| in_key(**pc, ls)).count();
        (!all.is_empty()).then(|| hits as f64 / all.len() as f64)
    }
}
