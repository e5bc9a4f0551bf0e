//! Objective harmonization metrics.
//!
//! Per-clip metrics pair each melody note with the chord on the beat that
//! contains its onset; beats without a chord are skipped. All per-clip
//! metrics return `None` when nothing is left to score.
//!
//! - CTnCTR: share of chord tones, counting non-chord tones that step (≤ 2
//!   semitones) to the next melody note as chord tones.
//! - PCS: interval consonance of note vs chord tones (+1 for unison, thirds,
//!   fifths, sixths; 0 for the fourth; -1 otherwise), averaged over chord
//!   tones and then over notes weighted by duration.
//! - MCTD: duration-weighted Euclidean distance between the 6-D tonal
//!   centroids of the note and of the chord.
//! - RR / NR: share of chord roots / chord tones inside the key scale.
//!
//! Corpus metrics (QD, PD) compare smoothed chord-quality and root-motion
//! histograms with KL divergence, per emotion, and average the two.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::representation::{Emotion, LeadSheet};
use crate::theory::{chord_tones, in_scale, ChordQuality, Key, PitchClass};

/// Added to every probability bin before renormalising.
pub const SMOOTHING_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("corpus has no chords")]
    NoChords,
    #[error("corpus has no chord bigrams")]
    NoBigrams,
    #[error("distributions have different supports")]
    SupportMismatch,
    #[error("{corpus} corpus has no {emotion} clips")]
    MissingEmotion { corpus: &'static str, emotion: Emotion },
    #[error("probabilities must be non-negative and sum to 1")]
    NotNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MetricReport {
    pub ctnctr: Option<f64>,
    pub pcs: Option<f64>,
    pub mctd: Option<f64>,
    pub rr: Option<f64>,
    pub nr: Option<f64>,
}

pub fn report(ls: &LeadSheet) -> MetricReport {
    MetricReport { ctnctr: ctnctr(ls), pcs: pcs(ls), mctd: mctd(ls), rr: root_ratio(ls), nr: note_ratio(ls) }
}

pub fn ctnctr(ls: &LeadSheet) -> Option<f64> {
    let mut chord_tone = 0usize;
    let mut non_chord = 0usize;
    let mut passing = 0usize;
    for (i, note) in ls.melody.iter().enumerate() {
        let Some(chord) = ls.chord_at(note) else { continue };
        if chord_tones(chord).contains(&PitchClass::of_pitch(note.pitch)) {
            chord_tone += 1;
        } else {
            non_chord += 1;
            if let Some(next) = ls.melody.get(i + 1) {
                if note.pitch.abs_diff(next.pitch) <= 2 {
                    passing += 1;
                }
            }
        }
    }
    let total = chord_tone + non_chord;
    (total > 0).then(|| (chord_tone + passing) as f64 / total as f64)
}

fn consonance(interval: u8) -> f64 {
    match interval {
        0 | 3 | 4 | 7 | 8 | 9 => 1.0,
        5 => 0.0,
        _ => -1.0,
    }
}

pub fn pcs(ls: &LeadSheet) -> Option<f64> {
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for note in &ls.melody {
        let Some(chord) = ls.chord_at(note) else { continue };
        let tones = chord_tones(chord);
        let score: f64 = tones.iter().map(|pc| consonance((note.pitch % 12 + 12 - pc.value()) % 12)).sum::<f64>()
            / tones.len() as f64;
        weighted += score * note.duration as f64;
        weight += note.duration as f64;
    }
    (weight > 0.0).then(|| weighted / weight)
}

/// Tonal-centroid projection rows: (radius, angle step) pairs for the
/// circle of fifths, minor thirds and major thirds.
const CENTROID_CIRCLES: [(f64, f64); 3] = [(1.0, 7.0 * PI / 6.0), (1.0, 3.0 * PI / 2.0), (0.5, 2.0 * PI / 3.0)];

/// 6-D tonal centroid of a pitch-class vector, L1-normalised first.
/// An all-zero vector maps to the origin.
pub fn tonal_centroid(chroma: &[f64; 12]) -> [f64; 6] {
    let total: f64 = chroma.iter().sum();
    let mut out = [0.0; 6];
    if total <= 0.0 {
        return out;
    }
    for (pc, &w) in chroma.iter().enumerate() {
        let w = w / total;
        for (row, &(radius, step)) in CENTROID_CIRCLES.iter().enumerate() {
            let angle = pc as f64 * step;
            out[2 * row] += w * radius * angle.sin();
            out[2 * row + 1] += w * radius * angle.cos();
        }
    }
    out
}

pub fn centroid_distance(a: &[f64; 12], b: &[f64; 12]) -> f64 {
    let (ca, cb) = (tonal_centroid(a), tonal_centroid(b));
    ca.iter().zip(&cb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn mctd(ls: &LeadSheet) -> Option<f64> {
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for note in &ls.melody {
        let Some(chord) = ls.chord_at(note) else { continue };
        let mut melody = [0.0; 12];
        melody[(note.pitch % 12) as usize] = 1.0;
        let mut harmony = [0.0; 12];
        for pc in chord_tones(chord) {
            harmony[pc.value() as usize] = 1.0;
        }
        weighted += centroid_distance(&melody, &harmony) * note.duration as f64;
        weight += note.duration as f64;
    }
    (weight > 0.0).then(|| weighted / weight)
}

pub fn root_ratio(ls: &LeadSheet) -> Option<f64> {
    let roots: Vec<PitchClass> = ls.chords.iter().flatten().map(|c| c.root).collect();
    if roots.is_empty() {
        return None;
    }
    let inside = roots.iter().filter(|r| in_scale(**r, ls.key)).count();
    Some(inside as f64 / roots.len() as f64)
}

pub fn note_ratio(ls: &LeadSheet) -> Option<f64> {
    let tones: Vec<PitchClass> = ls.chords.iter().flatten().flat_map(|c| chord_tones(*c)).collect();
    if tones.is_empty() {
        return None;
    }
    let inside = tones.iter().filter(|pc| in_scale(**pc, ls.key)).count();
    Some(inside as f64 / tones.len() as f64)
}

/// A categorical distribution over named bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub support: Vec<String>,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn new(support: Vec<String>, probs: Vec<f64>) -> Result<Self, MetricError> {
        let sum: f64 = probs.iter().sum();
        if support.len() != probs.len() || probs.iter().any(|p| *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(MetricError::NotNormalized);
        }
        Ok(Distribution { support, probs })
    }

    /// Normalises counts, adds [`SMOOTHING_EPSILON`] to every bin and
    /// renormalises.
    pub fn smoothed(support: Vec<String>, counts: &[f64]) -> Self {
        let total: f64 = counts.iter().sum();
        let k = counts.len() as f64;
        let probs = counts.iter().map(|c| (c / total + SMOOTHING_EPSILON) / (1.0 + k * SMOOTHING_EPSILON)).collect();
        Distribution { support, probs }
    }

    /// Plain normalisation of counts, without smoothing.
    pub fn unsmoothed(support: Vec<String>, counts: &[f64]) -> Self {
        let total: f64 = counts.iter().sum();
        Distribution { support, probs: counts.iter().map(|c| c / total).collect() }
    }
}

pub fn quality_counts(corpus: &[LeadSheet]) -> [f64; 11] {
    let mut counts = [0.0; 11];
    for chord in corpus.iter().flat_map(|ls| ls.chords.iter().flatten()) {
        counts[chord.quality.index()] += 1.0;
    }
    counts
}

pub fn quality_distribution(corpus: &[LeadSheet]) -> Result<Distribution, MetricError> {
    let counts = quality_counts(corpus);
    if counts.iter().sum::<f64>() == 0.0 {
        return Err(MetricError::NoChords);
    }
    let support = ChordQuality::ALL.iter().map(|q| q.name().to_string()).collect();
    Ok(Distribution::smoothed(support, &counts))
}

/// Root motion in semitones (mod 12) between chords on adjacent beats.
pub fn progression_counts(corpus: &[LeadSheet]) -> [f64; 12] {
    let mut counts = [0.0; 12];
    for ls in corpus {
        for pair in ls.chords.windows(2) {
            if let [Some(a), Some(b)] = pair {
                let interval = (b.root.value() + 12 - a.root.value()) % 12;
                counts[interval as usize] += 1.0;
            }
        }
    }
    counts
}

pub fn progression_distribution(corpus: &[LeadSheet]) -> Result<Distribution, MetricError> {
    let counts = progression_counts(corpus);
    if counts.iter().sum::<f64>() == 0.0 {
        return Err(MetricError::NoBigrams);
    }
    let support = (0..12).map(|i| i.to_string()).collect();
    Ok(Distribution::smoothed(support, &counts))
}

/// KL(p ‖ q) in nats. Bins with p = 0 contribute nothing; a bin with
/// p > 0 and q = 0 makes the divergence infinite.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64, MetricError> {
    if p.support != q.support {
        return Err(MetricError::SupportMismatch);
    }
    let mut kl = 0.0;
    for (&pi, &qi) in p.probs.iter().zip(&q.probs) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        kl += pi * (pi / qi).ln();
    }
    // Rounding can push a true zero slightly negative.
    Ok(kl.max(0.0))
}

fn split(corpus: &[LeadSheet], emotion: Emotion) -> Vec<LeadSheet> {
    corpus.iter().filter(|ls| ls.emotion == emotion).cloned().collect()
}

fn per_emotion_kl(
    generated: &[LeadSheet],
    real: &[LeadSheet],
    dist: fn(&[LeadSheet]) -> Result<Distribution, MetricError>,
) -> Result<f64, MetricError> {
    let mut total = 0.0;
    let emotions = [Emotion::Positive, Emotion::Negative];
    for emotion in emotions {
        let g = split(generated, emotion);
        let r = split(real, emotion);
        if g.is_empty() {
            return Err(MetricError::MissingEmotion { corpus: "generated", emotion });
        }
        if r.is_empty() {
            return Err(MetricError::MissingEmotion { corpus: "real", emotion });
        }
        total += kl_divergence(&dist(&g)?, &dist(&r)?)?;
    }
    Ok(total / emotions.len() as f64)
}

/// Quality-distribution divergence, averaged over positive and negative.
pub fn qd(generated: &[LeadSheet], real: &[LeadSheet]) -> Result<f64, MetricError> {
    per_emotion_kl(generated, real, quality_distribution)
}

/// Progression-distribution divergence, averaged over positive and negative.
pub fn pd(generated: &[LeadSheet], real: &[LeadSheet]) -> Result<f64, MetricError> {
    per_emotion_kl(generated, real, progression_distribution)
}

/// Clip counts per key, split by emotion. Rows follow [`Key::all`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct KeyHistogram {
    pub counts: BTreeMap<String, Vec<u64>>,
}

impl KeyHistogram {
    pub fn get(&self, emotion: Emotion, key: Key) -> u64 {
        self.counts.get(emotion.name()).map_or(0, |row| row[key.index()])
    }

    pub fn total(&self) -> u64 {
        self.counts.values().flatten().sum()
    }
}

pub fn key_histogram(corpus: &[LeadSheet]) -> KeyHistogram {
    let mut counts: BTreeMap<String, Vec<u64>> =
        Emotion::ALL.iter().map(|e| (e.name().to_string(), vec![0; 24])).collect();
    for ls in corpus {
        counts.get_mut(ls.emotion.name()).expect("all emotions present")[ls.key.index()] += 1;
    }
    KeyHistogram { counts }
}
