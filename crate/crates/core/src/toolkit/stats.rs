use std::collections::BTreeMap;

use serde::Serialize;

use crate::metrics::{key_histogram, KeyHistogram};
use crate::representation::{encode, LeadSheet, Representation};
use crate::theory::DegreePolicy;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub clips: usize,
    pub mean_bars: f64,
    /// Mean encoded sequence length per representation, over encodable clips.
    pub mean_events: BTreeMap<String, f64>,
    /// Clips a representation cannot encode (pitches outside its octave range).
    pub unencodable: BTreeMap<String, usize>,
    pub key_histogram: KeyHistogram,
}

pub fn stats(corpus: &[LeadSheet]) -> CorpusStats {
    let clips = corpus.len();
    let mean = |total: f64, n: usize| if n == 0 { 0.0 } else { total / n as f64 };
    let bars: f64 = corpus.iter().map(|ls| f64::from(ls.num_bars)).sum();
    let mut mean_events = BTreeMap::new();
    let mut unencodable = BTreeMap::new();
    for repr in Representation::ALL {
        let mut total = 0usize;
        let mut ok = 0usize;
        for ls in corpus {
            if let Ok(ts) = encode(ls, repr, &mut DegreePolicy::always_lower()) {
                total += ts.len();
                ok += 1;
            }
        }
        mean_events.insert(repr.name().to_string(), mean(total as f64, ok));
        unencodable.insert(repr.name().to_string(), clips - ok);
    }
    CorpusStats { clips, mean_bars: mean(bars, clips), mean_events, unencodable, key_histogram: key_histogram(corpus) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representation::{Emotion, Note};
    use crate::theory::Key;
    use crate::toolkit::synthetic_corpus;

    #[test]
    fn two_bar_clip() {
        let ls = LeadSheet::new(
            Emotion::Negative,
            Key::minor(9),
            2,
            vec![Note::new(0, 69, 4), Note::new(20, 72, 4)],
            vec![None; 8],
        )
        .unwrap();
        let s = stats(&[ls]);
        assert_eq!(s.clips, 1);
        assert_eq!(s.mean_bars, 2.0);
        // Header 2, per bar 2 + 2 + 8, two notes, EOS.
        assert_eq!(s.mean_events["remi"], (2 + 2 * 12 + 2 * 3 + 1) as f64);
        assert_eq!(s.mean_events["functional"], (2 + 2 * 12 + 2 * 4 + 1) as f64);
        assert_eq!(s.key_histogram.get(Emotion::Negative, Key::minor(9)), 1);
    }

    #[test]
    fn counts_match_encoder() {
        let corpus = synthetic_corpus(30, 11);
        let s = stats(&corpus);
        for repr in Representation::ALL {
            let lens: Vec<usize> =
                corpus.iter().map(|ls| encode(ls, repr, &mut DegreePolicy::seeded(5)).unwrap().len()).collect();
            let expected = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
            assert!((s.mean_events[repr.name()] - expected).abs() < 1e-12);
            assert_eq!(s.unencodable[repr.name()], 0);
        }
    }
}
