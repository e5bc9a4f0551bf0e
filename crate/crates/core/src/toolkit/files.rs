use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::representation::{Emotion, LeadSheet, Note, MAX_DURATION};
use crate::theory::{ChordLabel, Key, Mode, PitchClass};

use super::{simplify_quality, ToolkitError};

/// On-disk lead sheet. Field order here is the canonical serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadSheetFile {
    pub emotion: String,
    pub key: KeyEntry,
    pub num_bars: u32,
    pub melody: Vec<NoteEntry>,
    pub chords: Vec<Option<ChordEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyEntry {
    pub tonic: u8,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoteEntry {
    pub onset: u32,
    pub pitch: u8,
    pub duration: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChordEntry {
    pub root: u8,
    pub quality: String,
}

impl From<&LeadSheet> for LeadSheetFile {
    fn from(ls: &LeadSheet) -> Self {
        LeadSheetFile {
            emotion: ls.emotion.name().to_string(),
            key: KeyEntry { tonic: ls.key.tonic.value(), mode: ls.key.mode },
            num_bars: ls.num_bars,
            melody: ls
                .melody
                .iter()
                .map(|n| NoteEntry { onset: n.onset, pitch: n.pitch, duration: n.duration.into() })
                .collect(),
            chords: ls
                .chords
                .iter()
                .map(|c| c.map(|c| ChordEntry { root: c.root.value(), quality: c.quality.name().to_string() }))
                .collect(),
        }
    }
}

impl LeadSheetFile {
    /// Checks the document and builds a [`LeadSheet`]. Durations longer than
    /// a bar are clamped to 16 sub-beats; chord qualities go through
    /// [`simplify_quality`].
    pub fn to_lead_sheet(&self, path: &Path) -> Result<LeadSheet, ToolkitError> {
        let schema = |field: String, message: String| ToolkitError::Schema { path: path.to_path_buf(), field, message };
        let emotion: Emotion = self.emotion.parse().map_err(|e: String| schema("emotion".into(), e))?;
        let tonic = PitchClass::new(self.key.tonic).map_err(|e| schema("key.tonic".into(), e.to_string()))?;
        let mut melody = Vec::with_capacity(self.melody.len());
        for (i, n) in self.melody.iter().enumerate() {
            if n.duration == 0 {
                return Err(schema(format!("melody[{i}].duration"), "must be at least 1".into()));
            }
            if n.duration > u32::from(MAX_DURATION) {
                log::warn!("{}: melody[{i}] duration {} clamped to {MAX_DURATION}", path.display(), n.duration);
            }
            melody.push(Note::new(n.onset, n.pitch, n.duration.min(u32::from(MAX_DURATION)) as u8));
        }
        let mut chords = Vec::with_capacity(self.chords.len());
        for (i, c) in self.chords.iter().enumerate() {
            chords.push(match c {
                None => None,
                Some(c) => {
                    let root =
                        PitchClass::new(c.root).map_err(|e| schema(format!("chords[{i}].root"), e.to_string()))?;
                    let quality = simplify_quality(&c.quality)
                        .map_err(|e| schema(format!("chords[{i}].quality"), e.to_string()))?;
                    Some(ChordLabel { root, quality })
                }
            });
        }
        LeadSheet::new(emotion, Key::new(tonic, self.key.mode), self.num_bars, melody, chords)
            .map_err(|e| ToolkitError::Invalid { path: path.to_path_buf(), message: e.to_string() })
    }
}

/// Parses a lead sheet document; `path` only labels errors.
pub fn lead_sheet_from_json(text: &str, path: &Path) -> Result<LeadSheet, ToolkitError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: LeadSheetFile = serde_path_to_error::deserialize(de).map_err(|e| ToolkitError::Schema {
        path: path.to_path_buf(),
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    file.to_lead_sheet(path)
}

/// Canonical serialization: pretty-printed with a trailing newline.
pub fn lead_sheet_to_json(ls: &LeadSheet) -> String {
    let mut text = serde_json::to_string_pretty(&LeadSheetFile::from(ls)).expect("lead sheets always serialize");
    text.push('\n');
    text
}

pub fn read_lead_sheet(path: &Path) -> Result<LeadSheet, ToolkitError> {
    let text = fs::read_to_string(path).map_err(|e| ToolkitError::io(path, e))?;
    lead_sheet_from_json(&text, path)
}

pub fn write_lead_sheet(ls: &LeadSheet, path: &Path) -> Result<(), ToolkitError> {
    fs::write(path, lead_sheet_to_json(ls)).map_err(|e| ToolkitError::io(path, e))
}
