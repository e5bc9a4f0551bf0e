use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::representation::{Emotion, LeadSheet};

use super::{read_lead_sheet, ToolkitError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub split: Split,
    /// Four-quadrant valence/arousal class; overrides the file's emotion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emopia_class: Option<String>,
}

/// A list of clip files with their split. Relative paths resolve against
/// the manifest's directory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(default)]
    pub clips: Vec<ManifestEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusClip {
    pub path: PathBuf,
    pub split: Split,
    pub lead_sheet: LeadSheet,
}

fn emopia_emotion(class: &str) -> Result<Emotion, ToolkitError> {
    match class.to_ascii_uppercase().as_str() {
        "HVHA" | "HVLA" | "Q1" | "Q4" => Ok(Emotion::Positive),
        "LVHA" | "LVLA" | "Q2" | "Q3" => Ok(Emotion::Negative),
        _ => Err(ToolkitError::Manifest(format!("unknown emopia_class `{class}`"))),
    }
}

impl CorpusManifest {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ToolkitError> {
        let mut manifest: CorpusManifest = toml::from_str(text).map_err(|e| ToolkitError::Manifest(e.to_string()))?;
        manifest.base_dir = base_dir.to_path_buf();
        manifest.check()?;
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Self, ToolkitError> {
        let text = fs::read_to_string(path).map_err(|e| ToolkitError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("manifests always serialize")
    }

    /// No path may appear in both splits, and EMOPIA classes must be known.
    pub fn check(&self) -> Result<(), ToolkitError> {
        let mut seen: BTreeSet<(&Path, Split)> = BTreeSet::new();
        for entry in &self.clips {
            let other = match entry.split {
                Split::Train => Split::Validation,
                Split::Validation => Split::Train,
            };
            if seen.contains(&(entry.path.as_path(), other)) {
                return Err(ToolkitError::Manifest(format!(
                    "{} is listed in both train and validation",
                    entry.path.display()
                )));
            }
            seen.insert((entry.path.as_path(), entry.split));
            if let Some(class) = &entry.emopia_class {
                emopia_emotion(class)?;
            }
        }
        Ok(())
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            self.base_dir.join(&entry.path)
        }
    }
}

/// Loads the clips of `split` (all clips when `None`) in manifest order.
pub fn load_corpus(manifest: &CorpusManifest, split: Option<Split>) -> Result<Vec<CorpusClip>, ToolkitError> {
    manifest.check()?;
    let mut out = Vec::new();
    for entry in manifest.clips.iter().filter(|e| split.is_none_or(|s| e.split == s)) {
        let path = manifest.resolve(entry);
        let mut lead_sheet = read_lead_sheet(&path)?;
        if let Some(class) = &entry.emopia_class {
            lead_sheet.emotion = emopia_emotion(class)?;
        }
        out.push(CorpusClip { path, split: entry.split, lead_sheet });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolkit::{synthetic_corpus, write_lead_sheet};

    #[test]
    fn toy_corpus_loads_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let clips = synthetic_corpus(10, 7);
        let mut manifest = CorpusManifest::default();
        for (i, ls) in clips.iter().enumerate() {
            let name = format!("clip_{i:02}.json");
            write_lead_sheet(ls, &dir.path().join(&name)).unwrap();
            manifest.clips.push(ManifestEntry {
                path: name.into(),
                split: if i % 5 == 4 { Split::Validation } else { Split::Train },
                emopia_class: None,
            });
        }
        let path = dir.path().join("manifest.toml");
        fs::write(&path, manifest.to_toml()).unwrap();
        let loaded = CorpusManifest::load(&path).unwrap();
        let all = load_corpus(&loaded, None).unwrap();
        assert_eq!(all.iter().map(|c| c.lead_sheet.clone()).collect::<Vec<_>>(), clips);
        let val = load_corpus(&loaded, Some(Split::Validation)).unwrap();
        assert_eq!(val.len(), 2);
        assert_eq!(val[0].lead_sheet, clips[4]);
        assert_eq!(val[1].lead_sheet, clips[9]);
    }

    #[test]
    fn path_in_both_splits() {
        let text = r#"
[[clips]]
path = "a.json"
split = "train"

[[clips]]
path = "a.json"
split = "validation"
"#;
        assert!(matches!(CorpusManifest::from_toml(text, Path::new(".")), Err(ToolkitError::Manifest(_))));
    }

    #[test]
    fn emopia_classes_map_to_valence() {
        assert_eq!(emopia_emotion("HVHA").unwrap(), Emotion::Positive);
        assert_eq!(emopia_emotion("hvla").unwrap(), Emotion::Positive);
        assert_eq!(emopia_emotion("LVHA").unwrap(), Emotion::Negative);
        assert_eq!(emopia_emotion("LVLA").unwrap(), Emotion::Negative);
        let text = "[[clips]]\npath = \"a.json\"\nsplit = \"train\"\nemopia_class = \"XX\"\n";
        assert!(CorpusManifest::from_toml(text, Path::new(".")).is_err());
    }
}
