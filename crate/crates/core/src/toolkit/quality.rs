use crate::theory::ChordQuality;

use super::ToolkitError;

const ALIASES: &[(&str, ChordQuality)] = &[
    ("", ChordQuality::Major),
    ("M", ChordQuality::Major),
    ("maj", ChordQuality::Major),
    ("major", ChordQuality::Major),
    ("5", ChordQuality::Major),
    ("6", ChordQuality::Major),
    ("M6", ChordQuality::Major),
    ("maj6", ChordQuality::Major),
    ("add9", ChordQuality::Major),
    ("add2", ChordQuality::Major),
    ("6/9", ChordQuality::Major),
    ("69", ChordQuality::Major),
    ("m", ChordQuality::Minor),
    ("-", ChordQuality::Minor),
    ("min", ChordQuality::Minor),
    ("minor", ChordQuality::Minor),
    ("m6", ChordQuality::Minor),
    ("min6", ChordQuality::Minor),
    ("madd9", ChordQuality::Minor),
    ("mM7", ChordQuality::Minor),
    ("minmaj7", ChordQuality::Minor),
    ("+", ChordQuality::Augment),
    ("aug", ChordQuality::Augment),
    ("augment", ChordQuality::Augment),
    ("augmented", ChordQuality::Augment),
    ("+7", ChordQuality::Augment),
    ("aug7", ChordQuality::Augment),
    ("o", ChordQuality::Diminish),
    ("°", ChordQuality::Diminish),
    ("dim", ChordQuality::Diminish),
    ("diminish", ChordQuality::Diminish),
    ("diminished", ChordQuality::Diminish),
    ("sus2", ChordQuality::Suspend2),
    ("suspend2", ChordQuality::Suspend2),
    ("sus", ChordQuality::Suspend4),
    ("sus4", ChordQuality::Suspend4),
    ("suspend4", ChordQuality::Suspend4),
    ("7sus4", ChordQuality::Suspend4),
    ("9sus4", ChordQuality::Suspend4),
    ("maj7", ChordQuality::Major7),
    ("M7", ChordQuality::Major7),
    ("major7", ChordQuality::Major7),
    ("Δ", ChordQuality::Major7),
    ("Δ7", ChordQuality::Major7),
    ("m7", ChordQuality::Minor7),
    ("-7", ChordQuality::Minor7),
    ("min7", ChordQuality::Minor7),
    ("minor7", ChordQuality::Minor7),
    ("7", ChordQuality::Dominant7),
    ("dom7", ChordQuality::Dominant7),
    ("dominant7", ChordQuality::Dominant7),
    ("o7", ChordQuality::Diminish7),
    ("°7", ChordQuality::Diminish7),
    ("dim7", ChordQuality::Diminish7),
    ("diminish7", ChordQuality::Diminish7),
    ("ø", ChordQuality::HalfDiminish7),
    ("ø7", ChordQuality::HalfDiminish7),
    ("m7b5", ChordQuality::HalfDiminish7),
    ("min7b5", ChordQuality::HalfDiminish7),
    ("hdim7", ChordQuality::HalfDiminish7),
    ("half-diminish7", ChordQuality::HalfDiminish7),
];

/// Maps a raw chord-quality label onto one of the eleven classes.
///
/// Exact aliases are tried first. Otherwise parenthesised alterations are
/// dropped and extensions fold to their seventh class: `maj9` → major7,
/// `m11` → minor7, `13` or `7b9` → dominant7.
pub fn simplify_quality(raw: &str) -> Result<ChordQuality, ToolkitError> {
    let label = raw.trim();
    if let Some(q) = lookup(label) {
        return Ok(q);
    }
    let base: String = match label.find('(') {
        Some(i) => label[..i].to_string(),
        None => label.to_string(),
    };
    if let Some(q) = lookup(&base) {
        return Ok(q);
    }
    let fold = |rest: &str| rest.starts_with(|c: char| c.is_ascii_digit());
    let folded = if let Some(rest) = base.strip_prefix("maj").or_else(|| base.strip_prefix('M')) {
        fold(rest).then_some(ChordQuality::Major7)
    } else if let Some(rest) = base.strip_prefix("min").or_else(|| base.strip_prefix('m')) {
        if rest.contains("b5") {
            Some(ChordQuality::HalfDiminish7)
        } else {
            fold(rest).then_some(ChordQuality::Minor7)
        }
    } else if let Some(rest) = base.strip_prefix("dim").or_else(|| base.strip_prefix('o')) {
        fold(rest).then_some(ChordQuality::Diminish7)
    } else if base.contains("sus4") || base.ends_with("sus") {
        Some(ChordQuality::Suspend4)
    } else if base.contains("sus2") {
        Some(ChordQuality::Suspend2)
    } else if ["7", "9", "11", "13"].iter().any(|p| base.starts_with(p)) {
        Some(ChordQuality::Dominant7)
    } else {
        None
    };
    folded.ok_or_else(|| ToolkitError::Quality(raw.to_string()))
}

fn lookup(label: &str) -> Option<ChordQuality> {
    ALIASES.iter().find(|(a, _)| *a == label).map(|(_, q)| *q)
}
