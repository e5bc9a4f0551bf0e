//! Pitch-class arithmetic for major/natural-minor keys.
//!
//! Everything here is a pure function of its arguments. The only stateful
//! piece is [`DegreePolicy`], which owns the RNG used to resolve the two
//! minor-key accidentals that have no degree token of their own.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lowest and highest MIDI pitches a melody note may take (A0..=C8).
pub const MIN_PITCH: u8 = 21;
pub const MAX_PITCH: u8 = 108;

/// Octave tokens available to the functional melody encoding.
pub const MIN_OCTAVE: u8 = 0;
pub const MAX_OCTAVE: u8 = 7;

const MAJOR_SCALE: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];
const MINOR_SCALE: [u8; 7] = [0, 2, 3, 5, 7, 8, 10];

const SHARP_NAMES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("pitch class {0} is outside 0..=11")]
    PitchClass(i64),
    #[error("MIDI pitch {0} is outside {MIN_PITCH}..={MAX_PITCH}")]
    PitchRange(i64),
    #[error("pitch {pitch} in {key} needs octave {octave}, outside {MIN_OCTAVE}..={MAX_OCTAVE}")]
    OctaveRange { pitch: u8, key: Key, octave: i32 },
    #[error("unknown {kind} `{text}`")]
    Parse { kind: &'static str, text: String },
}

/// A 12-TET pitch class, 0 = C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PitchClass(u8);

impl PitchClass {
    pub fn new(value: u8) -> Result<Self, TheoryError> {
        if value < 12 {
            Ok(PitchClass(value))
        } else {
            Err(TheoryError::PitchClass(value.into()))
        }
    }

    /// Reduces any integer modulo 12.
    pub fn wrapping(value: i32) -> Self {
        PitchClass(value.rem_euclid(12) as u8)
    }

    pub fn of_pitch(pitch: u8) -> Self {
        PitchClass(pitch % 12)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn transpose(self, semitones: i32) -> Self {
        Self::wrapping(self.0 as i32 + semitones)
    }

    /// Sharp spelling, e.g. `C#`.
    pub fn name(self) -> &'static str {
        SHARP_NAMES[self.0 as usize]
    }

    pub fn all() -> impl Iterator<Item = PitchClass> {
        (0..12).map(PitchClass)
    }
}

impl fmt::Display for PitchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PitchClass {
    type Err = TheoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SHARP_NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| PitchClass(i as u8))
            .ok_or_else(|| TheoryError::Parse { kind: "pitch class", text: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Major,
    Minor,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Major => "major",
            Mode::Minor => "minor",
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Mode::Major => Mode::Minor,
            Mode::Minor => Mode::Major,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub tonic: PitchClass,
    pub mode: Mode,
}

impl Key {
    pub const fn new(tonic: PitchClass, mode: Mode) -> Self {
        Key { tonic, mode }
    }

    pub fn major(tonic: u8) -> Self {
        Key::new(PitchClass::wrapping(tonic.into()), Mode::Major)
    }

    pub fn minor(tonic: u8) -> Self {
        Key::new(PitchClass::wrapping(tonic.into()), Mode::Minor)
    }

    /// All 24 keys, majors first, each ordered by tonic.
    pub fn all() -> impl Iterator<Item = Key> {
        [Mode::Major, Mode::Minor].into_iter().flat_map(|m| PitchClass::all().map(move |t| Key::new(t, m)))
    }

    /// Dense index in 0..24 matching [`Key::all`].
    pub fn index(self) -> usize {
        let base = match self.mode {
            Mode::Major => 0,
            Mode::Minor => 12,
        };
        base + self.tonic.value() as usize
    }

    pub fn from_index(index: usize) -> Option<Key> {
        Key::all().nth(index)
    }

    /// Compact spelling used by the token alphabet: `Dmajor`, `C#minor`.
    pub fn token_name(self) -> String {
        format!("{}{}", self.tonic.name(), self.mode.name())
    }

    pub fn parse_token_name(s: &str) -> Result<Key, TheoryError> {
        let (tonic, mode) = if let Some(t) = s.strip_suffix("major") {
            (t, Mode::Major)
        } else if let Some(t) = s.strip_suffix("minor") {
            (t, Mode::Minor)
        } else {
            return Err(TheoryError::Parse { kind: "key", text: s.to_string() });
        };
        Ok(Key::new(tonic.parse()?, mode))
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            Mode::Major => write!(f, "{} major", self.tonic),
            Mode::Minor => write!(f, "{} minor", self.tonic.name().to_lowercase()),
        }
    }
}

/// Twelve Roman scale-degree symbols. `III#` and `VII#` are deliberately
/// absent; see [`pc_to_degree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RomanDegree {
    I,
    ISharp,
    II,
    IISharp,
    III,
    IV,
    IVSharp,
    V,
    VSharp,
    VI,
    VISharp,
    VII,
}

impl RomanDegree {
    pub const ALL: [RomanDegree; 12] = [
        RomanDegree::I,
        RomanDegree::ISharp,
        RomanDegree::II,
        RomanDegree::IISharp,
        RomanDegree::III,
        RomanDegree::IV,
        RomanDegree::IVSharp,
        RomanDegree::V,
        RomanDegree::VSharp,
        RomanDegree::VI,
        RomanDegree::VISharp,
        RomanDegree::VII,
    ];

    /// The seven unsharped degrees in scale order.
    pub const DIATONIC: [RomanDegree; 7] = [
        RomanDegree::I,
        RomanDegree::II,
        RomanDegree::III,
        RomanDegree::IV,
        RomanDegree::V,
        RomanDegree::VI,
        RomanDegree::VII,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RomanDegree::I => "I",
            RomanDegree::ISharp => "I#",
            RomanDegree::II => "II",
            RomanDegree::IISharp => "II#",
            RomanDegree::III => "III",
            RomanDegree::IV => "IV",
            RomanDegree::IVSharp => "IV#",
            RomanDegree::V => "V",
            RomanDegree::VSharp => "V#",
            RomanDegree::VI => "VI",
            RomanDegree::VISharp => "VI#",
            RomanDegree::VII => "VII",
        }
    }

    /// Semitone offset above the tonic in the given mode.
    ///
    /// In minor, `II#` and `V#` share offsets with `III` and `VI`; a minor
    /// encoder never emits them, but every token still decodes.
    pub fn offset(self, mode: Mode) -> u8 {
        let i = self as usize;
        match mode {
            Mode::Major => [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11][i],
            Mode::Minor => [0, 1, 2, 3, 3, 5, 6, 7, 8, 8, 9, 10][i],
        }
    }
}

impl fmt::Display for RomanDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RomanDegree {
    type Err = TheoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RomanDegree::ALL
            .iter()
            .copied()
            .find(|d| d.name() == s)
            .ok_or_else(|| TheoryError::Parse { kind: "degree", text: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChordQuality {
    Major,
    Minor,
    Augment,
    Diminish,
    Suspend2,
    Suspend4,
    Major7,
    Minor7,
    Dominant7,
    Diminish7,
    HalfDiminish7,
}

impl ChordQuality {
    pub const ALL: [ChordQuality; 11] = [
        ChordQuality::Major,
        ChordQuality::Minor,
        ChordQuality::Augment,
        ChordQuality::Diminish,
        ChordQuality::Suspend2,
        ChordQuality::Suspend4,
        ChordQuality::Major7,
        ChordQuality::Minor7,
        ChordQuality::Dominant7,
        ChordQuality::Diminish7,
        ChordQuality::HalfDiminish7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChordQuality::Major => "major",
            ChordQuality::Minor => "minor",
            ChordQuality::Augment => "augment",
            ChordQuality::Diminish => "diminish",
            ChordQuality::Suspend2 => "suspend2",
            ChordQuality::Suspend4 => "suspend4",
            ChordQuality::Major7 => "major7",
            ChordQuality::Minor7 => "minor7",
            ChordQuality::Dominant7 => "dominant7",
            ChordQuality::Diminish7 => "diminish7",
            ChordQuality::HalfDiminish7 => "half-diminish7",
        }
    }

    /// Root-position intervals above the root.
    pub fn intervals(self) -> &'static [u8] {
        match self {
            ChordQuality::Major => &[0, 4, 7],
            ChordQuality::Minor => &[0, 3, 7],
            ChordQuality::Augment => &[0, 4, 8],
            ChordQuality::Diminish => &[0, 3, 6],
            ChordQuality::Suspend2 => &[0, 2, 7],
            ChordQuality::Suspend4 => &[0, 5, 7],
            ChordQuality::Major7 => &[0, 4, 7, 11],
            ChordQuality::Minor7 => &[0, 3, 7, 10],
            ChordQuality::Dominant7 => &[0, 4, 7, 10],
            ChordQuality::Diminish7 => &[0, 3, 6, 9],
            ChordQuality::HalfDiminish7 => &[0, 3, 6, 10],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ChordQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChordQuality {
    type Err = TheoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChordQuality::ALL
            .iter()
            .copied()
            .find(|q| q.name() == s)
            .ok_or_else(|| TheoryError::Parse { kind: "chord quality", text: s.to_string() })
    }
}

/// A letter-rooted chord such as `F major`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChordLabel {
    pub root: PitchClass,
    pub quality: ChordQuality,
}

impl ChordLabel {
    pub fn new(root: u8, quality: ChordQuality) -> Self {
        ChordLabel { root: PitchClass::wrapping(root.into()), quality }
    }
}

impl fmt::Display for ChordLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.root, self.quality)
    }
}

/// A key-relative chord such as `IV major`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunctionalChord {
    pub degree: RomanDegree,
    pub quality: ChordQuality,
}

impl fmt::Display for FunctionalChord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.degree, self.quality)
    }
}

/// A melody pitch split into a tonic-relative register and a scale degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DegreePitch {
    pub octave: u8,
    pub degree: RomanDegree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreePolicyKind {
    SeededRandom(u64),
    AlwaysLower,
    AlwaysUpper,
}

/// Resolves the minor-key accidentals at relative pcs 4 and 11 to one of
/// their neighbouring degrees.
#[derive(Debug, Clone)]
pub struct DegreePolicy {
    kind: DegreePolicyKind,
    rng: Option<ChaCha8Rng>,
}

impl DegreePolicy {
    pub fn seeded(seed: u64) -> Self {
        DegreePolicy { kind: DegreePolicyKind::SeededRandom(seed), rng: Some(ChaCha8Rng::seed_from_u64(seed)) }
    }

    pub fn always_lower() -> Self {
        DegreePolicy { kind: DegreePolicyKind::AlwaysLower, rng: None }
    }

    pub fn always_upper() -> Self {
        DegreePolicy { kind: DegreePolicyKind::AlwaysUpper, rng: None }
    }

    pub fn kind(&self) -> DegreePolicyKind {
        self.kind
    }

    /// `true` picks the upper neighbour.
    fn choose_upper(&mut self) -> bool {
        match self.kind {
            DegreePolicyKind::AlwaysLower => false,
            DegreePolicyKind::AlwaysUpper => true,
            DegreePolicyKind::SeededRandom(_) => self.rng.as_mut().expect("seeded policy owns an rng").gen_bool(0.5),
        }
    }
}

impl From<DegreePolicyKind> for DegreePolicy {
    fn from(kind: DegreePolicyKind) -> Self {
        match kind {
            DegreePolicyKind::SeededRandom(seed) => DegreePolicy::seeded(seed),
            DegreePolicyKind::AlwaysLower => DegreePolicy::always_lower(),
            DegreePolicyKind::AlwaysUpper => DegreePolicy::always_upper(),
        }
    }
}

pub fn scale_pcs(key: Key) -> [PitchClass; 7] {
    let offsets = match key.mode {
        Mode::Major => MAJOR_SCALE,
        Mode::Minor => MINOR_SCALE,
    };
    offsets.map(|o| key.tonic.transpose(o.into()))
}

pub fn in_scale(pc: PitchClass, key: Key) -> bool {
    scale_pcs(key).contains(&pc)
}

pub fn degree_to_pc(degree: RomanDegree, key: Key) -> PitchClass {
    key.tonic.transpose(degree.offset(key.mode).into())
}

fn relative(pc: PitchClass, key: Key) -> u8 {
    (pc.value() + 12 - key.tonic.value()) % 12
}

/// Minor-key relative pcs that sit between two degree tokens.
fn minor_neighbours(rel: u8) -> Option<(RomanDegree, RomanDegree)> {
    match rel {
        4 => Some((RomanDegree::III, RomanDegree::IV)),
        11 => Some((RomanDegree::VII, RomanDegree::I)),
        _ => None,
    }
}

fn direct_degree(rel: u8, mode: Mode) -> RomanDegree {
    use RomanDegree::*;
    match mode {
        Mode::Major => RomanDegree::ALL[rel as usize],
        Mode::Minor => match rel {
            0 => I,
            1 => ISharp,
            2 => II,
            3 => III,
            5 => IV,
            6 => IVSharp,
            7 => V,
            8 => VI,
            9 => VISharp,
            10 => VII,
            _ => unreachable!("relative pc {rel} has no direct minor degree"),
        },
    }
}

pub fn pc_to_degree(pc: PitchClass, key: Key, policy: &mut DegreePolicy) -> RomanDegree {
    let rel = relative(pc, key);
    match (key.mode, minor_neighbours(rel)) {
        (Mode::Minor, Some((lower, upper))) => {
            if policy.choose_upper() {
                upper
            } else {
                lower
            }
        }
        _ => direct_degree(rel, key.mode),
    }
}

fn check_pitch(pitch: i64) -> Result<u8, TheoryError> {
    if (MIN_PITCH as i64..=MAX_PITCH as i64).contains(&pitch) {
        Ok(pitch as u8)
    } else {
        Err(TheoryError::PitchRange(pitch))
    }
}

/// Register of the tonic at or below `pitch`, before any accidental resolution.
fn tonic_octave(pitch: u8, key: Key) -> i32 {
    (pitch as i32 - key.tonic.value() as i32).div_euclid(12) - 1
}

fn representable(octave: i32, degree: RomanDegree, key: Key) -> bool {
    if !(MIN_OCTAVE as i32..=MAX_OCTAVE as i32).contains(&octave) {
        return false;
    }
    let pitch = 12 * (octave + 1) + key.tonic.value() as i32 + degree.offset(key.mode) as i32;
    (MIN_PITCH as i32..=MAX_PITCH as i32).contains(&pitch)
}

/// Splits a MIDI pitch into (octave, degree) relative to `key`.
///
/// For the two minor accidentals the policy picks a neighbour; if that
/// neighbour would fall outside the octave tokens or the pitch range, the
/// other neighbour is used instead. Pitches whose register lies outside the
/// eight octave tokens (a handful of notes at the extremes of the keyboard)
/// are rejected with [`TheoryError::OctaveRange`].
pub fn pitch_to_degree_pitch(pitch: u8, key: Key, policy: &mut DegreePolicy) -> Result<DegreePitch, TheoryError> {
    let pitch = check_pitch(pitch.into())?;
    let base = tonic_octave(pitch, key);
    let rel = relative(PitchClass::of_pitch(pitch), key);

    let candidates: [(i32, RomanDegree); 2] = match (key.mode, minor_neighbours(rel)) {
        (Mode::Minor, Some((lower, upper))) => {
            // I sits in the next register up when it resolves VII#.
            let upper_octave = if upper == RomanDegree::I { base + 1 } else { base };
            if policy.choose_upper() {
                [(upper_octave, upper), (base, lower)]
            } else {
                [(base, lower), (upper_octave, upper)]
            }
        }
        _ => {
            let d = direct_degree(rel, key.mode);
            [(base, d), (base, d)]
        }
    };

    candidates
        .into_iter()
        .find(|&(octave, degree)| representable(octave, degree, key))
        .map(|(octave, degree)| DegreePitch { octave: octave as u8, degree })
        .ok_or(TheoryError::OctaveRange { pitch, key, octave: candidates[0].0 })
}

pub fn degree_pitch_to_pitch(dp: DegreePitch, key: Key) -> Result<u8, TheoryError> {
    let pitch = 12 * (dp.octave as i64 + 1) + key.tonic.value() as i64 + dp.degree.offset(key.mode) as i64;
    check_pitch(pitch)
}

/// Whether `pitch` can be written with the functional melody tokens in `key`.
pub fn functionally_representable(pitch: u8, key: Key) -> bool {
    pitch_to_degree_pitch(pitch, key, &mut DegreePolicy::always_lower()).is_ok()
}

pub fn parallel_key(key: Key) -> Key {
    Key::new(key.tonic, key.mode.flip())
}

/// Pitch classes of a root-position chord, in template order.
pub fn chord_tones(chord: ChordLabel) -> Vec<PitchClass> {
    chord.quality.intervals().iter().map(|&i| chord.root.transpose(i.into())).collect()
}

pub fn chord_to_functional(chord: ChordLabel, key: Key, policy: &mut DegreePolicy) -> FunctionalChord {
    FunctionalChord { degree: pc_to_degree(chord.root, key, policy), quality: chord.quality }
}

pub fn functional_to_chord(chord: FunctionalChord, key: Key) -> ChordLabel {
    ChordLabel { root: degree_to_pc(chord.degree, key), quality: chord.quality }
}
