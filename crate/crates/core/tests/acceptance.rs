//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line.
//!
//! `cargo test -p leadsheet-core --test acceptance` runs the default set.
//! Passing `-- --real-corpus` (or setting `LEADSHEET_REAL_MANIFEST` to a
//! manifest of the real corpus) adds the published real-row comparison.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{oracle, random_any_clip, random_clip};
use leadsheet_core::harmonizer::{
    self, decide_key, nucleus_sample, nucleus_set, KeyPolicy, NGramConfig, NGramModel, SamplerConfig,
};
use leadsheet_core::metrics::{self, kl_divergence, Distribution};
use leadsheet_core::representation::{
    decode, encode, validate_sequence, vocabulary, Emotion, LeadSheet, Note, Representation,
};
use leadsheet_core::theory::{
    degree_pitch_to_pitch, pitch_to_degree_pitch, ChordLabel, ChordQuality, DegreePolicy, Key, Mode, RomanDegree,
};
use leadsheet_core::toolkit::{
    load_corpus, run_experiment, synthetic_corpus, CorpusManifest, ExperimentConfig, Split, PUBLISHED_REAL_ROW,
    REAL_ROW_TOLERANCE,
};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

/// Relative closeness with a floor of a few ulps, since a value whose true
/// result is zero keeps a rounding residue that depends on summation order.
fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()) + 4.0 * f64::EPSILON
}

fn round_trip_suite() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let (mut remi, mut major, mut minor) = (0, 0, 0);
    for i in 0..10_000u64 {
        let ls = random_any_clip(&mut rng);
        let ts = encode(&ls, Representation::Remi, &mut DegreePolicy::seeded(i)).map_err(|e| e.to_string())?;
        ensure!(decode(&ts).as_ref() == Ok(&ls), "REMI round trip differs on clip {i}");
        remi += 1;

        let ts = encode(&ls, Representation::Functional, &mut DegreePolicy::seeded(i)).map_err(|e| e.to_string())?;
        let back = decode(&ts).map_err(|e| e.to_string())?;
        if ls.key.mode == Mode::Major {
            ensure!(back == ls, "functional round trip differs on major clip {i}");
            major += 1;
            continue;
        }
        let tonic = ls.key.tonic.value();
        let allowed = |a: u8, b: u8| a == b || ([4, 11].contains(&((a + 12 - tonic) % 12)) && a.abs_diff(b) <= 1);
        ensure!(
            back.emotion == ls.emotion && back.key == ls.key && back.num_bars == ls.num_bars,
            "header changed on minor clip {i}"
        );
        ensure!(back.melody.len() == ls.melody.len(), "note count changed on minor clip {i}");
        for (a, b) in ls.melody.iter().zip(&back.melody) {
            ensure!(a.onset == b.onset && a.duration == b.duration, "rhythm changed on minor clip {i}");
            ensure!(allowed(a.pitch, b.pitch), "pitch {} became {} on minor clip {i}", a.pitch, b.pitch);
        }
        for (a, b) in ls.chords.iter().zip(&back.chords) {
            let ok = match (a, b) {
                (Some(a), Some(b)) => {
                    let up = (b.root.value() + 12 - a.root.value()) % 12;
                    a.quality == b.quality
                        && (a.root == b.root
                            || ([4, 11].contains(&((a.root.value() + 12 - tonic) % 12)) && (up == 1 || up == 11)))
                }
                (None, None) => true,
                _ => false,
            };
            ensure!(ok, "chord {a:?} became {b:?} on minor clip {i}");
        }
        minor += 1;
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:.2?}");
    Ok(format!("REMI {remi}/10000 exact, major {major} exact, minor {minor} within bounds, {elapsed:.2?}"))
}

fn vocabulary_audit() -> Outcome {
    let sizes: Vec<(Representation, usize)> = Representation::ALL.iter().map(|r| (*r, vocabulary(*r).len())).collect();
    for (repr, n) in &sizes {
        let vocab = vocabulary(*repr);
        let mut names: Vec<String> = vocab.tokens().iter().map(|t| t.to_string()).collect();
        names.sort();
        names.dedup();
        ensure!(names.len() == *n, "{repr:?} has duplicate tokens");
    }
    let functional = vocabulary(Representation::Functional).len();
    let remi = vocabulary(Representation::Remi).len();
    ensure!(functional == 217, "functional vocabulary has {functional} tokens");
    ensure!(remi == 284, "REMI vocabulary has {remi} tokens");
    Ok(format!("functional {functional}, REMI {remi}"))
}

fn degree_decomposition() -> Outcome {
    let key = Key::minor(0);
    for mut policy in [DegreePolicy::always_lower(), DegreePolicy::always_upper(), DegreePolicy::seeded(3)] {
        let dp = pitch_to_degree_pitch(63, key, &mut policy).map_err(|e| e.to_string())?;
        ensure!(dp.octave == 4 && dp.degree == RomanDegree::III, "63 in c minor gave {dp:?}");
        let back = degree_pitch_to_pitch(dp, key).map_err(|e| e.to_string())?;
        ensure!(back == 63, "decoded to {back}");
    }
    Ok("63 in c minor -> (Octave_4, Degree_III) -> 63".into())
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1_000);
    let mut compared = 0;
    for i in 0..1_000 {
        let key = common::random_key(&mut rng);
        let ls = random_clip(&mut rng, key, 2);
        let r = metrics::report(&ls);
        let pairs = [
            ("CTnCTR", r.ctnctr, oracle::ctnctr(&ls)),
            ("PCS", r.pcs, oracle::pcs(&ls)),
            ("MCTD", r.mctd, oracle::mctd(&ls)),
            ("RR", r.rr, oracle::rr(&ls)),
            ("NR", r.nr, oracle::nr(&ls)),
        ];
        for (name, got, want) in pairs {
            match (got, want) {
                (Some(g), Some(w)) => {
                    ensure!(rel_close(g, w, 1e-9), "{name} on clip {i}: {g} vs oracle {w}");
                    compared += 1;
                }
                (None, None) => {}
                _ => return Err(format!("{name} on clip {i}: {got:?} vs oracle {want:?}")),
            }
        }
    }

    // Hand cases.
    let c_major = |melody: Vec<Note>, roots: [(u8, ChordQuality); 4]| {
        let chords = roots.iter().map(|(r, q)| Some(ChordLabel::new(*r, *q))).collect();
        LeadSheet::new(Emotion::Positive, Key::major(0), 1, melody, chords).unwrap()
    };
    use ChordQuality::*;
    let triad = c_major(vec![Note::new(0, 60, 4)], [(0, Major); 4]);
    ensure!(rel_close(metrics::pcs(&triad).unwrap(), 2.0 / 3.0, 1e-12), "PCS of C over C major");
    let mixed = c_major(vec![], [(0, Major), (7, Major), (6, Diminish), (5, Major)]);
    ensure!(metrics::root_ratio(&mixed) == Some(0.75), "RR of C G F#dim F");
    let one_d = c_major(vec![], [(0, Major), (2, Major), (5, Major), (7, Major)]);
    ensure!(rel_close(metrics::note_ratio(&one_d).unwrap(), 11.0 / 12.0, 1e-12), "NR with one D major");
    Ok(format!("{compared} metric values on 1000 clips within 1e-9, hand cases exact"))
}

fn diatonic_clip(key: Key, degrees: &[usize], emotion: Emotion) -> LeadSheet {
    let qualities = match key.mode {
        Mode::Major => [0, 1, 1, 0, 0, 1, 3],
        Mode::Minor => [1, 3, 0, 1, 1, 0, 0],
    };
    let chords = degrees
        .iter()
        .map(|&d| {
            let root = key.tonic.value() + RomanDegree::DIATONIC[d].offset(key.mode);
            Some(ChordLabel::new(root % 12, ChordQuality::ALL[qualities[d]]))
        })
        .collect();
    LeadSheet::new(emotion, key, (degrees.len() / 4) as u32, vec![], chords).unwrap()
}

fn metric_fixed_points() -> Outcome {
    let mut corpus = Vec::new();
    for (i, key) in Key::all().enumerate() {
        let emotion = if i.is_multiple_of(2) { Emotion::Positive } else { Emotion::Negative };
        corpus.push(diatonic_clip(key, &[0, 3, 4, 0, 5, 1, 6, 2], emotion));
    }
    for ls in &corpus {
        let (rr, nr) = (metrics::root_ratio(ls), metrics::note_ratio(ls));
        ensure!(rr == Some(1.0) && nr == Some(1.0), "{}: RR {rr:?} NR {nr:?}", ls.key);
    }
    let qd = metrics::qd(&corpus, &corpus).map_err(|e| e.to_string())?;
    let pd = metrics::pd(&corpus, &corpus).map_err(|e| e.to_string())?;
    ensure!(qd < 1e-3 && pd < 1e-3, "QD {qd} PD {pd}");

    let support: Vec<String> = (0..5).map(|i| i.to_string()).collect();
    let p = Distribution::unsmoothed(support, &[3.0, 0.0, 1.0, 6.0, 2.0]);
    let kl = kl_divergence(&p, &p).map_err(|e| e.to_string())?;
    ensure!(kl == 0.0, "KL(p,p) = {kl}");
    Ok(format!("RR = NR = 1 on 24 keys, QD {qd:.1e}, PD {pd:.1e}, KL(p,p) = 0"))
}

fn progression_convention() -> Outcome {
    let chords =
        vec![Some(ChordLabel::new(2, ChordQuality::Major)), Some(ChordLabel::new(5, ChordQuality::Minor)), None, None];
    let ls = LeadSheet::new(Emotion::Positive, Key::major(2), 1, vec![], chords).unwrap();
    let counts = metrics::progression_counts(&[ls]);
    ensure!(counts[3] == 1.0 && counts.iter().sum::<f64>() == 1.0, "counts {counts:?}");
    Ok("Dmaj -> Fmin counted at interval 3 only".into())
}

fn rule_based_keys() -> Outcome {
    let mut cases = 0;
    for original in Key::all() {
        for emotion in [Emotion::Positive, Emotion::Negative] {
            let key =
                decide_key(original, emotion, KeyPolicy::RuleBased, None::<&NGramModel>, &SamplerConfig::default())
                    .map_err(|e| e.to_string())?;
            ensure!(key.tonic == original.tonic, "{original} {emotion:?} moved tonic to {key}");
            ensure!((key.mode == Mode::Major) == (emotion == Emotion::Positive), "{original} {emotion:?} gave {key}");
            cases += 1;
        }
    }
    ensure!(cases == 48, "{cases} cases");
    Ok("48/48 cases".into())
}

fn sampler() -> Outcome {
    const CRITICAL_DF4_1PCT: f64 = 13.276704135987622;
    let dist = [0.4, 0.25, 0.15, 0.12, 0.08];
    let config = SamplerConfig { temperature: 1.0, top_p: 1.0, seed: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let draws = 100_000;
    let mut counts = [0.0; 5];
    for _ in 0..draws {
        counts[nucleus_sample(&dist, &config, &[true; 5], &mut rng).map_err(|e| e.to_string())?] += 1.0;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&dist)
        .map(|(o, p)| {
            let e = p * draws as f64;
            (o - e).powi(2) / e
        })
        .sum();
    ensure!(chi2 < CRITICAL_DF4_1PCT, "chi-square {chi2:.3} >= {CRITICAL_DF4_1PCT}");

    let hand = [0.7, 0.2, 0.091, 0.006, 0.003];
    let defaults = SamplerConfig { temperature: 1.1, top_p: 0.99, seed: 0 };
    let set = nucleus_set(&hand, &defaults, &[true; 5]).map_err(|e| e.to_string())?;
    let kept = 0.995300024188162;
    let expected = [
        (0, 0.6680389601099463 / kept),
        (1, 0.21389196892459028 / kept),
        (2, 0.1045431900154312 / kept),
        (3, 0.008825905138194147 / kept),
    ];
    ensure!(set.len() == expected.len(), "nucleus {set:?}");
    for ((i, p), (j, q)) in set.iter().zip(&expected) {
        ensure!(i == j && rel_close(*p, *q, 1e-12), "nucleus {set:?}");
    }
    Ok(format!("chi-square {chi2:.3} < {CRITICAL_DF4_1PCT:.3} (df 4), nucleus set {{0,1,2,3}}"))
}

fn generation() -> Outcome {
    let corpus = synthetic_corpus(60, 9);
    let models: Vec<NGramModel> = Representation::ALL
        .iter()
        .map(|&repr| {
            let seqs: Vec<_> = corpus
                .iter()
                .enumerate()
                .map(|(i, ls)| encode(ls, repr, &mut DegreePolicy::seeded(i as u64)).unwrap())
                .collect();
            harmonizer::train(NGramConfig::new(repr), &[], &seqs).unwrap()
        })
        .collect();
    let melodies = synthetic_corpus(50, 10);
    let run = |i: usize| -> Result<String, String> {
        let model = &models[i % models.len()];
        let policy = KeyPolicy::ALL[(i / models.len()) % KeyPolicy::ALL.len()];
        let emotion = if i.is_multiple_of(2) { Emotion::Positive } else { Emotion::Negative };
        let ls = &melodies[i % melodies.len()];
        let h = harmonizer::harmonize(ls, emotion, policy, model, &SamplerConfig::with_seed(i as u64))
            .map_err(|e| format!("harmonization {i}: {e}"))?;
        validate_sequence(&h.tokens).map_err(|v| format!("harmonization {i}: {v}"))?;
        Ok(h.tokens.to_text())
    };
    let first: Vec<String> = (0..1_000).map(run).collect::<Result<_, _>>()?;
    for i in (0..1_000).step_by(7) {
        ensure!(run(i)? == first[i], "harmonization {i} is not reproducible");
    }
    Ok("1000/1000 valid across 4 representations x 3 key policies, reruns byte-identical".into())
}

struct Experiment {
    config: ExperimentConfig,
    train: Vec<LeadSheet>,
    validation: Vec<LeadSheet>,
}

fn load_experiment(manifest: &Path, config_path: Option<&Path>) -> Result<Experiment, String> {
    let config = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
            ExperimentConfig::from_toml(&text, path.parent().unwrap()).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::new(manifest.to_path_buf()),
    };
    let manifest = CorpusManifest::load(manifest).map_err(|e| e.to_string())?;
    let split = |s| -> Result<Vec<LeadSheet>, String> {
        Ok(load_corpus(&manifest, Some(s)).map_err(|e| e.to_string())?.into_iter().map(|c| c.lead_sheet).collect())
    };
    Ok(Experiment { config, train: split(Split::Train)?, validation: split(Split::Validation)? })
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn experiment_harness() -> Outcome {
    let dir = data_dir();
    let exp = load_experiment(&dir.join("manifest.toml"), Some(&dir.join("experiment.toml")))?;
    ensure!(
        exp.train.len() + exp.validation.len() == 20,
        "bundled corpus has {} clips",
        exp.train.len() + exp.validation.len()
    );
    let report = run_experiment(&exp.config, &exp.train, &exp.validation, &[]).map_err(|e| e.to_string())?;
    let again = run_experiment(&exp.config, &exp.train, &exp.validation, &[]).map_err(|e| e.to_string())?;
    ensure!(report.to_json() == again.to_json(), "reports differ between runs");

    let (harmonicity_text, control_text) = (report.harmonicity_tsv(), report.controllability_tsv());
    let harmonicity: Vec<Vec<&str>> = harmonicity_text.lines().map(|l| l.split('\t').collect()).collect();
    ensure!(
        harmonicity[0] == ["method", "ctnctr", "pcs", "mctd", "rr", "nr"],
        "harmonicity header {:?}",
        harmonicity[0]
    );
    ensure!(harmonicity.len() == 6 && harmonicity.iter().all(|r| r.len() == 6), "harmonicity table shape");
    ensure!(harmonicity[5][0] == "real", "last harmonicity row is {}", harmonicity[5][0]);
    let control: Vec<Vec<&str>> = control_text.lines().map(|l| l.split('\t').collect()).collect();
    ensure!(control.len() == 8 && control.iter().all(|r| r.len() == 5), "controllability table shape");
    ensure!(report.variants.iter().all(|v| v.failed == 0 && v.qd.is_some() && v.pd.is_some()), "a variant failed");

    let reports: Vec<_> = exp.validation.iter().map(metrics::report).collect();
    let direct = [
        mean(reports.iter().map(|r| r.ctnctr)),
        mean(reports.iter().map(|r| r.pcs)),
        mean(reports.iter().map(|r| r.mctd)),
        mean(reports.iter().map(|r| r.rr)),
        mean(reports.iter().map(|r| r.nr)),
    ];
    let real = &report.real;
    ensure!(direct == [real.ctnctr, real.pcs, real.mctd, real.rr, real.nr], "real row is not the ground-truth metrics");
    ensure!(real.qd == metrics::qd(&exp.validation, &exp.train).ok(), "real QD is not validation vs train");
    ensure!(report.reference_check.len() == 5, "reference check has {} rows", report.reference_check.len());
    for (check, (name, published)) in report.reference_check.iter().zip(PUBLISHED_REAL_ROW) {
        ensure!(check.metric == name && check.published == published, "reference row {check:?}");
    }

    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    report.write(out.path()).map_err(|e| e.to_string())?;
    for name in ["harmonicity.tsv", "controllability.tsv", "report.json"] {
        ensure!(out.path().join(name).is_file(), "{name} not written");
    }
    Ok(format!(
        "5x6 harmonicity and 7x5 controllability tables, real row from ground truth ({} validation clips), deterministic",
        exp.validation.len()
    ))
}

/// Published real-data row versus the real row computed from a supplied
/// corpus, within the tolerance. Without a corpus only the attainability of
/// each published value under the implemented metric ranges is checked.
fn published_real_row() -> Outcome {
    let ranges =
        [("ctnctr", 0.0, 1.0), ("pcs", -1.0, 1.0), ("mctd", 0.0, f64::INFINITY), ("rr", 0.0, 1.0), ("nr", 0.0, 1.0)];
    let mut problems = Vec::new();
    for ((name, published), (_, lo, hi)) in PUBLISHED_REAL_ROW.iter().zip(ranges) {
        if published + REAL_ROW_TOLERANCE < lo || published - REAL_ROW_TOLERANCE > hi {
            problems.push(format!("{name} {published} is outside the attainable range [{lo}, {hi}]"));
        }
    }
    if let Ok(path) = std::env::var("LEADSHEET_REAL_MANIFEST") {
        let exp = load_experiment(Path::new(&path), None)?;
        let reports: Vec<_> = exp.validation.iter().map(metrics::report).collect();
        let values = [
            mean(reports.iter().map(|r| r.ctnctr)),
            mean(reports.iter().map(|r| r.pcs)),
            mean(reports.iter().map(|r| r.mctd)),
            mean(reports.iter().map(|r| r.rr)),
            mean(reports.iter().map(|r| r.nr)),
        ];
        for ((name, published), value) in PUBLISHED_REAL_ROW.iter().zip(values) {
            match value {
                Some(v) if (v - published).abs() <= REAL_ROW_TOLERANCE => {}
                _ => problems.push(format!("{name} {value:?} vs published {published}")),
            }
        }
    }
    if problems.is_empty() {
        Ok("published real row within tolerance".into())
    } else {
        Err(problems.join("; "))
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    // libtest flags such as --list or --format are accepted and ignored.
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let with_real = args.iter().any(|a| a == "--real-corpus" || a == "--ignored" || a == "--include-ignored")
        || std::env::var_os("LEADSHEET_REAL_MANIFEST").is_some();

    let criteria: [(&str, Check); 10] = [
        ("01 round-trip codec suite", round_trip_suite),
        ("02 vocabulary audit", vocabulary_audit),
        ("03 degree decomposition", degree_decomposition),
        ("04 metric oracle equivalence", metric_oracle),
        ("05 metric fixed points", metric_fixed_points),
        ("06 progression convention", progression_convention),
        ("07 rule-based key decision", rule_based_keys),
        ("08 sampler correctness", sampler),
        ("09 generation validity and determinism", generation),
        ("10 experiment harness", experiment_harness),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    let name = "10b published real-row comparison";
    if with_real {
        match published_real_row() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    } else {
        println!(
            "SKIP  {name}: needs the real corpus (run with -- --real-corpus); expected to fail on PCS, see README"
        );
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
