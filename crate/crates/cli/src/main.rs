//! `leadsheet`: encode, harmonize and evaluate lead sheets from the shell.
//!
//! Exit codes: 0 on success, 1 for invalid input or data, 2 for I/O failures.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use leadsheet_core::harmonizer::{self, KeyPolicy, NGramConfig, NGramModel, SamplerConfig};
use leadsheet_core::metrics;
use leadsheet_core::representation::{
    decode, encode, rekey, transpose_to_c, Emotion, LeadSheet, Representation, TokenSequence,
};
use leadsheet_core::theory::{DegreePolicy, Key};
use leadsheet_core::toolkit::{self, CorpusManifest, ManifestEntry, Split};

#[derive(Parser)]
#[command(name = "leadsheet", version, about = "Key-aware lead sheet tokenizer, harmonizer and evaluator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DegreeChoice {
    /// Seeded coin flip between the two neighbouring degrees.
    Random,
    Lower,
    Upper,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmotionArg {
    Positive,
    Negative,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Keep,
    Rule,
    Model,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Validation,
    All,
}

impl SplitArg {
    fn split(self) -> Option<Split> {
        match self {
            SplitArg::Train => Some(Split::Train),
            SplitArg::Validation => Some(Split::Validation),
            SplitArg::All => None,
        }
    }
}

fn parse_repr(s: &str) -> Result<Representation, String> {
    s.parse()
}

fn parse_key(s: &str) -> Result<Key, String> {
    Key::parse_token_name(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Encode a lead sheet JSON file into a token sequence.
    Encode {
        input: PathBuf,
        #[arg(long, default_value = "functional", value_parser = parse_repr)]
        repr: Representation,
        #[arg(long, value_enum, default_value = "random")]
        degree_policy: DegreeChoice,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replace the emotion with Emotion_None, as for pretraining data.
        #[arg(long)]
        unlabeled: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decode a token file (one token per line) back into lead sheet JSON.
    Decode {
        input: PathBuf,
        /// Representation of the tokens; inferred when omitted.
        #[arg(long, value_parser = parse_repr)]
        repr: Option<Representation>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Move a lead sheet to another key keeping its scale degrees, or to C.
    Transpose {
        input: PathBuf,
        /// Target key such as `Cminor` or `F#major`.
        #[arg(long, value_parser = parse_key, required_unless_present = "to_c")]
        key: Option<Key>,
        /// Transpose to C major or c minor by the shortest interval instead.
        #[arg(long, conflicts_with = "key")]
        to_c: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train an n-gram model from labeled (and optionally unlabeled) corpora.
    Train {
        #[arg(long)]
        labeled: PathBuf,
        #[arg(long)]
        unlabeled: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "train")]
        split: SplitArg,
        #[arg(long, default_value = "functional", value_parser = parse_repr)]
        repr: Representation,
        #[arg(long, default_value_t = harmonizer::DEFAULT_ORDER)]
        order: usize,
        #[arg(long, default_value_t = harmonizer::DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate chords for the melody of a lead sheet.
    Harmonize {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        emotion: EmotionArg,
        #[arg(long, value_enum, default_value = "keep")]
        key_policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = harmonizer::DEFAULT_TEMPERATURE)]
        temperature: f64,
        #[arg(long, default_value_t = harmonizer::DEFAULT_TOP_P)]
        top_p: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the generated token sequence here.
        #[arg(long)]
        tokens: Option<PathBuf>,
        /// Also write a MIDI rendering here.
        #[arg(long)]
        midi: Option<PathBuf>,
    },
    /// Compute harmonicity metrics, and QD/PD against a reference corpus.
    Evaluate {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        split: SplitArg,
        /// Manifest whose training split is the real data for QD and PD.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Write the JSON report with per-clip values here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Corpus summary: clip count, bars, event counts and key histogram.
    Stats {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        split: SplitArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a lead sheet as a Standard MIDI File.
    ExportMidi {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the harmonization grid described by a TOML config.
    RunExperiment { config: PathBuf },
    /// Write a synthetic corpus and its manifest.
    Synth {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        validation: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn degree_policy(choice: DegreeChoice, seed: u64) -> DegreePolicy {
    match choice {
        DegreeChoice::Random => DegreePolicy::seeded(seed),
        DegreeChoice::Lower => DegreePolicy::always_lower(),
        DegreeChoice::Upper => DegreePolicy::always_upper(),
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(bytes).context("writing to stdout"),
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

fn evaluation_tsv(summary: &serde_json::Value) -> String {
    let mut columns = vec!["ctnctr", "pcs", "mctd", "rr", "nr"];
    if summary.get("qd").is_some() {
        columns.extend(["qd", "pd"]);
    }
    let cell = |v: &serde_json::Value| v.as_f64().map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    let mut header = String::from("clips");
    let mut row = summary["clips"].to_string();
    for c in columns {
        header.push('\t');
        header.push_str(c);
        row.push('\t');
        row.push_str(&cell(summary["mean"].get(c).unwrap_or(&summary[c])));
    }
    format!("{header}\n{row}\n")
}

fn gather(inputs: &[PathBuf], manifest: Option<&Path>, split: SplitArg) -> Result<Vec<LeadSheet>> {
    let mut clips = Vec::new();
    if let Some(path) = manifest {
        let manifest = CorpusManifest::load(path)?;
        clips.extend(toolkit::load_corpus(&manifest, split.split())?.into_iter().map(|c| c.lead_sheet));
    }
    for path in inputs {
        clips.push(toolkit::read_lead_sheet(path)?);
    }
    if clips.is_empty() {
        bail!("no input clips: pass files or --manifest");
    }
    Ok(clips)
}

fn load_model(path: &Path) -> Result<NGramModel> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    NGramModel::load_json(io::BufReader::new(file)).with_context(|| format!("loading model {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode { input, repr, degree_policy: choice, seed, unlabeled, output } => {
            let mut ls = toolkit::read_lead_sheet(&input)?;
            if unlabeled {
                ls.emotion = Emotion::Unlabeled;
            }
            let ts = encode(&ls, repr, &mut degree_policy(choice, seed))?;
            emit(output.as_deref(), format!("{}\n", ts.to_text()).as_bytes())
        }
        Command::Decode { input, repr, output } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let ts = TokenSequence::from_text(&text, repr)?;
            let ls = decode(&ts)?;
            emit(output.as_deref(), toolkit::lead_sheet_to_json(&ls).as_bytes())
        }
        Command::Transpose { input, key, to_c, seed, output } => {
            let ls = toolkit::read_lead_sheet(&input)?;
            let moved = match (key, to_c) {
                (_, true) => transpose_to_c(&ls),
                (Some(key), false) => rekey(&ls, key, &mut DegreePolicy::seeded(seed))?,
                (None, false) => bail!("pass --key or --to-c"),
            };
            emit(output.as_deref(), toolkit::lead_sheet_to_json(&moved).as_bytes())
        }
        Command::Train { labeled, unlabeled, split, repr, order, lambda, seed, output } => {
            let manifest = CorpusManifest::load(&labeled)?;
            let labeled_clips = toolkit::load_corpus(&manifest, split.split())?;
            let unlabeled_clips = match &unlabeled {
                Some(path) => toolkit::load_corpus(&CorpusManifest::load(path)?, None)?,
                None => Vec::new(),
            };
            let mut policy = DegreePolicy::seeded(seed);
            let mut sequences = |clips: Vec<toolkit::CorpusClip>, force_none: bool| -> Result<Vec<TokenSequence>> {
                clips
                    .into_iter()
                    .map(|mut c| {
                        if force_none {
                            c.lead_sheet.emotion = Emotion::Unlabeled;
                        }
                        encode(&c.lead_sheet, repr, &mut policy)
                            .with_context(|| format!("encoding {}", c.path.display()))
                    })
                    .collect()
            };
            let labeled_seqs = sequences(labeled_clips, false)?;
            let unlabeled_seqs = sequences(unlabeled_clips, true)?;
            let model =
                harmonizer::train(NGramConfig { representation: repr, order, lambda }, &unlabeled_seqs, &labeled_seqs)?;
            let file = fs::File::create(&output).with_context(|| format!("creating {}", output.display()))?;
            model.save_json(io::BufWriter::new(file))?;
            eprintln!(
                "trained {} model on {} labeled and {} unlabeled clips ({} contexts)",
                repr,
                labeled_seqs.len(),
                unlabeled_seqs.len(),
                model.context_count()
            );
            Ok(())
        }
        Command::Harmonize { input, model, emotion, key_policy, seed, temperature, top_p, output, tokens, midi } => {
            let ls = toolkit::read_lead_sheet(&input)?;
            let model = load_model(&model)?;
            let emotion = match emotion {
                EmotionArg::Positive => Emotion::Positive,
                EmotionArg::Negative => Emotion::Negative,
            };
            let policy = match key_policy {
                PolicyArg::Keep => KeyPolicy::KeepOriginal,
                PolicyArg::Rule => KeyPolicy::RuleBased,
                PolicyArg::Model => KeyPolicy::ModelBased,
            };
            let sampler = SamplerConfig { temperature, top_p, seed };
            let h = harmonizer::harmonize(&ls, emotion, policy, &model, &sampler)?;
            if let Some(path) = tokens {
                emit(Some(&path), format!("{}\n", h.tokens.to_text()).as_bytes())?;
            }
            if let Some(path) = midi {
                toolkit::export_midi(&h.lead_sheet, &path)?;
            }
            emit(output.as_deref(), toolkit::lead_sheet_to_json(&h.lead_sheet).as_bytes())
        }
        Command::Evaluate { inputs, manifest, split, reference, report } => {
            let clips = gather(&inputs, manifest.as_deref(), split)?;
            let reports: Vec<metrics::MetricReport> = clips.iter().map(metrics::report).collect();
            let mean = |f: fn(&metrics::MetricReport) -> Option<f64>| {
                let v: Vec<f64> = reports.iter().filter_map(f).collect();
                (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
            };
            let mut summary = serde_json::json!({
                "clips": clips.len(),
                "mean": {
                    "ctnctr": mean(|r| r.ctnctr),
                    "pcs": mean(|r| r.pcs),
                    "mctd": mean(|r| r.mctd),
                    "rr": mean(|r| r.rr),
                    "nr": mean(|r| r.nr),
                },
                "per_clip": reports,
            });
            if let Some(path) = reference {
                let real: Vec<LeadSheet> = toolkit::load_corpus(&CorpusManifest::load(&path)?, Some(Split::Train))?
                    .into_iter()
                    .map(|c| c.lead_sheet)
                    .collect();
                summary["qd"] = serde_json::json!(metrics::qd(&clips, &real)?);
                summary["pd"] = serde_json::json!(metrics::pd(&clips, &real)?);
            }
            if let Some(path) = report {
                emit(Some(&path), json_line(&summary).as_bytes())?;
            }
            emit(None, evaluation_tsv(&summary).as_bytes())
        }
        Command::Stats { inputs, manifest, split, output } => {
            let clips = gather(&inputs, manifest.as_deref(), split)?;
            emit(output.as_deref(), json_line(&toolkit::stats(&clips)).as_bytes())
        }
        Command::ExportMidi { input, output } => {
            let ls = toolkit::read_lead_sheet(&input)?;
            toolkit::export_midi(&ls, &output)?;
            Ok(())
        }
        Command::RunExperiment { config } => {
            let report = toolkit::run_experiment_file(&config)?;
            let failed: usize = report.variants.iter().map(|v| v.failed).sum();
            let text = format!("{}\n{}", report.harmonicity_tsv(), report.controllability_tsv());
            emit(None, text.as_bytes())?;
            if failed > 0 {
                eprintln!("{failed} generations failed; see report.json");
            }
            Ok(())
        }
        Command::Synth { count, validation, seed, out_dir } => {
            if validation > count {
                bail!("--validation {validation} exceeds --count {count}");
            }
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let corpus = toolkit::synthetic_corpus(count, seed);
            let mut manifest = CorpusManifest {
                notes: Some(format!("synthetic corpus, seed {seed}; last {validation} clips held out for validation")),
                ..Default::default()
            };
            for (i, ls) in corpus.iter().enumerate() {
                let name = format!("clip_{i:03}.json");
                toolkit::write_lead_sheet(ls, &out_dir.join(&name))?;
                let split = if i + validation >= count { Split::Validation } else { Split::Train };
                manifest.clips.push(ManifestEntry { path: name.into(), split, emopia_class: None });
            }
            let path = out_dir.join("manifest.toml");
            fs::write(&path, manifest.to_toml()).with_context(|| format!("writing {}", path.display()))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let io = err.chain().any(|cause| {
        cause.downcast_ref::<io::Error>().is_some()
            || cause.downcast_ref::<toolkit::ToolkitError>().is_some_and(|e| e.is_io())
    });
    if io {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let mut message = err.to_string();
            for cause in err.chain().skip(1) {
                let text = cause.to_string();
                if !message.contains(&text) {
                    message = format!("{message}: {text}");
                }
            }
            eprintln!("error: {message}");
            ExitCode::from(exit_code(&err))
        }
    }
}
