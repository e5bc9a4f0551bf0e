use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::harmonizer::{
    harmonize, train, KeyPolicy, NGramConfig, NGramModel, SamplerConfig, DEFAULT_LAMBDA, DEFAULT_ORDER,
};
use crate::metrics::{pd, qd, report, MetricReport};
use crate::representation::{encode, Emotion, LeadSheet, Representation, TokenSequence};
use crate::theory::DegreePolicy;

use super::{load_corpus, CorpusManifest, Split, ToolkitError};

/// Published real-data harmonicity row, for comparison when the real corpus
/// is supplied: CTnCTR, PCS, MCTD, RR, NR.
pub const PUBLISHED_REAL_ROW: [(&str, f64); 5] =
    [("ctnctr", 0.801), ("pcs", 1.613), ("mctd", 1.314), ("rr", 0.935), ("nr", 0.926)];
pub const REAL_ROW_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant {
    pub representation: Representation,
    pub key_policy: KeyPolicy,
}

impl Variant {
    pub fn label(&self) -> String {
        format!("{}/{}", self.representation.name(), self.key_policy.name())
    }

    /// Harmonicity rows use the original key, as the emotion token alone
    /// conditions the model there.
    pub fn default_grid() -> Vec<Variant> {
        use KeyPolicy::*;
        use Representation::*;
        [
            (Remi, KeepOriginal),
            (RemiTrans, KeepOriginal),
            (Functional, KeepOriginal),
            (FunctionalAblated, KeepOriginal),
            (RemiTrans, RuleBased),
            (Functional, RuleBased),
            (Functional, ModelBased),
        ]
        .into_iter()
        .map(|(representation, key_policy)| Variant { representation, key_policy })
        .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariant {
    representation: String,
    key_policy: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    labeled: PathBuf,
    unlabeled: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    repeats: Option<usize>,
    order: Option<usize>,
    lambda: Option<f64>,
    temperature: Option<f64>,
    top_p: Option<f64>,
    variants: Option<Vec<RawVariant>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub labeled: PathBuf,
    pub unlabeled: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub repeats: usize,
    pub order: usize,
    pub lambda: f64,
    pub temperature: f64,
    pub top_p: f64,
    pub variants: Vec<Variant>,
}

impl ExperimentConfig {
    pub fn new(labeled: PathBuf) -> Self {
        let sampler = SamplerConfig::default();
        ExperimentConfig {
            labeled,
            unlabeled: None,
            output_dir: PathBuf::from("results"),
            seed: 0,
            repeats: 5,
            order: DEFAULT_ORDER,
            lambda: DEFAULT_LAMBDA,
            temperature: sampler.temperature,
            top_p: sampler.top_p,
            variants: Variant::default_grid(),
        }
    }

    /// Parses a TOML config; relative paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ToolkitError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ToolkitError::Config(e.to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let mut config = ExperimentConfig::new(resolve(raw.labeled));
        config.unlabeled = raw.unlabeled.map(resolve);
        config.output_dir = resolve(raw.output_dir.unwrap_or(config.output_dir));
        config.seed = raw.seed.unwrap_or(config.seed);
        config.repeats = raw.repeats.unwrap_or(config.repeats);
        config.order = raw.order.unwrap_or(config.order);
        config.lambda = raw.lambda.unwrap_or(config.lambda);
        config.temperature = raw.temperature.unwrap_or(config.temperature);
        config.top_p = raw.top_p.unwrap_or(config.top_p);
        if let Some(variants) = raw.variants {
            config.variants = variants
                .into_iter()
                .map(|v| {
                    Ok(Variant {
                        representation: v.representation.parse().map_err(ToolkitError::Config)?,
                        key_policy: v.key_policy.parse().map_err(ToolkitError::Config)?,
                    })
                })
                .collect::<Result<_, ToolkitError>>()?;
        }
        if config.repeats == 0 {
            return Err(ToolkitError::Config("repeats must be at least 1".into()));
        }
        SamplerConfig { temperature: config.temperature, top_p: config.top_p, seed: 0 }
            .validate()
            .map_err(|e| ToolkitError::Config(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantResult {
    pub label: String,
    pub representation: String,
    pub key_policy: String,
    pub generated: usize,
    pub failed: usize,
    pub errors: Vec<String>,
    pub ctnctr: Option<f64>,
    pub pcs: Option<f64>,
    pub mctd: Option<f64>,
    pub rr: Option<f64>,
    pub nr: Option<f64>,
    pub qd: Option<f64>,
    pub pd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceCheck {
    pub metric: String,
    pub value: Option<f64>,
    pub published: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub repeats: usize,
    pub train_clips: usize,
    pub validation_clips: usize,
    pub unlabeled_clips: usize,
    pub skipped_training_clips: usize,
    pub real: VariantResult,
    pub variants: Vec<VariantResult>,
    pub reference_check: Vec<ReferenceCheck>,
}

fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mean_reports(reports: &[MetricReport]) -> [Option<f64>; 5] {
    let fields: [fn(&MetricReport) -> Option<f64>; 5] = [|r| r.ctnctr, |r| r.pcs, |r| r.mctd, |r| r.rr, |r| r.nr];
    fields.map(|f| {
        let values: Vec<f64> = reports.iter().filter_map(f).collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    })
}

fn result_row(
    label: String,
    representation: &str,
    key_policy: &str,
    clips: &[LeadSheet],
    real: &[LeadSheet],
) -> VariantResult {
    let reports: Vec<MetricReport> = clips.iter().map(report).collect();
    let [ctnctr, pcs, mctd, rr, nr] = mean_reports(&reports);
    let mut errors = Vec::new();
    let qd = qd(clips, real).map_err(|e| errors.push(format!("QD: {e}"))).ok();
    let pd = pd(clips, real).map_err(|e| errors.push(format!("PD: {e}"))).ok();
    VariantResult {
        label,
        representation: representation.into(),
        key_policy: key_policy.into(),
        generated: clips.len(),
        failed: 0,
        errors,
        ctnctr,
        pcs,
        mctd,
        rr,
        nr,
        qd,
        pd,
    }
}

fn encode_corpus(clips: &[LeadSheet], repr: Representation, seed: u64, skipped: &mut usize) -> Vec<TokenSequence> {
    clips
        .iter()
        .enumerate()
        .filter_map(|(i, ls)| match encode(ls, repr, &mut DegreePolicy::seeded(mix(seed, i as u64))) {
            Ok(ts) => Some(ts),
            Err(e) => {
                log::warn!("training clip {i} skipped for {repr}: {e}");
                *skipped += 1;
                None
            }
        })
        .collect()
}

/// Runs the harmonization grid on in-memory corpora.
///
/// For each variant every validation clip is harmonized under both
/// emotions `repeats` times. Harmonicity metrics are averaged over the
/// generated clips; QD and PD compare them with the labeled training clips.
/// A clip that fails is counted and reported without stopping the run.
pub fn run_experiment(
    config: &ExperimentConfig,
    train_clips: &[LeadSheet],
    validation: &[LeadSheet],
    unlabeled: &[LeadSheet],
) -> Result<ExperimentReport, ToolkitError> {
    let unlabeled: Vec<LeadSheet> =
        unlabeled.iter().cloned().map(|ls| LeadSheet { emotion: Emotion::Unlabeled, ..ls }).collect();

    let mut skipped = 0;
    let mut models: Vec<(Representation, NGramModel)> = Vec::new();
    for variant in &config.variants {
        let repr = variant.representation;
        if models.iter().any(|(r, _)| *r == repr) {
            continue;
        }
        let labeled = encode_corpus(train_clips, repr, mix(config.seed, 1), &mut skipped);
        let pretrain = encode_corpus(&unlabeled, repr, mix(config.seed, 2), &mut skipped);
        let model_config = NGramConfig { representation: repr, order: config.order, lambda: config.lambda };
        models.push((repr, train(model_config, &pretrain, &labeled)?));
    }

    let mut variants = Vec::new();
    for (v_index, variant) in config.variants.iter().enumerate() {
        let model = &models.iter().find(|(r, _)| *r == variant.representation).expect("trained above").1;
        let mut generated = Vec::new();
        let mut errors = Vec::new();
        for (c_index, clip) in validation.iter().enumerate() {
            for emotion in [Emotion::Positive, Emotion::Negative] {
                for repeat in 0..config.repeats {
                    let seed = [v_index, c_index, emotion as usize, repeat]
                        .iter()
                        .fold(config.seed, |acc, &x| mix(acc, x as u64));
                    let sampler = SamplerConfig { temperature: config.temperature, top_p: config.top_p, seed };
                    match harmonize(clip, emotion, variant.key_policy, model, &sampler) {
                        Ok(h) => generated.push(h.lead_sheet),
                        Err(e) => errors.push(format!("clip {c_index} {} repeat {repeat}: {e}", emotion.name())),
                    }
                }
            }
        }
        let mut row = result_row(
            variant.label(),
            variant.representation.name(),
            variant.key_policy.name(),
            &generated,
            train_clips,
        );
        row.failed = errors.len();
        errors.append(&mut row.errors);
        row.errors = errors;
        variants.push(row);
    }

    let real = result_row("real".into(), "-", "-", validation, train_clips);
    let values = [real.ctnctr, real.pcs, real.mctd, real.rr, real.nr];
    let reference_check = PUBLISHED_REAL_ROW
        .iter()
        .zip(values)
        .map(|(&(metric, published), value)| ReferenceCheck {
            metric: metric.into(),
            value,
            published,
            within_tolerance: value.is_some_and(|v| (v - published).abs() <= REAL_ROW_TOLERANCE),
        })
        .collect();

    Ok(ExperimentReport {
        seed: config.seed,
        repeats: config.repeats,
        train_clips: train_clips.len(),
        validation_clips: validation.len(),
        unlabeled_clips: unlabeled.len(),
        skipped_training_clips: skipped,
        real,
        variants,
        reference_check,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

impl ExperimentReport {
    /// Harmonicity table: one row per keep-original variant plus real data.
    pub fn harmonicity_tsv(&self) -> String {
        let mut out = String::from("method\tctnctr\tpcs\tmctd\trr\tnr\n");
        let rows = self.variants.iter().filter(|v| v.key_policy == KeyPolicy::KeepOriginal.name());
        for row in rows.chain(std::iter::once(&self.real)) {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                row.label,
                cell(row.ctnctr),
                cell(row.pcs),
                cell(row.mctd),
                cell(row.rr),
                cell(row.nr)
            );
        }
        out
    }

    /// Emotion-control table: QD and PD for every variant.
    pub fn controllability_tsv(&self) -> String {
        let mut out = String::from("method\tqd\tpd\tgenerated\tfailed\n");
        for row in &self.variants {
            let _ =
                writeln!(out, "{}\t{}\t{}\t{}\t{}", row.label, cell(row.qd), cell(row.pd), row.generated, row.failed);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports always serialize");
        text.push('\n');
        text
    }

    /// Writes `harmonicity.tsv`, `controllability.tsv` and `report.json`.
    pub fn write(&self, dir: &Path) -> Result<(), ToolkitError> {
        fs::create_dir_all(dir).map_err(|e| ToolkitError::io(dir, e))?;
        for (name, text) in [
            ("harmonicity.tsv", self.harmonicity_tsv()),
            ("controllability.tsv", self.controllability_tsv()),
            ("report.json", self.to_json()),
        ] {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| ToolkitError::io(&path, e))?;
        }
        Ok(())
    }
}

/// Loads the config and its corpora, runs the grid and writes the tables.
pub fn run_experiment_file(path: &Path) -> Result<ExperimentReport, ToolkitError> {
    let text = fs::read_to_string(path).map_err(|e| ToolkitError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let config = ExperimentConfig::from_toml(&text, &base)?;
    let manifest = CorpusManifest::load(&config.labeled)?;
    let lead_sheets = |split| -> Result<Vec<LeadSheet>, ToolkitError> {
        Ok(load_corpus(&manifest, Some(split))?.into_iter().map(|c| c.lead_sheet).collect())
    };
    let train_clips = lead_sheets(Split::Train)?;
    let validation = lead_sheets(Split::Validation)?;
    let unlabeled = match &config.unlabeled {
        Some(p) => load_corpus(&CorpusManifest::load(p)?, None)?.into_iter().map(|c| c.lead_sheet).collect(),
        None => Vec::new(),
    };
    let report = run_experiment(&config, &train_clips, &validation, &unlabeled)?;
    report.write(&config.output_dir)?;
    Ok(report)
}
