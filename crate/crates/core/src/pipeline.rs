//! The five pipeline commands and the on-disk artifact layout.
//!
//! ```text
//! <out>/config.resolved.toml   resolved configuration of the last command
//! <out>/rejections.tsv         line<TAB>reason<TAB>detail per dropped row
//! <out>/classifier.json        frozen auxiliary random forest
//! <out>/pretrain.ckpt          MLE generator + pretrained critic
//! <out>/pretrain_nll.tsv       epoch<TAB>mean token NLL
//! <out>/checkpoints/epoch-NNN-HASH8.ckpt
//! <out>/metrics.jsonl          one EpochMetrics object per line
//! <out>/samples/class-NAME.smi SMILES<TAB>valid|invalid per line
//! <out>/reports/class-NAME.txt key=value GenerationReport
//! <out>/evaluation.jsonl       one GenerationReport object per line
//! ```
//!
//! Text artifacts start with `# config_hash<TAB>HEX`; JSON lines carry a
//! `config_hash` field; binary and JSON models store it in their header.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::adversarial::{
    evaluate_prompts, pretrain_critic, pretrain_generator_mle, sample_classes, train_adversarial, AdvError,
    EpochMetrics, ModelState, TrainingContext,
};
use crate::auxdisc::{
    cross_validated_auc, select_features, train_random_forest, AuxError, AuxiliaryDiscriminator, ForestDiscriminator,
    LabeledDataset, RandomForestModel,
};
use crate::checkpoint::{checkpoint_name, Checkpoint, CheckpointError};
use crate::chem::parse_smiles;
use crate::config::{ConfigError, TrainingConfig};
use crate::data::{
    length_statistics, load_dataset, preprocess_all, DataError, DatasetRecord, OversampledSampler, PreprocessOutcome,
    Vocabulary,
};
use crate::descriptors::{compute_descriptors, DESCRIPTOR_COUNT};
use crate::metrics::{evaluate, GenerationReport, MetricsError};
use crate::neural::{AdamState, CriticParams, GeneratorParams};
use crate::seeding::derive_seed;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("classifier: {0}")]
    Classifier(#[from] AuxError),
    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("config hash mismatch in {}: expected {expected}, found {found}", .artifact.display())]
    ConfigHashMismatch {
        artifact: PathBuf,
        expected: String,
        found: String,
    },
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("training: {0}")]
    Training(#[from] AdvError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// Process exit status for each error family.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io(_) | PipelineError::Checkpoint(_) => 1,
            PipelineError::Config(_) => 2,
            PipelineError::Data(DataError::UnknownClass(_)) | PipelineError::UnknownClass(_) => 7,
            PipelineError::Data(_) | PipelineError::Metrics(_) => 3,
            PipelineError::Classifier(_) => 4,
            PipelineError::MissingArtifact(_) => 5,
            PipelineError::ConfigHashMismatch { .. } => 6,
            PipelineError::Training(_) => 8,
        }
    }
}

/// Preprocessed dataset plus everything derived from it.
pub struct Prepared {
    pub class_names: Vec<String>,
    pub outcome: PreprocessOutcome,
    pub vocab: Vocabulary,
    pub length_stats: Vec<(f64, f64)>,
    pub training_set: HashSet<String>,
    pub boosted_class: Option<usize>,
}

pub fn class_index(class_names: &[String], name: &str) -> Result<usize, PipelineError> {
    class_names
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| PipelineError::UnknownClass(name.to_string()))
}

pub fn prepare(cfg: &TrainingConfig) -> Result<Prepared, PipelineError> {
    let raw = load_dataset(Path::new(&cfg.dataset))?;
    let outcome = preprocess_all(&raw, cfg.lengths);
    if outcome.records.is_empty() {
        return Err(DataError::EmptyDataset.into());
    }
    let n = raw.class_names.len();
    let vocab = Vocabulary::build(&outcome.records, n)?;
    let length_stats = length_statistics(&outcome.records, n);
    let training_set = outcome.records.iter().map(|r| r.smiles.clone()).collect();
    let boosted_class = match &cfg.oversample.class {
        Some(name) => Some(class_index(&raw.class_names, name)?),
        None => None,
    };
    Ok(Prepared {
        class_names: raw.class_names,
        outcome,
        vocab,
        length_stats,
        training_set,
        boosted_class,
    })
}

fn write_resolved(cfg: &TrainingConfig, out: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(out)?;
    fs::write(out.join("config.resolved.toml"), cfg.to_toml())?;
    Ok(())
}

fn hash_line(cfg: &TrainingConfig) -> String {
    format!("# config_hash\t{}", cfg.hash())
}

fn json_line<T: serde::Serialize>(cfg: &TrainingConfig, value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("serializable");
    v.as_object_mut()
        .expect("struct serializes to an object")
        .insert("config_hash".into(), cfg.hash().into());
    v.to_string()
}

fn write_rejections(cfg: &TrainingConfig, out: &Path, outcome: &PreprocessOutcome) -> Result<(), PipelineError> {
    let mut f = std::io::BufWriter::new(fs::File::create(out.join("rejections.tsv"))?);
    writeln!(f, "{}", hash_line(cfg))?;
    for (line, why) in &outcome.rejections {
        writeln!(f, "{line}\t{why}")?;
    }
    f.flush()?;
    Ok(())
}

fn require(path: PathBuf) -> Result<PathBuf, PipelineError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(PipelineError::MissingArtifact(path))
    }
}

fn check_hash(artifact: &Path, expected: &str, found: &str) -> Result<(), PipelineError> {
    if expected == found {
        Ok(())
    } else {
        Err(PipelineError::ConfigHashMismatch {
            artifact: artifact.to_path_buf(),
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

pub fn classifier_path(out: &Path) -> PathBuf {
    out.join("classifier.json")
}

pub fn pretrain_path(out: &Path) -> PathBuf {
    out.join("pretrain.ckpt")
}

pub fn samples_path(out: &Path, class: &str) -> PathBuf {
    out.join("samples").join(format!("class-{class}.smi"))
}

pub fn load_classifier(cfg: &TrainingConfig, out: &Path) -> Result<RandomForestModel, PipelineError> {
    let path = require(classifier_path(out))?;
    let model = RandomForestModel::from_json(&fs::read_to_string(&path)?)?;
    check_hash(&path, &cfg.hash(), &model.config_hash)?;
    Ok(model)
}

fn load_checkpoint(cfg: &TrainingConfig, path: PathBuf) -> Result<Checkpoint, PipelineError> {
    let path = require(path)?;
    let ck = Checkpoint::read(&path)?;
    check_hash(&path, &cfg.hash(), &ck.header.config_hash)?;
    Ok(ck)
}

/// Preprocess, screen descriptors, train the forest, report CV AUC and
/// persist the model.
pub fn train_classifier(cfg: &TrainingConfig, out: &Path) -> Result<RandomForestModel, PipelineError> {
    write_resolved(cfg, out)?;
    let prep = prepare(cfg)?;
    write_rejections(cfg, out, &prep.outcome)?;
    let rows = prep
        .outcome
        .records
        .iter()
        .map(|r| {
            let graph = parse_smiles(&r.smiles).expect("preprocessed SMILES parse");
            (compute_descriptors(&graph), r.label)
        })
        .collect();
    let data = LabeledDataset::new(rows, prep.class_names.clone())?;
    let c = &cfg.classifier;
    let features = select_features(&data, c.top_k.min(DESCRIPTOR_COUNT), c.cv_folds, cfg.seed)?;
    let auc = cross_validated_auc(&data, &features, c.n_trees, c.cv_folds, cfg.seed)?;
    let mut model = train_random_forest(&data, &features, c.n_trees, cfg.seed)?;
    model.config_hash = cfg.hash();
    model.cv_auc = Some(auc);
    fs::write(classifier_path(out), model.to_json())?;
    Ok(model)
}

const GEN_INIT: u64 = 101;
const CRITIC_INIT: u64 = 102;
const MLE_SAMPLER: u64 = 103;
const GENERATE: u64 = 104;

fn context<'a>(
    cfg: &'a TrainingConfig,
    prep: &'a Prepared,
    auxiliary: &'a [&'a dyn AuxiliaryDiscriminator],
    classifier: &'a RandomForestModel,
) -> TrainingContext<'a> {
    TrainingContext {
        config: cfg,
        class_names: &prep.class_names,
        vocab: &prep.vocab,
        records: &prep.outcome.records,
        length_stats: &prep.length_stats,
        auxiliary,
        classifier,
        training_set: &prep.training_set,
        boosted_class: prep.boosted_class,
    }
}

/// MLE pretraining of the generator followed by critic pretraining.
pub fn pretrain(cfg: &TrainingConfig, out: &Path) -> Result<(Checkpoint, Vec<f64>), PipelineError> {
    write_resolved(cfg, out)?;
    let prep = prepare(cfg)?;
    let vocab = &prep.vocab;
    let generator = GeneratorParams::init(cfg.generator_dims(vocab.len()), derive_seed(cfg.seed, &[GEN_INIT]));
    let critic = CriticParams::init(
        cfg.critic_dims(vocab.len(), vocab.pad()),
        cfg.critic.init_scale,
        derive_seed(cfg.seed, &[CRITIC_INIT]),
    );
    let mut state = ModelState::new(generator, critic);
    let records = &prep.outcome.records;
    let data: Vec<(usize, Vec<usize>)> = records
        .iter()
        .map(|r| (vocab.start(r.label), vocab.encode(r).expect("vocabulary covers records")))
        .collect();
    let labels: Vec<usize> = records.iter().map(|r| r.label).collect();
    let mut sampler = OversampledSampler::new(
        &labels,
        vocab.n_classes(),
        prep.boosted_class,
        cfg.oversample.factor,
        derive_seed(cfg.seed, &[MLE_SAMPLER]),
    )?;
    // MLE epochs are full passes; `batches_per_epoch` only caps adversarial epochs
    let batches = records.len().div_ceil(cfg.optim.batch_size).max(1);
    let trace = pretrain_generator_mle(
        &mut state.generator,
        &mut state.generator_adam,
        cfg.optim.adam(cfg.optim.mle_lr),
        &vocab.emittable(),
        &data,
        &mut sampler,
        cfg.schedule.mle_epochs,
        cfg.optim.batch_size,
        batches,
    )?;
    // the MLE optimizer state does not carry into adversarial training
    state.generator_adam = AdamState::new(state.generator.data.len());
    let placeholder = RandomForestModel {
        schema_version: String::new(),
        class_names: Vec::new(),
        features: Vec::new(),
        n_trees: 0,
        trees: Vec::new(),
        rules: Vec::new(),
        config_hash: String::new(),
        cv_auc: None,
    };
    let ctx = context(cfg, &prep, &[], &placeholder);
    pretrain_critic(&ctx, &mut state)?;

    let mut f = std::io::BufWriter::new(fs::File::create(out.join("pretrain_nll.tsv"))?);
    writeln!(f, "{}", hash_line(cfg))?;
    for (i, nll) in trace.iter().enumerate() {
        writeln!(f, "{}\t{nll}", i + 1)?;
    }
    f.flush()?;
    let ck = Checkpoint::new(&cfg.hash(), "pretrain", 0, &prep.class_names, vocab, &prep.length_stats, &state);
    ck.write(&pretrain_path(out))?;
    Ok((ck, trace))
}

/// Adversarial training from the pretrained checkpoint against the frozen
/// classifier.
pub fn train(cfg: &TrainingConfig, out: &Path) -> Result<Vec<EpochMetrics>, PipelineError> {
    let model = load_classifier(cfg, out)?;
    let ck = load_checkpoint(cfg, pretrain_path(out))?;
    write_resolved(cfg, out)?;
    let prep = prepare(cfg)?;
    if prep.vocab != ck.header.vocabulary {
        return Err(PipelineError::ConfigHashMismatch {
            artifact: pretrain_path(out),
            expected: "vocabulary of the current dataset".into(),
            found: "a different vocabulary".into(),
        });
    }
    let mode = cfg.classifier.reward_mode()?;
    let forest = ForestDiscriminator {
        model: model.clone(),
        mode,
    };
    let auxiliary: Vec<&dyn AuxiliaryDiscriminator> = if cfg.reward.lambdas.len() > 1 {
        vec![&forest]
    } else {
        Vec::new()
    };
    let ctx = context(cfg, &prep, &auxiliary, &model);
    let mut state = ck.state;
    let ck_dir = out.join("checkpoints");
    fs::create_dir_all(&ck_dir)?;
    let trace_path = out.join("metrics.jsonl");
    let mut trace_file = fs::File::create(&trace_path)?;
    let hash = cfg.hash();
    let result = train_adversarial(&ctx, &mut state, |m, s| {
        let line = json_line(cfg, m);
        let io = |e: std::io::Error| AdvError::InvalidConfig(format!("cannot write artifacts: {e}"));
        writeln!(trace_file, "{line}").map_err(io)?;
        let ck = Checkpoint::new(&hash, "adversarial", m.epoch, &prep.class_names, &prep.vocab, &prep.length_stats, s);
        ck.write(&ck_dir.join(checkpoint_name(m.epoch, &hash)))
            .map_err(|e| AdvError::InvalidConfig(e.to_string()))?;
        Ok(())
    });
    match result {
        Ok(trace) => Ok(trace),
        Err(e) => {
            if let AdvError::NonFinite(msg) = &e {
                fs::write(out.join("diagnostic.txt"), format!("{msg}\n"))?;
            }
            Err(e.into())
        }
    }
}

/// The newest adversarial checkpoint of this config, else the pretrain one.
pub fn latest_checkpoint(cfg: &TrainingConfig, out: &Path) -> PathBuf {
    let suffix = format!("-{}.ckpt", &cfg.hash()[..8]);
    let mut found: Vec<PathBuf> = fs::read_dir(out.join("checkpoints"))
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("epoch-") && n.ends_with(&suffix)))
        .collect();
    found.sort();
    found.pop().unwrap_or_else(|| pretrain_path(out))
}

fn selected_classes(names: &[String], class: Option<&str>) -> Result<Vec<usize>, PipelineError> {
    match class {
        Some(name) => Ok(vec![class_index(names, name)?]),
        None => Ok((0..names.len()).collect()),
    }
}

/// Sample `n` sequences per requested class from the latest checkpoint and
/// write them with a validity annotation.
pub fn generate(cfg: &TrainingConfig, out: &Path, n: usize, class: Option<&str>) -> Result<Vec<PathBuf>, PipelineError> {
    let ck = load_checkpoint(cfg, latest_checkpoint(cfg, out))?;
    let names = &ck.header.class_names;
    let classes = selected_classes(names, class)?;
    write_resolved(cfg, out)?;
    fs::create_dir_all(out.join("samples"))?;
    let vocab = &ck.header.vocabulary;
    let spec = crate::neural::PolicySpec {
        allowed: vocab.emittable(),
        eos: Some(vocab.eos()),
        max_len: cfg.lengths.max + 1,
    };
    let mut paths = Vec::new();
    for c in classes {
        let samples = sample_classes(&ck.state.generator, &spec, vocab, &vec![c; n], cfg.seed, &[GENERATE, c as u64])?;
        let path = samples_path(out, &names[c]);
        let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(f, "{}", hash_line(cfg))?;
        for s in &samples {
            let text = vocab.decode(&s.tokens);
            let tag = if parse_smiles(&text).is_ok() { "valid" } else { "invalid" };
            writeln!(f, "{text}\t{tag}")?;
        }
        f.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

/// Read a sample file written by [`generate`]: (config hash, SMILES).
pub fn read_samples(path: &Path) -> Result<(String, Vec<String>), PipelineError> {
    let text = fs::read_to_string(require(path.to_path_buf())?)?;
    let mut hash = String::new();
    let mut samples = Vec::new();
    for line in text.lines() {
        if let Some(h) = line.strip_prefix("# config_hash\t") {
            hash = h.to_string();
        } else if !line.starts_with('#') {
            samples.push(line.split('\t').next().unwrap_or("").to_string());
        }
    }
    Ok((hash, samples))
}

/// Score sample files against the training set and the frozen classifier.
pub fn evaluate_samples(cfg: &TrainingConfig, out: &Path, class: Option<&str>) -> Result<Vec<GenerationReport>, PipelineError> {
    let model = load_classifier(cfg, out)?;
    let prep = prepare(cfg)?;
    let classes = selected_classes(&prep.class_names, class)?;
    fs::create_dir_all(out.join("reports"))?;
    let mut jsonl = fs::File::create(out.join("evaluation.jsonl"))?;
    let mut reports = Vec::new();
    for c in classes {
        let name = &prep.class_names[c];
        let path = samples_path(out, name);
        let (hash, samples) = read_samples(&path)?;
        check_hash(&path, &cfg.hash(), &hash)?;
        let report = evaluate(
            &samples,
            c,
            prep.class_names.len(),
            &prep.training_set,
            &model,
            derive_seed(cfg.seed, &[GENERATE, c as u64]),
        )?;
        let text = format!("config_hash={}\nclass={name}\n{}", cfg.hash(), report.to_key_value());
        fs::write(out.join("reports").join(format!("class-{name}.txt")), text)?;
        writeln!(jsonl, "{}", json_line(cfg, &report))?;
        reports.push(report);
    }
    Ok(reports)
}

/// Per-class reports from freshly generated prompts (no files written).
pub fn evaluate_generator(
    cfg: &TrainingConfig,
    prep: &Prepared,
    model: &RandomForestModel,
    generator: &GeneratorParams,
    n: usize,
) -> Result<Vec<GenerationReport>, PipelineError> {
    let ctx = context(cfg, prep, &[], model);
    Ok(evaluate_prompts(&ctx, generator, n, &[GENERATE])?
        .into_iter()
        .map(|(_, r)| r)
        .collect())
}

pub fn records(prep: &Prepared) -> &[DatasetRecord] {
    &prep.outcome.records
}
