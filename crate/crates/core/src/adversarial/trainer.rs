//! The alternating generator / critic epoch loop with per-epoch metrics.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::policy::{estimate_rewards, policy_gradient_update, CompletionScorer, Sampled};
use super::reward::ShapingInput;
use super::train::critic_step;
use super::AdvError;
use crate::auxdisc::AuxiliaryDiscriminator;
use crate::chem::{canonicalize, parse_smiles};
use crate::config::TrainingConfig;
use crate::data::{DatasetRecord, OversampledSampler, Vocabulary};
use crate::metrics::{bounded_responsiveness, evaluate, ClassAssigner, GenerationReport};
use crate::neural::{critic_score, sample_sequence, AdamState, CriticParams, GeneratorParams, PolicySpec};
use crate::seeding::derive_seed;

// stream tags for derive_seed
const SAMPLER: u64 = 1;
const G_SAMPLE: u64 = 2;
const G_ROLLOUT: u64 = 3;
const D_SAMPLE: u64 = 4;
const EVAL: u64 = 5;
const CRITIC_PRETRAIN: u64 = 6;

/// Networks and optimizer moments that evolve during training.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub generator: GeneratorParams,
    pub generator_adam: AdamState,
    pub critic: CriticParams,
    pub critic_adam: AdamState,
}

impl ModelState {
    pub fn new(generator: GeneratorParams, critic: CriticParams) -> ModelState {
        ModelState {
            generator_adam: AdamState::new(generator.data.len()),
            critic_adam: AdamState::new(critic.data.len()),
            generator,
            critic,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.generator.data.iter().chain(&self.critic.data).all(|x| x.is_finite())
    }
}

/// Everything the loop reads but never modifies.
pub struct TrainingContext<'a> {
    pub config: &'a TrainingConfig,
    pub class_names: &'a [String],
    pub vocab: &'a Vocabulary,
    pub records: &'a [DatasetRecord],
    /// per-class (mean, std) of token length
    pub length_stats: &'a [(f64, f64)],
    pub auxiliary: &'a [&'a dyn AuxiliaryDiscriminator],
    pub classifier: &'a dyn ClassAssigner,
    /// canonical SMILES of the training set
    pub training_set: &'a HashSet<String>,
    /// class index whose records are replicated in the sampling pool
    pub boosted_class: Option<usize>,
}

impl TrainingContext<'_> {
    pub fn policy(&self) -> PolicySpec {
        PolicySpec {
            allowed: self.vocab.emittable(),
            eos: Some(self.vocab.eos()),
            max_len: self.config.lengths.max + 1,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.vocab.n_classes()
    }

    pub fn sampler(&self, stream: u64) -> Result<OversampledSampler, AdvError> {
        let labels: Vec<usize> = self.records.iter().map(|r| r.label).collect();
        OversampledSampler::new(
            &labels,
            self.n_classes(),
            self.boosted_class,
            self.config.oversample.factor,
            derive_seed(self.config.seed, &[SAMPLER, stream]),
        )
        .map_err(|e| AdvError::InvalidConfig(e.to_string()))
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.config
            .schedule
            .batches_per_epoch
            .unwrap_or_else(|| self.records.len().div_ceil(self.config.optim.batch_size))
            .max(1)
    }

    /// Record tokens as critic input (no end token).
    fn real_tokens(&self, record: &DatasetRecord) -> Vec<usize> {
        let mut seq = self.vocab.encode(record).expect("records built the vocabulary");
        seq.pop();
        seq
    }
}

fn strip_eos(vocab: &Vocabulary, seq: &[usize]) -> Vec<usize> {
    seq[..vocab.content_length(seq)].to_vec()
}

/// Draw one sequence per entry of `classes`, each from its own stream.
pub fn sample_classes(
    generator: &GeneratorParams,
    spec: &PolicySpec,
    vocab: &Vocabulary,
    classes: &[usize],
    seed: u64,
    stream: &[u64],
) -> Result<Vec<Sampled>, AdvError> {
    classes
        .par_iter()
        .enumerate()
        .map(|(i, &class)| {
            let mut path = stream.to_vec();
            path.push(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &path));
            let start = vocab.start(class);
            Ok(Sampled {
                class,
                start,
                tokens: sample_sequence(generator, spec, start, &mut rng)?,
            })
        })
        .collect()
}

struct Scorer<'a> {
    critic: &'a CriticParams,
    vocab: &'a Vocabulary,
    auxiliary: &'a [&'a dyn AuxiliaryDiscriminator],
}

impl CompletionScorer for Scorer<'_> {
    fn critic(&self, seq: &[usize]) -> f64 {
        critic_score(self.critic, &strip_eos(self.vocab, seq)).unwrap_or(0.0)
    }

    fn auxiliary(&self, seq: &[usize], class: usize) -> Vec<f64> {
        let text = self.vocab.decode(seq);
        self.auxiliary.iter().map(|a| a.reward(&text, class)).collect()
    }
}

/// Within-batch duplicate key: canonical SMILES, or the raw token string
/// when the text does not parse.
pub fn duplicate_key(vocab: &Vocabulary, seq: &[usize]) -> String {
    let text = vocab.decode(seq);
    match parse_smiles(&text) {
        Ok(g) => canonicalize(&g),
        Err(_) => format!("#{seq:?}"),
    }
}

/// Critic pretraining on one real and one generated batch.
pub fn pretrain_critic(ctx: &TrainingContext, state: &mut ModelState) -> Result<Vec<f64>, AdvError> {
    let cfg = ctx.config;
    let mut sampler = ctx.sampler(CRITIC_PRETRAIN)?;
    let idx = sampler.batch(cfg.optim.batch_size);
    let real: Vec<Vec<usize>> = idx.iter().map(|&i| ctx.real_tokens(&ctx.records[i])).collect();
    let classes: Vec<usize> = idx.iter().map(|&i| ctx.records[i].label).collect();
    let fake: Vec<Vec<usize>> = sample_classes(&state.generator, &ctx.policy(), ctx.vocab, &classes, cfg.seed, &[CRITIC_PRETRAIN])?
        .into_iter()
        .map(|s| strip_eos(ctx.vocab, &s.tokens))
        .collect();
    let adam_cfg = cfg.optim.adam(cfg.optim.critic_lr);
    (0..cfg.schedule.critic_pretrain_steps)
        .map(|_| critic_step(&mut state.critic, &mut state.critic_adam, adam_cfg, &real, &fake, cfg.critic.clip))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub validity: f64,
    pub uniqueness: f64,
    pub novelty: f64,
    #[serde(rename = "yield")]
    pub yield_: f64,
    pub responsiveness: f64,
    pub mean_length: f64,
}

/// One line of the metric trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub classes: Vec<ClassMetrics>,
    /// mean over classes
    pub responsiveness: f64,
    pub critic_loss: f64,
    pub mean_q: f64,
}

/// Generate `n` samples per class prompt and score them.
pub fn evaluate_prompts(
    ctx: &TrainingContext,
    generator: &GeneratorParams,
    n: usize,
    stream: &[u64],
) -> Result<Vec<(Vec<String>, GenerationReport)>, AdvError> {
    let spec = ctx.policy();
    (0..ctx.n_classes())
        .map(|c| {
            let mut path = stream.to_vec();
            path.push(c as u64);
            let samples = sample_classes(generator, &spec, ctx.vocab, &vec![c; n], ctx.config.seed, &path)?;
            let texts: Vec<String> = samples.iter().map(|s| ctx.vocab.decode(&s.tokens)).collect();
            let report = evaluate(
                &texts,
                c,
                ctx.n_classes(),
                ctx.training_set,
                ctx.classifier,
                derive_seed(ctx.config.seed, &path),
            )
            .map_err(|e| AdvError::InvalidConfig(e.to_string()))?;
            Ok((texts, report))
        })
        .collect()
}

/// Per-class metrics and responsiveness from one report per prompt class.
pub fn summarize(class_names: &[String], reports: &[GenerationReport]) -> (Vec<ClassMetrics>, f64) {
    let k = reports.len();
    let classes: Vec<ClassMetrics> = reports
        .iter()
        .enumerate()
        .map(|(c, r)| {
            let others: Vec<f64> = (0..k).filter(|&o| o != c).map(|o| reports[o].class_yield(c)).collect();
            let other = if others.is_empty() {
                0.0
            } else {
                others.iter().sum::<f64>() / others.len() as f64
            };
            ClassMetrics {
                class: class_names[c].clone(),
                validity: r.validity,
                uniqueness: r.uniqueness,
                novelty: r.novelty,
                yield_: r.yield_,
                responsiveness: bounded_responsiveness(r.yield_, other, r.samples),
                mean_length: r.mean_length,
            }
        })
        .collect();
    let mean = classes.iter().map(|c| c.responsiveness).sum::<f64>() / k.max(1) as f64;
    (classes, mean)
}

/// Run the adversarial epochs. `on_epoch` sees the metrics and the model
/// after each epoch (checkpointing, trace output).
pub fn train_adversarial<F>(ctx: &TrainingContext, state: &mut ModelState, mut on_epoch: F) -> Result<Vec<EpochMetrics>, AdvError>
where
    F: FnMut(&EpochMetrics, &ModelState) -> Result<(), AdvError>,
{
    let cfg = ctx.config;
    let seed = cfg.seed;
    let spec = ctx.policy();
    let batches = ctx.batches_per_epoch();
    let g_adam = cfg.optim.adam(cfg.optim.adversarial_lr);
    let d_adam = cfg.optim.adam(cfg.optim.critic_lr);
    let mut g_sampler = ctx.sampler(G_SAMPLE)?;
    let mut d_sampler = ctx.sampler(D_SAMPLE)?;
    let mut trace = Vec::new();

    for epoch in 1..=cfg.schedule.adversarial_epochs {
        let e = epoch as u64;
        let mut q_total = 0.0;
        for g in 0..cfg.schedule.g_steps {
            for b in 0..batches {
                let step = (g * batches + b) as u64;
                let classes: Vec<usize> = g_sampler
                    .batch(cfg.optim.batch_size)
                    .into_iter()
                    .map(|i| ctx.records[i].label)
                    .collect();
                let batch = sample_classes(&state.generator, &spec, ctx.vocab, &classes, seed, &[G_SAMPLE, e, step])?;
                let shaping: Vec<ShapingInput> = batch
                    .iter()
                    .map(|s| {
                        let (mean, std) = ctx.length_stats[s.class];
                        ShapingInput {
                            key: duplicate_key(ctx.vocab, &s.tokens),
                            length: ctx.vocab.content_length(&s.tokens),
                            length_mean: mean,
                            length_std: std,
                        }
                    })
                    .collect();
                let seeds: Vec<u64> = (0..batch.len())
                    .map(|i| derive_seed(seed, &[G_ROLLOUT, e, step, i as u64]))
                    .collect();
                let scorer = Scorer {
                    critic: &state.critic,
                    vocab: ctx.vocab,
                    auxiliary: ctx.auxiliary,
                };
                let rewards = estimate_rewards(&state.generator, &spec, &batch, &scorer, &shaping, &cfg.reward, &seeds)?;
                q_total += rewards.mean_q();
                policy_gradient_update(
                    &mut state.generator,
                    &mut state.generator_adam,
                    g_adam,
                    &spec.allowed,
                    &batch,
                    &rewards.q,
                )?;
            }
        }
        let mut loss_total = 0.0;
        for d in 0..cfg.schedule.d_steps {
            for b in 0..batches {
                let step = (d * batches + b) as u64;
                let idx = d_sampler.batch(cfg.optim.batch_size);
                let real: Vec<Vec<usize>> = idx.iter().map(|&i| ctx.real_tokens(&ctx.records[i])).collect();
                let classes: Vec<usize> = idx.iter().map(|&i| ctx.records[i].label).collect();
                let fake: Vec<Vec<usize>> = sample_classes(&state.generator, &spec, ctx.vocab, &classes, seed, &[D_SAMPLE, e, step])?
                    .into_iter()
                    .map(|s| strip_eos(ctx.vocab, &s.tokens))
                    .collect();
                loss_total += critic_step(&mut state.critic, &mut state.critic_adam, d_adam, &real, &fake, cfg.critic.clip)?;
            }
        }
        let g_count = (cfg.schedule.g_steps * batches).max(1) as f64;
        let d_count = (cfg.schedule.d_steps * batches).max(1) as f64;
        let critic_loss = loss_total / d_count;
        let mean_q = q_total / g_count;
        if !critic_loss.is_finite() || !mean_q.is_finite() || !state.is_finite() {
            return Err(AdvError::NonFinite(format!(
                "epoch {epoch}: critic loss {critic_loss}, mean Q {mean_q}, finite parameters {}",
                state.is_finite()
            )));
        }
        let reports: Vec<GenerationReport> = evaluate_prompts(ctx, &state.generator, cfg.schedule.eval_samples, &[EVAL, e])?
            .into_iter()
            .map(|(_, r)| r)
            .collect();
        let (classes, responsiveness) = summarize(ctx.class_names, &reports);
        let metrics = EpochMetrics {
            epoch,
            classes,
            responsiveness,
            critic_loss,
            mean_q,
        };
        on_epoch(&metrics, state)?;
        trace.push(metrics);
    }
    Ok(trace)
}
