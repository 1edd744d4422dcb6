//! Monte Carlo rollouts, reward estimation for a sampled batch and the
//! policy-gradient step.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::reward::{compute_q, min_max_standardize, shape_rewards, RewardBatch, RewardConfig, ShapingInput};
use super::{sum_in_chunks, AdvError};
use crate::neural::{
    adam_step, continue_sequence, prefix_states, weighted_log_prob_grad, AdamConfig, AdamState, GeneratorParams,
    PolicySpec,
};

/// Complete `prefix` (t ≥ 1 tokens after the start token) `m` times by
/// sampling from the current policy. Every completion keeps the prefix.
pub fn mc_rollout<R: Rng>(
    params: &GeneratorParams,
    spec: &PolicySpec,
    start_token: usize,
    prefix: &[usize],
    m: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>, AdvError> {
    let t = prefix.len();
    if t == 0 {
        return Err(AdvError::InvalidConfig("rollout prefix must hold at least one token".into()));
    }
    let states = prefix_states(params, start_token, &prefix[..t - 1])?;
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        let mut seq = prefix.to_vec();
        continue_sequence(params, spec, states[t - 1].clone(), prefix[t - 1], &mut seq, rng)?;
        out.push(seq);
    }
    Ok(out)
}

/// Scores complete sequences for the reward blend.
pub trait CompletionScorer: Sync {
    /// Raw (unstandardized) critic score.
    fn critic(&self, seq: &[usize]) -> f64;
    /// One reward in [0, 1] per auxiliary discriminator.
    fn auxiliary(&self, seq: &[usize], class: usize) -> Vec<f64>;
}

/// A generated sequence with its class prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub class: usize,
    pub start: usize,
    pub tokens: Vec<usize>,
}

type Evaluations = Vec<Vec<(f64, Vec<f64>)>>;

/// Raw evaluations for timesteps `offset..=T`; rollouts for t < T and the
/// sequence itself at t = T.
fn evaluate_sequence(
    params: &GeneratorParams,
    spec: &PolicySpec,
    seq: &Sampled,
    scorer: &dyn CompletionScorer,
    cfg: &RewardConfig,
    seed: u64,
) -> Result<Evaluations, AdvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tokens = &seq.tokens;
    let big_t = tokens.len();
    let mut cache: HashMap<Vec<usize>, (f64, Vec<f64>)> = HashMap::new();
    let mut score = |s: Vec<usize>| -> (f64, Vec<f64>) {
        cache
            .entry(s)
            .or_insert_with_key(|s| (scorer.critic(s), scorer.auxiliary(s, seq.class)))
            .clone()
    };
    if big_t < cfg.offset {
        return Ok(Vec::new());
    }
    let states = prefix_states(params, seq.start, tokens)?;
    let mut out = Vec::with_capacity(big_t + 1 - cfg.offset);
    for t in cfg.offset..big_t {
        let mut evals = Vec::with_capacity(cfg.rollouts);
        for _ in 0..cfg.rollouts {
            let mut completion = tokens[..t].to_vec();
            continue_sequence(params, spec, states[t - 1].clone(), tokens[t - 1], &mut completion, &mut rng)?;
            evals.push(score(completion));
        }
        out.push(evals);
    }
    out.push(vec![score(tokens.clone())]);
    Ok(out)
}

/// Q(t) for every sequence in the batch: rollouts, batch-wide critic
/// standardization, λ-blend, then duplicate and length shaping.
pub fn estimate_rewards(
    params: &GeneratorParams,
    spec: &PolicySpec,
    batch: &[Sampled],
    scorer: &dyn CompletionScorer,
    shaping: &[ShapingInput],
    cfg: &RewardConfig,
    seeds: &[u64],
) -> Result<RewardBatch, AdvError> {
    if batch.is_empty() {
        return Err(AdvError::EmptyBatch);
    }
    let evaluations: Vec<Evaluations> = batch
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(s, &seed)| evaluate_sequence(params, spec, s, scorer, cfg, seed))
        .collect::<Result<_, _>>()?;

    let raw: Vec<f64> = evaluations.iter().flatten().flatten().map(|(c, _)| *c).collect();
    let (standardized, critic_min, critic_max) = if cfg.standardize {
        min_max_standardize(&raw)
    } else {
        (raw.clone(), f64::NAN, f64::NAN)
    };
    let mut next = standardized.into_iter();
    let mut blended = Vec::with_capacity(batch.len());
    let mut critic_raw = Vec::with_capacity(batch.len());
    let mut auxiliary = Vec::with_capacity(batch.len());
    for (s, evals) in batch.iter().zip(&evaluations) {
        let mut q = vec![0.0; s.tokens.len()];
        for (k, step) in evals.iter().enumerate() {
            let scaled: Vec<(f64, Vec<f64>)> = step
                .iter()
                .map(|(_, aux)| (next.next().expect("one value per evaluation"), aux.clone()))
                .collect();
            q[cfg.offset - 1 + k] = compute_q(&cfg.lambdas, &scaled);
        }
        let last = evals.last();
        critic_raw.push(last.map(|e| e[0].0).unwrap_or(0.0));
        auxiliary.push(last.map(|e| e[0].1.clone()).unwrap_or_default());
        blended.push(q);
    }
    let (q, audit) = shape_rewards(blended, shaping, cfg);
    Ok(RewardBatch {
        q,
        critic_raw,
        auxiliary,
        critic_min,
        critic_max,
        audit,
    })
}

/// Policy-gradient ascent direction: batch mean of (1/T) Σ_t Q(t) ∇ log G(y_t | Y_<t).
pub fn policy_gradient(params: &GeneratorParams, allowed: &[bool], batch: &[Sampled], q: &[Vec<f64>]) -> Result<Vec<f64>, AdvError> {
    if q.len() != batch.len() {
        return Err(AdvError::Neural(crate::neural::NeuralError::ShapeMismatch {
            expected: batch.len(),
            found: q.len(),
        }));
    }
    let n = batch.len() as f64;
    let (grad, _) = sum_in_chunks(batch.len(), params.data.len(), |i, grad| {
        let s = &batch[i];
        if s.tokens.is_empty() {
            return Ok(0.0);
        }
        let scale = 1.0 / (s.tokens.len() as f64 * n);
        let weights: Vec<f64> = q[i].iter().map(|v| v * scale).collect();
        Ok(weighted_log_prob_grad(params, allowed, s.start, &s.tokens, &weights, grad)?)
    })?;
    Ok(grad)
}

/// One optimizer step along the policy gradient.
pub fn policy_gradient_update(
    params: &mut GeneratorParams,
    adam: &mut AdamState,
    adam_cfg: AdamConfig,
    allowed: &[bool],
    batch: &[Sampled],
    q: &[Vec<f64>],
) -> Result<(), AdvError> {
    let mut g = policy_gradient(params, allowed, batch, q)?;
    g.iter_mut().for_each(|x| *x = -*x);
    adam_step(&mut params.data, &g, adam, adam_cfg)?;
    Ok(())
}
