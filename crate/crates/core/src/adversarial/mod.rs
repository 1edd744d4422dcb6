//! Adversarial training: MLE pretraining, Wasserstein critic updates,
//! Monte Carlo rollouts, blended and shaped action values, and the
//! policy-gradient generator update.

mod policy;
mod reward;
mod train;
mod trainer;

pub use policy::{estimate_rewards, mc_rollout, policy_gradient, policy_gradient_update, CompletionScorer, Sampled};
pub use reward::{
    blend, compute_q, duplicate_counts, length_weight, min_max_standardize, shape_rewards, RewardBatch, RewardConfig,
    ShapingAudit, ShapingInput, LAMBDA_TOLERANCE,
};
pub use train::{critic_step, mle_step, pretrain_generator_mle, train_critic};
pub use trainer::{
    duplicate_key, evaluate_prompts, pretrain_critic, sample_classes, summarize, train_adversarial, ClassMetrics,
    EpochMetrics, ModelState, TrainingContext,
};

use rayon::prelude::*;

use crate::neural::NeuralError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdvError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("empty batch")]
    EmptyBatch,
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

/// Items per reduction chunk. Fixed so that the summation order, and hence
/// every bit of the result, does not depend on the worker count.
const CHUNK: usize = 8;

/// Evaluate `f(i, grad)` for every item, accumulating into per-chunk
/// gradient buffers that are then summed in chunk order. Returns the
/// gradient and the ordered sum of the per-item values.
pub(crate) fn sum_in_chunks<F>(n: usize, width: usize, f: F) -> Result<(Vec<f64>, f64), AdvError>
where
    F: Fn(usize, &mut [f64]) -> Result<f64, AdvError> + Sync,
{
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut grad = vec![0.0; width];
            let mut values = Vec::with_capacity(CHUNK);
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                values.push(f(i, &mut grad)?);
            }
            Ok((grad, values))
        })
        .collect::<Result<_, AdvError>>()?;
    let mut total = vec![0.0; width];
    let mut value = 0.0;
    for (grad, values) in chunks {
        for (t, g) in total.iter_mut().zip(grad) {
            *t += g;
        }
        value += values.iter().sum::<f64>();
    }
    Ok((total, value))
}
