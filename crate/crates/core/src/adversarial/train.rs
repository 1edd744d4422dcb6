//! Teacher-forced MLE pretraining and Wasserstein critic updates.

use super::{sum_in_chunks, AdvError};
use crate::data::OversampledSampler;
use crate::neural::{
    adam_step, clip_weights, critic_score_grad, weighted_log_prob_grad, AdamConfig, AdamState,
    CriticParams, GeneratorParams,
};

/// One teacher-forced step on (start token, target tokens) pairs; returns
/// the mean per-token negative log-likelihood before the update.
pub fn mle_step(
    params: &mut GeneratorParams,
    adam: &mut AdamState,
    adam_cfg: AdamConfig,
    allowed: &[bool],
    batch: &[(usize, Vec<usize>)],
) -> Result<f64, AdvError> {
    let tokens: usize = batch.iter().map(|(_, s)| s.len()).sum();
    if tokens == 0 {
        return Err(AdvError::EmptyBatch);
    }
    let w = -1.0 / tokens as f64;
    let p: &GeneratorParams = params;
    let (grad, nll) = sum_in_chunks(batch.len(), p.data.len(), |i, grad| {
        let (start, seq) = &batch[i];
        Ok(weighted_log_prob_grad(p, allowed, *start, seq, &vec![w; seq.len()], grad)?)
    })?;
    adam_step(&mut params.data, &grad, adam, adam_cfg)?;
    Ok(nll)
}

/// MLE pretraining: each epoch draws `batches_per_epoch` batches from the
/// sampler. Returns the mean NLL per epoch.
#[allow(clippy::too_many_arguments)]
pub fn pretrain_generator_mle(
    params: &mut GeneratorParams,
    adam: &mut AdamState,
    adam_cfg: AdamConfig,
    allowed: &[bool],
    data: &[(usize, Vec<usize>)],
    sampler: &mut OversampledSampler,
    epochs: usize,
    batch_size: usize,
    batches_per_epoch: usize,
) -> Result<Vec<f64>, AdvError> {
    if data.is_empty() {
        return Err(AdvError::EmptyDataset);
    }
    let mut trace = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let mut total = 0.0;
        for _ in 0..batches_per_epoch {
            let batch: Vec<(usize, Vec<usize>)> = sampler.batch(batch_size).into_iter().map(|i| data[i].clone()).collect();
            total += mle_step(params, adam, adam_cfg, allowed, &batch)?;
        }
        let mean = total / batches_per_epoch as f64;
        if !mean.is_finite() {
            return Err(AdvError::NonFinite(format!("MLE epoch {} loss {mean}", epoch + 1)));
        }
        trace.push(mean);
    }
    Ok(trace)
}

/// One Wasserstein step: loss = mean critic(fake) − mean critic(real),
/// gradient step, then clipping. Returns the loss before the update.
pub fn critic_step(
    critic: &mut CriticParams,
    adam: &mut AdamState,
    adam_cfg: AdamConfig,
    real: &[Vec<usize>],
    fake: &[Vec<usize>],
    clip: f64,
) -> Result<f64, AdvError> {
    if real.is_empty() || fake.is_empty() {
        return Err(AdvError::EmptyBatch);
    }
    let c: &CriticParams = critic;
    let (nr, nf) = (real.len(), fake.len());
    let (g_fake, fake_sum) = sum_in_chunks(nf, c.data.len(), |i, g| Ok(critic_score_grad(c, &fake[i], 1.0 / nf as f64, g)?))?;
    let (g_real, real_sum) = sum_in_chunks(nr, c.data.len(), |i, g| Ok(critic_score_grad(c, &real[i], 1.0 / nr as f64, g)?))?;
    let loss = fake_sum / nf as f64 - real_sum / nr as f64;
    let grad: Vec<f64> = g_fake.iter().zip(&g_real).map(|(f, r)| f - r).collect();
    adam_step(&mut critic.data, &grad, adam, adam_cfg)?;
    clip_weights(critic, clip);
    Ok(loss)
}

/// `steps` critic updates on fixed batches; returns the loss trace.
pub fn train_critic(
    critic: &mut CriticParams,
    adam: &mut AdamState,
    adam_cfg: AdamConfig,
    real: &[Vec<usize>],
    fake: &[Vec<usize>],
    steps: usize,
    clip: f64,
) -> Result<Vec<f64>, AdvError> {
    (0..steps)
        .map(|_| critic_step(critic, adam, adam_cfg, real, fake, clip))
        .collect()
}
