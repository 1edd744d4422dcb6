//! Dense numerical core on flat `f64` parameter vectors: the LSTM
//! generator, the CNN critic, Adam and a finite-difference checker.

mod adam;
mod critic;
mod generator;
mod gradcheck;
mod math;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use critic::{clip_weights, critic_score, critic_score_grad, pad_sequence, CriticDims, CriticParams};
pub use generator::{
    continue_sequence, generator_step, next_distribution, prefix_states, sample_index, sample_sequence,
    sequence_log_prob, weighted_log_prob_grad, GeneratorDims, GeneratorParams, GeneratorState, PolicySpec,
};
pub use gradcheck::{gradient_check, relative_error, TensorCheck};
pub use math::{masked_softmax, TensorSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NeuralError {
    #[error("token index {0} outside the vocabulary")]
    IndexOutOfVocab(usize),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
}
