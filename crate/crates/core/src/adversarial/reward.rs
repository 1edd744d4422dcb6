//! λ-blended action values and the three shaping steps: batch min-max
//! standardization, duplicate division and the length kernel.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::AdvError;

pub const LAMBDA_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// λ_0 for the critic, then one weight per auxiliary discriminator
    pub lambdas: Vec<f64>,
    /// Monte Carlo rollouts per prefix (M)
    pub rollouts: usize,
    /// first action that receives credit (x)
    pub offset: usize,
    pub standardize: bool,
    pub repetition_penalty: bool,
    pub length_weight: bool,
    pub length_floor: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            lambdas: vec![0.2, 0.8],
            rollouts: 16,
            offset: 1,
            standardize: true,
            repetition_penalty: true,
            length_weight: true,
            length_floor: 0.1,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), AdvError> {
        let sum: f64 = self.lambdas.iter().sum();
        if self.lambdas.is_empty() || (sum - 1.0).abs() > LAMBDA_TOLERANCE || self.lambdas.iter().any(|l| *l < 0.0) {
            return Err(AdvError::InvalidConfig(format!("lambda weights sum to {sum}, expected 1")));
        }
        if self.rollouts == 0 {
            return Err(AdvError::InvalidConfig("rollout count must be at least 1".into()));
        }
        if self.offset == 0 {
            return Err(AdvError::InvalidConfig("rollout offset must be at least 1".into()));
        }
        if !(self.length_floor > 0.0 && self.length_floor <= 1.0) {
            return Err(AdvError::InvalidConfig("length floor must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Min-max scale to [0, 1]; a constant batch maps to 0.5 everywhere.
pub fn min_max_standardize(values: &[f64]) -> (Vec<f64>, f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let out = if max > min {
        values.iter().map(|v| (v - min) / (max - min)).collect()
    } else {
        vec![0.5; values.len()]
    };
    (out, min, max)
}

/// λ_0 · critic + Σ λ_n · auxiliary_n.
pub fn blend(lambdas: &[f64], critic: f64, auxiliary: &[f64]) -> f64 {
    let mut q = lambdas[0] * critic;
    for (l, a) in lambdas[1..].iter().zip(auxiliary) {
        q += l * a;
    }
    q
}

/// Q(t): mean blend over the evaluated completions (rollouts for t < T, the
/// single full sequence for t = T).
pub fn compute_q(lambdas: &[f64], evaluations: &[(f64, Vec<f64>)]) -> f64 {
    let total: f64 = evaluations.iter().map(|(c, a)| blend(lambdas, *c, a)).sum();
    total / evaluations.len() as f64
}

/// For each key, the number of times it occurs in the batch.
pub fn duplicate_counts(keys: &[String]) -> Vec<usize> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for k in keys {
        *counts.entry(k.as_str()).or_default() += 1;
    }
    keys.iter().map(|k| counts[k.as_str()]).collect()
}

/// max(floor, exp(−|L − μ| / σ)).
pub fn length_weight(length: usize, mean: f64, std: f64, floor: f64) -> f64 {
    f64::max(floor, (-(length as f64 - mean).abs() / std).exp())
}

/// How a sequence's blended values were turned into shaped ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapingAudit {
    /// Q before the duplicate and length steps, per timestep
    pub blended: Vec<f64>,
    pub duplicate_count: usize,
    pub length: usize,
    pub length_weight: f64,
}

impl ShapingAudit {
    /// Reapply the recorded steps to one blended value.
    pub fn reconstruct(&self, blended: f64) -> f64 {
        blended / self.duplicate_count as f64 * self.length_weight
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBatch {
    /// shaped Q(t) per sequence and timestep; zero before the offset
    pub q: Vec<Vec<f64>>,
    /// raw critic score of each full sequence
    pub critic_raw: Vec<f64>,
    /// auxiliary rewards of each full sequence
    pub auxiliary: Vec<Vec<f64>>,
    /// batch-wide critic range used for standardization
    pub critic_min: f64,
    pub critic_max: f64,
    pub audit: Vec<ShapingAudit>,
}

impl RewardBatch {
    pub fn mean_q(&self) -> f64 {
        let n: usize = self.q.iter().map(Vec::len).sum();
        if n == 0 {
            return 0.0;
        }
        self.q.iter().flatten().sum::<f64>() / n as f64
    }
}

/// Per-sequence context for shaping.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapingInput {
    pub key: String,
    pub length: usize,
    pub length_mean: f64,
    pub length_std: f64,
}

/// Divide by the duplicate count and multiply by the length weight,
/// recording both.
pub fn shape_rewards(blended: Vec<Vec<f64>>, inputs: &[ShapingInput], cfg: &RewardConfig) -> (Vec<Vec<f64>>, Vec<ShapingAudit>) {
    let keys: Vec<String> = inputs.iter().map(|i| i.key.clone()).collect();
    let dups = if cfg.repetition_penalty {
        duplicate_counts(&keys)
    } else {
        vec![1; keys.len()]
    };
    let mut shaped = Vec::with_capacity(blended.len());
    let mut audit = Vec::with_capacity(blended.len());
    for ((values, input), dup) in blended.into_iter().zip(inputs).zip(dups) {
        let w = if cfg.length_weight {
            length_weight(input.length, input.length_mean, input.length_std, cfg.length_floor)
        } else {
            1.0
        };
        let a = ShapingAudit {
            blended: values,
            duplicate_count: dup,
            length: input.length,
            length_weight: w,
        };
        shaped.push(a.blended.iter().map(|&v| a.reconstruct(v)).collect());
        audit.push(a);
    }
    (shaped, audit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_max_fixture() {
        assert_eq!(min_max_standardize(&[2.0, 4.0, 6.0]).0, vec![0.0, 0.5, 1.0]);
        assert_eq!(min_max_standardize(&[3.0, 3.0]).0, vec![0.5, 0.5]);
    }

    #[test]
    fn blend_arithmetic() {
        assert_eq!(compute_q(&[0.2, 0.8], &[(1.0, vec![0.5])]), 0.2 * 1.0 + 0.8 * 0.5);
        assert!((compute_q(&[0.2, 0.8], &[(1.0, vec![0.5])]) - 0.6).abs() < 1e-15);
        // λ_0 = 1: the critic term alone
        let evals = [(0.3, vec![0.9]), (0.7, vec![0.1])];
        assert_eq!(compute_q(&[1.0, 0.0], &evals), (0.3 + 0.7) / 2.0);
        assert_eq!(compute_q(&[0.0, 1.0], &evals), (0.9 + 0.1) / 2.0);
    }

    #[test]
    fn lambda_validation() {
        let ok = RewardConfig::default();
        assert!(ok.validate().is_ok());
        let near = RewardConfig {
            lambdas: vec![0.2, 0.8 + 5e-10],
            ..ok.clone()
        };
        assert!(near.validate().is_ok());
        let off = RewardConfig {
            lambdas: vec![0.2, 0.8 + 2e-9],
            ..ok.clone()
        };
        assert!(off.validate().is_err());
        assert!(RewardConfig { rollouts: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn duplicates_and_length() {
        let keys: Vec<String> = ["a", "b", "a", "a"].iter().map(|s| s.to_string()).collect();
        assert_eq!(duplicate_counts(&keys), vec![3, 1, 3, 3]);
        assert_eq!(length_weight(20, 20.0, 4.0, 0.1), 1.0);
        assert_eq!(length_weight(200, 20.0, 4.0, 0.1), 0.1);
        assert!((length_weight(24, 20.0, 4.0, 0.1) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn shaping_divides_and_weights() {
        let cfg = RewardConfig::default();
        let input = |key: &str, length| ShapingInput {
            key: key.into(),
            length,
            length_mean: 10.0,
            length_std: 2.0,
        };
        let inputs = [input("x", 10), input("x", 10), input("x", 10), input("y", 12)];
        let blended = vec![vec![0.9, 0.6]; 4];
        let (shaped, audit) = shape_rewards(blended, &inputs, &cfg);
        assert_eq!(shaped[0], vec![0.9 / 3.0, 0.6 / 3.0]);
        assert_eq!(shaped[3][0], 0.9 * (-1.0f64).exp());
        for (s, a) in shaped.iter().zip(&audit) {
            for (v, b) in s.iter().zip(&a.blended) {
                assert_eq!(*v, a.reconstruct(*b));
            }
        }
    }
}
