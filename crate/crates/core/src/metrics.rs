//! Validity, uniqueness, novelty, class yield, label responsiveness and
//! fingerprint diversity of generated samples.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auxdisc::{structural_score, RandomForestModel};
use crate::chem::{canonicalize, fingerprint, parse_smiles, tanimoto, tokenize, MolecularGraph};
use crate::descriptors::compute_descriptors;

pub const FINGERPRINT_RADIUS: usize = 2;
pub const FINGERPRINT_WIDTH: usize = 2048;
pub const DIVERSITY_SUBSAMPLE: usize = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no samples to evaluate")]
    EmptySampleSet,
}

/// Assigns a class to a valid molecule.
pub trait ClassAssigner {
    fn assign(&self, graph: &MolecularGraph) -> usize;
}

/// Argmax over classes of probability × structural score; ties go to the
/// lower index.
impl ClassAssigner for RandomForestModel {
    fn assign(&self, graph: &MolecularGraph) -> usize {
        let Ok(p) = self.predict_proba(&compute_descriptors(graph)) else {
            return 0;
        };
        let mut best = (0, f64::NEG_INFINITY);
        for (c, pc) in p.iter().enumerate() {
            let score = pc * structural_score(graph, &self.rules[c]);
            if score > best.1 {
                best = (c, score);
            }
        }
        best.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub requested_class: usize,
    pub samples: usize,
    pub valid: usize,
    pub validity: f64,
    /// distinct canonical among valid
    pub uniqueness: f64,
    /// absent from training among valid unique
    pub novelty: f64,
    /// per class, fraction of valid samples assigned to it
    pub class_ratios: Vec<f64>,
    /// validity × uniqueness × class ratio of the requested class
    #[serde(rename = "yield")]
    pub yield_: f64,
    pub mean_length: f64,
    pub std_length: f64,
    pub mean_pairwise_tanimoto: f64,
    pub diversity_subsample: usize,
}

impl GenerationReport {
    /// Yield of an arbitrary class from the same samples.
    pub fn class_yield(&self, class: usize) -> f64 {
        self.validity * self.uniqueness * self.class_ratios.get(class).copied().unwrap_or(0.0)
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "requested_class={}", self.requested_class);
        let _ = writeln!(s, "samples={}", self.samples);
        let _ = writeln!(s, "valid={}", self.valid);
        let _ = writeln!(s, "validity={}", self.validity);
        let _ = writeln!(s, "uniqueness={}", self.uniqueness);
        let _ = writeln!(s, "novelty={}", self.novelty);
        for (c, r) in self.class_ratios.iter().enumerate() {
            let _ = writeln!(s, "class_ratio.{c}={r}");
        }
        let _ = writeln!(s, "yield={}", self.yield_);
        let _ = writeln!(s, "mean_length={}", self.mean_length);
        let _ = writeln!(s, "std_length={}", self.std_length);
        let _ = writeln!(s, "mean_pairwise_tanimoto={}", self.mean_pairwise_tanimoto);
        let _ = writeln!(s, "diversity_subsample={}", self.diversity_subsample);
        s
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
}

/// Mean Tanimoto similarity over all unordered pairs of at most
/// `DIVERSITY_SUBSAMPLE` molecules drawn with `seed`.
pub fn mean_pairwise_tanimoto(graphs: &[&MolecularGraph], seed: u64) -> (f64, usize) {
    let mut idx: Vec<usize> = (0..graphs.len()).collect();
    if idx.len() > DIVERSITY_SUBSAMPLE {
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        idx.truncate(DIVERSITY_SUBSAMPLE);
        idx.sort_unstable();
    }
    let fps: Vec<_> = idx
        .iter()
        .map(|&i| fingerprint(graphs[i], FINGERPRINT_RADIUS, FINGERPRINT_WIDTH))
        .collect();
    let (mut total, mut pairs) = (0.0, 0usize);
    for i in 0..fps.len() {
        for j in i + 1..fps.len() {
            total += tanimoto(&fps[i], &fps[j]).expect("equal widths");
            pairs += 1;
        }
    }
    let mean = if pairs == 0 { 0.0 } else { total / pairs as f64 };
    (mean, fps.len())
}

/// Score generated SMILES prompted with `requested_class`.
pub fn evaluate(
    samples: &[String],
    requested_class: usize,
    n_classes: usize,
    training: &HashSet<String>,
    classifier: &dyn ClassAssigner,
    seed: u64,
) -> Result<GenerationReport, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySampleSet);
    }
    let lengths: Vec<f64> = samples
        .iter()
        .map(|s| tokenize(s).map(|t| t.len()).unwrap_or(0) as f64)
        .collect();
    let (mean_length, std_length) = mean_std(&lengths);

    let mut valid = 0usize;
    let mut class_counts = vec![0usize; n_classes];
    let mut unique: HashMap<String, MolecularGraph> = HashMap::new();
    let mut first_seen: Vec<String> = Vec::new();
    for s in samples {
        let Ok(graph) = parse_smiles(s) else {
            continue;
        };
        valid += 1;
        let class = classifier.assign(&graph);
        if class < n_classes {
            class_counts[class] += 1;
        }
        let canon = canonicalize(&graph);
        if !unique.contains_key(&canon) {
            first_seen.push(canon.clone());
            unique.insert(canon, graph);
        }
    }
    let n = samples.len() as f64;
    let validity = valid as f64 / n;
    let (uniqueness, novelty, class_ratios) = if valid == 0 {
        (0.0, 0.0, vec![0.0; n_classes])
    } else {
        let novel = first_seen.iter().filter(|c| !training.contains(*c)).count();
        (
            unique.len() as f64 / valid as f64,
            novel as f64 / unique.len() as f64,
            class_counts.iter().map(|&c| c as f64 / valid as f64).collect(),
        )
    };
    let graphs: Vec<&MolecularGraph> = first_seen.iter().map(|c| &unique[c]).collect();
    let (mean_pairwise_tanimoto, diversity_subsample) = mean_pairwise_tanimoto(&graphs, seed);
    let ratio = class_ratios.get(requested_class).copied().unwrap_or(0.0);
    Ok(GenerationReport {
        requested_class,
        samples: samples.len(),
        valid,
        validity,
        uniqueness,
        novelty,
        yield_: validity * uniqueness * ratio,
        class_ratios,
        mean_length,
        std_length,
        mean_pairwise_tanimoto,
        diversity_subsample,
    })
}

/// log10 of the yield ratio; ±∞ when exactly one yield is zero and 0.0
/// when both are.
pub fn responsiveness(target_yield: f64, other_yield: f64) -> f64 {
    match (target_yield > 0.0, other_yield > 0.0) {
        (true, true) => (target_yield / other_yield).log10(),
        (true, false) => f64::INFINITY,
        (false, true) => f64::NEG_INFINITY,
        (false, false) => 0.0,
    }
}

/// Finite responsiveness for traces: each yield is floored at one sample
/// in `n`, so the value stays within ±log10(n).
pub fn bounded_responsiveness(target_yield: f64, other_yield: f64, n: usize) -> f64 {
    let floor = 1.0 / n.max(1) as f64;
    (target_yield.max(floor) / other_yield.max(floor)).log10()
}
