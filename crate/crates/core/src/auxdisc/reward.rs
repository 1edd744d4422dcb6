use serde::{Deserialize, Serialize};

use super::forest::RandomForestModel;
use super::rules::structural_score;
use crate::chem::{parse_smiles, MolecularGraph};
use crate::descriptors::compute_descriptors;

/// How the classifier probability and structural score combine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RewardMode {
    /// probability × structural score
    Product,
    /// 1.0 above `tau`, otherwise the product
    Threshold { tau: f64 },
}

impl Default for RewardMode {
    fn default() -> Self {
        RewardMode::Product
    }
}

/// A frozen scorer that maps generated SMILES text to a reward in [0, 1]
/// for a requested class.
pub trait AuxiliaryDiscriminator: Sync {
    fn reward(&self, smiles: &str, class: usize) -> f64;
}

/// Reward for an already-parsed graph.
pub fn graph_reward(model: &RandomForestModel, graph: &MolecularGraph, class: usize, mode: RewardMode) -> f64 {
    let descriptors = compute_descriptors(graph);
    let probability = match model.predict_proba(&descriptors) {
        Ok(p) => p[class],
        Err(_) => return 0.0,
    };
    if let RewardMode::Threshold { tau } = mode {
        if probability > tau {
            return 1.0;
        }
    }
    probability * structural_score(graph, &model.rules[class])
}

/// Classifier-times-structure reward; unparseable text scores zero.
pub fn auxiliary_reward(model: &RandomForestModel, smiles: &str, class: usize, mode: RewardMode) -> f64 {
    match parse_smiles(smiles) {
        Ok(graph) => graph_reward(model, &graph, class, mode),
        Err(_) => 0.0,
    }
}

/// A random forest paired with its reward mode.
#[derive(Debug, Clone)]
pub struct ForestDiscriminator {
    pub model: RandomForestModel,
    pub mode: RewardMode,
}

impl AuxiliaryDiscriminator for ForestDiscriminator {
    fn reward(&self, smiles: &str, class: usize) -> f64 {
        auxiliary_reward(&self.model, smiles, class, self.mode)
    }
}
