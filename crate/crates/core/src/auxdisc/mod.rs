//! The frozen auxiliary discriminator: descriptor screening, a random
//! forest classifier, structural rules and the combined reward.

mod auc;
mod forest;
mod reward;
mod rules;
mod select;

pub use auc::{auc, macro_auc};
pub use forest::{train_random_forest, DecisionTree, Node, RandomForestModel, DEFAULT_TREES};
pub use reward::{auxiliary_reward, graph_reward, AuxiliaryDiscriminator, ForestDiscriminator, RewardMode};
pub use rules::{structural_score, StructuralRules};
pub use select::{feature_cv_auc, rank_features, select_features, stratified_folds};

use crate::descriptors::{DescriptorVector, DESCRIPTOR_COUNT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuxError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("labels contain a single class")]
    DegenerateLabels,
    #[error("descriptor schema mismatch: model expects {expected}, got {found}")]
    SchemaMismatch { expected: String, found: String },
    #[error("malformed model file: {0}")]
    Format(String),
}

/// Descriptor rows with dense class labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub rows: Vec<(DescriptorVector, usize)>,
    pub class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(rows: Vec<(DescriptorVector, usize)>, class_names: Vec<String>) -> Result<Self, AuxError> {
        if let Some((_, l)) = rows.iter().find(|(_, l)| *l >= class_names.len()) {
            return Err(AuxError::InsufficientData(format!("label {l} has no class name")));
        }
        if rows.iter().any(|(d, _)| d.values.len() != DESCRIPTOR_COUNT) {
            return Err(AuxError::SchemaMismatch {
                expected: format!("{DESCRIPTOR_COUNT} descriptors"),
                found: "rows of another width".into(),
            });
        }
        Ok(LabeledDataset { rows, class_names })
    }

    pub fn feature_count(&self) -> usize {
        DESCRIPTOR_COUNT
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for (_, l) in &self.rows {
            counts[*l] += 1;
        }
        counts
    }
}

/// Stratified k-fold cross-validated macro AUC of a forest trained on the
/// given features.
pub fn cross_validated_auc(
    data: &LabeledDataset,
    features: &[usize],
    n_trees: usize,
    folds: usize,
    seed: u64,
) -> Result<f64, AuxError> {
    select::check_cv_preconditions(data, folds)?;
    let labels: Vec<usize> = data.rows.iter().map(|(_, l)| *l).collect();
    let fold_of = stratified_folds(&labels, data.class_names.len(), folds, seed);
    let mut probabilities = vec![Vec::new(); data.rows.len()];
    for fold in 0..folds {
        let train = LabeledDataset {
            rows: (0..data.rows.len())
                .filter(|&i| fold_of[i] != fold)
                .map(|i| data.rows[i].clone())
                .collect(),
            class_names: data.class_names.clone(),
        };
        let model = train_random_forest(&train, features, n_trees, crate::seeding::derive_seed(seed, &[fold as u64]))?;
        for i in (0..data.rows.len()).filter(|&i| fold_of[i] == fold) {
            probabilities[i] = model.predict_proba(&data.rows[i].0)?;
        }
    }
    macro_auc(&probabilities, &labels, data.class_names.len())
}
