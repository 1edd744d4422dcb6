//! CART trees with Gini impurity, bagged into a random forest.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rules::StructuralRules;
use super::{AuxError, LabeledDataset};
use crate::descriptors::{DescriptorVector, DESCRIPTOR_COUNT, SCHEMA_VERSION};
use crate::seeding::derive_seed;

pub const DEFAULT_TREES: usize = 100;
const MIN_SAMPLES_LEAF: usize = 2;
const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        probabilities: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf_for(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { probabilities } => return probabilities,
            }
        }
    }

    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }
}

/// Frozen random-forest classifier over a descriptor subset, together with
/// the per-class structural rules used when it serves as a reward model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub schema_version: String,
    pub class_names: Vec<String>,
    pub features: Vec<usize>,
    pub n_trees: usize,
    pub trees: Vec<DecisionTree>,
    pub rules: Vec<StructuralRules>,
    #[serde(default)]
    pub config_hash: String,
    #[serde(default)]
    pub cv_auc: Option<f64>,
}

impl RandomForestModel {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Mean of the leaf probability vectors reached in every tree.
    pub fn predict_proba(&self, x: &DescriptorVector) -> Result<Vec<f64>, AuxError> {
        if self.schema_version != SCHEMA_VERSION || x.values.len() != DESCRIPTOR_COUNT {
            return Err(AuxError::SchemaMismatch {
                expected: self.schema_version.clone(),
                found: SCHEMA_VERSION.to_string(),
            });
        }
        Ok(self.predict_raw(&x.values))
    }

    pub(crate) fn predict_raw(&self, x: &[f64]) -> Vec<f64> {
        // running mean: exact when every tree agrees
        let mut out = vec![0.0; self.n_classes()];
        for (k, tree) in self.trees.iter().enumerate() {
            let k = (k + 1) as f64;
            for (o, p) in out.iter_mut().zip(tree.leaf_for(x)) {
                *o += (p - *o) / k;
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<RandomForestModel, AuxError> {
        serde_json::from_str(text).map_err(|e| AuxError::Format(e.to_string()))
    }
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    features: &'a [usize],
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn leaf(&self, samples: &[usize]) -> Node {
        let mut counts = vec![0.0; self.n_classes];
        for &s in samples {
            counts[self.y[s]] += 1.0;
        }
        let n = samples.len() as f64;
        Node::Leaf {
            probabilities: counts.into_iter().map(|c| c / n).collect(),
        }
    }

    /// Best (feature, threshold, weighted child impurity) over a feature.
    fn best_split_on(&self, samples: &[usize], feature: usize) -> Option<(f64, f64)> {
        let mut sorted: Vec<usize> = samples.to_vec();
        sorted.sort_by(|&a, &b| self.x[a][feature].total_cmp(&self.x[b][feature]));
        let total = sorted.len();
        let mut left = vec![0usize; self.n_classes];
        let mut right = vec![0usize; self.n_classes];
        for &s in &sorted {
            right[self.y[s]] += 1;
        }
        let mut best: Option<(f64, f64)> = None;
        for k in 0..total - 1 {
            let c = self.y[sorted[k]];
            left[c] += 1;
            right[c] -= 1;
            let (lo, hi) = (self.x[sorted[k]][feature], self.x[sorted[k + 1]][feature]);
            let n_left = k + 1;
            if lo == hi || n_left < MIN_SAMPLES_LEAF || total - n_left < MIN_SAMPLES_LEAF {
                continue;
            }
            let score = (n_left as f64 * gini(&left, n_left)
                + (total - n_left) as f64 * gini(&right, total - n_left))
                / total as f64;
            if best.is_none_or(|(s, _)| score < s) {
                best = Some((score, lo + (hi - lo) / 2.0));
            }
        }
        best
    }

    fn build(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            probabilities: Vec::new(),
        });
        let mut counts = vec![0usize; self.n_classes];
        for &s in &samples {
            counts[self.y[s]] += 1;
        }
        let impurity = gini(&counts, samples.len());
        if impurity == 0.0 || samples.len() < 2 * MIN_SAMPLES_LEAF || depth >= MAX_DEPTH {
            self.nodes[id] = self.leaf(&samples);
            return id;
        }
        let mut order = self.features.to_vec();
        order.shuffle(&mut self.rng);
        let mut best: Option<(f64, usize, f64)> = None;
        for (k, &f) in order.iter().enumerate() {
            // keep looking past mtry only while no valid split has been found
            if k >= self.mtry && best.is_some() {
                break;
            }
            if let Some((score, threshold)) = self.best_split_on(&samples, f) {
                if best.is_none_or(|(s, _, _)| score < s) {
                    best = Some((score, f, threshold));
                }
            }
        }
        match best {
            Some((score, feature, threshold)) if score < impurity - 1e-12 => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    samples.iter().partition(|&&s| self.x[s][feature] <= threshold);
                let left = self.build(l, depth + 1);
                let right = self.build(r, depth + 1);
                self.nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
            _ => self.nodes[id] = self.leaf(&samples),
        }
        id
    }
}

pub(crate) fn fit_forest(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    features: &[usize],
    n_trees: usize,
    seed: u64,
) -> Vec<DecisionTree> {
    let mtry = (features.len() as f64).sqrt().ceil() as usize;
    (0..n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[t as u64]));
            let bootstrap: Vec<usize> = (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect();
            let mut builder = TreeBuilder {
                x,
                y,
                n_classes,
                features,
                mtry,
                rng,
                nodes: Vec::new(),
            };
            builder.build(bootstrap, 0);
            DecisionTree { nodes: builder.nodes }
        })
        .collect()
}

/// Train a forest of `n_trees` bootstrap CART trees restricted to `features`.
pub fn train_random_forest(
    data: &LabeledDataset,
    features: &[usize],
    n_trees: usize,
    seed: u64,
) -> Result<RandomForestModel, AuxError> {
    if data.rows.is_empty() {
        return Err(AuxError::InsufficientData("empty dataset".into()));
    }
    if n_trees == 0 || features.is_empty() {
        return Err(AuxError::InsufficientData(
            "a forest needs at least one tree and one feature".into(),
        ));
    }
    if let Some(&f) = features.iter().find(|&&f| f >= data.feature_count()) {
        return Err(AuxError::InsufficientData(format!("feature index {f} out of range")));
    }
    let x: Vec<Vec<f64>> = data.rows.iter().map(|(d, _)| d.values.clone()).collect();
    let y: Vec<usize> = data.rows.iter().map(|(_, l)| *l).collect();
    let n_classes = data.class_names.len();
    Ok(RandomForestModel {
        schema_version: SCHEMA_VERSION.to_string(),
        class_names: data.class_names.clone(),
        features: features.to_vec(),
        n_trees,
        trees: fit_forest(&x, &y, n_classes, features, n_trees, seed),
        rules: vec![StructuralRules::default(); n_classes],
        config_hash: String::new(),
        cv_auc: None,
    })
}
