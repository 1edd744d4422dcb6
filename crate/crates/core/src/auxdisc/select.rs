//! Univariate logistic-regression screening of descriptors by cross-validated AUC.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::auc::auc;
use super::{AuxError, LabeledDataset};

const ITERATIONS: usize = 200;
const LEARNING_RATE: f64 = 0.1;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Single-feature logistic regression on z-scored inputs, fitted by batch
/// gradient descent from zero. Returns (mean, std, weight, bias).
fn fit_univariate(x: &[f64], y: &[bool]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let z: Vec<f64> = x
        .iter()
        .map(|v| if std > 0.0 { (v - mean) / std } else { 0.0 })
        .collect();
    let (mut w, mut b) = (0.0, 0.0);
    for _ in 0..ITERATIONS {
        let (mut gw, mut gb) = (0.0, 0.0);
        for (zi, &yi) in z.iter().zip(y) {
            let err = sigmoid(w * zi + b) - if yi { 1.0 } else { 0.0 };
            gw += err * zi;
            gb += err;
        }
        w -= LEARNING_RATE * gw / n;
        b -= LEARNING_RATE * gb / n;
    }
    (mean, std, w, b)
}

/// Stratified fold assignment with seeded shuffling inside each class.
pub fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

pub(crate) fn check_cv_preconditions(data: &LabeledDataset, folds: usize) -> Result<(), AuxError> {
    let counts = data.class_counts();
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(AuxError::DegenerateLabels);
    }
    if folds < 2 || counts.iter().any(|&c| c > 0 && c < folds) {
        return Err(AuxError::InsufficientData(format!(
            "every class needs at least {folds} rows for {folds}-fold cross-validation"
        )));
    }
    Ok(())
}

/// Mean held-out AUC of a single-feature logistic model under k-fold CV.
/// With more than two classes the one-vs-rest AUCs are averaged.
pub fn feature_cv_auc(data: &LabeledDataset, feature: usize, fold_of: &[usize], folds: usize) -> f64 {
    let counts = data.class_counts();
    let present: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
    let positive_classes: &[usize] = if present.len() == 2 { &present[1..] } else { &present };
    let x: Vec<f64> = data.rows.iter().map(|(d, _)| d.values[feature]).collect();
    let mut total = 0.0;
    let mut used = 0;
    for &positive in positive_classes {
        let y: Vec<bool> = data.rows.iter().map(|(_, l)| *l == positive).collect();
        for fold in 0..folds {
            let (mut xt, mut yt, mut xh, mut yh) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for i in 0..x.len() {
                if fold_of[i] == fold {
                    xh.push(x[i]);
                    yh.push(y[i]);
                } else {
                    xt.push(x[i]);
                    yt.push(y[i]);
                }
            }
            let (mean, std, w, b) = fit_univariate(&xt, &yt);
            let scores: Vec<f64> = xh
                .iter()
                .map(|v| {
                    let z = if std > 0.0 { (v - mean) / std } else { 0.0 };
                    sigmoid(w * z + b)
                })
                .collect();
            if let Ok(a) = auc(&scores, &yh) {
                total += a;
                used += 1;
            }
        }
    }
    if used == 0 {
        0.5
    } else {
        total / used as f64
    }
}

/// Rank every descriptor by cross-validated univariate AUC and return the
/// top `k` indices, best first (ties broken by lower index).
pub fn select_features(data: &LabeledDataset, k: usize, folds: usize, seed: u64) -> Result<Vec<usize>, AuxError> {
    let width = data.feature_count();
    if k > width {
        return Err(AuxError::InsufficientData(format!("k={k} exceeds {width} descriptors")));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    check_cv_preconditions(data, folds)?;
    let labels: Vec<usize> = data.rows.iter().map(|(_, l)| *l).collect();
    let fold_of = stratified_folds(&labels, data.class_names.len(), folds, seed);
    let scored = rank_features(data, &fold_of, folds);
    Ok(scored.into_iter().take(k).map(|(f, _)| f).collect())
}

/// All features with their CV AUC, best first.
pub fn rank_features(data: &LabeledDataset, fold_of: &[usize], folds: usize) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = (0..data.feature_count())
        .map(|f| (f, feature_cv_auc(data, f, fold_of, folds)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored
}
