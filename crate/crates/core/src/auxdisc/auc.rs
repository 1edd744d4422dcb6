use super::AuxError;

/// Area under the ROC curve in Mann–Whitney form: the probability that a
/// random positive outranks a random negative, ties counted as one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64, AuxError> {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(AuxError::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // midranks over tie groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if labels[k] {
                rank_sum_pos += mid;
            }
        }
        i = j + 1;
    }
    let p = positives as f64;
    let n = negatives as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Macro-averaged one-vs-rest AUC from per-class probability rows. Classes
/// absent from `labels` (or present in every row) are skipped.
pub fn macro_auc(probabilities: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Result<f64, AuxError> {
    let mut total = 0.0;
    let mut used = 0;
    for c in 0..n_classes {
        let scores: Vec<f64> = probabilities.iter().map(|p| p[c]).collect();
        let bin: Vec<bool> = labels.iter().map(|&l| l == c).collect();
        match auc(&scores, &bin) {
            Ok(v) => {
                total += v;
                used += 1;
            }
            Err(AuxError::DegenerateLabels) => {}
            Err(e) => return Err(e),
        }
        if n_classes == 2 {
            // both one-vs-rest curves coincide for two classes
            break;
        }
    }
    if used == 0 {
        return Err(AuxError::DegenerateLabels);
    }
    Ok(total / used as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force pair counting.
    fn pairwise(scores: &[f64], labels: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    den += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn fixtures() {
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 4], &[true, false, true, false]).unwrap(), 0.5);
        assert_eq!(auc(&[0.9, 0.4, 0.6, 0.1], &[true, true, false, false]).unwrap(), 0.75);
        assert_eq!(auc(&[0.1, 0.2], &[true, true]), Err(AuxError::DegenerateLabels));
    }

    #[test]
    fn matches_pair_counting_with_ties() {
        let scores = [0.1, 0.5, 0.5, 0.3, 0.9, 0.5, 0.1, 0.7];
        let labels = [false, true, false, true, true, false, true, false];
        let fast = auc(&scores, &labels).unwrap();
        assert!((fast - pairwise(&scores, &labels)).abs() < 1e-12);
    }

    #[test]
    fn flipped_labels_are_complementary() {
        let scores = [0.15, 0.52, 0.33, 0.91, 0.07, 0.64];
        let labels = [false, true, false, true, true, false];
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let sum = auc(&scores, &labels).unwrap() + auc(&scores, &flipped).unwrap();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}
