use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Samples with score >= threshold are flagged novel. The first point
    /// uses +inf (nothing flagged).
    pub threshold: f64,
}

/// `1 - max class probability` per row.
pub fn novelty_scores(class_probs: ArrayView2<f64>) -> Vec<f64> {
    class_probs
        .rows()
        .into_iter()
        .map(|r| 1.0 - r.fold(f64::NEG_INFINITY, |m, &v| m.max(v)))
        .collect()
}

/// ROC curve over every distinct score (ties grouped into one step) and
/// its trapezoidal area. Novel samples are the positives.
pub fn roc_auc(scores: &[f64], is_novel: &[bool]) -> Result<(Vec<RocPoint>, f64)> {
    if scores.len() != is_novel.len() {
        return Err(Error::Shape(format!(
            "{} scores for {} labels",
            scores.len(),
            is_novel.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("NaN novelty score".into()));
    }
    let positives = is_novel.iter().filter(|&&n| n).count();
    let negatives = is_novel.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Validation(
            "ROC needs both novel and trained samples".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if is_novel[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
            threshold: s,
        });
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum();
    Ok((points, auc))
}
