use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::roc::RocPoint;
use crate::{Error, Result};

/// Number of grid intervals on `[0, 1]` searched by [`tune_threshold`].
pub const TAU_STEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Class(usize),
    Others,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    Trained(usize),
    Novel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub predicted: Prediction,
    /// Maximum class probability.
    pub score: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub correct_trained: usize,
    pub wrong_trained: usize,
    pub trained_as_others: usize,
    pub novel_as_others: usize,
    pub novel_as_class: usize,
}

impl Confusion {
    pub fn n_trained(&self) -> usize {
        self.correct_trained + self.wrong_trained + self.trained_as_others
    }

    pub fn n_novel(&self) -> usize {
        self.novel_as_others + self.novel_as_class
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tau: f64,
    /// Trained samples assigned their own class.
    pub gca: f64,
    /// Novel samples assigned to "others".
    pub nda: f64,
    /// `(gca + nda) / 2`.
    pub mean_balanced: f64,
    /// Correct decisions over all evaluated samples.
    pub mean_weighted: f64,
    pub confusion: Confusion,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roc_points: Vec<RocPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
}

/// The argmax class when its probability reaches `tau`, otherwise Others.
/// Ties go to the lowest class index.
pub fn classify_with_threshold(class_probs: ArrayView2<f64>, tau: f64) -> Result<Vec<Decision>> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Validation(format!("threshold {tau} outside [0, 1]")));
    }
    Ok(class_probs
        .rows()
        .into_iter()
        .map(|row| {
            let (class, score) = argmax(row.iter().copied());
            Decision {
                predicted: if score >= tau {
                    Prediction::Class(class)
                } else {
                    Prediction::Others
                },
                score,
                tau,
            }
        })
        .collect())
}

fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

pub fn compute_gca_nda(decisions: &[Decision], truths: &[Truth]) -> Result<EvalReport> {
    if decisions.len() != truths.len() {
        return Err(Error::Shape(format!(
            "{} decisions for {} ground-truth labels",
            decisions.len(),
            truths.len()
        )));
    }
    let mut c = Confusion::default();
    for (d, t) in decisions.iter().zip(truths) {
        match (t, d.predicted) {
            (Truth::Trained(k), Prediction::Class(p)) if *k == p => c.correct_trained += 1,
            (Truth::Trained(_), Prediction::Class(_)) => c.wrong_trained += 1,
            (Truth::Trained(_), Prediction::Others) => c.trained_as_others += 1,
            (Truth::Novel, Prediction::Others) => c.novel_as_others += 1,
            (Truth::Novel, Prediction::Class(_)) => c.novel_as_class += 1,
        }
    }
    report_from(c, decisions.first().map_or(0.0, |d| d.tau))
}

fn report_from(c: Confusion, tau: f64) -> Result<EvalReport> {
    let (n_trained, n_novel) = (c.n_trained(), c.n_novel());
    if n_trained == 0 {
        return Err(Error::Validation("no trained-class samples to score".into()));
    }
    if n_novel == 0 {
        return Err(Error::Validation(
            "no novel samples; NDA is undefined".into(),
        ));
    }
    let gca = c.correct_trained as f64 / n_trained as f64;
    let nda = c.novel_as_others as f64 / n_novel as f64;
    Ok(EvalReport {
        tau,
        gca,
        nda,
        mean_balanced: (gca + nda) / 2.0,
        mean_weighted: (c.correct_trained + c.novel_as_others) as f64 / (n_trained + n_novel) as f64,
        confusion: c,
        roc_points: Vec::new(),
        auc: None,
    })
}

pub fn evaluate_at(class_probs: ArrayView2<f64>, truths: &[Truth], tau: f64) -> Result<EvalReport> {
    compute_gca_nda(&classify_with_threshold(class_probs, tau)?, truths)
}

/// `{0, 0.001, ..., 1}`.
pub fn tau_grid() -> impl Iterator<Item = f64> {
    (0..=TAU_STEPS).map(|i| i as f64 / TAU_STEPS as f64)
}

/// Among grid thresholds with GCA >= `target_gca`, the one with the highest
/// NDA (then highest GCA, then lowest tau). When no threshold reaches the
/// target, the one whose GCA is closest to it.
pub fn tune_threshold(class_probs: ArrayView2<f64>, truths: &[Truth], target_gca: f64) -> Result<(f64, EvalReport)> {
    if class_probs.nrows() != truths.len() {
        return Err(Error::Shape(format!(
            "{} probability rows for {} ground-truth labels",
            class_probs.nrows(),
            truths.len()
        )));
    }
    if !truths.iter().any(|t| *t == Truth::Novel) {
        return Err(Error::Validation(
            "threshold tuning needs novel samples; NDA is undefined".into(),
        ));
    }
    let scored: Vec<(f64, bool, Truth)> = class_probs
        .rows()
        .into_iter()
        .zip(truths)
        .map(|(row, &t)| {
            let (class, score) = argmax(row.iter().copied());
            (score, matches!(t, Truth::Trained(k) if k == class), t)
        })
        .collect();

    let mut best: Option<EvalReport> = None;
    let mut closest: Option<EvalReport> = None;
    for tau in tau_grid() {
        let mut c = Confusion::default();
        for &(score, correct, truth) in &scored {
            let kept = score >= tau;
            match (truth, kept, correct) {
                (Truth::Trained(_), true, true) => c.correct_trained += 1,
                (Truth::Trained(_), true, false) => c.wrong_trained += 1,
                (Truth::Trained(_), false, _) => c.trained_as_others += 1,
                (Truth::Novel, false, _) => c.novel_as_others += 1,
                (Truth::Novel, true, _) => c.novel_as_class += 1,
            }
        }
        let r = report_from(c, tau)?;
        if r.gca >= target_gca {
            let better = best
                .as_ref()
                .is_none_or(|b| r.nda > b.nda || (r.nda == b.nda && r.gca > b.gca));
            if better {
                best = Some(r.clone());
            }
        }
        let nearer = closest
            .as_ref()
            .is_none_or(|b| (r.gca - target_gca).abs() < (b.gca - target_gca).abs());
        if nearer {
            closest = Some(r);
        }
    }
    let chosen = best.or(closest).expect("grid is non-empty");
    Ok((chosen.tau, chosen))
}
