use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use crate::{Error, Result};

/// Predictions are clamped away from 0 (and from 1 for the binary loss)
/// before taking logarithms.
pub const CLAMP_EPS: f64 = 1e-12;

/// A batch loss. `gradient` is d`scalar`/d`pred`, so it already carries the
/// `1 / batch` factor of the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub scalar: f64,
    pub per_sample: Array1<f64>,
    pub gradient: Array2<f64>,
}

/// Weighted sum of two head losses, with one gradient per head.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeLoss {
    pub scalar: f64,
    pub per_sample: Array1<f64>,
    pub head_grads: Vec<Array2<f64>>,
}

/// `-(s ln v + (1 - s) ln(1 - v))` per element, averaged over columns for
/// each sample (a single-column prediction is the usual case).
pub fn binary_cross_entropy(pred: ArrayView2<f64>, target: ArrayView2<f64>) -> Result<LossValue> {
    check_same_shape(&pred, &target)?;
    let (n, k) = pred.dim();
    if n == 0 || k == 0 {
        return Err(Error::Shape("empty prediction batch".into()));
    }
    let mut per_elem = Array2::zeros((n, k));
    let mut gradient = Array2::zeros((n, k));
    let scale = 1.0 / (n * k) as f64;
    Zip::from(&mut per_elem)
        .and(&mut gradient)
        .and(&pred)
        .and(&target)
        .for_each(|l, g, &v, &s| {
            let v = v.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
            *l = -(s * v.ln() + (1.0 - s) * (1.0 - v).ln());
            *g = scale * (-(s / v) + (1.0 - s) / (1.0 - v));
        });
    let per_sample = per_elem.mean_axis(Axis(1)).expect("k > 0");
    Ok(LossValue {
        scalar: per_sample.mean().expect("n > 0"),
        per_sample,
        gradient,
    })
}

/// `-sum_c t_c ln y_c` per row. Target rows must sum to one, which admits
/// stochastic (non one-hot) targets.
pub fn categorical_cross_entropy(pred: ArrayView2<f64>, target: ArrayView2<f64>) -> Result<LossValue> {
    check_same_shape(&pred, &target)?;
    let n = pred.nrows();
    if n == 0 || pred.ncols() == 0 {
        return Err(Error::Shape("empty prediction batch".into()));
    }
    for (i, row) in target.rows().into_iter().enumerate() {
        let sum = row.sum();
        if (sum - 1.0).abs() > 1e-6 || row.iter().any(|&t| t < 0.0) {
            return Err(Error::Validation(format!(
                "target row {i} is not a probability vector (sum {sum})"
            )));
        }
    }
    let scale = 1.0 / n as f64;
    let mut per_sample = Array1::zeros(n);
    let mut gradient = Array2::zeros(pred.raw_dim());
    for i in 0..n {
        let mut loss = 0.0;
        for c in 0..pred.ncols() {
            let y = pred[[i, c]].clamp(CLAMP_EPS, 1.0);
            let t = target[[i, c]];
            loss -= t * y.ln();
            gradient[[i, c]] = -scale * t / y;
        }
        per_sample[i] = loss;
    }
    Ok(LossValue {
        scalar: per_sample.mean().expect("n > 0"),
        per_sample,
        gradient,
    })
}

pub fn composite_loss(l1: &LossValue, l2: &LossValue, w1: f64, w2: f64) -> Result<CompositeLoss> {
    if l1.per_sample.len() != l2.per_sample.len() {
        return Err(Error::Shape(format!(
            "batch sizes differ: {} vs {}",
            l1.per_sample.len(),
            l2.per_sample.len()
        )));
    }
    Ok(CompositeLoss {
        scalar: w1 * l1.scalar + w2 * l2.scalar,
        per_sample: &l1.per_sample * w1 + &l2.per_sample * w2,
        head_grads: vec![&l1.gradient * w1, &l2.gradient * w2],
    })
}

fn check_same_shape(pred: &ArrayView2<f64>, target: &ArrayView2<f64>) -> Result<()> {
    if pred.dim() != target.dim() {
        return Err(Error::Shape(format!(
            "prediction {:?} vs target {:?}",
            pred.dim(),
            target.dim()
        )));
    }
    Ok(())
}
