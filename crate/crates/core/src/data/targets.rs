use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TargetKind {
    OneHot,
    Stochastic(f64),
}

/// A length-`n_c` probability vector whose argmax is the encoded class.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetVector {
    pub values: Array1<f64>,
    pub kind: TargetKind,
}

impl TargetVector {
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

pub fn one_hot(class: usize, n_classes: usize) -> Result<TargetVector> {
    if class >= n_classes {
        return Err(Error::Validation(format!(
            "class index {class} out of range for {n_classes} classes"
        )));
    }
    let mut values = Array1::zeros(n_classes);
    values[class] = 1.0;
    Ok(TargetVector {
        values,
        kind: TargetKind::OneHot,
    })
}

/// `p'` on the encoded class, `(1 - p') / (n_c - 1)` everywhere else.
/// `p'` must lie in `(1 / n_c, 1]` so the encoded class stays the argmax.
pub fn stochastic_target(class: usize, n_classes: usize, p: f64) -> Result<TargetVector> {
    check_p(p, n_classes)?;
    if p == 1.0 {
        let mut t = one_hot(class, n_classes)?;
        t.kind = TargetKind::Stochastic(1.0);
        return Ok(t);
    }
    if class >= n_classes {
        return Err(Error::Validation(format!(
            "class index {class} out of range for {n_classes} classes"
        )));
    }
    let rest = (1.0 - p) / (n_classes - 1) as f64;
    let mut values = Array1::from_elem(n_classes, rest);
    values[class] = p;
    Ok(TargetVector {
        values,
        kind: TargetKind::Stochastic(p),
    })
}

fn check_p(p: f64, n_classes: usize) -> Result<()> {
    if n_classes == 0 {
        return Err(Error::Validation("need at least one class".into()));
    }
    if !(p > 1.0 / n_classes as f64 && p <= 1.0) {
        return Err(Error::Validation(format!(
            "p' = {p} outside (1/{n_classes}, 1]"
        )));
    }
    Ok(())
}

/// Stack stochastic targets row by row (`p = 1` gives one-hot rows).
pub fn target_matrix(labels: &[usize], p: &[f64], n_classes: usize) -> Result<Array2<f64>> {
    if labels.len() != p.len() {
        return Err(Error::Shape(format!(
            "{} labels but {} target confidences",
            labels.len(),
            p.len()
        )));
    }
    let mut out = Array2::zeros((labels.len(), n_classes));
    for (i, (&l, &p)) in labels.iter().zip(p).enumerate() {
        out.row_mut(i).assign(&stochastic_target(l, n_classes, p)?.values);
    }
    Ok(out)
}

/// Draw `n` target confidences from `U(low, high)`; `low == high` is a
/// constant.
pub fn sample_p_prime<R: Rng + ?Sized>(n: usize, low: f64, high: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(low <= high) {
        return Err(Error::Validation(format!("empty p' range ({low}, {high})")));
    }
    if low == high {
        return Ok(vec![low; n]);
    }
    let dist = Uniform::new_inclusive(low, high).map_err(|e| Error::Validation(e.to_string()))?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_hot_basics() {
        let t = one_hot(3, 8).unwrap();
        assert_eq!(t.values[3], 1.0);
        assert_eq!(t.values.sum(), 1.0);
        assert_eq!(t.argmax(), 3);
        assert!(one_hot(8, 8).is_err());
    }

    #[test]
    fn stochastic_spreads_remainder() {
        let t = stochastic_target(3, 8, 0.9).unwrap();
        assert_eq!(t.values[3], 0.9);
        for k in (0..8).filter(|&k| k != 3) {
            assert!((t.values[k] - 0.1 / 7.0).abs() < 1e-15);
            assert!((t.values[k] - 0.0142857).abs() < 1e-7);
        }
        assert_eq!(stochastic_target(2, 5, 1.0).unwrap().values, one_hot(2, 5).unwrap().values);
    }

    #[test]
    fn p_out_of_range() {
        assert!(stochastic_target(0, 4, 0.25).is_err());
        assert!(stochastic_target(0, 4, 1.01).is_err());
        assert!(stochastic_target(0, 4, 0.26).is_ok());
    }

    proptest! {
        #[test]
        fn sum_and_argmax_preserved(n_c in 2usize..30, class_seed in any::<usize>(), frac in 0.0001f64..=1.0) {
            let class = class_seed % n_c;
            let lo = 1.0 / n_c as f64;
            let p = lo + frac * (1.0 - lo);
            let t = stochastic_target(class, n_c, p).unwrap();
            prop_assert!((t.values.sum() - 1.0).abs() < 1e-9);
            prop_assert!(t.values.iter().all(|&v| v >= 0.0));
            prop_assert_eq!(t.argmax(), class);
        }
    }
}
