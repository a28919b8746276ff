use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Population standard deviation of each channel over time (divisor `t`).
pub fn extract_features(sample: ArrayView2<f64>) -> Result<Array1<f64>> {
    let t = sample.nrows();
    if t < 2 {
        return Err(Error::Validation(format!(
            "feature extraction needs at least 2 time steps, got {t}"
        )));
    }
    Ok(sample.std_axis(Axis(0), 0.0))
}

/// Per-feature `(x - mean) / std`, fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_standardizer(train: ArrayView2<f64>) -> Result<Standardizer> {
    if train.nrows() == 0 {
        return Err(Error::Validation("cannot fit a standardizer on zero rows".into()));
    }
    let mean = train.mean_axis(Axis(0)).expect("non-empty");
    let std = train.std_axis(Axis(0), 0.0);
    let degenerate: Vec<usize> = std
        .iter()
        .zip(&mean)
        .enumerate()
        .filter(|(_, (&s, &m))| !(s > 1e-12 * m.abs().max(1.0)))
        .map(|(i, _)| i)
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::Validation(format!(
            "zero-variance features at indices {degenerate:?}"
        )));
    }
    Ok(Standardizer {
        mean: mean.to_vec(),
        std: std.to_vec(),
    })
}

pub fn standardize(features: ArrayView2<f64>, std: &Standardizer) -> Result<Array2<f64>> {
    std.transform(features)
}

impl Standardizer {
    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(x)?;
        let mean = Array1::from(self.mean.clone());
        let std = Array1::from(self.std.clone());
        Ok((&x - &mean) / &std)
    }

    pub fn inverse_transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(x)?;
        let mean = Array1::from(self.mean.clone());
        let std = Array1::from(self.std.clone());
        Ok(&x * &std + &mean)
    }

    fn check(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.mean.len() {
            return Err(Error::Shape(format!(
                "{} features, standardizer fitted on {}",
                x.ncols(),
                self.mean.len()
            )));
        }
        Ok(())
    }
}
