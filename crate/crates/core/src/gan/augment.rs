use ndarray::Array2;
use rand::Rng;

use super::builders::{sample_class_indices, sample_noise};
use crate::data::{sample_p_prime, target_matrix, FeatureSet, GENERATED};
use crate::nn::Network;
use crate::{Error, Result};

/// Append `round(fraction * n_train)` generated rows to `train`. Classes are
/// drawn uniformly and each row keeps the `p'` it was generated with.
pub fn augment_offline<R: Rng + ?Sized>(
    train: &FeatureSet,
    generator: &Network,
    n_classes: usize,
    fraction: f64,
    p_range: (f64, f64),
    rng: &mut R,
) -> Result<FeatureSet> {
    if !(fraction >= 0.0 && fraction.is_finite()) {
        return Err(Error::Validation(format!("augmentation fraction {fraction} must be >= 0")));
    }
    let widths = generator.input_widths();
    if widths.len() != 2 || widths[1] != n_classes || generator.head_widths() != vec![train.n_features()] {
        return Err(Error::Shape("generator does not match the training set".into()));
    }
    let m = (fraction * train.len() as f64).round() as usize;
    if m == 0 {
        return Ok(train.clone());
    }
    let z = sample_noise(m, widths[0], rng);
    let labels = sample_class_indices(m, n_classes, rng);
    let p = sample_p_prime(m, p_range.0, p_range.1, rng)?;
    let t = target_matrix(&labels, &p, n_classes)?;
    let x: Array2<f64> = generator.predict(&[z.view(), t.view()])?.swap_remove(0);
    let generated = FeatureSet {
        x,
        labels,
        sources: vec![GENERATED; m],
        p_prime: p,
    };
    train.append(&generated)
}
