use serde::{Deserialize, Serialize};

use crate::nn::AdamConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanConfig {
    pub epochs: usize,
    /// Full batch `b`; each discriminator step sees `b/2` real and `b/2`
    /// generated rows.
    pub batch_size: usize,
    pub latent_size: usize,
    pub lr_d: f64,
    pub lr_g: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub decay_d: f64,
    pub decay_g: f64,
    /// Optional L2 term added to every gradient before the Adam update.
    pub weight_l2: f64,
    pub g_validity_weight: f64,
    pub g_class_weight: f64,
    pub d_validity_weight: f64,
    pub d_class_weight: f64,
    /// `p'` is drawn from `U(low, high)` for every stochastic target.
    pub stochastic_p_range: (f64, f64),
    /// Use stochastic targets for real rows in the discriminator stage too
    /// (one-hot otherwise).
    pub stochastic_real_targets: bool,
    /// Write checkpoints every this many epochs; 0 disables them.
    pub checkpoint_every: usize,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self::dual_myo()
    }
}

impl GanConfig {
    /// Settings used for the 16-channel EMG feature set.
    pub fn dual_myo() -> Self {
        Self {
            epochs: 300,
            batch_size: 32,
            latent_size: 8,
            lr_d: 0.0002,
            lr_g: 0.001,
            adam_beta1: 0.5,
            adam_beta2: 0.999,
            decay_d: 1e-7,
            decay_g: 1e-6,
            weight_l2: 0.0,
            g_validity_weight: 1.3,
            g_class_weight: 0.8,
            d_validity_weight: 1.0,
            d_class_weight: 1.0,
            stochastic_p_range: (0.9, 1.0),
            stochastic_real_targets: true,
            checkpoint_every: 50,
            seed: 0,
        }
    }

    /// Settings used for the 24-class data-glove set.
    pub fn uc2017() -> Self {
        Self {
            epochs: 600,
            latent_size: 23,
            lr_d: 0.001,
            g_validity_weight: 1.1,
            g_class_weight: 1.0,
            ..Self::dual_myo()
        }
    }

    pub fn half_batch(&self) -> usize {
        self.batch_size / 2
    }

    pub fn adam_d(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.lr_d,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: 1e-7,
            decay: self.decay_d,
        }
    }

    pub fn adam_g(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.lr_g,
            decay: self.decay_g,
            ..self.adam_d()
        }
    }

    pub fn validate(&self, n_classes: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        if self.batch_size < 2 || self.batch_size % 2 != 0 {
            return fail(format!("batch size {} must be even and >= 2", self.batch_size));
        }
        if self.latent_size == 0 {
            return fail("latent size must be positive".into());
        }
        if self.epochs == 0 {
            return fail("epochs must be positive".into());
        }
        for (name, v) in [("lr_d", self.lr_d), ("lr_g", self.lr_g)] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be > 0"));
            }
        }
        for (name, v) in [
            ("decay_d", self.decay_d),
            ("decay_g", self.decay_g),
            ("weight_l2", self.weight_l2),
            ("g_validity_weight", self.g_validity_weight),
            ("g_class_weight", self.g_class_weight),
            ("d_validity_weight", self.d_validity_weight),
            ("d_class_weight", self.d_class_weight),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(format!("{name} must be >= 0"));
            }
        }
        if n_classes == 0 {
            return fail("at least one trained class is required".into());
        }
        let (low, high) = self.stochastic_p_range;
        if !(1.0 / (n_classes as f64) < low && low <= high && high <= 1.0) {
            return fail(format!(
                "stochastic p' range ({low}, {high}) must satisfy 1/{n_classes} < low <= high <= 1"
            ));
        }
        self.adam_d().validate()?;
        self.adam_g().validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let d = GanConfig::dual_myo();
        assert_eq!((d.epochs, d.batch_size, d.latent_size), (300, 32, 8));
        assert_eq!((d.lr_g, d.lr_d), (0.001, 0.0002));
        assert_eq!((d.g_validity_weight, d.g_class_weight), (1.3, 0.8));
        assert_eq!((d.decay_d, d.decay_g), (1e-7, 1e-6));
        let u = GanConfig::uc2017();
        assert_eq!((u.epochs, u.latent_size), (600, 23));
        assert_eq!((u.g_validity_weight, u.g_class_weight), (1.1, 1.0));
        assert_eq!(u.lr_d, 0.001);
        assert!(d.validate(7).is_ok() && u.validate(19).is_ok());
    }

    #[test]
    fn rejects_odd_batch_and_bad_range() {
        let odd = GanConfig { batch_size: 31, ..GanConfig::default() };
        assert!(odd.validate(7).is_err());
        let low = GanConfig { stochastic_p_range: (0.1, 1.0), ..GanConfig::default() };
        assert!(low.validate(7).is_err());
        let inverted = GanConfig { stochastic_p_range: (0.95, 0.9), ..GanConfig::default() };
        assert!(inverted.validate(7).is_err());
        let zero_lr = GanConfig { lr_g: 0.0, ..GanConfig::default() };
        assert!(zero_lr.validate(7).is_err());
    }
}
