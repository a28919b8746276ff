use serde::{Deserialize, Serialize};

use super::network::Params;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Learning-rate decay per update: `lr / (1 + decay * step_count)`.
    pub decay: f64,
}

impl AdamConfig {
    pub fn new(learning_rate: f64, beta1: f64) -> Self {
        Self {
            learning_rate,
            beta1,
            beta2: 0.999,
            epsilon: 1e-7,
            decay: 0.0,
        }
    }

    pub fn with_decay(mut self, decay: f64) -> Self {
        self.decay = decay;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.beta1 > 0.0
            && self.beta1 < 1.0
            && self.beta2 > 0.0
            && self.beta2 < 1.0
            && self.epsilon > 0.0
            && self.decay >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid Adam settings {self:?}")))
        }
    }
}

/// Adam with bias correction and per-update learning-rate decay.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step_count: u64,
    pub first_moment: Params,
    pub second_moment: Params,
}

impl AdamState {
    pub fn new(params: &Params, config: AdamConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            step_count: 0,
            first_moment: params.zeros_like(),
            second_moment: params.zeros_like(),
        })
    }

    /// Learning rate applied by the next update, before bias correction.
    pub fn effective_lr(&self) -> f64 {
        self.config.learning_rate / (1.0 + self.config.decay * self.step_count as f64)
    }

    /// One update. `weight_l2` adds `weight_l2 * w` to each gradient first.
    /// On a non-finite gradient nothing is modified.
    pub fn step(&mut self, params: &mut Params, grads: &Params, weight_l2: f64) -> Result<()> {
        if !params.same_shape(grads) || !params.same_shape(&self.first_moment) {
            return Err(Error::Shape(
                "gradients, parameters and optimizer state differ in shape".into(),
            ));
        }
        if !grads.all_finite() {
            return Err(Error::Numeric("non-finite gradient passed to Adam".into()));
        }
        if weight_l2 < 0.0 {
            return Err(Error::Validation("weight_l2 must be non-negative".into()));
        }
        let AdamConfig {
            beta1,
            beta2,
            epsilon,
            ..
        } = self.config;
        let lr = self.effective_lr();
        let t = (self.step_count + 1) as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        for (((w, &g), m), v) in params
            .values_mut()
            .zip(grads.values())
            .zip(self.first_moment.values_mut())
            .zip(self.second_moment.values_mut())
        {
            let g = g + weight_l2 * *w;
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *w -= lr * m_hat / (v_hat.sqrt() + epsilon);
        }
        self.step_count += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::network::ParamBlock;
    use ndarray::{array, Array1};

    fn scalar(w: f64) -> Params {
        Params {
            blocks: vec![ParamBlock {
                weight: array![[w]],
                bias: Array1::zeros(0),
            }],
        }
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = scalar(0.0);
        let mut adam = AdamState::new(&p, AdamConfig::new(0.001, 0.5)).unwrap();
        adam.step(&mut p, &scalar(1.0), 0.0).unwrap();
        let w = p.blocks[0].weight[[0, 0]];
        // m_hat = v_hat = 1 after bias correction
        let expected = -0.001 / (1.0 + 1e-7);
        assert!((w - expected).abs() < 1e-15, "{w}");
        assert_eq!(adam.step_count, 1);
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let mut p = scalar(0.7);
        let mut adam = AdamState::new(&p, AdamConfig::new(0.01, 0.9)).unwrap();
        for _ in 0..5 {
            adam.step(&mut p, &scalar(0.0), 0.0).unwrap();
        }
        assert_eq!(p.blocks[0].weight[[0, 0]], 0.7);
    }

    #[test]
    fn decay_halves_lr_after_million_steps() {
        let p = scalar(0.0);
        let mut adam = AdamState::new(&p, AdamConfig::new(0.002, 0.5).with_decay(1e-6)).unwrap();
        adam.step_count = 1_000_000;
        assert!((adam.effective_lr() - 0.001).abs() < 1e-15);
    }

    #[test]
    fn nan_gradient_leaves_state_untouched() {
        let mut p = scalar(0.3);
        let mut adam = AdamState::new(&p, AdamConfig::new(0.01, 0.5)).unwrap();
        adam.step(&mut p, &scalar(0.2), 0.0).unwrap();
        let (p_before, adam_before) = (p.clone(), adam.clone());
        let err = adam.step(&mut p, &scalar(f64::NAN), 0.0);
        assert!(matches!(err, Err(Error::Numeric(_))));
        assert_eq!(p, p_before);
        assert_eq!(adam, adam_before);
    }

    #[test]
    fn l2_term_pulls_towards_zero() {
        let mut p = scalar(2.0);
        let mut adam = AdamState::new(&p, AdamConfig::new(0.1, 0.5)).unwrap();
        adam.step(&mut p, &scalar(0.0), 0.5).unwrap();
        assert!(p.blocks[0].weight[[0, 0]] < 2.0);
    }
}
