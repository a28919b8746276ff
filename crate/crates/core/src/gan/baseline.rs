use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::builders::{build_discriminator, CLASS_HEAD};
use crate::data::{sample_p_prime, target_matrix, FeatureSet, GENERATED};
use crate::nn::{categorical_cross_entropy, AdamConfig, AdamState, Mode, Network};
use crate::rng::{SeedStreams, DROPOUT, INIT, SHUFFLE, TARGETS};
use crate::{Error, Result};

/// Plain supervised training of the discriminator-shaped classifier with the
/// validity head switched off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub batch_size: usize,
    /// Stop after this many epochs without a lower validation loss.
    pub patience: usize,
    pub max_epochs: usize,
    /// `Some((low, high))` draws one `p'` per real row before training;
    /// `None` uses one-hot targets.
    pub stochastic_p_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            batch_size: 32,
            patience: 12,
            max_epochs: 500,
            stochastic_p_range: None,
            seed: 0,
        }
    }
}

impl BaselineConfig {
    pub fn one_hot(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn stochastic(seed: u64) -> Self {
        Self {
            stochastic_p_range: Some((0.8, 1.0)),
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineEpoch {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    /// Weights from the epoch with the lowest validation loss.
    pub network: Network,
    pub best_epoch: usize,
    pub history: Vec<BaselineEpoch>,
}

/// Train with categorical cross-entropy on the class head only. Starts from
/// `init` when given (e.g. a GAN discriminator), otherwise from the same
/// initial weights a GAN discriminator with this seed would get. Generated
/// rows keep their stored `p'`. Validation loss uses one-hot targets.
pub fn train_baseline(
    train: &FeatureSet,
    val: &FeatureSet,
    n_classes: usize,
    config: &BaselineConfig,
    init: Option<Network>,
) -> Result<BaselineOutcome> {
    if train.is_empty() {
        return Err(Error::Validation("baseline training set is empty".into()));
    }
    if val.is_empty() {
        return Err(Error::Validation("early stopping needs a non-empty validation set".into()));
    }
    if config.batch_size == 0 || config.patience == 0 || config.max_epochs == 0 {
        return Err(Error::Validation("batch size, patience and max epochs must be positive".into()));
    }
    let streams = SeedStreams::new(config.seed);
    let mut net = match init {
        Some(net) => {
            if net.input_widths() != [train.n_features()] || net.head_widths() != vec![1, n_classes] {
                return Err(Error::Shape("initial network does not match the data".into()));
            }
            net
        }
        None => build_discriminator(train.n_features(), n_classes, streams.derive_seed(INIT))?,
    };

    let mut p = vec![1.0; train.len()];
    if let Some((low, high)) = config.stochastic_p_range {
        if !(1.0 / (n_classes as f64) < low && low <= high && high <= 1.0) {
            return Err(Error::Validation(format!("invalid p' range ({low}, {high})")));
        }
        let drawn = sample_p_prime(train.len(), low, high, &mut streams.stream(TARGETS))?;
        for (i, d) in drawn.into_iter().enumerate() {
            p[i] = d;
        }
    }
    for (i, &src) in train.sources.iter().enumerate() {
        if src == GENERATED {
            p[i] = train.p_prime[i];
        }
    }
    let targets = target_matrix(&train.labels, &p, n_classes)?;
    let val_targets = target_matrix(&val.labels, &vec![1.0; val.len()], n_classes)?;

    let mut adam = AdamState::new(net.params(), AdamConfig::new(config.learning_rate, config.beta1))?;
    let mut shuffle = streams.stream(SHUFFLE);
    let mut layer_rng = streams.stream(DROPOUT);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::new();
    let (mut best_loss, mut best_epoch, mut best_net) = (f64::INFINITY, 0, net.clone());

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut shuffle);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let x = train.x.select(ndarray::Axis(0), chunk);
            let t = targets.select(ndarray::Axis(0), chunk);
            let (outs, cache) = net.forward(&[x.view()], Mode::Train, &mut layer_rng)?;
            let loss = categorical_cross_entropy(outs[CLASS_HEAD].view(), t.view())?;
            if !loss.scalar.is_finite() {
                return Err(Error::Numeric(format!("baseline loss diverged at epoch {epoch}")));
            }
            let validity_grad = Array2::zeros((chunk.len(), 1));
            let grads = net.backward(&cache, &[validity_grad.view(), loss.gradient.view()])?;
            net.update_running_stats(&cache)?;
            adam.step(net.params_mut(), &grads.params, 0.0)?;
            loss_sum += loss.scalar * chunk.len() as f64;
        }
        let val_out = net.predict(&[val.x.view()])?;
        let val_loss = categorical_cross_entropy(val_out[CLASS_HEAD].view(), val_targets.view())?.scalar;
        if !val_loss.is_finite() {
            return Err(Error::Numeric(format!("validation loss diverged at epoch {epoch}")));
        }
        history.push(BaselineEpoch {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            val_loss,
        });
        if val_loss < best_loss {
            best_loss = val_loss;
            best_epoch = epoch;
            best_net = net.clone();
        } else if epoch - best_epoch >= config.patience {
            break;
        }
    }
    Ok(BaselineOutcome {
        network: best_net,
        best_epoch,
        history,
    })
}
