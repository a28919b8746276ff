use std::path::Path;

use ndarray::{concatenate, Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::builders::{build_discriminator, build_generator, sample_class_indices, sample_noise, CLASS_HEAD, VALIDITY_HEAD};
use super::config::GanConfig;
use crate::data::{sample_p_prime, target_matrix, FeatureSet};
use crate::nn::{binary_cross_entropy, categorical_cross_entropy, composite_loss, AdamState, Checkpoint, Mode, Network};
use crate::rng::{RunRng, SeedStreams, DROPOUT, INIT, NOISE, SHUFFLE};
use crate::{Error, Result};

/// Seed name of the generator's initial weights.
const INIT_GENERATOR: &str = "init.generator";

/// Random streams consumed by a training step.
#[derive(Debug, Clone)]
pub struct StepRngs {
    /// Latent noise, class indices and `p'` draws.
    pub noise: RunRng,
    /// Gaussian-noise and dropout layers.
    pub layers: RunRng,
}

impl StepRngs {
    pub fn new(streams: &SeedStreams) -> Self {
        Self {
            noise: streams.stream(NOISE),
            layers: streams.stream(DROPOUT),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorLoss {
    pub total: f64,
    pub validity: f64,
    pub class: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorLoss {
    pub total: f64,
    pub validity: f64,
    pub class: f64,
}

/// Batch-averaged losses of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLosses {
    pub epoch: usize,
    pub d_loss: f64,
    pub g_validity: f64,
    pub g_class: f64,
}

#[derive(Debug, Clone)]
pub struct GanBundle {
    pub generator: Network,
    pub discriminator: Network,
    pub adam_g: AdamState,
    pub adam_d: AdamState,
    pub n_classes: usize,
    pub loss_history: Vec<EpochLosses>,
}

impl GanBundle {
    /// Fresh networks for `n_features` inputs and `n_classes` trained classes.
    /// The discriminator uses the same initial weights as a plain classifier
    /// built from the same seed.
    pub fn new(n_features: usize, n_classes: usize, config: &GanConfig) -> Result<Self> {
        config.validate(n_classes)?;
        let streams = SeedStreams::new(config.seed);
        let generator = build_generator(
            n_features,
            n_classes,
            config.latent_size,
            streams.derive_seed(INIT_GENERATOR),
        )?;
        let discriminator = build_discriminator(n_features, n_classes, streams.derive_seed(INIT))?;
        Ok(Self {
            adam_g: AdamState::new(generator.params(), config.adam_g())?,
            adam_d: AdamState::new(discriminator.params(), config.adam_d())?,
            generator,
            discriminator,
            n_classes,
            loss_history: Vec::new(),
        })
    }

    pub fn latent_size(&self) -> usize {
        self.generator.input_widths()[0]
    }

    pub fn n_features(&self) -> usize {
        self.discriminator.input_widths()[0]
    }

    /// Write generator and discriminator checkpoints (with optimizer state).
    pub fn save(&self, dir: &Path, prefix: &str, seed: u64) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Checkpoint::capture(&self.generator, Some(&self.adam_g), seed)
            .save(dir.join(format!("{prefix}generator.json")))?;
        Checkpoint::capture(&self.discriminator, Some(&self.adam_d), seed)
            .save(dir.join(format!("{prefix}discriminator.json")))
    }
}

/// Generator inputs for `n` rows: latent noise plus stochastic targets for
/// uniformly drawn classes. Returns `(z, targets)`.
fn generator_inputs(n: usize, bundle: &GanBundle, config: &GanConfig, rng: &mut RunRng) -> Result<(Array2<f64>, Array2<f64>)> {
    let z = sample_noise(n, bundle.latent_size(), rng);
    let classes = sample_class_indices(n, bundle.n_classes, rng);
    let (low, high) = config.stochastic_p_range;
    let p = sample_p_prime(n, low, high, rng)?;
    Ok((z, target_matrix(&classes, &p, bundle.n_classes)?))
}

fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{what} produced a non-finite loss")))
    }
}

/// One discriminator update on `real` (exactly `b/2` rows) plus `b/2` fresh
/// generated rows. Only the discriminator's parameters change.
pub fn train_discriminator_step(
    bundle: &mut GanBundle,
    real: &FeatureSet,
    config: &GanConfig,
    rngs: &mut StepRngs,
) -> Result<DiscriminatorLoss> {
    let half = config.half_batch();
    if real.len() != half {
        return Err(Error::Shape(format!("expected {half} real rows, got {}", real.len())));
    }
    let n_c = bundle.n_classes;
    let real_p = if config.stochastic_real_targets {
        let (low, high) = config.stochastic_p_range;
        sample_p_prime(half, low, high, &mut rngs.noise)?
    } else {
        vec![1.0; half]
    };
    let real_t = target_matrix(&real.labels, &real_p, n_c)?;

    let (z, gen_t) = generator_inputs(half, bundle, config, &mut rngs.noise)?;
    let (gen_out, _) = bundle
        .generator
        .forward(&[z.view(), gen_t.view()], Mode::Train, &mut rngs.layers)?;

    let x = concatenate(Axis(0), &[real.x.view(), gen_out[0].view()]).map_err(|e| Error::Shape(e.to_string()))?;
    let targets = concatenate(Axis(0), &[real_t.view(), gen_t.view()]).map_err(|e| Error::Shape(e.to_string()))?;
    let mut validity = Array2::zeros((2 * half, 1));
    validity.slice_mut(ndarray::s![..half, ..]).fill(1.0);

    let d = &mut bundle.discriminator;
    let (outs, cache) = d.forward(&[x.view()], Mode::Train, &mut rngs.layers)?;
    let l_valid = binary_cross_entropy(outs[VALIDITY_HEAD].view(), validity.view())?;
    let l_class = categorical_cross_entropy(outs[CLASS_HEAD].view(), targets.view())?;
    let total = composite_loss(&l_valid, &l_class, config.d_validity_weight, config.d_class_weight)?;
    ensure_finite(&[total.scalar], "discriminator step")?;

    let head_grads: Vec<_> = total.head_grads.iter().map(|g| g.view()).collect();
    let grads = d.backward(&cache, &head_grads)?;
    d.update_running_stats(&cache)?;
    bundle.adam_d.step(d.params_mut(), &grads.params, config.weight_l2)?;
    Ok(DiscriminatorLoss {
        total: total.scalar,
        validity: l_valid.scalar,
        class: l_class.scalar,
    })
}

/// One generator update through the frozen discriminator: `b` generated rows
/// labelled valid with their generation targets as class targets.
pub fn train_generator_step(bundle: &mut GanBundle, config: &GanConfig, rngs: &mut StepRngs) -> Result<GeneratorLoss> {
    let b = config.batch_size;
    let (z, t) = generator_inputs(b, bundle, config, &mut rngs.noise)?;
    let (gen_out, g_cache) = bundle
        .generator
        .forward(&[z.view(), t.view()], Mode::Train, &mut rngs.layers)?;
    let (outs, d_cache) = bundle
        .discriminator
        .forward(&[gen_out[0].view()], Mode::Train, &mut rngs.layers)?;

    let valid = Array2::ones((b, 1));
    let l_valid = binary_cross_entropy(outs[VALIDITY_HEAD].view(), valid.view())?;
    let l_class = categorical_cross_entropy(outs[CLASS_HEAD].view(), t.view())?;
    let total = composite_loss(&l_valid, &l_class, config.g_validity_weight, config.g_class_weight)?;
    ensure_finite(&[total.scalar], "generator step")?;

    let head_grads: Vec<_> = total.head_grads.iter().map(|g| g.view()).collect();
    let d_grads = bundle.discriminator.backward(&d_cache, &head_grads)?;
    let g_grads = bundle.generator.backward(&g_cache, &[d_grads.inputs[0].view()])?;
    bundle.generator.update_running_stats(&g_cache)?;
    bundle
        .adam_g
        .step(bundle.generator.params_mut(), &g_grads.params, config.weight_l2)?;
    Ok(GeneratorLoss {
        total: total.scalar,
        validity: l_valid.scalar,
        class: l_class.scalar,
    })
}

/// Interleaved training over `train` for `config.epochs` epochs. Each epoch
/// shuffles the rows and walks them in `b/2` chunks (a trailing partial chunk
/// is dropped); each chunk drives one discriminator and one generator step.
/// With `checkpoint_dir` set, both networks are saved every
/// `config.checkpoint_every` epochs.
pub fn train_gan(
    train: &FeatureSet,
    n_classes: usize,
    config: &GanConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<GanBundle> {
    let mut bundle = GanBundle::new(train.n_features(), n_classes, config)?;
    if let Some(bad) = train.labels.iter().find(|&&c| c >= n_classes) {
        return Err(Error::Validation(format!("label {bad} outside {n_classes} trained classes")));
    }
    let half = config.half_batch();
    if train.len() < half {
        return Err(Error::Validation(format!(
            "{} training rows cannot fill a half batch of {half}",
            train.len()
        )));
    }
    let streams = SeedStreams::new(config.seed);
    let mut shuffle = streams.stream(SHUFFLE);
    let mut rngs = StepRngs::new(&streams);
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle);
        let (mut d_sum, mut gv_sum, mut gc_sum, mut steps) = (0.0, 0.0, 0.0, 0usize);
        for chunk in order.chunks_exact(half) {
            let batch = train.select(chunk);
            let d = train_discriminator_step(&mut bundle, &batch, config, &mut rngs)
                .map_err(|e| at_epoch(e, epoch))?;
            let g = train_generator_step(&mut bundle, config, &mut rngs).map_err(|e| at_epoch(e, epoch))?;
            d_sum += d.total;
            gv_sum += g.validity;
            gc_sum += g.class;
            steps += 1;
        }
        let k = steps as f64;
        bundle.loss_history.push(EpochLosses {
            epoch,
            d_loss: d_sum / k,
            g_validity: gv_sum / k,
            g_class: gc_sum / k,
        });
        if let Some(dir) = checkpoint_dir {
            if config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0 {
                bundle.save(dir, &format!("epoch_{epoch:04}_"), config.seed)?;
            }
        }
    }
    Ok(bundle)
}

fn at_epoch(err: Error, epoch: usize) -> Error {
    match err {
        Error::Numeric(msg) => Error::Numeric(format!("epoch {epoch}: {msg}")),
        other => other,
    }
}
