//! Stochastic-target GAN: network builders, the interleaved
//! discriminator/generator training loop, plain-classifier baselines and
//! offline augmentation.

mod augment;
mod baseline;
mod builders;
mod config;
mod trainer;

pub use augment::augment_offline;
pub use baseline::{train_baseline, BaselineConfig, BaselineEpoch, BaselineOutcome};
pub use builders::{
    build_discriminator, build_generator, discriminator_spec, generate_samples, generator_spec, sample_class_indices,
    sample_noise, GenerationTarget, CLASS_HEAD, VALIDITY_HEAD,
};
pub use config::GanConfig;
pub use trainer::{
    train_discriminator_step, train_gan, train_generator_step, DiscriminatorLoss, EpochLosses, GanBundle,
    GeneratorLoss, StepRngs,
};
