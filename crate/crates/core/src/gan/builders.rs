use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::target_matrix;
use crate::nn::{Activation, HeadSpec, LayerSpec, Mode, Network, NetworkSpec};
use crate::{Error, Result};

/// Index of the discriminator's sigmoid validity head.
pub const VALIDITY_HEAD: usize = 0;
/// Index of the discriminator's softmax class head.
pub const CLASS_HEAD: usize = 1;

const GENERATOR_WIDTH: usize = 256;
const GENERATOR_NOISE: f64 = 0.1;
const DISCRIMINATOR_WIDTH: usize = 300;
const DISCRIMINATOR_INPUT_NOISE: f64 = 0.4;
const DISCRIMINATOR_DROPOUT: f64 = 0.3;

/// Inputs `(z: l, t: n_c)`; two blocks of dense 256, Gaussian noise 0.1,
/// ReLU and batch norm; linear output of width `n_f`.
pub fn generator_spec(n_features: usize, n_classes: usize, latent_size: usize) -> NetworkSpec {
    let block = [
        LayerSpec::Dense { width: GENERATOR_WIDTH },
        LayerSpec::GaussianNoise { stddev: GENERATOR_NOISE },
        LayerSpec::Relu,
        LayerSpec::BatchNorm,
    ];
    NetworkSpec::new(
        vec![latent_size, n_classes],
        block.iter().chain(block.iter()).cloned().collect(),
        vec![HeadSpec {
            width: n_features,
            activation: Activation::Linear,
        }],
    )
}

/// Input noise 0.4, two dense 300 + ReLU layers, dropout 0.3, then a sigmoid
/// validity head and a softmax class head.
pub fn discriminator_spec(n_features: usize, n_classes: usize) -> NetworkSpec {
    NetworkSpec::new(
        vec![n_features],
        vec![
            LayerSpec::GaussianNoise { stddev: DISCRIMINATOR_INPUT_NOISE },
            LayerSpec::Dense { width: DISCRIMINATOR_WIDTH },
            LayerSpec::Relu,
            LayerSpec::Dense { width: DISCRIMINATOR_WIDTH },
            LayerSpec::Relu,
            LayerSpec::Dropout { rate: DISCRIMINATOR_DROPOUT },
        ],
        vec![
            HeadSpec {
                width: 1,
                activation: Activation::Sigmoid,
            },
            HeadSpec {
                width: n_classes,
                activation: Activation::Softmax,
            },
        ],
    )
}

pub fn build_generator(n_features: usize, n_classes: usize, latent_size: usize, seed: u64) -> Result<Network> {
    Network::init(generator_spec(n_features, n_classes, latent_size), seed)
}

pub fn build_discriminator(n_features: usize, n_classes: usize, seed: u64) -> Result<Network> {
    Network::init(discriminator_spec(n_features, n_classes), seed)
}

/// `n x l` matrix of i.i.d. standard normal draws.
pub fn sample_noise<R: Rng + ?Sized>(n: usize, latent_size: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, latent_size), || StandardNormal.sample(rng))
}

/// `n` class indices drawn uniformly from `0..n_classes`.
pub fn sample_class_indices<R: Rng + ?Sized>(n: usize, n_classes: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n_classes)).collect()
}

/// What the generator is asked to produce.
#[derive(Debug, Clone, PartialEq)]
pub enum GenerationTarget {
    /// One-hot target for a trained class.
    Class(usize),
    /// Arbitrary non-negative class-likelihood vector, e.g. a uniform mix
    /// that matches no trained class.
    Vector(Vec<f64>),
}

/// `n` generated rows in standardized feature space.
pub fn generate_samples<R: Rng + ?Sized>(
    generator: &Network,
    target: &GenerationTarget,
    n: usize,
    rng: &mut R,
    mode: Mode,
) -> Result<Array2<f64>> {
    let widths = generator.input_widths();
    if widths.len() != 2 {
        return Err(Error::Shape("generator must have (noise, target) inputs".into()));
    }
    let (latent, n_classes) = (widths[0], widths[1]);
    let n_features = generator.head_widths()[0];
    let row: Vec<f64> = match target {
        GenerationTarget::Class(c) => target_matrix(&[*c], &[1.0], n_classes)?.row(0).to_vec(),
        GenerationTarget::Vector(v) => {
            if v.len() != n_classes {
                return Err(Error::Shape(format!(
                    "target vector has {} entries, generator expects {n_classes}",
                    v.len()
                )));
            }
            if v.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
                return Err(Error::Validation("target entries must be finite and >= 0".into()));
            }
            v.clone()
        }
    };
    if n == 0 {
        return Ok(Array2::zeros((0, n_features)));
    }
    let z = sample_noise(n, latent, rng);
    let t = Array2::from_shape_fn((n, n_classes), |(_, c)| row[c]);
    let (mut out, _) = generator.forward(&[z.view(), t.view()], mode, rng)?;
    Ok(out.swap_remove(0))
}
