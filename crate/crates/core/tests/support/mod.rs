//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use stgan_nd::nn::{
    binary_cross_entropy, categorical_cross_entropy, Activation, HeadSpec, LayerSpec, Mode, Network, NetworkSpec,
};

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-4;
/// Floor of the relative-error denominator, so entries whose true gradient
/// is zero are judged on an absolute scale.
pub const FD_FLOOR: f64 = 1e-6;

/// Plain double loop over `Y` rows and `X` rows.
pub fn brute_distance(x: &Array2<f64>, y: &Array2<f64>, skip_diagonal: bool) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.nrows());
    for i in 0..y.nrows() {
        let mut total = 0.0;
        let mut count = 0usize;
        for j in 0..x.nrows() {
            if skip_diagonal && i == j {
                continue;
            }
            let mut ss = 0.0;
            for k in 0..x.ncols() {
                let d = x[[j, k]] - y[[i, k]];
                ss += d * d;
            }
            total += ss.sqrt();
            count += 1;
        }
        out.push(total / count as f64);
    }
    out
}

/// Mann-Whitney U over all (novel, trained) pairs, ties counting one half.
pub fn mann_whitney_auc(scores: &[f64], is_novel: &[bool]) -> f64 {
    let pos: Vec<f64> = scores.iter().zip(is_novel).filter(|(_, &n)| n).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(is_novel).filter(|(_, &n)| !n).map(|(s, _)| *s).collect();
    let mut u = 0.0;
    for &p in &pos {
        for &q in &neg {
            if p > q {
                u += 1.0;
            } else if p == q {
                u += 0.5;
            }
        }
    }
    u / (pos.len() * neg.len()) as f64
}

/// Population standard deviation by the two-pass formula.
pub fn two_pass_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
}

/// Random row-stochastic matrix.
pub fn random_probs<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let mut m = Array2::from_shape_simple_fn((rows, cols), || rng.random_range(0.0f64..1.0).powi(3) + 1e-9);
    for mut row in m.rows_mut() {
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    m
}

/// Which scalar loss the finite-difference check differentiates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheckLoss {
    /// Validity head through binary cross-entropy plus class head through
    /// categorical cross-entropy (weights 1.3 and 0.8).
    Composite,
    /// Random linear functional of a single linear head.
    Projection,
}

pub struct CheckCase {
    pub spec: NetworkSpec,
    pub inputs: Vec<Array2<f64>>,
    pub targets: Vec<Array2<f64>>,
    pub loss: CheckLoss,
    pub noise_seed: u64,
}

impl CheckCase {
    fn loss_and_grads(&self, net: &Network) -> (f64, Vec<Array2<f64>>, stgan_nd::nn::ForwardCache) {
        let views: Vec<ArrayView2<f64>> = self.inputs.iter().map(|a| a.view()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.noise_seed);
        let (outs, cache) = net.forward(&views, Mode::Train, &mut rng).unwrap();
        match self.loss {
            CheckLoss::Composite => {
                let l1 = binary_cross_entropy(outs[0].view(), self.targets[0].view()).unwrap();
                let l2 = categorical_cross_entropy(outs[1].view(), self.targets[1].view()).unwrap();
                let c = stgan_nd::nn::composite_loss(&l1, &l2, 1.3, 0.8).unwrap();
                (c.scalar, c.head_grads, cache)
            }
            CheckLoss::Projection => {
                let w = &self.targets[0];
                let n = outs[0].nrows() as f64;
                let value = (&outs[0] * w).sum() / n;
                (value, vec![w / n], cache)
            }
        }
    }

    fn value(&self, net: &Network) -> f64 {
        self.loss_and_grads(net).0
    }

    /// Largest relative error over every parameter and every input entry.
    pub fn max_relative_error(&self, seed: u64) -> f64 {
        let mut net = Network::init(self.spec.clone(), seed).unwrap();
        // non-trivial BN affine parameters and biases
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for v in net.params_mut().values_mut() {
            *v += rng.random_range(-0.3..0.3);
        }
        let (_, head_grads, cache) = self.loss_and_grads(&net);
        let views: Vec<ArrayView2<f64>> = head_grads.iter().map(|g| g.view()).collect();
        let grads = net.backward(&cache, &views).unwrap();

        let analytic: Vec<f64> = grads.params.values().copied().collect();
        let n_params = analytic.len();
        let mut worst = 0.0f64;
        for k in 0..n_params {
            let original = *net.params().values().nth(k).unwrap();
            *net.params_mut().values_mut().nth(k).unwrap() = original + FD_STEP;
            let up = self.value(&net);
            *net.params_mut().values_mut().nth(k).unwrap() = original - FD_STEP;
            let down = self.value(&net);
            *net.params_mut().values_mut().nth(k).unwrap() = original;
            let numeric = (up - down) / (2.0 * FD_STEP);
            worst = worst.max(relative_error(analytic[k], numeric));
        }
        let mut case = CheckCase {
            spec: self.spec.clone(),
            inputs: self.inputs.clone(),
            targets: self.targets.clone(),
            loss: self.loss,
            noise_seed: self.noise_seed,
        };
        for (i, g) in grads.inputs.iter().enumerate() {
            for ((r, c), &a) in g.indexed_iter() {
                let original = case.inputs[i][[r, c]];
                case.inputs[i][[r, c]] = original + FD_STEP;
                let up = case.value(&net);
                case.inputs[i][[r, c]] = original - FD_STEP;
                let down = case.value(&net);
                case.inputs[i][[r, c]] = original;
                worst = worst.max(relative_error(a, (up - down) / (2.0 * FD_STEP)));
            }
        }
        worst
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(FD_FLOOR)
}

/// Small random network `index`. Every layer kind appears across a run of
/// consecutive indices; half of them have two heads checked with the
/// composite loss, the rest one linear head.
pub fn random_case(index: usize) -> CheckCase {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + index as u64);
    let n_inputs = 1 + index % 2;
    let input_widths: Vec<usize> = (0..n_inputs).map(|_| rng.random_range(1..4)).collect();
    let kinds = [
        LayerSpec::Relu,
        LayerSpec::Sigmoid,
        LayerSpec::Softmax,
        LayerSpec::Linear,
        LayerSpec::GaussianNoise { stddev: 0.3 },
        LayerSpec::BatchNorm,
        LayerSpec::Dropout { rate: 0.25 },
    ];
    let mut layers = vec![LayerSpec::Dense { width: rng.random_range(2..5) }];
    layers.push(kinds[index % kinds.len()].clone());
    for _ in 0..rng.random_range(1..3) {
        layers.push(LayerSpec::Dense { width: rng.random_range(2..5) });
        layers.push(kinds[rng.random_range(0..kinds.len())].clone());
    }
    let batch = rng.random_range(3..6);
    let composite = index % 4 < 2;
    let n_classes = rng.random_range(2..5);
    let heads = if composite {
        vec![
            HeadSpec { width: 1, activation: Activation::Sigmoid },
            HeadSpec { width: n_classes, activation: Activation::Softmax },
        ]
    } else {
        vec![HeadSpec { width: 3, activation: Activation::Linear }]
    };
    let inputs = input_widths.iter().map(|&w| random_matrix(batch, w, &mut rng)).collect();
    let targets = if composite {
        let validity = Array2::from_shape_fn((batch, 1), |(i, _)| (i % 2) as f64);
        let classes: Vec<usize> = (0..batch).map(|_| rng.random_range(0..n_classes)).collect();
        let p: Vec<f64> = (0..batch).map(|_| rng.random_range(0.9..=1.0)).collect();
        vec![validity, stgan_nd::data::target_matrix(&classes, &p, n_classes).unwrap()]
    } else {
        vec![random_matrix(batch, 3, &mut rng)]
    };
    CheckCase {
        spec: NetworkSpec::new(input_widths, layers, heads),
        inputs,
        targets,
        loss: if composite { CheckLoss::Composite } else { CheckLoss::Projection },
        noise_seed: index as u64,
    }
}
