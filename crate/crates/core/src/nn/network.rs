use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::spec::{Activation, LayerSpec, NetworkSpec};
use crate::rng::rng_for;
use crate::{Error, Result};

/// Running-statistics momentum for batch normalization.
pub const BN_MOMENTUM: f64 = 0.99;
/// Variance epsilon for batch normalization.
pub const BN_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Train,
    Infer,
}

/// Weight matrix `(in, out)` plus bias `(out)`. Batch-norm layers store
/// their scale as a `(1, width)` weight and their shift as the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlock {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl ParamBlock {
    fn zeros_like(&self) -> Self {
        Self {
            weight: Array2::zeros(self.weight.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weight.iter().chain(self.bias.iter())
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weight.iter_mut().chain(self.bias.iter_mut())
    }
}

/// All trainable parameters of a network, in layer order (trunk first,
/// then heads). Gradients and optimizer moments use the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub blocks: Vec<ParamBlock>,
}

impl Params {
    pub fn zeros_like(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(ParamBlock::zeros_like).collect(),
        }
    }

    /// Total number of scalar parameters.
    pub fn len(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| b.weight.len() + b.bias.len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.blocks.iter().flat_map(ParamBlock::values)
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.blocks.iter_mut().flat_map(ParamBlock::values_mut)
    }

    pub fn same_shape(&self, other: &Params) -> bool {
        self.blocks.len() == other.blocks.len()
            && self.blocks.iter().zip(&other.blocks).all(|(a, b)| {
                a.weight.dim() == b.weight.dim() && a.bias.len() == b.bias.len()
            })
    }

    pub fn all_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    /// `self += other`, element-wise.
    pub fn accumulate(&mut self, other: &Params) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.weight += &b.weight;
            a.bias += &b.bias;
        }
    }
}

/// Batch-norm running mean and (biased) variance.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    pub mean: Array1<f64>,
    pub var: Array1<f64>,
}

#[derive(Debug, Clone)]
enum Aux {
    None,
    Dropout { mask: Array2<f64> },
    BatchNorm {
        xhat: Array2<f64>,
        inv_std: Array1<f64>,
        batch_mean: Array1<f64>,
        batch_var: Array1<f64>,
    },
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    mode: Mode,
    layer_count: usize,
    head_count: usize,
    /// `acts[0]` is the concatenated input, `acts[i + 1]` the output of layer `i`.
    acts: Vec<Array2<f64>>,
    aux: Vec<Aux>,
    head_outputs: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn batch_size(&self) -> usize {
        self.acts[0].nrows()
    }

    pub fn head_outputs(&self) -> &[Array2<f64>] {
        &self.head_outputs
    }
}

/// Result of a backward pass: parameter gradients and the gradient with
/// respect to every input head.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub params: Params,
    pub inputs: Vec<Array2<f64>>,
}

#[derive(Debug, Clone)]
pub struct Network {
    spec: NetworkSpec,
    widths: Vec<usize>,
    /// Parameter block index for each trunk layer that owns parameters.
    slots: Vec<Option<usize>>,
    head_slots: Vec<usize>,
    params: Params,
    running: Vec<Option<RunningStats>>,
    mode: Mode,
}

impl Network {
    /// Glorot-uniform weights, zero biases, unit batch-norm scale. Fully
    /// determined by `(spec, seed)`.
    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Self> {
        let widths = spec.trunk_widths()?;
        let mut rng = rng_for(seed, 0);
        let mut blocks = Vec::new();
        let mut slots = Vec::with_capacity(spec.layers.len());
        let mut running = Vec::with_capacity(spec.layers.len());
        for (i, layer) in spec.layers.iter().enumerate() {
            let (fan_in, fan_out) = (widths[i], widths[i + 1]);
            match layer {
                LayerSpec::Dense { .. } => {
                    slots.push(Some(blocks.len()));
                    blocks.push(glorot_block(fan_in, fan_out, &mut rng));
                    running.push(None);
                }
                LayerSpec::BatchNorm => {
                    slots.push(Some(blocks.len()));
                    blocks.push(ParamBlock {
                        weight: Array2::ones((1, fan_in)),
                        bias: Array1::zeros(fan_in),
                    });
                    running.push(Some(RunningStats {
                        mean: Array1::zeros(fan_in),
                        var: Array1::ones(fan_in),
                    }));
                }
                _ => {
                    slots.push(None);
                    running.push(None);
                }
            }
        }
        let trunk_out = *widths.last().expect("widths has at least one entry");
        let mut head_slots = Vec::with_capacity(spec.heads.len());
        for head in &spec.heads {
            head_slots.push(blocks.len());
            blocks.push(glorot_block(trunk_out, head.width, &mut rng));
        }
        Ok(Self {
            spec,
            widths,
            slots,
            head_slots,
            params: Params { blocks },
            running,
            mode: Mode::Train,
        })
    }

    pub(crate) fn from_parts(
        spec: NetworkSpec,
        params: Params,
        running: Vec<Option<RunningStats>>,
    ) -> Result<Self> {
        let mut net = Self::init(spec, 0)?;
        if !net.params.same_shape(&params) {
            return Err(Error::Spec(
                "parameter shapes do not match the network spec".into(),
            ));
        }
        if running.len() != net.running.len()
            || running.iter().zip(&net.running).any(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => a.mean.len() != b.mean.len() || a.var.len() != b.var.len(),
                (None, None) => false,
                _ => true,
            })
        {
            return Err(Error::Spec(
                "batch-norm statistics do not match the network spec".into(),
            ));
        }
        net.params = params;
        net.running = running;
        Ok(net)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    pub fn running_stats(&self) -> &[Option<RunningStats>] {
        &self.running
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn input_widths(&self) -> &[usize] {
        &self.spec.input_widths
    }

    pub fn head_widths(&self) -> Vec<usize> {
        self.spec.heads.iter().map(|h| h.width).collect()
    }

    /// Inference-mode forward: noise and dropout disabled, batch-norm on
    /// running statistics. Never mutates the network.
    pub fn predict(&self, inputs: &[ArrayView2<f64>]) -> Result<Vec<Array2<f64>>> {
        let mut unused = rng_for(0, 0);
        let (outputs, _) = self.forward(inputs, Mode::Infer, &mut unused)?;
        Ok(outputs)
    }

    /// Forward pass. `rng` drives Gaussian-noise and dropout layers in
    /// [`Mode::Train`] and is untouched in [`Mode::Infer`]. Batch-norm running
    /// statistics are not updated here; see [`Network::update_running_stats`].
    pub fn forward<R: Rng + ?Sized>(
        &self,
        inputs: &[ArrayView2<f64>],
        mode: Mode,
        rng: &mut R,
    ) -> Result<(Vec<Array2<f64>>, ForwardCache)> {
        let x = self.concat_inputs(inputs)?;
        let mut acts = Vec::with_capacity(self.spec.layers.len() + 1);
        let mut aux = Vec::with_capacity(self.spec.layers.len());
        acts.push(x);
        for (i, layer) in self.spec.layers.iter().enumerate() {
            let input = &acts[i];
            let (out, a) = match *layer {
                LayerSpec::Dense { .. } => {
                    let block = &self.params.blocks[self.slots[i].expect("dense slot")];
                    (input.dot(&block.weight) + &block.bias, Aux::None)
                }
                LayerSpec::Relu => (activate(input, Activation::Relu), Aux::None),
                LayerSpec::Sigmoid => (activate(input, Activation::Sigmoid), Aux::None),
                LayerSpec::Softmax => (activate(input, Activation::Softmax), Aux::None),
                LayerSpec::Linear => (input.clone(), Aux::None),
                LayerSpec::GaussianNoise { stddev } => match mode {
                    Mode::Train if stddev > 0.0 => {
                        let mut out = input.clone();
                        for v in out.iter_mut() {
                            let n: f64 = StandardNormal.sample(rng);
                            *v += stddev * n;
                        }
                        (out, Aux::None)
                    }
                    _ => (input.clone(), Aux::None),
                },
                LayerSpec::Dropout { rate } => match mode {
                    Mode::Train if rate > 0.0 => {
                        let keep = 1.0 - rate;
                        let scale = 1.0 / keep;
                        let unit = Uniform::new(0.0, 1.0).expect("valid range");
                        let mask = Array2::from_shape_simple_fn(input.raw_dim(), || {
                            if unit.sample(rng) < keep {
                                scale
                            } else {
                                0.0
                            }
                        });
                        (input * &mask, Aux::Dropout { mask })
                    }
                    _ => (input.clone(), Aux::None),
                },
                LayerSpec::BatchNorm => {
                    let block = &self.params.blocks[self.slots[i].expect("batchnorm slot")];
                    let gamma = block.weight.row(0);
                    match mode {
                        Mode::Train => {
                            let n = input.nrows() as f64;
                            let mean = input.sum_axis(Axis(0)) / n;
                            let centered = input - &mean;
                            let var = centered.mapv(|v| v * v).sum_axis(Axis(0)) / n;
                            let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
                            let xhat = centered * &inv_std;
                            let out = &xhat * &gamma + &block.bias;
                            (
                                out,
                                Aux::BatchNorm {
                                    xhat,
                                    inv_std,
                                    batch_mean: mean,
                                    batch_var: var,
                                },
                            )
                        }
                        Mode::Infer => {
                            let stats = self.running[i].as_ref().expect("batchnorm stats");
                            let inv_std = stats.var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
                            let out = (input - &stats.mean) * &inv_std * &gamma + &block.bias;
                            (out, Aux::None)
                        }
                    }
                }
            };
            acts.push(out);
            aux.push(a);
        }
        let trunk_out = acts.last().expect("non-empty");
        let head_outputs: Vec<Array2<f64>> = self
            .spec
            .heads
            .iter()
            .zip(&self.head_slots)
            .map(|(head, &slot)| {
                let block = &self.params.blocks[slot];
                let z = trunk_out.dot(&block.weight) + &block.bias;
                activate(&z, head.activation)
            })
            .collect();
        let cache = ForwardCache {
            mode,
            layer_count: self.spec.layers.len(),
            head_count: self.spec.heads.len(),
            acts,
            aux,
            head_outputs: head_outputs.clone(),
        };
        Ok((head_outputs, cache))
    }

    /// Fold the batch statistics recorded in a Train-mode `cache` into the
    /// batch-norm running averages.
    pub fn update_running_stats(&mut self, cache: &ForwardCache) -> Result<()> {
        self.check_cache(cache)?;
        for (stats, aux) in self.running.iter_mut().zip(&cache.aux) {
            if let (
                Some(stats),
                Aux::BatchNorm {
                    batch_mean,
                    batch_var,
                    ..
                },
            ) = (stats, aux)
            {
                stats.mean = &stats.mean * BN_MOMENTUM + batch_mean * (1.0 - BN_MOMENTUM);
                stats.var = &stats.var * BN_MOMENTUM + batch_var * (1.0 - BN_MOMENTUM);
            }
        }
        Ok(())
    }

    /// Backpropagate `head_grads` (d loss / d head output, one per head)
    /// through the network recorded in `cache`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        head_grads: &[ArrayView2<f64>],
    ) -> Result<Gradients> {
        self.check_cache(cache)?;
        if head_grads.len() != self.spec.heads.len() {
            return Err(Error::Shape(format!(
                "expected {} head gradients, got {}",
                self.spec.heads.len(),
                head_grads.len()
            )));
        }
        let batch = cache.batch_size();
        let mut grads = self.params.zeros_like();
        let trunk_out = cache.acts.last().expect("non-empty");
        let mut delta = Array2::<f64>::zeros(trunk_out.raw_dim());

        for (h, (head, &slot)) in self.spec.heads.iter().zip(&self.head_slots).enumerate() {
            let g = &head_grads[h];
            if g.dim() != (batch, head.width) {
                return Err(Error::Shape(format!(
                    "head {h} gradient is {:?}, expected {:?}",
                    g.dim(),
                    (batch, head.width)
                )));
            }
            let dz = activation_backward(&cache.head_outputs[h], g, head.activation);
            let block = &self.params.blocks[slot];
            grads.blocks[slot].weight = trunk_out.t().dot(&dz);
            grads.blocks[slot].bias = dz.sum_axis(Axis(0));
            delta += &dz.dot(&block.weight.t());
        }

        for i in (0..self.spec.layers.len()).rev() {
            let input = &cache.acts[i];
            let output = &cache.acts[i + 1];
            delta = match (&self.spec.layers[i], &cache.aux[i]) {
                (LayerSpec::Dense { .. }, _) => {
                    let slot = self.slots[i].expect("dense slot");
                    grads.blocks[slot].weight = input.t().dot(&delta);
                    grads.blocks[slot].bias = delta.sum_axis(Axis(0));
                    delta.dot(&self.params.blocks[slot].weight.t())
                }
                (LayerSpec::Relu, _) => activation_backward(output, &delta.view(), Activation::Relu),
                (LayerSpec::Sigmoid, _) => {
                    activation_backward(output, &delta.view(), Activation::Sigmoid)
                }
                (LayerSpec::Softmax, _) => {
                    activation_backward(output, &delta.view(), Activation::Softmax)
                }
                (LayerSpec::Linear, _) | (LayerSpec::GaussianNoise { .. }, _) => delta,
                (LayerSpec::Dropout { .. }, Aux::Dropout { mask }) => delta * mask,
                (LayerSpec::Dropout { .. }, _) => delta,
                (
                    LayerSpec::BatchNorm,
                    Aux::BatchNorm {
                        xhat, inv_std, ..
                    },
                ) => {
                    let slot = self.slots[i].expect("batchnorm slot");
                    let gamma = self.params.blocks[slot].weight.row(0).to_owned();
                    let dgamma = (&delta * xhat).sum_axis(Axis(0));
                    let dbeta = delta.sum_axis(Axis(0));
                    let n = batch as f64;
                    // dx = inv_std / n * (n * dxhat - sum(dxhat) - xhat * sum(dxhat * xhat))
                    let dxhat = &delta * &gamma;
                    let sum_dxhat = dxhat.sum_axis(Axis(0));
                    let sum_dxhat_xhat = (&dxhat * xhat).sum_axis(Axis(0));
                    let dx = (dxhat * n - &sum_dxhat - xhat * &sum_dxhat_xhat) * inv_std / n;
                    grads.blocks[slot].weight = dgamma.insert_axis(Axis(0));
                    grads.blocks[slot].bias = dbeta;
                    dx
                }
                (LayerSpec::BatchNorm, _) => {
                    return Err(Error::State("batch-norm cache missing statistics".into()))
                }
            };
        }

        let mut inputs = Vec::with_capacity(self.spec.input_widths.len());
        let mut offset = 0;
        for &w in &self.spec.input_widths {
            inputs.push(delta.slice(s![.., offset..offset + w]).to_owned());
            offset += w;
        }
        Ok(Gradients {
            params: grads,
            inputs,
        })
    }

    fn check_cache(&self, cache: &ForwardCache) -> Result<()> {
        if cache.mode != Mode::Train {
            return Err(Error::State(
                "backward requires a cache from a Train-mode forward".into(),
            ));
        }
        if cache.layer_count != self.spec.layers.len()
            || cache.head_count != self.spec.heads.len()
            || cache.acts.len() != self.widths.len()
            || cache
                .acts
                .iter()
                .zip(&self.widths)
                .any(|(a, &w)| a.ncols() != w)
        {
            return Err(Error::State(
                "forward cache was produced by a different network".into(),
            ));
        }
        Ok(())
    }

    fn concat_inputs(&self, inputs: &[ArrayView2<f64>]) -> Result<Array2<f64>> {
        let widths = &self.spec.input_widths;
        if inputs.len() != widths.len() {
            return Err(Error::Shape(format!(
                "expected {} input matrices, got {}",
                widths.len(),
                inputs.len()
            )));
        }
        let batch = inputs[0].nrows();
        for (k, (x, &w)) in inputs.iter().zip(widths).enumerate() {
            if x.ncols() != w || x.nrows() != batch {
                return Err(Error::Shape(format!(
                    "input {k} is {:?}, expected ({batch}, {w})",
                    x.dim()
                )));
            }
        }
        if inputs.len() == 1 {
            Ok(inputs[0].to_owned())
        } else {
            concatenate(Axis(1), inputs).map_err(|e| Error::Shape(e.to_string()))
        }
    }
}

fn glorot_block<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> ParamBlock {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite glorot limit");
    ParamBlock {
        weight: Array2::from_shape_simple_fn((fan_in, fan_out), || dist.sample(rng)),
        bias: Array1::zeros(fan_out),
    }
}

pub(crate) fn activate(z: &Array2<f64>, activation: Activation) -> Array2<f64> {
    match activation {
        Activation::Linear => z.clone(),
        Activation::Relu => z.mapv(|v| v.max(0.0)),
        Activation::Sigmoid => z.mapv(sigmoid),
        Activation::Softmax => {
            let mut out = z.clone();
            for mut row in out.rows_mut() {
                let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                row.mapv_inplace(|v| (v - max).exp());
                let sum = row.sum();
                row.mapv_inplace(|v| v / sum);
            }
            out
        }
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// d loss / d pre-activation, given the activation output `y` and
/// d loss / d output `g`.
fn activation_backward(y: &Array2<f64>, g: &ArrayView2<f64>, activation: Activation) -> Array2<f64> {
    match activation {
        Activation::Linear => g.to_owned(),
        Activation::Relu => {
            let mut out = g.to_owned();
            Zip::from(&mut out).and(y).for_each(|o, &y| {
                if y <= 0.0 {
                    *o = 0.0;
                }
            });
            out
        }
        Activation::Sigmoid => {
            let mut out = g.to_owned();
            Zip::from(&mut out).and(y).for_each(|o, &y| *o *= y * (1.0 - y));
            out
        }
        Activation::Softmax => {
            let dot = (g * y).sum_axis(Axis(1)).insert_axis(Axis(1));
            y * &(g - &dot)
        }
    }
}
