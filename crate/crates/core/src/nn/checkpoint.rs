//! JSON checkpoints. Every float is written as a decimal string using the
//! shortest representation that parses back to the identical `f64`.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::network::{Network, ParamBlock, Params, RunningStats};
use super::spec::NetworkSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub weight_shape: [usize; 2],
    pub weight: Vec<String>,
    pub bias: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNormRecord {
    pub mean: Vec<String>,
    pub var: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamRecord {
    pub config: AdamConfig,
    pub step_count: u64,
    pub first_moment: Vec<BlockRecord>,
    pub second_moment: Vec<BlockRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub spec: NetworkSpec,
    /// Parameter blocks in layer order: trunk layers first, then heads.
    pub layers: Vec<BlockRecord>,
    /// One entry per trunk layer; `null` for layers without batch norm.
    pub batchnorm: Vec<Option<BatchNormRecord>>,
    pub optimizer: Option<AdamRecord>,
    pub rng_seed: u64,
}

impl Checkpoint {
    pub fn capture(net: &Network, optimizer: Option<&AdamState>, rng_seed: u64) -> Self {
        Self {
            spec: net.spec().clone(),
            layers: encode_params(net.params()),
            batchnorm: net
                .running_stats()
                .iter()
                .map(|s| {
                    s.as_ref().map(|s| BatchNormRecord {
                        mean: encode(s.mean.iter()),
                        var: encode(s.var.iter()),
                    })
                })
                .collect(),
            optimizer: optimizer.map(|a| AdamRecord {
                config: a.config,
                step_count: a.step_count,
                first_moment: encode_params(&a.first_moment),
                second_moment: encode_params(&a.second_moment),
            }),
            rng_seed,
        }
    }

    pub fn network(&self) -> Result<Network> {
        let params = decode_params(&self.layers)?;
        let running = self
            .batchnorm
            .iter()
            .map(|r| {
                r.as_ref()
                    .map(|r| {
                        Ok(RunningStats {
                            mean: Array1::from(decode(&r.mean)?),
                            var: Array1::from(decode(&r.var)?),
                        })
                    })
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        Network::from_parts(self.spec.clone(), params, running)
    }

    pub fn optimizer_state(&self) -> Result<Option<AdamState>> {
        self.optimizer
            .as_ref()
            .map(|r| {
                Ok(AdamState {
                    config: r.config,
                    step_count: r.step_count,
                    first_moment: decode_params(&r.first_moment)?,
                    second_moment: decode_params(&r.second_moment)?,
                })
            })
            .transpose()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn encode<'a>(values: impl Iterator<Item = &'a f64>) -> Vec<String> {
    values.map(|&v| fmt_f64(v)).collect()
}

fn decode(values: &[String]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| Error::Validation(format!("bad float {s:?} in checkpoint: {e}")))
        })
        .collect()
}

fn encode_params(params: &Params) -> Vec<BlockRecord> {
    params
        .blocks
        .iter()
        .map(|b| BlockRecord {
            weight_shape: [b.weight.nrows(), b.weight.ncols()],
            weight: encode(b.weight.iter()),
            bias: encode(b.bias.iter()),
        })
        .collect()
}

fn decode_params(records: &[BlockRecord]) -> Result<Params> {
    let blocks = records
        .iter()
        .map(|r| {
            let weight = Array2::from_shape_vec((r.weight_shape[0], r.weight_shape[1]), decode(&r.weight)?)
                .map_err(|e| Error::Shape(format!("checkpoint weight: {e}")))?;
            Ok(ParamBlock {
                weight,
                bias: Array1::from(decode(&r.bias)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Params { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, HeadSpec, LayerSpec};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn float_strings_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let back: f64 = fmt_f64(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn network_round_trips_exactly() {
        let spec = NetworkSpec::new(
            vec![3, 2],
            vec![LayerSpec::Dense { width: 4 }, LayerSpec::Relu, LayerSpec::BatchNorm],
            vec![
                HeadSpec { width: 1, activation: Activation::Sigmoid },
                HeadSpec { width: 2, activation: Activation::Softmax },
            ],
        );
        let mut net = Network::init(spec, 11).unwrap();
        net.params_mut().blocks[1].bias[2] = 1.0 / 3.0;
        let adam = AdamState::new(net.params(), AdamConfig::new(0.001, 0.5)).unwrap();
        let ckpt = Checkpoint::capture(&net, Some(&adam), 99);
        let json = serde_json::to_string(&ckpt).unwrap();
        let back: Checkpoint = serde_json::from_str(&json).unwrap();
        let restored = back.network().unwrap();
        assert_eq!(restored.params(), net.params());
        assert_eq!(restored.running_stats(), net.running_stats());
        assert_eq!(back.optimizer_state().unwrap().unwrap(), adam);
        assert_eq!(back.rng_seed, 99);
    }

    #[test]
    fn rejects_mismatched_shapes() {
        let spec = NetworkSpec::new(
            vec![2],
            vec![LayerSpec::Dense { width: 3 }],
            vec![HeadSpec { width: 1, activation: Activation::Linear }],
        );
        let net = Network::init(spec, 0).unwrap();
        let mut ckpt = Checkpoint::capture(&net, None, 0);
        ckpt.spec.layers[0] = LayerSpec::Dense { width: 5 };
        assert!(ckpt.network().is_err());
    }
}
