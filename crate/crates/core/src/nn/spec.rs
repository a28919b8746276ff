use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Element-wise (or row-wise, for softmax) transfer function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Relu,
    Sigmoid,
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dense { width: usize },
    Relu,
    Sigmoid,
    Softmax,
    Linear,
    GaussianNoise { stddev: f64 },
    BatchNorm,
    Dropout { rate: f64 },
}

impl LayerSpec {
    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            LayerSpec::Dense { width } if width == 0 => {
                Err(Error::Spec("dense layer width must be at least 1".into()))
            }
            LayerSpec::GaussianNoise { stddev } if !(stddev >= 0.0 && stddev.is_finite()) => {
                Err(Error::Spec(format!("gaussian noise stddev {stddev} must be >= 0")))
            }
            LayerSpec::Dropout { rate } if !(0.0..1.0).contains(&rate) => {
                Err(Error::Spec(format!("dropout rate {rate} outside [0, 1)")))
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn out_width(&self, in_width: usize) -> usize {
        match *self {
            LayerSpec::Dense { width } => width,
            _ => in_width,
        }
    }
}

/// Output head: a dense projection to `width` units then `activation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadSpec {
    pub width: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_widths: Vec<usize>,
    pub layers: Vec<LayerSpec>,
    pub heads: Vec<HeadSpec>,
}

impl NetworkSpec {
    pub fn new(input_widths: Vec<usize>, layers: Vec<LayerSpec>, heads: Vec<HeadSpec>) -> Self {
        Self {
            input_widths,
            layers,
            heads,
        }
    }

    pub fn input_width(&self) -> usize {
        self.input_widths.iter().sum()
    }

    /// Width entering each trunk layer, followed by the trunk output width.
    pub fn trunk_widths(&self) -> Result<Vec<usize>> {
        self.validate()?;
        let mut widths = Vec::with_capacity(self.layers.len() + 1);
        let mut w = self.input_width();
        widths.push(w);
        for layer in &self.layers {
            w = layer.out_width(w);
            widths.push(w);
        }
        Ok(widths)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_widths.is_empty() {
            return Err(Error::Spec("at least one input head is required".into()));
        }
        if self.input_widths.iter().any(|&w| w == 0) {
            return Err(Error::Spec("input head widths must be positive".into()));
        }
        if self.heads.is_empty() {
            return Err(Error::Spec("at least one output head is required".into()));
        }
        if self.heads.iter().any(|h| h.width == 0) {
            return Err(Error::Spec("output head widths must be positive".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            layer
                .validate()
                .map_err(|e| Error::Spec(format!("layer {i}: {e}")))?;
        }
        Ok(())
    }
}
