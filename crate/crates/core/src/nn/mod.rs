//! Dense feed-forward engine with manual backpropagation.
//!
//! Batches are row-major `f64` matrices (one sample per row). A network has
//! one or more input heads whose columns are concatenated, a trunk of layers,
//! and one or more output heads, each a dense projection followed by an
//! activation. Gradients flowing back from several heads are summed at the
//! end of the trunk.

mod adam;
mod checkpoint;
mod loss;
mod network;
mod spec;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{AdamRecord, BatchNormRecord, BlockRecord, Checkpoint};
pub(crate) use checkpoint::fmt_f64;
pub use loss::{binary_cross_entropy, categorical_cross_entropy, composite_loss, CompositeLoss, LossValue, CLAMP_EPS};
pub use network::{
    ForwardCache, Gradients, Mode, Network, ParamBlock, Params, RunningStats, BN_EPS, BN_MOMENTUM,
};
pub use spec::{Activation, HeadSpec, LayerSpec, NetworkSpec};

pub type Matrix = ndarray::Array2<f64>;
