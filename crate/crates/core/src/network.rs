//! Fully connected ReLU classifiers with a softmax output.
//!
//! A model is a chain of affine layers `Y = X·Wᵀ + b` where `W` is stored
//! `out × in`. Hidden layers apply ReLU; the last layer feeds a row-wise
//! softmax and training minimises mean cross-entropy over the batch.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{FEATURE_COUNT, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::initializers::{initialize, InitScheme};
use crate::numerics::{argmax, cross_entropy, relu_in_place, softmax_in_place, Matrix, Rng};

/// Network depth counted in weight layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Topology {
    /// `85 → 4`: multinomial logistic regression.
    OneLayer,
    /// `85 → 50 → 4`.
    TwoLayer,
    /// `85 → 50 → 20 → 4`.
    ThreeLayer,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::OneLayer, Topology::TwoLayer, Topology::ThreeLayer];

    pub fn layer_dims(self) -> &'static [usize] {
        match self {
            Topology::OneLayer => &[FEATURE_COUNT, NUM_CLASSES],
            Topology::TwoLayer => &[FEATURE_COUNT, 50, NUM_CLASSES],
            Topology::ThreeLayer => &[FEATURE_COUNT, 50, 20, NUM_CLASSES],
        }
    }

    pub fn depth(self) -> usize {
        self.layer_dims().len() - 1
    }

    pub fn from_depth(depth: usize) -> Result<Self> {
        match depth {
            1 => Ok(Topology::OneLayer),
            2 => Ok(Topology::TwoLayer),
            3 => Ok(Topology::ThreeLayer),
            _ => Err(Error::invalid(format!("topology must have 1, 2 or 3 layers, got {depth}"))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-layer", self.depth())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out × in`
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    topology: Topology,
    layers: Vec<Layer>,
}

/// Per-layer inputs retained by [`MlpModel::forward`] for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// `activations[k]` is the input of layer `k`: the batch itself for
    /// `k = 0`, the ReLU output of layer `k - 1` otherwise.
    pub activations: Vec<Matrix>,
    pub probs: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub d_weights: Matrix,
    pub d_bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

impl Gradients {
    /// Flat parameter blocks in the same order as [`MlpModel::param_blocks_mut`].
    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.d_weights.as_slice(), l.d_bias.as_slice()])
    }

    pub fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            layers: model
                .layers
                .iter()
                .map(|l| LayerGradients {
                    d_weights: Matrix::zeros(l.output_dim(), l.input_dim()),
                    d_bias: vec![0.0; l.output_dim()],
                })
                .collect(),
        }
    }
}

/// Builds a model for `topology` with weights drawn from `scheme` (fan-in =
/// each layer's input width) and zero biases.
pub fn build_model(rng: &mut Rng, topology: Topology, scheme: InitScheme) -> MlpModel {
    let layers = topology
        .layer_dims()
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            Layer {
                weights: initialize(rng, scheme, fan_in, fan_out, fan_in)
                    .expect("topology dimensions are nonzero"),
                bias: vec![0.0; fan_out],
            }
        })
        .collect();
    MlpModel { topology, layers }
}

impl MlpModel {
    /// Assembles a model from explicit layers, checking them against `topology`.
    pub fn from_layers(topology: Topology, layers: Vec<Layer>) -> Result<Self> {
        let dims = topology.layer_dims();
        if layers.len() != dims.len() - 1 {
            return Err(Error::invalid(format!(
                "{topology} model needs {} layers, got {}",
                dims.len() - 1,
                layers.len()
            )));
        }
        for (k, layer) in layers.iter().enumerate() {
            let expected = (dims[k + 1], dims[k]);
            if layer.weights.shape() != expected || layer.bias.len() != dims[k + 1] {
                return Err(Error::Shape {
                    op: "from_layers",
                    left: layer.weights.shape(),
                    right: expected,
                });
            }
        }
        Ok(Self { topology, layers })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    /// Flat parameter blocks: weights then bias for each layer in order.
    pub fn param_blocks_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
    }

    fn param_mut(&mut self, block: usize, index: usize) -> &mut f64 {
        let layer = &mut self.layers[block / 2];
        if block.is_multiple_of(2) {
            &mut layer.weights.as_mut_slice()[index]
        } else {
            &mut layer.bias[index]
        }
    }

    pub fn forward(&self, batch: &Matrix) -> Result<ForwardPass> {
        let input_dim = self.layers[0].input_dim();
        if batch.cols() != input_dim {
            return Err(Error::Shape {
                op: "forward",
                left: batch.shape(),
                right: (batch.rows(), input_dim),
            });
        }
        let mut activations = Vec::with_capacity(self.layers.len());
        let mut current = batch.clone();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = current.matmul_nt(&layer.weights)?;
            z.add_row_vector(&layer.bias)?;
            if k < last {
                relu_in_place(&mut z);
            } else {
                softmax_in_place(&mut z);
            }
            activations.push(std::mem::replace(&mut current, z));
        }
        Ok(ForwardPass {
            activations,
            probs: current,
        })
    }

    /// Gradients of mean cross-entropy with respect to every weight and bias.
    pub fn backward(&self, pass: &ForwardPass, labels: &[usize]) -> Result<Gradients> {
        let batch = pass.probs.rows();
        if labels.len() != batch || pass.activations.len() != self.layers.len() {
            return Err(Error::Shape {
                op: "backward",
                left: pass.probs.shape(),
                right: (labels.len(), pass.activations.len()),
            });
        }
        let classes = pass.probs.cols();
        let scale = 1.0 / batch as f64;
        let mut delta = pass.probs.clone();
        for (i, &label) in labels.iter().enumerate() {
            if label >= classes {
                return Err(Error::invalid(format!("label {label} out of range for {classes} classes")));
            }
            let row = delta.row_mut(i);
            row[label] -= 1.0;
            for v in row.iter_mut() {
                *v *= scale;
            }
        }

        let mut grads = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let input = &pass.activations[k];
            if input.shape() != (batch, layer.input_dim()) {
                return Err(Error::Shape {
                    op: "backward",
                    left: input.shape(),
                    right: (batch, layer.input_dim()),
                });
            }
            let d_weights = delta.matmul_tn(input)?;
            let d_bias = delta.column_sums();
            if k > 0 {
                let mut next = delta.matmul(&layer.weights)?;
                // input > 0 exactly where the previous pre-activation was > 0
                for (d, &a) in next.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
                delta = next;
            }
            grads.push(LayerGradients { d_weights, d_bias });
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    pub fn loss(&self, batch: &Matrix, labels: &[usize]) -> Result<f64> {
        cross_entropy(&self.forward(batch)?.probs, labels)
    }

    /// Most probable class per row, lowest index on ties.
    pub fn predict(&self, batch: &Matrix) -> Result<Vec<usize>> {
        let pass = self.forward(batch)?;
        Ok(pass.probs.row_iter().map(argmax).collect())
    }
}

/// Largest relative disagreement between backpropagated gradients and
/// central differences `(L(θ+ε) − L(θ−ε)) / 2ε`, taken over every parameter.
/// Relative error is `|a − n| / max(|a| + |n|, 1e-12)`.
pub fn grad_check(model: &MlpModel, batch: &Matrix, labels: &[usize], epsilon: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon must lie in [1e-7, 1e-3], got {epsilon}")));
    }
    let analytic = model.backward(&model.forward(batch)?, labels)?;
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (block, grads) in analytic.blocks().enumerate() {
        for (i, &a) in grads.iter().enumerate() {
            let original = *probe.param_mut(block, i);
            *probe.param_mut(block, i) = original + epsilon;
            let plus = probe.loss(batch, labels)?;
            *probe.param_mut(block, i) = original - epsilon;
            let minus = probe.loss(batch, labels)?;
            *probe.param_mut(block, i) = original;
            let numeric = (plus - minus) / (2.0 * epsilon);
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-12);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}
