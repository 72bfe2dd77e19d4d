//! Fully connected networks with ReLU hidden layers and exact reverse-mode
//! gradients.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::DdpgError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Tanh,
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out × in`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    output: OutputActivation,
}

/// Per-layer parameter gradients, same shapes as the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input of every layer; `inputs[0]` is the network input.
    inputs: Vec<Array2<f64>>,
    /// Post-activation output of the last layer.
    output: Array2<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }
}

impl Mlp {
    /// Hidden and input layers get the usual `U(±1/√fan_in)` initialization;
    /// the output layer is drawn from `U(±final_scale)`.
    pub fn new<R: Rng + ?Sized>(layer_dims: &[usize], output: OutputActivation, final_scale: f64, rng: &mut R) -> Self {
        assert!(layer_dims.len() >= 2, "need at least an input and an output size");
        assert!(layer_dims.iter().all(|&d| d > 0), "layer sizes must be positive");
        let n = layer_dims.len() - 1;
        let layers = layer_dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = if i + 1 == n { final_scale } else { 1.0 / (fan_in as f64).sqrt() };
                Layer {
                    weights: Array2::from_shape_fn((fan_out, fan_in), |_| rng.gen_range(-bound..=bound)),
                    bias: Array1::from_shape_fn(fan_out, |_| rng.gen_range(-bound..=bound)),
                }
            })
            .collect();
        Self { layers, output }
    }

    /// Builds a network from explicit layers. Panics if shapes do not chain.
    pub fn from_layers(layers: Vec<Layer>, output: OutputActivation) -> Self {
        assert!(!layers.is_empty());
        for l in &layers {
            assert_eq!(l.weights.nrows(), l.bias.len(), "bias length must match layer width");
        }
        for w in layers.windows(2) {
            assert_eq!(w[0].weights.nrows(), w[1].weights.ncols(), "layer sizes do not chain");
        }
        Self { layers, output }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(|l| l.weights.nrows()));
        dims
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weights.nrows())
    }

    pub fn same_structure(&self, other: &Mlp) -> bool {
        self.output == other.output && self.layer_dims() == other.layer_dims()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Evaluates a single input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, DdpgError> {
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row view of a slice");
        Ok(self.forward_batch(x)?.output.into_raw_vec())
    }

    /// Evaluates one input per row and keeps the activations.
    pub fn forward_batch(&self, input: ArrayView2<f64>) -> Result<ForwardCache, DdpgError> {
        if input.ncols() != self.input_dim() {
            return Err(DdpgError::InputLength {
                expected: self.input_dim(),
                got: input.ncols(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut x = input.to_owned();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = x.dot(&layer.weights.t());
            z += &layer.bias;
            if i < last {
                z.mapv_inplace(|v| v.max(0.0));
            } else if self.output == OutputActivation::Tanh {
                z.mapv_inplace(f64::tanh);
            }
            inputs.push(x);
            x = z;
        }
        Ok(ForwardCache { inputs, output: x })
    }

    /// Back-propagates `upstream = ∂L/∂output` (one row per sample) and
    /// returns parameter gradients summed over the batch together with
    /// `∂L/∂input`.
    pub fn backward(&self, cache: &ForwardCache, upstream: ArrayView2<f64>) -> (Gradients, Array2<f64>) {
        assert_eq!(upstream.dim(), cache.output.dim(), "upstream gradient shape");
        let mut delta = match self.output {
            OutputActivation::Tanh => {
                let mut d = upstream.to_owned();
                d.zip_mut_with(&cache.output, |g, &y| *g *= 1.0 - y * y);
                d
            }
            OutputActivation::Identity => upstream.to_owned(),
        };
        let mut grads = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[i];
            grads.push(Layer {
                weights: delta.t().dot(input),
                bias: delta.sum_axis(Axis(0)),
            });
            let mut upstream_input = delta.dot(&layer.weights);
            if i > 0 {
                // The layer input is the ReLU output of the previous layer.
                upstream_input.zip_mut_with(input, |g, &a| {
                    if a <= 0.0 {
                        *g = 0.0
                    }
                });
            }
            delta = upstream_input;
        }
        grads.reverse();
        (Gradients { layers: grads }, delta)
    }

    /// Gradients for one sample.
    pub fn gradients(&self, input: &[f64], upstream: &[f64]) -> Result<(Gradients, Vec<f64>), DdpgError> {
        if upstream.len() != self.output_dim() {
            return Err(DdpgError::InputLength {
                expected: self.output_dim(),
                got: upstream.len(),
            });
        }
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row view of a slice");
        let cache = self.forward_batch(x)?;
        let up = ArrayView2::from_shape((1, upstream.len()), upstream).expect("row view of a slice");
        let (grads, dx) = self.backward(&cache, up);
        Ok((grads, dx.into_raw_vec()))
    }

    /// `self ← (1 − tau)·self + tau·source`.
    pub fn soft_update_from(&mut self, source: &Mlp, tau: f64) -> Result<(), DdpgError> {
        if !self.same_structure(source) {
            return Err(DdpgError::StructureMismatch);
        }
        for (t, s) in self.layers.iter_mut().zip(&source.layers) {
            t.weights.zip_mut_with(&s.weights, |a, &b| *a = (1.0 - tau) * *a + tau * b);
            t.bias.zip_mut_with(&s.bias, |a, &b| *a = (1.0 - tau) * *a + tau * b);
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| Layer {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect(),
        }
    }

    /// All gradient entries, layer by layer, weights before biases.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weights *= s;
            l.bias *= s;
        }
    }
}
