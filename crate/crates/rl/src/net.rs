//! Dense ReLU networks with hand-written reverse-mode gradients.

use fjsp_core::rng::SimRng;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RlError};

pub const HIDDEN: [usize; 2] = [256, 128];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `out x in`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { weight: Array2::zeros((outputs, inputs)), bias: Array1::zeros(outputs) }
    }

    /// Uniform fan-in initialization with variance `gain^2 / fan_in`; zero bias.
    pub fn init(inputs: usize, outputs: usize, gain: f64, rng: &mut SimRng) -> Self {
        let bound = gain * (3.0 / inputs as f64).sqrt();
        let weight = Array2::from_shape_simple_fn((outputs, inputs), || rng.uniform_range(-bound, bound));
        Self { weight, bias: Array1::zeros(outputs) }
    }

    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }
}

/// Affine layers with ReLU after every layer but the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Inputs seen by each layer during a forward pass.
pub struct MlpCache {
    inputs: Vec<Array2<f64>>,
}

impl Mlp {
    pub fn new(sizes: &[usize], hidden_gain: f64, output_gain: f64, rng: &mut SimRng) -> Self {
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let gain = if i + 1 == n { output_gain } else { hidden_gain };
                Dense::init(sizes[i], sizes[i + 1], gain, rng)
            })
            .collect();
        Self { layers }
    }

    pub fn zeros_like(&self) -> Self {
        Self { layers: self.layers.iter().map(|l| Dense::zeros(l.inputs(), l.outputs())).collect() }
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().unwrap().outputs()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.forward_cached(x).0
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> (Array2<f64>, MlpCache) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.weight.t());
            z += &layer.bias;
            if i + 1 < self.layers.len() {
                z.mapv_inplace(|v| v.max(0.0));
            }
            inputs.push(a);
            a = z;
        }
        (a, MlpCache { inputs })
    }

    /// Gradients of a scalar loss given `d loss / d output` for each row.
    pub fn backward(&self, cache: &MlpCache, d_out: Array2<f64>) -> Mlp {
        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        let mut g = d_out;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[i];
            let weight = g.t().dot(input).as_standard_layout().into_owned();
            let bias = g.sum_axis(Axis(0));
            grads.push(Dense { weight, bias });
            if i > 0 {
                let mut prev = g.dot(&layer.weight);
                prev.zip_mut_with(input, |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                g = prev;
            }
        }
        grads.reverse();
        Mlp { layers: grads }
    }

    fn tensors(&self) -> impl Iterator<Item = &[f64]> {
        self.layers.iter().flat_map(|l| {
            [l.weight.as_slice().expect("standard layout"), l.bias.as_slice().expect("standard layout")]
        })
    }

    fn tensors_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers.iter_mut().flat_map(|l| {
            [
                l.weight.as_slice_mut().expect("standard layout"),
                l.bias.as_slice_mut().expect("standard layout"),
            ]
        })
    }
}

/// Separate actor and critic networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyValueNet {
    pub actor: Mlp,
    pub critic: Mlp,
}

pub struct NetCache {
    actor: MlpCache,
    critic: MlpCache,
}

impl PolicyValueNet {
    /// `hidden` gain sqrt(2), actor output gain 0.01, critic output gain 1.
    pub fn new(obs_dim: usize, hidden: &[usize], num_actions: usize, seed: u64) -> Self {
        let mut rng = SimRng::stream(seed, 0xA11CE);
        let sizes = |out: usize| -> Vec<usize> {
            std::iter::once(obs_dim).chain(hidden.iter().copied()).chain(std::iter::once(out)).collect()
        };
        let actor = Mlp::new(&sizes(num_actions), 2f64.sqrt(), 0.01, &mut rng);
        let critic = Mlp::new(&sizes(1), 2f64.sqrt(), 1.0, &mut rng);
        Self { actor, critic }
    }

    pub fn zeros_like(&self) -> Self {
        Self { actor: self.actor.zeros_like(), critic: self.critic.zeros_like() }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.inputs()
    }

    pub fn num_actions(&self) -> usize {
        self.actor.outputs()
    }

    pub fn hidden(&self) -> Vec<usize> {
        self.actor.layers[..self.actor.layers.len() - 1].iter().map(|l| l.outputs()).collect()
    }

    pub fn num_params(&self) -> usize {
        self.tensors().map(|t| t.len()).sum()
    }

    pub fn forward(&self, obs: &[f64]) -> Result<(Vec<f64>, f64)> {
        if obs.len() != self.obs_dim() {
            return Err(RlError::DimensionMismatch { expected: self.obs_dim(), got: obs.len() });
        }
        let x = ArrayView2::from_shape((1, obs.len()), obs).expect("row vector");
        let (logits, values) = self.forward_batch(x);
        Ok((logits.row(0).to_vec(), values[0]))
    }

    /// Logits `batch x actions` and values `batch`.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> (Array2<f64>, Array1<f64>) {
        let logits = self.actor.forward(x);
        let values = self.critic.forward(x).column(0).to_owned();
        (logits, values)
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> (Array2<f64>, Array1<f64>, NetCache) {
        let (logits, actor) = self.actor.forward_cached(x);
        let (values, critic) = self.critic.forward_cached(x);
        (logits, values.column(0).to_owned(), NetCache { actor, critic })
    }

    pub fn backward(&self, cache: &NetCache, d_logits: Array2<f64>, d_values: Array1<f64>) -> PolicyValueNet {
        let n = d_values.len();
        let d_values = d_values.into_shape_with_order((n, 1)).expect("column");
        PolicyValueNet {
            actor: self.actor.backward(&cache.actor, d_logits),
            critic: self.critic.backward(&cache.critic, d_values),
        }
    }

    /// All parameter tensors in a fixed order: actor layers, then critic layers,
    /// each as weight then bias.
    pub fn tensors(&self) -> impl Iterator<Item = &[f64]> {
        self.actor.tensors().chain(self.critic.tensors())
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.actor.tensors_mut().chain(self.critic.tensors_mut())
    }

    pub fn flat(&self) -> Vec<f64> {
        self.tensors().flat_map(|t| t.iter().copied()).collect()
    }

    pub fn set_flat(&mut self, values: &[f64]) {
        let mut it = values.iter();
        for t in self.tensors_mut() {
            for v in t {
                *v = *it.next().expect("enough values");
            }
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.tensors().flat_map(|t| t.iter()).map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub probs: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub entropy: f64,
}

/// Softmax with max-subtraction.
pub fn policy_distribution(logits: &[f64]) -> Distribution {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    let log_probs: Vec<f64> = logits.iter().map(|z| z - lse).collect();
    let probs: Vec<f64> = log_probs.iter().map(|l| l.exp()).collect();
    let entropy = -probs.iter().zip(&log_probs).map(|(p, l)| if *p > 0.0 { p * l } else { 0.0 }).sum::<f64>();
    Distribution { probs, log_probs, entropy }
}

/// Inverse-CDF draw from one uniform variate.
pub fn sample_action(dist: &Distribution, rng: &mut SimRng) -> (usize, f64) {
    let u = rng.uniform();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in dist.probs.iter().enumerate() {
        if p > 0.0 {
            last = i;
        }
        acc += p;
        if u < acc {
            return (i, dist.log_probs[i]);
        }
    }
    (last, dist.log_probs[last])
}

/// Highest-probability action; ties go to the smallest index.
pub fn greedy_action(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &z) in logits.iter().enumerate() {
        if z > logits[best] {
            best = i;
        }
    }
    best
}
