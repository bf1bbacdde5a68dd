//! Bias-corrected adaptive moment estimation.

use serde::{Deserialize, Serialize};

use crate::net::PolicyValueNet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    /// Moment decays 0.9 / 0.999 and epsilon 1e-5.
    pub fn new(net: &PolicyValueNet, lr: f64) -> Self {
        let zeros: Vec<Vec<f64>> = net.tensors().map(|t| vec![0.0; t.len()]).collect();
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-5, step: 0, m: zeros.clone(), v: zeros }
    }

    pub fn matches(&self, net: &PolicyValueNet) -> bool {
        self.m.len() == net.tensors().count() && self.m.iter().zip(net.tensors()).all(|(m, t)| m.len() == t.len())
    }

    pub fn step(&mut self, net: &mut PolicyValueNet, grads: &PolicyValueNet) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        for (((p, g), m), v) in net.tensors_mut().zip(grads.tensors()).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}
