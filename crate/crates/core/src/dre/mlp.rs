//! Fully connected network with ELU hidden activations and a scalar logit
//! output, with hand-written backpropagation and SGD/Adam updates.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TriadError};
use crate::rng::SeededRng;

pub fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

fn elu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// Numerically stable `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// MLP parameters in one flat buffer. Layer `l` maps `widths[l]` inputs to
/// `widths[l+1]` outputs; its weights are stored row-major (`out x in`)
/// followed by its biases. The last width is always 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    widths: Vec<usize>,
    params: Vec<f64>,
}

/// Per-sample forward cache: pre-activations of every layer and the
/// post-activation inputs to every layer.
#[derive(Debug, Default)]
pub struct ForwardCache {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl MlpParams {
    /// Network `input_dim -> hidden... -> 1`, initialized with
    /// `N(0, 1/fan_in)` weights, zero biases and a zero output layer.
    pub fn new(input_dim: usize, hidden: &[usize], rng: &mut SeededRng) -> Result<Self> {
        let mut me = Self::zeros(input_dim, hidden)?;
        let n_layers = me.widths.len() - 1;
        for l in 0..n_layers.saturating_sub(1) {
            let (fan_in, fan_out) = (me.widths[l], me.widths[l + 1]);
            let off = me.weight_offset(l);
            let s = (1.0 / fan_in as f64).sqrt();
            for w in &mut me.params[off..off + fan_in * fan_out] {
                *w = s * rng.standard_normal();
            }
        }
        Ok(me)
    }

    pub fn zeros(input_dim: usize, hidden: &[usize]) -> Result<Self> {
        if input_dim == 0 || hidden.iter().any(|&h| h == 0) {
            return Err(invalid("widths", "layer widths must be positive"));
        }
        let mut widths = Vec::with_capacity(hidden.len() + 2);
        widths.push(input_dim);
        widths.extend_from_slice(hidden);
        widths.push(1);
        let n = widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self {
            widths,
            params: vec![0.0; n],
        })
    }

    /// Rebuilds from a width list and flat parameters, validating sizes.
    pub fn from_parts(widths: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if widths.len() < 2 || *widths.last().unwrap() != 1 || widths.iter().any(|&w| w == 0) {
            return Err(TriadError::Format(format!("bad MLP widths {widths:?}")));
        }
        let n: usize = widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        if params.len() != n {
            return Err(TriadError::Format(format!("expected {n} parameters, found {}", params.len())));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(TriadError::NonFinite("MLP parameters".into()));
        }
        Ok(Self { widths, params })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    fn weight_offset(&self, layer: usize) -> usize {
        self.widths[..=layer]
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let mut cur = x.to_vec();
        let n_layers = self.widths.len() - 1;
        let mut off = 0;
        for l in 0..n_layers {
            let (fi, fo) = (self.widths[l], self.widths[l + 1]);
            let w = &self.params[off..off + fi * fo];
            let b = &self.params[off + fi * fo..off + fi * fo + fo];
            let mut next = b.to_vec();
            for (o, n) in next.iter_mut().enumerate() {
                *n += dot(&w[o * fi..(o + 1) * fi], &cur);
            }
            if l + 1 < n_layers {
                next.iter_mut().for_each(|v| *v = elu(*v));
            }
            cur = next;
            off += fi * fo + fo;
        }
        cur[0]
    }

    pub fn forward_cached(&self, x: &[f64], cache: &mut ForwardCache) -> f64 {
        let n_layers = self.widths.len() - 1;
        cache.inputs.resize_with(n_layers, Vec::new);
        cache.pre.resize_with(n_layers, Vec::new);
        cache.inputs[0].clear();
        cache.inputs[0].extend_from_slice(x);
        let mut off = 0;
        for l in 0..n_layers {
            let (fi, fo) = (self.widths[l], self.widths[l + 1]);
            let w = &self.params[off..off + fi * fo];
            let b = &self.params[off + fi * fo..off + fi * fo + fo];
            let pre = &mut cache.pre[l];
            pre.clear();
            pre.extend_from_slice(b);
            let input = &cache.inputs[l];
            for (o, p) in pre.iter_mut().enumerate() {
                *p += dot(&w[o * fi..(o + 1) * fi], input);
            }
            if l + 1 < n_layers {
                let act: Vec<f64> = cache.pre[l].iter().map(|&v| elu(v)).collect();
                cache.inputs[l + 1] = act;
            }
            off += fi * fo + fo;
        }
        cache.pre[n_layers - 1][0]
    }

    /// Adds `dout · ∂logit/∂θ` for the sample held in `cache` to `grad`.
    pub fn backward(&self, cache: &ForwardCache, dout: f64, grad: &mut [f64]) {
        let n_layers = self.widths.len() - 1;
        let offsets: Vec<usize> = (0..n_layers).map(|l| self.weight_offset(l)).collect();
        let mut delta = vec![dout];
        for l in (0..n_layers).rev() {
            let (fi, fo) = (self.widths[l], self.widths[l + 1]);
            let off = offsets[l];
            let input = &cache.inputs[l];
            for o in 0..fo {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let gw = &mut grad[off + o * fi..off + (o + 1) * fi];
                for (g, &a) in gw.iter_mut().zip(input) {
                    *g += d * a;
                }
                grad[off + fi * fo + o] += d;
            }
            if l > 0 {
                let w = &self.params[off..off + fi * fo];
                let pre_prev = &cache.pre[l - 1];
                let mut next = vec![0.0; fi];
                for o in 0..fo {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    for (n, &wv) in next.iter_mut().zip(&w[o * fi..(o + 1) * fi]) {
                        *n += d * wv;
                    }
                }
                for (n, &z) in next.iter_mut().zip(pre_prev) {
                    *n *= elu_grad(z);
                }
                delta = next;
            }
        }
    }

    /// Mean logistic loss over `(x, label)` pairs (label 1 ⇒ positive logit)
    /// and its gradient.
    pub fn logistic_loss_grad<'a, I>(&self, batch: I, grad: &mut [f64]) -> f64
    where
        I: IntoIterator<Item = (&'a [f64], f64)>,
    {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut cache = ForwardCache::default();
        let mut loss = 0.0;
        let mut n = 0usize;
        for (x, y) in batch {
            let f = self.forward_cached(x, &mut cache);
            loss += if y > 0.5 { softplus(-f) } else { softplus(f) };
            self.backward(&cache, sigmoid(f) - y, grad);
            n += 1;
        }
        let inv = 1.0 / n.max(1) as f64;
        grad.iter_mut().for_each(|g| *g *= inv);
        loss * inv
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// First-order update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Optimizer state for one parameter vector.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, n: usize) -> Self {
        let (m, v) = match kind {
            OptimizerKind::Sgd => (Vec::new(), Vec::new()),
            OptimizerKind::Adam => (vec![0.0; n], vec![0.0; n]),
        };
        Self { kind, m, v, t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam => {
                const B1: f64 = 0.9;
                const B2: f64 = 0.999;
                const EPS: f64 = 1e-8;
                self.t += 1;
                let c1 = 1.0 - B1.powi(self.t as i32);
                let c2 = 1.0 - B2.powi(self.t as i32);
                for i in 0..params.len() {
                    let g = grad[i];
                    self.m[i] = B1 * self.m[i] + (1.0 - B1) * g;
                    self.v[i] = B2 * self.v[i] + (1.0 - B2) * g * g;
                    let mh = self.m[i] / c1;
                    let vh = self.v[i] / c2;
                    params[i] -= lr * mh / (vh.sqrt() + EPS);
                }
            }
        }
    }
}

/// Cosine annealing from `lr0` at step 0 to 0 at step `total`.
pub fn cosine_lr(lr0: f64, step: usize, total: usize) -> f64 {
    if total == 0 {
        return lr0;
    }
    0.5 * lr0 * (1.0 + (std::f64::consts::PI * step as f64 / total as f64).cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_outputs_zero() {
        let m = MlpParams::zeros(3, &[4, 4]).unwrap();
        assert_eq!(m.forward(&[1.0, -2.0, 3.0]), 0.0);
        assert_eq!(m.num_params(), 3 * 4 + 4 + 4 * 4 + 4 + 4 + 1);
    }

    #[test]
    fn cached_and_plain_forward_agree() {
        let mut rng = SeededRng::new(1);
        let mut m = MlpParams::new(2, &[5, 3], &mut rng).unwrap();
        m.params_mut().iter_mut().for_each(|p| *p += 0.1);
        let mut c = ForwardCache::default();
        let x = [0.3, -1.2];
        assert_eq!(m.forward(&x), m.forward_cached(&x, &mut c));
    }

    #[test]
    fn elu_and_softplus() {
        assert_eq!(elu(2.0), 2.0);
        assert!((elu(-1.0) - (-1f64).exp_m1()).abs() < 1e-15);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!(softplus(-800.0) >= 0.0);
    }

    #[test]
    fn cosine_schedule_endpoints() {
        assert_eq!(cosine_lr(0.1, 0, 10), 0.1);
        assert!(cosine_lr(0.1, 10, 10).abs() < 1e-18);
        assert!((cosine_lr(0.1, 5, 10) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn from_parts_validates() {
        assert!(MlpParams::from_parts(vec![2, 3, 1], vec![0.0; 13]).is_ok());
        assert!(MlpParams::from_parts(vec![2, 3, 1], vec![0.0; 12]).is_err());
        assert!(MlpParams::from_parts(vec![2, 3, 2], vec![0.0; 17]).is_err());
        assert!(MlpParams::from_parts(vec![2, 3, 1], vec![f64::NAN; 13]).is_err());
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let mut rng = SeededRng::new(11);
        for trial in 0..5 {
            let mut m = MlpParams::new(3, &[6, 4], &mut rng).unwrap();
            for p in m.params_mut() {
                *p += 0.3 * rng.standard_normal();
            }
            let xs: Vec<(Vec<f64>, f64)> = (0..8)
                .map(|i| ((0..3).map(|_| rng.standard_normal()).collect(), (i % 2) as f64))
                .collect();
            let batch = || xs.iter().map(|(x, y)| (x.as_slice(), *y));
            let mut g = vec![0.0; m.num_params()];
            m.logistic_loss_grad(batch(), &mut g);
            let h = 1e-6;
            for j in 0..m.num_params() {
                let orig = m.params()[j];
                let mut scratch = vec![0.0; g.len()];
                m.params_mut()[j] = orig + h;
                let up = m.logistic_loss_grad(batch(), &mut scratch);
                m.params_mut()[j] = orig - h;
                let down = m.logistic_loss_grad(batch(), &mut scratch);
                m.params_mut()[j] = orig;
                let fd = (up - down) / (2.0 * h);
                let err = (fd - g[j]).abs() / fd.abs().max(g[j].abs()).max(1e-3);
                assert!(err < 1e-5, "trial {trial} param {j}: fd {fd} vs {}", g[j]);
            }
        }
    }
}
