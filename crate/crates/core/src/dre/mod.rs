//! Telescoping density-ratio estimation.
//!
//! The log-ratio `ln P₁(x)/P₀(x)` is split into a sum over bridges. Samples
//! are interpolated as `x_λ = λ·x₀ + √(1−λ²)·x₁` for a decreasing schedule
//! `1 = λ₀ > λ₁ > … > λ_K = 0`, so `λ = 1` reproduces `P₀` and `λ = 0`
//! reproduces `P₁`. Bridge `k` is a binary classifier separating `p_{λ_k}`
//! (label 0) from `p_{λ_{k+1}}` (label 1); at the logistic-loss optimum its
//! logit equals `ln p_{λ_{k+1}}/p_{λ_k}`, and the logits telescope to the
//! full log-ratio. The sum is clipped to `[ln c, ln C]`.

mod io;
pub mod mlp;

pub use io::{load_estimator, read_estimator, save_estimator, write_estimator, FORMAT_NAME, FORMAT_VERSION};
pub use mlp::{MlpParams, OptimizerKind};

use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{invalid, Result, TriadError};
use crate::linalg::Matrix;
use crate::rng::SeededRng;

/// Default number of bridges.
pub const DEFAULT_BRIDGES: usize = 16;
/// Default lower clip `c` on the ratio.
pub const DEFAULT_CLIP_LO: f64 = 1e-4;
/// Default upper clip `C` on the ratio.
pub const DEFAULT_CLIP_HI: f64 = 1e4;

/// Interpolation weights, strictly decreasing from 1 to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BridgeSchedule {
    lambdas: Vec<f64>,
}

impl BridgeSchedule {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() < 2 {
            return Err(invalid("lambdas", "need at least [1, 0]"));
        }
        if lambdas[0] != 1.0 || *lambdas.last().unwrap() != 0.0 {
            return Err(invalid("lambdas", "must start at 1.0 and end at 0.0"));
        }
        if lambdas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("lambdas", "must be strictly decreasing"));
        }
        Ok(Self { lambdas })
    }

    /// `K` bridges with λ uniform in the bridge index.
    pub fn uniform(bridges: usize) -> Result<Self> {
        if bridges == 0 {
            return Err(invalid("bridges", "need at least one bridge"));
        }
        let k = bridges as f64;
        let mut l: Vec<f64> = (0..=bridges).map(|i| 1.0 - i as f64 / k).collect();
        l[bridges] = 0.0;
        Self::new(l)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn bridges(&self) -> usize {
        self.lambdas.len() - 1
    }
}

impl TryFrom<Vec<f64>> for BridgeSchedule {
    type Error = TriadError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BridgeSchedule> for Vec<f64> {
    fn from(s: BridgeSchedule) -> Self {
        s.lambdas
    }
}

/// Sample-space interpolation `λ·x₀ + √(1−λ²)·x₁`.
pub fn interpolate(x_p0: &[f64], x_p1: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if x_p0.len() != x_p1.len() {
        return Err(TriadError::DimMismatch { expected: x_p0.len(), got: x_p1.len() });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(invalid("lambda", format!("{lambda} outside [0, 1]")));
    }
    let mut out = vec![0.0; x_p0.len()];
    interpolate_into(x_p0, x_p1, lambda, &mut out);
    Ok(out)
}

fn interpolate_into(x0: &[f64], x1: &[f64], lambda: f64, out: &mut [f64]) {
    // exact endpoints
    if lambda == 1.0 {
        out.copy_from_slice(x0);
    } else if lambda == 0.0 {
        out.copy_from_slice(x1);
    } else {
        let b = (1.0 - lambda * lambda).sqrt();
        for ((o, a), c) in out.iter_mut().zip(x0).zip(x1) {
            *o = lambda * a + b * c;
        }
    }
}

/// Per-bridge classifier training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    /// Interpolation pairs per step; each pair yields one sample per class.
    pub batch_size: usize,
    /// Total optimizer steps, split evenly across bridges.
    pub steps: usize,
    pub optimizer: OptimizerKind,
    /// Start bridge `k+1` from the trained weights of bridge `k`.
    pub warm_start: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::paper()
    }
}

impl TrainConfig {
    /// 2x256 ELU layers, batch 128, 30k steps, cosine annealing from 1e-5.
    pub fn paper() -> Self {
        Self {
            hidden: vec![256, 256],
            learning_rate: 1e-5,
            batch_size: 128,
            steps: 30_000,
            optimizer: OptimizerKind::Adam,
            warm_start: true,
            seed: 0,
        }
    }

    /// Small desk-scale profile: 2x64 layers, 5k steps.
    pub fn fast() -> Self {
        Self {
            hidden: vec![64, 64],
            learning_rate: 2e-3,
            batch_size: 128,
            steps: 5_000,
            optimizer: OptimizerKind::Adam,
            warm_start: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(invalid("hidden", "widths must be positive"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(invalid("learning_rate", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be positive"));
        }
        if self.steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// Trained telescoping estimator of `ln P₁(x)/P₀(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimator {
    pub schedule: BridgeSchedule,
    pub classifiers: Vec<MlpParams>,
    pub clip_log_lo: f64,
    pub clip_log_hi: f64,
    /// Per-feature shift applied before the networks.
    pub input_mean: Vec<f64>,
    /// Per-feature scale applied before the networks.
    pub input_scale: Vec<f64>,
    /// Mean training loss over the last 10% of steps, per bridge; empty
    /// when the estimator was not produced by training.
    #[serde(default)]
    pub final_losses: Vec<f64>,
}

impl RatioEstimator {
    /// Assembles an estimator from parts, checking the invariants.
    pub fn from_parts(
        schedule: BridgeSchedule,
        classifiers: Vec<MlpParams>,
        clip_lo: f64,
        clip_hi: f64,
        input_mean: Vec<f64>,
        input_scale: Vec<f64>,
    ) -> Result<Self> {
        let est = Self {
            final_losses: Vec::new(),
            schedule,
            classifiers,
            clip_log_lo: clip_lo.ln(),
            clip_log_hi: clip_hi.ln(),
            input_mean,
            input_scale,
        };
        est.validate()?;
        Ok(est)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clip_log_lo < self.clip_log_hi) {
            return Err(invalid("clip", "need ln c < ln C"));
        }
        if self.classifiers.len() != self.schedule.bridges() {
            return Err(invalid(
                "classifiers",
                format!("{} classifiers for {} bridges", self.classifiers.len(), self.schedule.bridges()),
            ));
        }
        let d = self.input_mean.len();
        if self.input_scale.len() != d || self.input_scale.iter().any(|s| !(*s > 0.0)) {
            return Err(invalid("input_scale", "must be positive, one per feature"));
        }
        if self.classifiers.iter().any(|c| c.input_dim() != d) {
            return Err(invalid("classifiers", "input dimension differs from feature count"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.input_mean.len()
    }

    fn standardize(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = (x[i] - self.input_mean[i]) / self.input_scale[i];
        }
    }

    /// Unclipped telescoping sum of bridge logits.
    pub fn raw_log_ratio(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(TriadError::DimMismatch { expected: self.dim(), got: x.len() });
        }
        let mut z = vec![0.0; x.len()];
        self.standardize(x, &mut z);
        Ok(self.classifiers.iter().map(|c| c.forward(&z)).sum())
    }

    /// Clipped estimate of `ln P₁(x)/P₀(x)`.
    pub fn log_ratio(&self, x: &[f64]) -> Result<f64> {
        Ok(self.raw_log_ratio(x)?.clamp(self.clip_log_lo, self.clip_log_hi))
    }

    /// Clipped log-ratios for every row of `samples`.
    pub fn log_ratios(&self, samples: &Matrix) -> Result<Vec<f64>> {
        samples.iter_rows().map(|x| self.log_ratio(x)).collect()
    }
}

/// Free-function form of [`RatioEstimator::log_ratio`].
pub fn log_ratio(est: &RatioEstimator, x: &[f64]) -> Result<f64> {
    est.log_ratio(x)
}

/// Exact `ln d₁(x) − ln d₀(x)` from known densities.
pub fn analytic_log_ratio(d0: &dyn Density, d1: &dyn Density, x: &[f64]) -> Result<f64> {
    if d0.dim() != x.len() || d1.dim() != x.len() {
        return Err(TriadError::DimMismatch { expected: d0.dim(), got: x.len() });
    }
    let l0 = d0.log_density(x);
    if l0 == f64::NEG_INFINITY {
        return Err(TriadError::ZeroDensity);
    }
    Ok(d1.log_density(x) - l0)
}

fn feature_scaling(p0: &Matrix, p1: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let d = p0.cols();
    let n = (p0.rows() + p1.rows()) as f64;
    let mut mean = vec![0.0; d];
    for r in p0.iter_rows().chain(p1.iter_rows()) {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for r in p0.iter_rows().chain(p1.iter_rows()) {
        for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let scale = var
        .iter()
        .map(|v| {
            let s = (v / n).sqrt();
            if s > 1e-12 && s.is_finite() {
                s
            } else {
                1.0
            }
        })
        .collect();
    (mean, scale)
}

/// Trains one classifier per bridge on interpolated samples.
///
/// Each step draws `batch_size` `(x₀, x₁)` pairs from a per-epoch random
/// matching of the two sample sets and interpolates every pair at both
/// `λ_k` (label 0) and `λ_{k+1}` (label 1). Deterministic for a fixed
/// `cfg.seed`.
pub fn train_ratio_estimator(
    samples_p0: &Matrix,
    samples_p1: &Matrix,
    schedule: &BridgeSchedule,
    cfg: &TrainConfig,
    clip: (f64, f64),
) -> Result<RatioEstimator> {
    cfg.validate()?;
    if samples_p0.is_empty() || samples_p1.is_empty() {
        return Err(TriadError::Empty("training samples".into()));
    }
    if samples_p0.cols() != samples_p1.cols() {
        return Err(TriadError::DimMismatch { expected: samples_p0.cols(), got: samples_p1.cols() });
    }
    if !(clip.0 > 0.0 && clip.0 < clip.1) {
        return Err(invalid("clip", format!("need 0 < c < C, got {clip:?}")));
    }
    if !samples_p0.all_finite() || !samples_p1.all_finite() {
        return Err(TriadError::NonFinite("training samples".into()));
    }

    let (input_mean, input_scale) = feature_scaling(samples_p0, samples_p1);
    let standardize = |m: &Matrix| {
        let mut out = m.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - input_mean[j]) / input_scale[j];
            }
        }
        out
    };
    let z0 = standardize(samples_p0);
    let z1 = standardize(samples_p1);

    let d = samples_p0.cols();
    let k_bridges = schedule.bridges();
    let base_steps = cfg.steps / k_bridges;
    let extra = cfg.steps % k_bridges;

    let mut classifiers = Vec::with_capacity(k_bridges);
    let mut final_losses = Vec::with_capacity(k_bridges);
    let mut prev: Option<MlpParams> = None;
    for k in 0..k_bridges {
        let steps = (base_steps + usize::from(k < extra)).max(1);
        let mut rng = SeededRng::with_stream(cfg.seed, k as u64);
        let init = match (&prev, cfg.warm_start) {
            (Some(p), true) => p.clone(),
            _ => MlpParams::new(d, &cfg.hidden, &mut rng)?,
        };
        let (lam_a, lam_b) = (schedule.lambdas()[k], schedule.lambdas()[k + 1]);
        let (net, loss) = train_bridge(&z0, &z1, lam_a, lam_b, init, steps, cfg, &mut rng)
            .map_err(|e| match e {
                TriadError::Diverged(m) => TriadError::Diverged(format!("bridge {k}: {m}")),
                e => e,
            })?;
        prev = Some(net.clone());
        classifiers.push(net);
        final_losses.push(loss);
    }

    let mut est = RatioEstimator::from_parts(schedule.clone(), classifiers, clip.0, clip.1, input_mean, input_scale)?;
    est.final_losses = final_losses;
    Ok(est)
}

/// Endless stream of random `(i₀, i₁)` index pairs, reshuffled every epoch.
struct Pairing {
    n0: usize,
    n1: usize,
    perm0: Vec<usize>,
    perm1: Vec<usize>,
    pos: usize,
}

impl Pairing {
    fn new(n0: usize, n1: usize, rng: &mut SeededRng) -> Self {
        Self {
            n0,
            n1,
            perm0: rng.permutation(n0),
            perm1: rng.permutation(n1),
            pos: 0,
        }
    }

    fn next(&mut self, rng: &mut SeededRng) -> (usize, usize) {
        if self.pos == self.n0.max(self.n1) {
            rng.shuffle(&mut self.perm0);
            rng.shuffle(&mut self.perm1);
            self.pos = 0;
        }
        let p = (self.perm0[self.pos % self.n0], self.perm1[self.pos % self.n1]);
        self.pos += 1;
        p
    }
}

#[allow(clippy::too_many_arguments)]
fn train_bridge(
    z0: &Matrix,
    z1: &Matrix,
    lam_a: f64,
    lam_b: f64,
    mut net: MlpParams,
    steps: usize,
    cfg: &TrainConfig,
    rng: &mut SeededRng,
) -> Result<(MlpParams, f64)> {
    let d = z0.cols();
    let m = cfg.batch_size;
    let mut pairing = Pairing::new(z0.rows(), z1.rows(), rng);
    let mut opt = mlp::Optimizer::new(cfg.optimizer, net.num_params());
    let mut grad = vec![0.0; net.num_params()];
    let mut xs = Matrix::zeros(2 * m, d);
    let mut labels = vec![0.0; 2 * m];
    let tail = (steps / 10).max(1);
    let mut tail_loss = 0.0;

    for step in 0..steps {
        for i in 0..m {
            let (a, b) = pairing.next(rng);
            let (x0, x1) = (z0.row(a), z1.row(b));
            interpolate_into(x0, x1, lam_a, xs.row_mut(2 * i));
            interpolate_into(x0, x1, lam_b, xs.row_mut(2 * i + 1));
            labels[2 * i] = 0.0;
            labels[2 * i + 1] = 1.0;
        }
        let loss = net.logistic_loss_grad(xs.iter_rows().zip(labels.iter().copied()), &mut grad);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(TriadError::Diverged(format!("non-finite loss at step {step}")));
        }
        if step + tail >= steps {
            tail_loss += loss;
        }
        let lr = mlp::cosine_lr(cfg.learning_rate, step, steps);
        opt.step(net.params_mut(), &grad, lr);
    }
    Ok((net, tail_loss / tail as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::IsoGaussian;

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let (a, b) = ([0.3, -1.0], [2.0, 5.0]);
        assert_eq!(interpolate(&a, &b, 1.0).unwrap(), a.to_vec());
        assert_eq!(interpolate(&a, &b, 0.0).unwrap(), b.to_vec());
        let m = interpolate(&[0.0, 0.0], &[1.0, 1.0], 0.6).unwrap();
        assert!((m[0] - 0.8).abs() < 1e-15 && (m[1] - 0.8).abs() < 1e-15);
        assert!(interpolate(&a, &b, 1.1).is_err());
        assert!(interpolate(&a, &[1.0], 0.5).is_err());
    }

    #[test]
    fn schedule_validation() {
        let s = BridgeSchedule::uniform(4).unwrap();
        assert_eq!(s.lambdas(), &[1.0, 0.75, 0.5, 0.25, 0.0]);
        assert_eq!(s.bridges(), 4);
        assert!(BridgeSchedule::new(vec![1.0, 0.5, 0.5, 0.0]).is_err());
        assert!(BridgeSchedule::new(vec![0.9, 0.0]).is_err());
        assert!(BridgeSchedule::uniform(0).is_err());
    }

    fn zero_estimator(d: usize, k: usize) -> RatioEstimator {
        RatioEstimator::from_parts(
            BridgeSchedule::uniform(k).unwrap(),
            (0..k).map(|_| MlpParams::zeros(d, &[3]).unwrap()).collect(),
            DEFAULT_CLIP_LO,
            DEFAULT_CLIP_HI,
            vec![0.0; d],
            vec![1.0; d],
        )
        .unwrap()
    }

    #[test]
    fn zero_classifiers_give_zero_log_ratio() {
        let est = zero_estimator(2, 3);
        assert_eq!(est.log_ratio(&[1.0, 2.0]).unwrap(), 0.0);
        assert!(est.log_ratio(&[1.0]).is_err());
    }

    #[test]
    fn log_ratio_is_clipped() {
        // single bridge whose logit is the output bias
        let mut est = zero_estimator(1, 1);
        let n = est.classifiers[0].num_params();
        est.classifiers[0].params_mut()[n - 1] = 12.0;
        assert!((est.log_ratio(&[0.0]).unwrap() - 1e4f64.ln()).abs() < 1e-12);
        assert!((est.log_ratio(&[0.0]).unwrap() - 9.2103).abs() < 1e-4);
        est.classifiers[0].params_mut()[n - 1] = -12.0;
        assert!((est.log_ratio(&[0.0]).unwrap() + 9.2103).abs() < 1e-4);
        assert_eq!(est.raw_log_ratio(&[0.0]).unwrap(), -12.0);
    }

    #[test]
    fn analytic_log_ratio_examples() {
        let a = IsoGaussian::scalar(0.0, 1.0).unwrap();
        let b = IsoGaussian::scalar(1.0, 1.0).unwrap();
        assert!(analytic_log_ratio(&a, &b, &[0.5]).unwrap().abs() < 1e-15);
        assert!((analytic_log_ratio(&a, &b, &[0.0]).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(analytic_log_ratio(&a, &a, &[3.3]).unwrap(), 0.0);
        assert!(analytic_log_ratio(&a, &b, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn estimator_invariants_checked() {
        let s = BridgeSchedule::uniform(2).unwrap();
        let c = vec![MlpParams::zeros(1, &[2]).unwrap()];
        assert!(RatioEstimator::from_parts(s.clone(), c.clone(), 1e-4, 1e4, vec![0.0], vec![1.0]).is_err());
        let c2 = vec![c[0].clone(), c[0].clone()];
        assert!(RatioEstimator::from_parts(s.clone(), c2.clone(), 1e4, 1e-4, vec![0.0], vec![1.0]).is_err());
        assert!(RatioEstimator::from_parts(s, c2, 1e-4, 1e4, vec![0.0], vec![1.0]).is_ok());
    }

    #[test]
    fn training_rejects_bad_inputs() {
        let a = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let b = Matrix::from_rows(&[[0.0, 1.0]]).unwrap();
        let s = BridgeSchedule::uniform(1).unwrap();
        let cfg = TrainConfig { steps: 2, ..TrainConfig::fast() };
        assert!(train_ratio_estimator(&a, &b, &s, &cfg, (1e-4, 1e4)).is_err());
        assert!(train_ratio_estimator(&a, &Matrix::empty(1), &s, &cfg, (1e-4, 1e4)).is_err());
        let bad = TrainConfig { steps: 0, ..cfg };
        assert!(train_ratio_estimator(&a, &a, &s, &bad, (1e-4, 1e4)).is_err());
    }
}
