//! Gaussian input perturbation and the η² ↔ (ε, δ) conversion.
//!
//! Adding `N(0, η²I)` to every input with `‖x‖₂ ≤ 1` is (ε, δ)-DP whenever
//! `η² ≥ 8 ln(1.25/δ) / ε²`. The bound is stated for `ε < 1`; larger ε is
//! computed but logged as outside that regime.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TriadError};
use crate::linalg::{self, Matrix};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
    pub eta2: f64,
}

impl PrivacyBudget {
    /// Smallest noise variance meeting (ε, δ).
    pub fn from_epsilon_delta(epsilon: f64, delta: f64) -> Result<Self> {
        Ok(Self { epsilon, delta, eta2: eta_from_budget(epsilon, delta)? })
    }

    /// The ε certified by `eta2` at a fixed δ.
    pub fn from_eta(eta2: f64, delta: f64) -> Result<Self> {
        Ok(Self { epsilon: epsilon_from_eta(eta2, delta)?, delta, eta2 })
    }

    /// True when `eta2` is at least the required variance (up to rounding).
    pub fn is_consistent(&self) -> bool {
        match eta_from_budget(self.epsilon, self.delta) {
            Ok(req) => self.eta2 >= req * (1.0 - 1e-12),
            Err(_) => false,
        }
    }
}

fn log_term(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} must lie in (0, 1)")));
    }
    Ok((1.25 / delta).ln())
}

/// `η² = 8 ln(1.25/δ) / ε²`.
pub fn eta_from_budget(epsilon: f64, delta: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid("epsilon", format!("{epsilon} must be positive and finite")));
    }
    let l = log_term(delta)?;
    if epsilon >= 1.0 {
        log::warn!("epsilon = {epsilon} is outside the eps < 1 regime of the Gaussian mechanism bound");
    }
    Ok(8.0 * l / (epsilon * epsilon))
}

/// Inverse of [`eta_from_budget`]: `ε = √(8 ln(1.25/δ) / η²)`.
pub fn epsilon_from_eta(eta2: f64, delta: f64) -> Result<f64> {
    if !(eta2 > 0.0) || !eta2.is_finite() {
        return Err(invalid("eta2", format!("{eta2} must be positive and finite")));
    }
    let eps = (8.0 * log_term(delta)? / eta2).sqrt();
    if eps >= 1.0 {
        log::warn!("eta2 = {eta2} only certifies epsilon = {eps:.4}, outside the eps < 1 regime");
    }
    Ok(eps)
}

pub(crate) fn check_eta2(eta2: f64) -> Result<()> {
    if !(eta2 >= 0.0) || !eta2.is_finite() {
        return Err(invalid("eta2", format!("{eta2} must be non-negative and finite")));
    }
    Ok(())
}

/// Returns `features + ξ` with `ξ ~ N(0, eta2 I)` drawn i.i.d. per entry.
/// `eta2 == 0` returns an exact copy.
pub fn perturb_inputs(features: &Matrix, eta2: f64, seed: u64) -> Result<Matrix> {
    check_eta2(eta2)?;
    let mut out = features.clone();
    if eta2 == 0.0 {
        return Ok(out);
    }
    let s = eta2.sqrt();
    let mut rng = SeededRng::new(seed);
    for v in out.as_mut_slice() {
        *v += s * rng.standard_normal();
    }
    Ok(out)
}

/// Largest row norm; the privacy guarantee assumes it is at most 1.
pub fn max_row_norm(features: &Matrix) -> f64 {
    features.iter_rows().map(|r| linalg::dot(r, r).sqrt()).fold(0.0, f64::max)
}

/// Logs a warning (and returns false) when some row has `‖x‖₂ > 1`, in which
/// case the (ε, δ) conversion does not certify the perturbation.
pub fn check_unit_norm(features: &Matrix) -> bool {
    let m = max_row_norm(features);
    if m > 1.0 {
        log::warn!("max row norm {m:.3} exceeds 1; the (eps, delta) conversion assumes unit-norm inputs");
        false
    } else {
        true
    }
}

/// Loss for [`noisy_sgd`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Logistic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SgdConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub steps: usize,
    pub eta2: f64,
    pub seed: u64,
}

/// Mean logistic loss of the linear model `θ = (w, b)` (bias last) and its
/// gradient over the given rows.
pub fn logistic_loss_grad(theta: &[f64], x: &Matrix, y: &[u8], rows: &[usize]) -> (f64, Vec<f64>) {
    let d = x.cols();
    let mut grad = vec![0.0; d + 1];
    let mut loss = 0.0;
    for &i in rows {
        let xi = x.row(i);
        let z = linalg::dot(&theta[..d], xi) + theta[d];
        let t = f64::from(y[i]);
        loss += crate::dre::mlp::softplus(z) - t * z;
        let r = crate::dre::mlp::sigmoid(z) - t;
        for (g, v) in grad.iter_mut().zip(xi) {
            *g += r * v;
        }
        grad[d] += r;
    }
    let inv = 1.0 / rows.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g *= inv);
    (loss * inv, grad)
}

/// Minibatch SGD on inputs perturbed once up front with `N(0, η² I)`.
/// Minibatches are drawn without replacement within each pass. Returns `θ_T`
/// (weights then bias); `steps == 0` returns `theta0` untouched.
pub fn noisy_sgd(x: &Matrix, y: &[u8], loss: Loss, cfg: &SgdConfig, theta0: &[f64]) -> Result<Vec<f64>> {
    let Loss::Logistic = loss;
    let n = x.rows();
    if n == 0 {
        return Err(TriadError::Empty("training set".into()));
    }
    if y.len() != n {
        return Err(TriadError::DimMismatch { expected: n, got: y.len() });
    }
    if theta0.len() != x.cols() + 1 {
        return Err(TriadError::DimMismatch { expected: x.cols() + 1, got: theta0.len() });
    }
    if cfg.batch_size == 0 || cfg.batch_size > n {
        return Err(invalid("batch_size", format!("{} must lie in 1..={n}", cfg.batch_size)));
    }
    if !(cfg.learning_rate > 0.0) {
        return Err(invalid("learning_rate", "must be positive"));
    }
    let mut theta = theta0.to_vec();
    if cfg.steps == 0 {
        return Ok(theta);
    }
    let noisy = perturb_inputs(x, cfg.eta2, crate::rng::derive_seed(cfg.seed, 0))?;
    let mut rng = SeededRng::new(crate::rng::derive_seed(cfg.seed, 1));
    let mut order = rng.permutation(n);
    let mut pos = 0;
    for t in 0..cfg.steps {
        if pos + cfg.batch_size > n {
            rng.shuffle(&mut order);
            pos = 0;
        }
        let batch = &order[pos..pos + cfg.batch_size];
        pos += cfg.batch_size;
        let (l, g) = logistic_loss_grad(&theta, &noisy, y, batch);
        if !l.is_finite() {
            return Err(TriadError::Diverged(format!("non-finite loss at step {t}")));
        }
        for (p, gi) in theta.iter_mut().zip(&g) {
            *p -= cfg.learning_rate * gi;
        }
    }
    Ok(theta)
}

/// One row of a budget table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetRow {
    pub epsilon: f64,
    pub delta: f64,
    pub eta2: f64,
}

/// Every (ε, δ) pair of the two grids with its required η².
pub fn budget_table(epsilons: &[f64], deltas: &[f64]) -> Result<Vec<BudgetRow>> {
    let mut rows = Vec::with_capacity(epsilons.len() * deltas.len());
    for &delta in deltas {
        for &epsilon in epsilons {
            rows.push(BudgetRow { epsilon, delta, eta2: eta_from_budget(epsilon, delta)? });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_examples() {
        assert!((eta_from_budget(1.0, 1e-5).unwrap() - 93.888_55).abs() < 1e-3);
        assert!((eta_from_budget(0.5, 1e-5).unwrap() - 375.554_2).abs() < 1e-3);
        assert!((eta_from_budget(2.0, 1e-5).unwrap() - 23.472_14).abs() < 1e-3);
        assert!(eta_from_budget(1.0, 1.25).is_err());
        assert!(eta_from_budget(0.0, 1e-5).is_err());
        assert!(epsilon_from_eta(0.0, 1e-5).is_err());
    }

    #[test]
    fn round_trip_and_monotonicity() {
        for &eps in &[0.01, 0.1, 0.5, 0.99, 3.0] {
            for &delta in &[1e-9, 1e-5, 0.01, 0.5] {
                let back = epsilon_from_eta(eta_from_budget(eps, delta).unwrap(), delta).unwrap();
                assert!((back - eps).abs() <= 1e-12 * eps);
            }
        }
        let a = eta_from_budget(0.5, 1e-5).unwrap();
        assert!(eta_from_budget(0.6, 1e-5).unwrap() < a);
        assert!(eta_from_budget(0.5, 1e-6).unwrap() > a);
    }

    #[test]
    fn zero_noise_is_identity_and_seeded() {
        let x = Matrix::from_rows(&[[0.1, 0.2], [0.3, -0.4]]).unwrap();
        assert_eq!(perturb_inputs(&x, 0.0, 3).unwrap(), x);
        assert_eq!(perturb_inputs(&x, 1.0, 3).unwrap(), perturb_inputs(&x, 1.0, 3).unwrap());
        assert_ne!(perturb_inputs(&x, 1.0, 3).unwrap(), perturb_inputs(&x, 1.0, 4).unwrap());
        assert!(perturb_inputs(&x, -1.0, 3).is_err());
    }

    #[test]
    fn noise_variance_and_mean() {
        let n = 1_000_000;
        let x = Matrix::zeros(n, 1);
        let z = perturb_inputs(&x, 4.0, 9).unwrap();
        let mean = z.as_slice().iter().sum::<f64>() / n as f64;
        let var = z.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 4.0).abs() < 0.04, "{var}");
        assert!(mean.abs() < 3.0 * 2.0 / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn unit_norm_check() {
        assert!(check_unit_norm(&Matrix::from_rows(&[[0.6, 0.8]]).unwrap()));
        assert!(!check_unit_norm(&Matrix::from_rows(&[[1.0, 1.0]]).unwrap()));
    }

    fn toy() -> (Matrix, Vec<u8>) {
        let x = Matrix::from_rows(&[[-2.0, -1.0], [-1.0, -1.5], [1.0, 1.2], [2.0, 0.5]]).unwrap();
        (x, vec![0, 0, 1, 1])
    }

    #[test]
    fn sgd_decreases_loss_and_handles_zero_steps() {
        let (x, y) = toy();
        let all: Vec<usize> = (0..4).collect();
        let mut theta = vec![0.0; 3];
        let mut prev = logistic_loss_grad(&theta, &x, &y, &all).0;
        for s in 1..20 {
            let cfg = SgdConfig { batch_size: 4, learning_rate: 0.1, steps: 1, eta2: 0.0, seed: s };
            theta = noisy_sgd(&x, &y, Loss::Logistic, &cfg, &theta).unwrap();
            let l = logistic_loss_grad(&theta, &x, &y, &all).0;
            assert!(l < prev);
            prev = l;
        }
        let cfg = SgdConfig { batch_size: 2, learning_rate: 0.1, steps: 0, eta2: 1.0, seed: 0 };
        assert_eq!(noisy_sgd(&x, &y, Loss::Logistic, &cfg, &[0.5, 0.5, 0.5]).unwrap(), vec![0.5; 3]);
    }

    #[test]
    fn sgd_noise_changes_result_and_gradient_matches_fd() {
        let (x, y) = toy();
        let base = SgdConfig { batch_size: 2, learning_rate: 0.1, steps: 10, eta2: 0.0, seed: 1 };
        let a = noisy_sgd(&x, &y, Loss::Logistic, &base, &[0.0; 3]).unwrap();
        let b = noisy_sgd(&x, &y, Loss::Logistic, &SgdConfig { eta2: 1.0, ..base.clone() }, &[0.0; 3]).unwrap();
        assert_ne!(a, b);

        let all: Vec<usize> = (0..4).collect();
        let theta = [0.3, -0.2, 0.1];
        let (_, g) = logistic_loss_grad(&theta, &x, &y, &all);
        for j in 0..3 {
            let h = 1e-6;
            let mut up = theta;
            up[j] += h;
            let mut dn = theta;
            dn[j] -= h;
            let fd = (logistic_loss_grad(&up, &x, &y, &all).0 - logistic_loss_grad(&dn, &x, &y, &all).0) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-5 * fd.abs().max(1e-3));
        }
    }

    #[test]
    fn table_rows() {
        let t = budget_table(&[0.5, 1.0, 2.0], &[1e-5]).unwrap();
        assert_eq!(t.len(), 3);
        assert!((t[1].eta2 - 93.889).abs() < 1e-3);
    }
}
