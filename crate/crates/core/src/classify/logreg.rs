use serde::{Deserialize, Serialize};

use crate::dre::mlp::{sigmoid, softplus};
use crate::error::{invalid, Result, TriadError};
use crate::linalg::{self, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub max_steps: usize,
    /// Stop once the gradient norm falls below this.
    pub grad_tol: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self { max_steps: 2000, grad_tol: 1e-6 }
    }
}

/// Linear logistic model `P(Y=1|x) = σ(w·x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub class_weights: (f64, f64),
    pub steps: usize,
}

impl LogRegModel {
    pub fn logit(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.weights, x) + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> u8 {
        u8::from(self.logit(x) >= 0.0)
    }
}

/// Class-weighted mean logistic loss, normalized by the total weight, and its
/// gradient (weights then bias).
fn loss_grad(theta: &[f64], x: &Matrix, y: &[u8], cw: (f64, f64)) -> (f64, Vec<f64>) {
    let d = x.cols();
    let mut g = vec![0.0; d + 1];
    let (mut loss, mut total) = (0.0, 0.0);
    for (r, &t) in x.iter_rows().zip(y) {
        let w = if t > 0 { cw.1 } else { cw.0 };
        let z = linalg::dot(&theta[..d], r) + theta[d];
        let t = f64::from(t);
        loss += w * (softplus(z) - t * z);
        let e = w * (sigmoid(z) - t);
        g.iter_mut().zip(r).for_each(|(gi, v)| *gi += e * v);
        g[d] += e;
        total += w;
    }
    g.iter_mut().for_each(|gi| *gi /= total);
    (loss / total, g)
}

/// Full-batch gradient descent with Armijo backtracking from zero weights.
/// Deterministic: no sampling is involved.
pub fn fit_logreg(x: &Matrix, y: &[u8], class_weights: (f64, f64), cfg: &LogRegConfig) -> Result<LogRegModel> {
    if y.len() != x.rows() {
        return Err(TriadError::DimMismatch { expected: x.rows(), got: y.len() });
    }
    if !x.all_finite() {
        return Err(TriadError::NonFinite("features".into()));
    }
    let (w0, w1) = class_weights;
    if !(w0 > 0.0 && w1 > 0.0 && w0.is_finite() && w1.is_finite()) {
        return Err(invalid("class_weights", format!("{class_weights:?} must be positive")));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(invalid("labels", "both classes must be present"));
    }
    let d = x.cols();
    let mut theta = vec![0.0; d + 1];
    let (mut loss, mut g) = loss_grad(&theta, x, y, class_weights);
    let mut step = 1.0;
    let mut steps = 0;
    while steps < cfg.max_steps {
        let gn2 = linalg::dot(&g, &g);
        if gn2.sqrt() < cfg.grad_tol {
            break;
        }
        step *= 2.0;
        loop {
            let trial: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
            let (l, gt) = loss_grad(&trial, x, y, class_weights);
            if l <= loss - 0.5 * step * gn2 || step < 1e-12 {
                theta = trial;
                loss = l;
                g = gt;
                break;
            }
            step *= 0.5;
        }
        steps += 1;
    }
    let bias = theta.pop().expect("theta holds the bias");
    Ok(LogRegModel { weights: theta, bias, class_weights, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Matrix, Vec<u8>) {
        let x = Matrix::from_rows(&[[-2.0, -1.0], [-1.0, -2.0], [-1.5, 0.5], [1.0, 2.0], [2.0, 1.0], [0.5, 1.5]]).unwrap();
        (x, vec![0, 0, 0, 1, 1, 1])
    }

    fn overlapping() -> (Matrix, Vec<u8>) {
        let x = Matrix::from_rows(&[[-1.0], [0.0], [0.5], [1.0], [-0.5], [0.2], [1.5], [2.0]]).unwrap();
        (x, vec![0, 0, 0, 0, 1, 1, 1, 1])
    }

    #[test]
    fn separable_data_fit_perfectly() {
        let (x, y) = toy();
        let m = fit_logreg(&x, &y, (1.0, 1.0), &LogRegConfig::default()).unwrap();
        assert!(x.iter_rows().zip(&y).all(|(r, &t)| m.predict(r) == t));
    }

    #[test]
    fn heavier_positive_weight_predicts_more_positives() {
        let (x, y) = overlapping();
        let cfg = LogRegConfig::default();
        let pos = |w| {
            let m = fit_logreg(&x, &y, (1.0, w), &cfg).unwrap();
            x.iter_rows().filter(|r| m.predict(r) == 1).count()
        };
        assert!(pos(1e6) >= pos(1.0));
        assert_eq!(pos(1e6), 8);
    }

    #[test]
    fn duplicated_data_gives_same_model() {
        let (x, y) = overlapping();
        let mut x2 = x.clone();
        for r in x.iter_rows() {
            x2.push_row(r).unwrap();
        }
        let y2: Vec<u8> = y.iter().chain(&y).copied().collect();
        let cfg = LogRegConfig::default();
        let a = fit_logreg(&x, &y, (1.0, 2.0), &cfg).unwrap();
        let b = fit_logreg(&x2, &y2, (1.0, 2.0), &cfg).unwrap();
        assert!((a.bias - b.bias).abs() < 1e-9);
        assert!((a.weights[0] - b.weights[0]).abs() < 1e-9);
    }

    #[test]
    fn converges_on_overlap() {
        let (x, y) = overlapping();
        let m = fit_logreg(&x, &y, (1.0, 1.0), &LogRegConfig::default()).unwrap();
        let mut t = m.weights.clone();
        t.push(m.bias);
        let (_, g) = loss_grad(&t, &x, &y, (1.0, 1.0));
        assert!(linalg::dot(&g, &g).sqrt() < 1e-6);
        assert!(fit_logreg(&x, &[0; 8], (1.0, 1.0), &LogRegConfig::default()).is_err());
    }
}
