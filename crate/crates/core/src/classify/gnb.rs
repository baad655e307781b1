use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TriadError};
use crate::linalg::Matrix;

/// Per-feature variances are floored here before use.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes for two classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub log_priors: [f64; 2],
}

/// Fits class means, population variances and empirical priors.
pub fn fit_gnb(x: &Matrix, y: &[u8]) -> Result<GnbModel> {
    if y.len() != x.rows() {
        return Err(TriadError::DimMismatch { expected: x.rows(), got: y.len() });
    }
    if !x.all_finite() {
        return Err(TriadError::NonFinite("features".into()));
    }
    let d = x.cols();
    let mut count = [0usize; 2];
    let mut sum = [vec![0.0; d], vec![0.0; d]];
    for (r, &c) in x.iter_rows().zip(y) {
        let c = usize::from(c > 0);
        count[c] += 1;
        sum[c].iter_mut().zip(r).for_each(|(s, v)| *s += v);
    }
    if count.iter().any(|&c| c < 2) {
        return Err(invalid("labels", format!("need at least 2 samples per class, got {count:?}")));
    }
    let means = [0, 1].map(|c| sum[c].iter().map(|s| s / count[c] as f64).collect::<Vec<_>>());
    let mut var = [vec![0.0; d], vec![0.0; d]];
    for (r, &c) in x.iter_rows().zip(y) {
        let c = usize::from(c > 0);
        for ((v, xi), m) in var[c].iter_mut().zip(r).zip(&means[c]) {
            *v += (xi - m) * (xi - m);
        }
    }
    let variances = [0, 1].map(|c| var[c].iter().map(|v| (v / count[c] as f64).max(VARIANCE_FLOOR)).collect::<Vec<_>>());
    let n = (count[0] + count[1]) as f64;
    let log_priors = [0, 1].map(|c| (count[c] as f64 / n).ln());
    Ok(GnbModel { means, variances, log_priors })
}

impl GnbModel {
    /// Equal-prior model from explicit class parameters.
    pub fn new(means: [Vec<f64>; 2], variances: [Vec<f64>; 2]) -> Result<Self> {
        let d = means[0].len();
        if means[1].len() != d || variances.iter().any(|v| v.len() != d) {
            return Err(invalid("means/variances", "all four vectors must share a length"));
        }
        let variances = variances.map(|v| v.into_iter().map(|s| s.max(VARIANCE_FLOOR)).collect());
        Ok(Self { means, variances, log_priors: [0.5f64.ln(); 2] })
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    fn log_joint(&self, c: usize, x: &[f64]) -> f64 {
        let ll: f64 = x
            .iter()
            .zip(&self.means[c])
            .zip(&self.variances[c])
            .map(|((v, m), s)| -0.5 * ((v - m) * (v - m) / s + (2.0 * std::f64::consts::PI * s).ln()))
            .sum();
        self.log_priors[c] + ll
    }

    /// Class-1 minus class-0 log posterior, with `log_prior_shift` added to
    /// the class-1 prior.
    pub fn log_odds(&self, x: &[f64], log_prior_shift: f64) -> f64 {
        self.log_joint(1, x) + log_prior_shift - self.log_joint(0, x)
    }

    /// Ties go to class 1.
    pub fn predict(&self, x: &[f64], log_prior_shift: f64) -> u8 {
        u8::from(self.log_odds(x, log_prior_shift) >= 0.0)
    }
}

pub fn predict_gnb(model: &GnbModel, x: &[f64], log_prior_shift: f64) -> u8 {
    model.predict(x, log_prior_shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_pair() -> GnbModel {
        GnbModel::new([vec![0.0], vec![2.0]], [vec![1.0], vec![1.0]]).unwrap()
    }

    #[test]
    fn spec_examples() {
        let m = unit_pair();
        assert_eq!(m.predict(&[1.0], 0.0), 1);
        assert_eq!(m.predict(&[0.5], 0.0), 0);
        for x in [-3.0, -1.0, 0.0, 2.5] {
            assert_eq!(m.predict(&[x], 10.0), 1);
        }
    }

    #[test]
    fn midpoint_threshold() {
        let m = unit_pair();
        for i in 0..=400 {
            let x = -1.0 + i as f64 * 0.01;
            let expect = u8::from(x >= 1.0);
            if (x - 1.0).abs() > 1e-12 {
                assert_eq!(m.predict(&[x], 0.0), expect, "x = {x}");
            }
        }
    }

    #[test]
    fn fit_recovers_parameters() {
        let x = Matrix::from_rows(&[[0.0], [2.0], [10.0], [14.0]]).unwrap();
        let m = fit_gnb(&x, &[0, 0, 1, 1]).unwrap();
        assert_eq!(m.means, [vec![1.0], vec![12.0]]);
        assert_eq!(m.variances, [vec![1.0], vec![4.0]]);
        assert!((m.log_priors[0] - 0.5f64.ln()).abs() < 1e-15);
        assert!(fit_gnb(&x, &[0, 0, 0, 1]).is_err());
        let c = Matrix::from_rows(&[[1.0], [1.0], [3.0], [3.0]]).unwrap();
        assert_eq!(fit_gnb(&c, &[0, 0, 1, 1]).unwrap().variances[0], vec![VARIANCE_FLOOR]);
    }
}
