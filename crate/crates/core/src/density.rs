//! Analytic densities with samplers: full-covariance Gaussians and finite
//! Gaussian mixtures. These back the synthetic generators and serve as the
//! exact log-ratio oracle for the neural estimator.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TriadError};
use crate::gaussian::FullGaussian;
use crate::linalg::Matrix;
use crate::rng::SeededRng;

/// A normalized density on `R^d` that can be evaluated and sampled.
pub trait Density: Send + Sync {
    fn dim(&self) -> usize;

    /// Natural log of the density at `x`. May be `-inf` far in the tails.
    fn log_density(&self, x: &[f64]) -> f64;

    /// Writes one draw into `out` (length `dim`).
    fn sample_into(&self, rng: &mut SeededRng, out: &mut [f64]);

    fn sample(&self, n: usize, rng: &mut SeededRng) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(n, d);
        for i in 0..n {
            self.sample_into(rng, m.row_mut(i));
        }
        m
    }
}

/// One weighted component of a mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub gaussian: FullGaussian,
}

/// Finite mixture of full-covariance Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<MixtureComponent>", into = "Vec<MixtureComponent>")]
pub struct GaussianMixture {
    components: Vec<MixtureComponent>,
    weights: Vec<f64>,
}

impl GaussianMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| TriadError::Empty("mixture has no components".into()))?;
        let d = first.gaussian.dim();
        let mut total = 0.0;
        for c in &components {
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(invalid("weight", format!("{} must be positive", c.weight)));
            }
            if c.gaussian.dim() != d {
                return Err(TriadError::DimMismatch {
                    expected: d,
                    got: c.gaussian.dim(),
                });
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("weights", format!("sum to {total}, expected 1")));
        }
        let weights = components.iter().map(|c| c.weight).collect();
        Ok(Self {
            components,
            weights,
        })
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// The mixture after convolving every component with `N(0, eta2 I)`.
    pub fn with_noise(&self, eta2: f64) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| {
                Ok(MixtureComponent {
                    weight: c.weight,
                    gaussian: c.gaussian.with_noise(eta2)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    /// Component index chosen for a draw, exposed for proportion checks.
    pub fn sample_component(&self, rng: &mut SeededRng) -> usize {
        rng.categorical(&self.weights)
    }
}

impl TryFrom<Vec<MixtureComponent>> for GaussianMixture {
    type Error = TriadError;
    fn try_from(c: Vec<MixtureComponent>) -> Result<Self> {
        Self::new(c)
    }
}

impl From<GaussianMixture> for Vec<MixtureComponent> {
    fn from(m: GaussianMixture) -> Self {
        m.components
    }
}

impl Density for GaussianMixture {
    fn dim(&self) -> usize {
        self.components[0].gaussian.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .components
            .iter()
            .map(|c| c.weight.ln() + c.gaussian.log_density(x))
            .collect();
        log_sum_exp(&terms)
    }

    fn sample_into(&self, rng: &mut SeededRng, out: &mut [f64]) {
        let k = self.sample_component(rng);
        self.components[k].gaussian.sample_into(rng, out);
    }
}

/// `ln Σ exp(x_i)`, shifted by the maximum. Returns `-inf` for an empty or
/// all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso(mean: Vec<f64>, var: f64) -> FullGaussian {
        FullGaussian::isotropic(mean, var).unwrap()
    }

    #[test]
    fn single_component_mixture_matches_gaussian() {
        let g = iso(vec![1.0, -1.0], 2.0);
        let m = GaussianMixture::new(vec![MixtureComponent { weight: 1.0, gaussian: g.clone() }]).unwrap();
        let x = [0.3, 0.4];
        assert!((m.log_density(&x) - g.log_density(&x)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_weights() {
        let g = iso(vec![0.0], 1.0);
        let c = |w| MixtureComponent { weight: w, gaussian: g.clone() };
        assert!(GaussianMixture::new(vec![c(0.5), c(0.4)]).is_err());
        assert!(GaussianMixture::new(vec![c(-0.5), c(1.5)]).is_err());
        assert!(GaussianMixture::new(vec![]).is_err());
    }

    #[test]
    fn log_sum_exp_is_stable() {
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
