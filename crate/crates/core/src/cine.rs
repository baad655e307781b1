//! Chernoff Information from samples.
//!
//! With log-ratios `ℓᵢ = ln P₁(xᵢ)/P₀(xᵢ)` at draws `xᵢ ~ P₀`, the Monte
//! Carlo objective `f(u) = ln (1/n) Σ exp(u·ℓᵢ)` is convex in `u` with
//! `f(0) = 0`, and the Chernoff Information is `−min_{u∈[0,1]} f(u)`.
//! Ratios come either from a trained telescoping estimator or, for testing,
//! from the known densities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Group, QuadSamples, QuadSpec};
use crate::density::Density;
use crate::dre::{self, BridgeSchedule, TrainConfig};
use crate::error::{invalid, Result, TriadError};
use crate::linalg::Matrix;
use crate::optimize;
use crate::rng::derive_seed;

/// Default u-tolerance of the Brent search.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Repeats per estimate unless configured otherwise.
pub const DEFAULT_REPEATS: usize = 5;
/// `|f(1)|` above this marks trained ratios as badly normalized.
pub const CALIBRATION_GATE: f64 = 0.5;
/// Above this many dimensions the estimator is known to drift.
pub const HIGH_DIM_WARNING: usize = 20;

/// `ln (1/n) Σ exp(u·ℓᵢ)`, evaluated with the max shifted out.
pub fn chernoff_objective(log_ratios: &[f64], u: f64) -> Result<f64> {
    check_log_ratios(log_ratios)?;
    Ok(objective_unchecked(log_ratios, u))
}

fn check_log_ratios(log_ratios: &[f64]) -> Result<()> {
    if log_ratios.is_empty() {
        return Err(TriadError::Empty("log-ratios".into()));
    }
    if log_ratios.iter().any(|l| !l.is_finite()) {
        return Err(TriadError::NonFinite("log-ratios".into()));
    }
    Ok(())
}

fn objective_unchecked(log_ratios: &[f64], u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let m = log_ratios.iter().fold(f64::NEG_INFINITY, |a, &l| a.max(u * l));
    let s: f64 = log_ratios.iter().map(|&l| (u * l - m).exp()).sum();
    m + s.ln() - (log_ratios.len() as f64).ln()
}

/// One estimate, or the mean over repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffEstimate {
    pub value: f64,
    pub optimal_u: f64,
    pub n_samples: usize,
    pub repeats: Vec<f64>,
    pub std: f64,
    /// Set when trained ratios violate `E_{P₀}[r] = 1` badly.
    pub low_confidence: bool,
    pub dim: Option<usize>,
}

impl ChernoffEstimate {
    /// Averages single-run estimates; `std` is the sample standard deviation
    /// (0 for one repeat).
    pub fn aggregate(runs: &[ChernoffEstimate]) -> Result<Self> {
        if runs.is_empty() {
            return Err(TriadError::Empty("repeats".into()));
        }
        let values: Vec<f64> = runs.iter().map(|r| r.value).collect();
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            value: mean,
            optimal_u: runs.iter().map(|r| r.optimal_u).sum::<f64>() / k,
            n_samples: runs[0].n_samples,
            repeats: values,
            std,
            low_confidence: runs.iter().any(|r| r.low_confidence),
            dim: runs[0].dim,
        })
    }
}

/// `−min_{u∈[0,1]} f(u)` by Brent's method with u-tolerance `tol`.
pub fn estimate_chernoff(log_ratios: &[f64], tol: f64) -> Result<ChernoffEstimate> {
    check_log_ratios(log_ratios)?;
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let m = optimize::brent(|u| objective_unchecked(log_ratios, u), 0.0, 1.0, tol);
    // f(0) = 0 caps the minimum at 0; clamp rounding noise.
    let value = (-m.fx).max(0.0);
    Ok(ChernoffEstimate {
        value,
        optimal_u: m.x.clamp(0.0, 1.0),
        n_samples: log_ratios.len(),
        repeats: vec![value],
        std: 0.0,
        low_confidence: false,
        dim: None,
    })
}

/// Where the log-ratios come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatioSource {
    #[default]
    Trained,
    /// Exact densities of a known generator.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimationConfig {
    pub train: TrainConfig,
    pub bridges: usize,
    pub clip: (f64, f64),
    pub repeats: usize,
    pub tol: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            bridges: dre::DEFAULT_BRIDGES,
            clip: (dre::DEFAULT_CLIP_LO, dre::DEFAULT_CLIP_HI),
            repeats: DEFAULT_REPEATS,
            tol: DEFAULT_TOL,
        }
    }
}

impl EstimationConfig {
    pub fn fast() -> Self {
        Self { train: TrainConfig::fast(), ..Self::default() }
    }

    pub fn paper() -> Self {
        Self { train: TrainConfig::paper(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.repeats == 0 {
            return Err(invalid("repeats", "must be at least 1"));
        }
        if self.bridges == 0 {
            return Err(invalid("bridges", "must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "must be positive"));
        }
        Ok(())
    }
}

/// Trains a ratio estimator on `(x0, x1)` and estimates `C(P₀, P₁)` with the
/// expectation over all of `x0`. Repeat `r` trains with seed
/// `derive_seed(seed, r)`; repeats run in parallel.
pub fn estimate_group(x0: &Matrix, x1: &Matrix, cfg: &EstimationConfig, seed: u64) -> Result<ChernoffEstimate> {
    cfg.validate()?;
    let schedule = BridgeSchedule::uniform(cfg.bridges)?;
    let dim = x0.cols();
    if dim > HIGH_DIM_WARNING {
        log::warn!("estimating Chernoff information in {dim} dimensions; accuracy degrades above {HIGH_DIM_WARNING}");
    }
    let runs = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| {
            let train = TrainConfig { seed: derive_seed(seed, r as u64), ..cfg.train.clone() };
            let est = dre::train_ratio_estimator(x0, x1, &schedule, &train, cfg.clip)?;
            let lr = est.log_ratios(x0)?;
            let mut e = estimate_chernoff(&lr, cfg.tol)?;
            let f1 = objective_unchecked(&lr, 1.0);
            if f1.abs() > CALIBRATION_GATE {
                log::warn!("repeat {r}: ln E[r] = {f1:.3}; ratio estimate is poorly normalized");
                e.low_confidence = true;
            }
            e.dim = Some(dim);
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    ChernoffEstimate::aggregate(&runs)
}

/// Estimate with exact log-ratios `ln d1/d0` over the rows of `x0`.
pub fn estimate_group_oracle(x0: &Matrix, d0: &dyn Density, d1: &dyn Density, tol: f64) -> Result<ChernoffEstimate> {
    let lr = x0.iter_rows().map(|x| dre::analytic_log_ratio(d0, d1, x)).collect::<Result<Vec<_>>>()?;
    let mut e = estimate_chernoff(&lr, tol)?;
    e.dim = Some(x0.cols());
    Ok(e)
}

/// Both group estimates and their difference at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdEstimate {
    pub eta2: f64,
    pub p: ChernoffEstimate,
    pub q: ChernoffEstimate,
    pub cd: f64,
    /// `√(std_P² + std_Q²)`, treating the groups as independent.
    pub cd_std: f64,
}

impl CdEstimate {
    fn new(eta2: f64, p: ChernoffEstimate, q: ChernoffEstimate) -> Self {
        Self { eta2, cd: (p.value - q.value).abs(), cd_std: p.std.hypot(q.std), p, q }
    }

    pub fn group(&self, g: Group) -> &ChernoffEstimate {
        match g {
            Group::P => &self.p,
            Group::Q => &self.q,
        }
    }
}

/// Stream of `seed` used for the input perturbation in [`estimate_cd`].
pub const NOISE_STREAM: u64 = 0x6e6f697365;

/// Training seed of one group in [`estimate_cd`].
pub fn group_seed(seed: u64, g: Group) -> u64 {
    derive_seed(seed, 1 + g.s() as u64)
}

/// Perturbs every cell with `N(0, eta2 I)` and estimates the noisy Chernoff
/// Difference with trained ratios.
pub fn estimate_cd(samples: &QuadSamples, eta2: f64, cfg: &EstimationConfig, seed: u64) -> Result<CdEstimate> {
    samples.check_nonempty()?;
    let noisy = samples.with_noise(eta2, derive_seed(seed, NOISE_STREAM))?;
    let (p, q) = rayon::join(
        || estimate_group(&noisy.p0, &noisy.p1, cfg, group_seed(seed, Group::P)),
        || estimate_group(&noisy.q0, &noisy.q1, cfg, group_seed(seed, Group::Q)),
    );
    Ok(CdEstimate::new(eta2, p?, q?))
}

/// Oracle counterpart of [`estimate_cd`]: the samples are perturbed the same
/// way, and the ratios come from the generator's noise-convolved densities.
pub fn estimate_cd_oracle(samples: &QuadSamples, spec: &QuadSpec, eta2: f64, tol: f64, seed: u64) -> Result<CdEstimate> {
    samples.check_nonempty()?;
    let noisy = samples.with_noise(eta2, derive_seed(seed, NOISE_STREAM))?;
    let dens = spec.with_noise(eta2)?;
    use crate::data::Cell;
    let p = estimate_group_oracle(&noisy.p0, dens.density(Cell::P0), dens.density(Cell::P1), tol)?;
    let q = estimate_group_oracle(&noisy.q0, dens.density(Cell::Q0), dens.density(Cell::Q1), tol)?;
    Ok(CdEstimate::new(eta2, p, q))
}

/// One line of the estimate log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub group: String,
    pub eta2: f64,
    pub value: Option<f64>,
    pub optimal_u: Option<f64>,
    pub std: Option<f64>,
    pub n: usize,
    pub seed: u64,
    pub config_hash: String,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub low_confidence: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl EstimateRecord {
    pub fn from_estimate(group: &str, eta2: f64, e: &ChernoffEstimate, seed: u64, config_hash: &str) -> Self {
        Self {
            group: group.into(),
            eta2,
            value: Some(e.value),
            optimal_u: Some(e.optimal_u),
            std: Some(e.std),
            n: e.n_samples,
            seed,
            config_hash: config_hash.into(),
            low_confidence: e.low_confidence,
            error: None,
        }
    }

    pub fn failed(group: &str, eta2: f64, n: usize, seed: u64, config_hash: &str, err: &TriadError) -> Self {
        Self {
            group: group.into(),
            eta2,
            value: None,
            optimal_u: None,
            std: None,
            n,
            seed,
            config_hash: config_hash.into(),
            low_confidence: false,
            error: Some(err.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::IsoGaussian;
    use crate::rng::SeededRng;

    #[test]
    fn objective_examples() {
        let l = [2f64.ln(), 0.5f64.ln()];
        assert_eq!(chernoff_objective(&l, 0.0).unwrap(), 0.0);
        assert!((chernoff_objective(&l, 1.0).unwrap() - 1.25f64.ln()).abs() < 1e-12);
        assert_eq!(chernoff_objective(&[0.0; 5], 0.7).unwrap(), 0.0);
        assert!(chernoff_objective(&[], 0.5).is_err());
        assert!(chernoff_objective(&[f64::NAN], 0.5).is_err());
        assert!(chernoff_objective(&[1e6, -1e6], 0.9).unwrap().is_finite());
    }

    #[test]
    fn zero_and_symmetric_ratios() {
        let e = estimate_chernoff(&[0.0; 10], DEFAULT_TOL).unwrap();
        assert_eq!(e.value, 0.0);
        // −ℓ is e^ℓ times as frequent as ℓ, which makes f symmetric about ½.
        let l = 2f64.ln();
        let e = estimate_chernoff(&[l, -l, -l], DEFAULT_TOL).unwrap();
        assert!((e.optimal_u - 0.5).abs() < 1e-5);
        assert!((e.value - (3.0 / 8f64.sqrt()).ln()).abs() < 1e-12);
        // plain ±ℓ symmetry pushes the minimum to u = 0
        assert!(estimate_chernoff(&[1.0, -1.0], DEFAULT_TOL).unwrap().value < 1e-12);
    }

    #[test]
    fn oracle_gaussian_pair() {
        let a = IsoGaussian::scalar(0.0, 1.0).unwrap();
        let b = IsoGaussian::scalar(1.0, 1.0).unwrap();
        let x = a.sample(10_000, &mut SeededRng::new(3));
        let e = estimate_group_oracle(&x, &a, &b, DEFAULT_TOL).unwrap();
        assert!((e.value - 0.125).abs() < 0.02, "{}", e.value);
        assert!((e.optimal_u - 0.5).abs() < 0.1);
    }

    #[test]
    fn aggregate_stats() {
        let mk = |v| ChernoffEstimate { value: v, optimal_u: 0.5, n_samples: 3, repeats: vec![v], std: 0.0, low_confidence: false, dim: None };
        let a = ChernoffEstimate::aggregate(&[mk(1.0), mk(2.0), mk(3.0)]).unwrap();
        assert_eq!(a.value, 2.0);
        assert!((a.std - 1.0).abs() < 1e-15);
        assert_eq!(a.repeats, vec![1.0, 2.0, 3.0]);
    }
}
