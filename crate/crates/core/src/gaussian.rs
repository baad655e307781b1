//! Closed-form Chernoff quantities for Gaussian classes.
//!
//! For two isotropic Gaussians sharing a variance, the Chernoff Information
//! is attained at skew `u = 1/2` and equals `‖μ₀ − μ₁‖² / (8σ²)`. Adding
//! independent `N(0, η²I)` noise to every class simply inflates each variance
//! by `η²`, which gives the noisy Chernoff Difference in closed form and the
//! three-way classification of how it responds to `η²` ([`classify_case`]).
//!
//! For general Gaussians the skewed Bhattacharyya distance has a closed form
//! and is concave in the skew, so the Chernoff Information is found by a 1-D
//! golden-section search ([`chernoff_full_gaussian`]).

use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{invalid, Result, TriadError};
use crate::linalg::{self, Cholesky, Matrix};
use crate::optimize;
use crate::rng::SeededRng;

/// Default u-tolerance of the golden-section Chernoff solver.
pub const DEFAULT_SKEW_TOL: f64 = 1e-7;

/// Isotropic Gaussian `N(mean, variance · I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IsoGaussianRepr")]
pub struct IsoGaussian {
    mean: Vec<f64>,
    variance: f64,
}

#[derive(Deserialize)]
struct IsoGaussianRepr {
    mean: Vec<f64>,
    variance: Option<f64>,
    std: Option<f64>,
}

impl TryFrom<IsoGaussianRepr> for IsoGaussian {
    type Error = TriadError;
    fn try_from(r: IsoGaussianRepr) -> Result<Self> {
        let variance = match (r.variance, r.std) {
            (Some(v), None) => v,
            (None, Some(s)) => s * s,
            _ => return Err(invalid("variance", "give exactly one of `variance` or `std`")),
        };
        Self::new(r.mean, variance)
    }
}

impl IsoGaussian {
    pub fn new(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if mean.is_empty() {
            return Err(TriadError::Empty("mean vector".into()));
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(invalid("variance", format!("{variance} must be positive and finite")));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(TriadError::NonFinite("mean".into()));
        }
        Ok(Self { mean, variance })
    }

    /// 1-D convenience constructor from a mean and a standard deviation.
    pub fn scalar(mean: f64, std: f64) -> Result<Self> {
        Self::new(vec![mean], std * std)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn with_noise(&self, eta2: f64) -> Result<Self> {
        check_eta2(eta2)?;
        Self::new(self.mean.clone(), self.variance + eta2)
    }

    pub fn to_full(&self) -> FullGaussian {
        FullGaussian::isotropic(self.mean.clone(), self.variance)
            .expect("isotropic Gaussian with positive variance is SPD")
    }
}

impl Density for IsoGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.dim() as f64;
        -0.5 * linalg::sq_dist(x, &self.mean) / self.variance
            - 0.5 * d * (2.0 * std::f64::consts::PI * self.variance).ln()
    }

    fn sample_into(&self, rng: &mut SeededRng, out: &mut [f64]) {
        let s = self.variance.sqrt();
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o = rng.normal(*m, s);
        }
    }
}

/// The four class conditionals: group P (`p0`, `p1`) shares variance σ², group
/// Q (`q0`, `q1`) shares τ².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IsoGaussianQuadRepr")]
pub struct IsoGaussianQuad {
    pub p0: IsoGaussian,
    pub p1: IsoGaussian,
    pub q0: IsoGaussian,
    pub q1: IsoGaussian,
}

#[derive(Deserialize)]
struct IsoGaussianQuadRepr {
    p0: IsoGaussian,
    p1: IsoGaussian,
    q0: IsoGaussian,
    q1: IsoGaussian,
}

impl TryFrom<IsoGaussianQuadRepr> for IsoGaussianQuad {
    type Error = TriadError;
    fn try_from(r: IsoGaussianQuadRepr) -> Result<Self> {
        Self::new(r.p0, r.p1, r.q0, r.q1)
    }
}

impl IsoGaussianQuad {
    pub fn new(p0: IsoGaussian, p1: IsoGaussian, q0: IsoGaussian, q1: IsoGaussian) -> Result<Self> {
        let d = p0.dim();
        for g in [&p1, &q0, &q1] {
            if g.dim() != d {
                return Err(TriadError::DimMismatch { expected: d, got: g.dim() });
            }
        }
        if !same_variance(p0.variance, p1.variance) {
            return Err(TriadError::UnequalVariance(p0.variance, p1.variance));
        }
        if !same_variance(q0.variance, q1.variance) {
            return Err(TriadError::UnequalVariance(q0.variance, q1.variance));
        }
        Ok(Self { p0, p1, q0, q1 })
    }

    /// 1-D quad from means and standard deviations, as the figures state them.
    pub fn scalar(mu: (f64, f64), sigma: f64, zeta: (f64, f64), tau: f64) -> Result<Self> {
        Self::new(
            IsoGaussian::scalar(mu.0, sigma)?,
            IsoGaussian::scalar(mu.1, sigma)?,
            IsoGaussian::scalar(zeta.0, tau)?,
            IsoGaussian::scalar(zeta.1, tau)?,
        )
    }

    pub fn dim(&self) -> usize {
        self.p0.dim()
    }

    /// `p = ‖μ₀ − μ₁‖`.
    pub fn p_separation(&self) -> f64 {
        linalg::sq_dist(self.p0.mean(), self.p1.mean()).sqrt()
    }

    /// `q = ‖ζ₀ − ζ₁‖`.
    pub fn q_separation(&self) -> f64 {
        linalg::sq_dist(self.q0.mean(), self.q1.mean()).sqrt()
    }

    pub fn sigma2(&self) -> f64 {
        self.p0.variance
    }

    pub fn tau2(&self) -> f64 {
        self.q0.variance
    }

    /// Every conditional with `η²` added to its variance.
    pub fn with_noise(&self, eta2: f64) -> Result<Self> {
        Self::new(
            self.p0.with_noise(eta2)?,
            self.p1.with_noise(eta2)?,
            self.q0.with_noise(eta2)?,
            self.q1.with_noise(eta2)?,
        )
    }

    /// Means scaled by `k`, variances by `k²`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let s = |g: &IsoGaussian| IsoGaussian::new(g.mean.iter().map(|m| m * k).collect(), g.variance * k * k);
        Self::new(s(&self.p0)?, s(&self.p1)?, s(&self.q0)?, s(&self.q1)?)
    }
}

fn same_variance(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Gaussian with mean vector and SPD covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FullGaussianRepr", into = "FullGaussianRepr")]
pub struct FullGaussian {
    mean: Vec<f64>,
    covariance: Matrix,
    chol: Cholesky,
}

impl PartialEq for FullGaussian {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.covariance == other.covariance
    }
}

/// Covariance as written in config files: a scalar means `s · I`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovarianceRepr {
    Isotropic(f64),
    Full(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullGaussianRepr {
    pub mean: Vec<f64>,
    pub covariance: CovarianceRepr,
}

impl TryFrom<FullGaussianRepr> for FullGaussian {
    type Error = TriadError;
    fn try_from(r: FullGaussianRepr) -> Result<Self> {
        match r.covariance {
            CovarianceRepr::Isotropic(v) => Self::isotropic(r.mean, v),
            CovarianceRepr::Full(rows) => Self::new(r.mean, Matrix::from_rows(&rows)?),
        }
    }
}

impl From<FullGaussian> for FullGaussianRepr {
    fn from(g: FullGaussian) -> Self {
        let rows = g.covariance.iter_rows().map(<[f64]>::to_vec).collect();
        FullGaussianRepr {
            mean: g.mean,
            covariance: CovarianceRepr::Full(rows),
        }
    }
}

impl FullGaussian {
    pub fn new(mean: Vec<f64>, covariance: Matrix) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(TriadError::Empty("mean vector".into()));
        }
        if covariance.rows() != d || covariance.cols() != d {
            return Err(TriadError::DimMismatch { expected: d, got: covariance.rows() });
        }
        if !covariance.all_finite() || mean.iter().any(|m| !m.is_finite()) {
            return Err(TriadError::NonFinite("Gaussian parameters".into()));
        }
        if !covariance.is_symmetric(1e-10) {
            return Err(TriadError::NotSpd("covariance is not symmetric".into()));
        }
        let chol = Cholesky::new(&covariance)?;
        Ok(Self { mean, covariance, chol })
    }

    pub fn isotropic(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(invalid("variance", format!("{variance} must be positive")));
        }
        let mut c = Matrix::identity(mean.len());
        c.as_mut_slice().iter_mut().for_each(|x| *x *= variance);
        Self::new(mean, c)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn with_noise(&self, eta2: f64) -> Result<Self> {
        check_eta2(eta2)?;
        let mut c = self.covariance.clone();
        c.add_diagonal(eta2);
        Self::new(self.mean.clone(), c)
    }
}

impl Density for FullGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let d = self.dim() as f64;
        -0.5 * (self.chol.quad_form_inv(&diff) + self.chol.log_det() + d * (2.0 * std::f64::consts::PI).ln())
    }

    fn sample_into(&self, rng: &mut SeededRng, out: &mut [f64]) {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let l = self.chol.factor();
        for i in 0..d {
            out[i] = self.mean[i] + (0..=i).map(|k| l[(i, k)] * z[k]).sum::<f64>();
        }
    }
}

/// A Chernoff Information value in nats and the skew attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffValue {
    pub value: f64,
    pub optimal_u: f64,
}

/// Closed form for two isotropic Gaussians with a shared variance.
pub fn chernoff_iso_pair(g0: &IsoGaussian, g1: &IsoGaussian) -> Result<ChernoffValue> {
    if g0.dim() != g1.dim() {
        return Err(TriadError::DimMismatch { expected: g0.dim(), got: g1.dim() });
    }
    if !same_variance(g0.variance, g1.variance) {
        return Err(TriadError::UnequalVariance(g0.variance, g1.variance));
    }
    Ok(ChernoffValue {
        value: linalg::sq_dist(&g0.mean, &g1.mean) / (8.0 * g0.variance),
        optimal_u: 0.5,
    })
}

/// Signed noisy Chernoff Difference `C(P̃₀,P̃₁) − C(Q̃₀,Q̃₁)`.
pub fn noisy_cd_signed(quad: &IsoGaussianQuad, eta2: f64) -> Result<f64> {
    check_eta2(eta2)?;
    let p = quad.p_separation();
    let q = quad.q_separation();
    Ok(p * p / (8.0 * (quad.sigma2() + eta2)) - q * q / (8.0 * (quad.tau2() + eta2)))
}

/// Noisy Chernoff Difference after adding `N(0, η²I)` to every conditional.
pub fn noisy_cd(quad: &IsoGaussianQuad, eta2: f64) -> Result<f64> {
    noisy_cd_signed(quad, eta2).map(f64::abs)
}

fn check_eta2(eta2: f64) -> Result<()> {
    if eta2 >= 0.0 && eta2.is_finite() {
        Ok(())
    } else {
        Err(invalid("eta2", format!("{eta2} must be a finite non-negative variance")))
    }
}

/// How the noisy Chernoff Difference responds to growing `η²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// A single interior maximum.
    #[serde(rename = "Case1")]
    Maximum,
    /// Decays to zero at a reflection point, then rises to a maximum.
    #[serde(rename = "Case2")]
    MaximumAndReflection,
    /// Non-increasing over all `η² ≥ 0`.
    #[serde(rename = "Case3")]
    NonIncreasing,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseLabel::Maximum => "Case1",
            CaseLabel::MaximumAndReflection => "Case2",
            CaseLabel::NonIncreasing => "Case3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub label: CaseLabel,
    /// Mean separation of the better-separated group after orientation.
    pub p: f64,
    /// Mean separation of the other group.
    pub q: f64,
    /// Location of the maximum of the noisy CD (Case1, Case2).
    pub eta_max: Option<f64>,
    /// Where the noisy CD touches zero (Case2).
    pub eta_reflection: Option<f64>,
    /// True when groups were relabeled so that `p ≥ q`.
    pub swapped: bool,
}

/// Classifies the noisy-CD behaviour of an isotropic quad.
///
/// Groups are oriented so `p = ‖μ₀−μ₁‖ ≥ q = ‖ζ₀−ζ₁‖` (with σ², τ² following
/// their group). With `r = τ²/σ²` and `a = q/p`:
/// Case1 iff `a² < r < a < 1`, Case2 iff `r < a² < 1`, otherwise Case3.
/// Boundary equalities and `p == q` fall to Case3.
pub fn classify_case(quad: &IsoGaussianQuad) -> CaseReport {
    let (mut p, mut q) = (quad.p_separation(), quad.q_separation());
    let (mut s2, mut t2) = (quad.sigma2(), quad.tau2());
    let swapped = p < q;
    if swapped {
        std::mem::swap(&mut p, &mut q);
        std::mem::swap(&mut s2, &mut t2);
    }
    let case3 = CaseReport {
        label: CaseLabel::NonIncreasing,
        p,
        q,
        eta_max: None,
        eta_reflection: None,
        swapped,
    };
    if p == q || p == 0.0 {
        return case3;
    }
    let r = t2 / s2;
    let a = q / p;
    let eta_max = (s2 * q - t2 * p) / (p - q);
    if a * a < r && r < a && a < 1.0 {
        CaseReport {
            label: CaseLabel::Maximum,
            eta_max: Some(eta_max),
            ..case3
        }
    } else if r < a * a && a * a < 1.0 {
        CaseReport {
            label: CaseLabel::MaximumAndReflection,
            eta_max: Some(eta_max),
            eta_reflection: Some((q * q * s2 - p * p * t2) / (p * p - q * q)),
            ..case3
        }
    } else {
        case3
    }
}

/// Skewed Bhattacharyya distance `B_u = −ln ∫ g₀^{1−u} g₁^u` between two
/// Gaussians, in closed form:
/// `u(1−u)/2 · Δμᵀ Σ_u⁻¹ Δμ + ½ ln(det Σ_u / (det Σ₀^{1−u} det Σ₁^u))`
/// with `Σ_u = (1−u)Σ₀ + uΣ₁`.
pub fn skewed_bhattacharyya_gaussian(g0: &FullGaussian, g1: &FullGaussian, u: f64) -> Result<f64> {
    if g0.dim() != g1.dim() {
        return Err(TriadError::DimMismatch { expected: g0.dim(), got: g1.dim() });
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(invalid("u", format!("{u} outside [0, 1]")));
    }
    if u == 0.0 || u == 1.0 || g0 == g1 {
        return Ok(0.0);
    }
    let sigma_u = g0.covariance.lin_comb(1.0 - u, &g1.covariance, u)?;
    let chol = Cholesky::new(&sigma_u)
        .map_err(|e| TriadError::NotSpd(format!("mixed covariance at u={u}: {e}")))?;
    let dmu: Vec<f64> = g1.mean.iter().zip(&g0.mean).map(|(a, b)| a - b).collect();
    let mahal = chol.quad_form_inv(&dmu);
    let log_det_term = chol.log_det() - (1.0 - u) * g0.chol.log_det() - u * g1.chol.log_det();
    Ok((0.5 * u * (1.0 - u) * mahal + 0.5 * log_det_term).max(0.0))
}

/// Chernoff Information between two Gaussians: the maximum over `u ∈ [0,1]`
/// of the skewed Bhattacharyya distance, by golden-section search to width
/// `tol` in `u`.
pub fn chernoff_full_gaussian(g0: &FullGaussian, g1: &FullGaussian, tol: f64) -> Result<ChernoffValue> {
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("{tol} must be positive")));
    }
    if g0.dim() != g1.dim() {
        return Err(TriadError::DimMismatch { expected: g0.dim(), got: g1.dim() });
    }
    // Σ_u is a convex combination of SPD matrices, so evaluation cannot fail.
    let neg_b = |u: f64| -skewed_bhattacharyya_gaussian(g0, g1, u).unwrap_or(0.0);
    let m = optimize::golden_section(neg_b, 0.0, 1.0, tol);
    Ok(ChernoffValue {
        value: (-m.fx).max(0.0),
        optimal_u: m.x,
    })
}

/// Upper bound `e^{−C}` on the Bayes error for Chernoff Information `C`.
pub fn bayes_error_bound(ci: f64) -> Result<f64> {
    if !(ci >= 0.0) {
        return Err(invalid("ci", format!("{ci} must be non-negative")));
    }
    Ok((-ci).exp())
}

/// Bounds on an arithmetic rate gap from the corresponding log gap, for rates
/// in `[c, C]`: `c·|ln m_p − ln m_q| ≤ |m_p − m_q| ≤ C·|ln m_p − ln m_q|`.
pub fn gap_sandwich_bounds(m_p: f64, m_q: f64, c: f64, big_c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c < big_c && big_c.is_finite()) {
        return Err(invalid("c", format!("need 0 < c < C, got c={c}, C={big_c}")));
    }
    for (name, m) in [("m_p", m_p), ("m_q", m_q)] {
        if !(c..=big_c).contains(&m) {
            return Err(invalid(name, format!("{m} outside [{c}, {big_c}]")));
        }
    }
    let log_gap = (m_p.ln() - m_q.ln()).abs();
    Ok((c * log_gap, big_c * log_gap))
}
