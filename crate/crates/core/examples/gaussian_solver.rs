//! Chernoff Information between full-covariance Gaussians, checked against the
//! isotropic closed form, plus the Bayes-error bound it implies.
//!
//!     cargo run --release --example gaussian_solver

use triad::gaussian::{bayes_error_bound, chernoff_full_gaussian, chernoff_iso_pair, FullGaussian, IsoGaussian};
use triad::gaussian::DEFAULT_SKEW_TOL;
use triad::linalg::Matrix;

fn main() -> triad::Result<()> {
    // Equal isotropic covariances: the optimum sits at u = 1/2.
    let a = IsoGaussian::new(vec![0.0, 0.0], 1.0)?;
    let b = IsoGaussian::new(vec![1.0, 1.0], 1.0)?;
    let closed = chernoff_iso_pair(&a, &b)?;
    let solved = chernoff_full_gaussian(&a.to_full(), &b.to_full(), DEFAULT_SKEW_TOL)?;
    println!("iso closed form {:.6}, solver {:.6} at u = {:.4}", closed.value, solved.value, solved.optimal_u);

    // Unequal variances in 5-D: no closed form, the skew moves off 1/2.
    let p = FullGaussian::isotropic(vec![0.0; 5], 0.5)?;
    let q = FullGaussian::isotropic(vec![1.0; 5], 1.0)?;
    let c = chernoff_full_gaussian(&p, &q, DEFAULT_SKEW_TOL)?;
    println!("5-D N(0, I/2) vs N(1, I): C = {:.6} at u = {:.4}", c.value, c.optimal_u);
    println!("  Bayes error (equal priors) <= {:.4}", bayes_error_bound(c.value)?);

    // A correlated pair.
    let cov = Matrix::from_rows(&[[2.0, 0.8], [0.8, 1.0]])?;
    let r = FullGaussian::new(vec![0.0, 0.0], cov)?;
    let s = FullGaussian::isotropic(vec![1.5, -0.5], 1.0)?;
    let c = chernoff_full_gaussian(&r, &s, DEFAULT_SKEW_TOL)?;
    println!("correlated 2-D pair: C = {:.6} at u = {:.4}", c.value, c.optimal_u);
    Ok(())
}
