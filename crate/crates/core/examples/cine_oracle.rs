//! The Chernoff estimator on exact log-ratios: convergence in the sample size
//! for 1-D N(0, 1) vs N(1, 1), where C = 1/8.
//!
//!     cargo run --release --example cine_oracle

use triad::cine::{estimate_group_oracle, DEFAULT_TOL};
use triad::density::Density;
use triad::gaussian::IsoGaussian;
use triad::rng::SeededRng;

fn main() -> triad::Result<()> {
    let d0 = IsoGaussian::scalar(0.0, 1.0)?;
    let d1 = IsoGaussian::scalar(1.0, 1.0)?;
    for n in [1_000, 10_000, 100_000, 1_000_000] {
        let x0 = d0.sample(n, &mut SeededRng::new(11));
        let e = estimate_group_oracle(&x0, &d0, &d1, DEFAULT_TOL)?;
        println!("n = {n:>7}: C = {:.5} (error {:+.5}), u* = {:.4}", e.value, e.value - 0.125, e.optimal_u);
    }
    Ok(())
}
