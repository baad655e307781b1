//! (epsilon, delta) to noise-variance conversion, and logistic regression
//! trained on inputs perturbed once with that noise.
//!
//!     cargo run --release --example privacy_budget

use triad::data::sample_quad;
use triad::privacy::{budget_table, epsilon_from_eta, noisy_sgd, Loss, SgdConfig};
use triad::presets;

fn main() -> triad::Result<()> {
    for r in budget_table(&[0.25, 0.5, 0.9], &[1e-5, 1e-7])? {
        println!("eps = {:<5} delta = {:<6e} -> eta2 = {:.3}", r.epsilon, r.delta, r.eta2);
    }
    println!("eta2 = 4 at delta 1e-5 buys eps = {:.3}", epsilon_from_eta(4.0, 1e-5)?);

    // Group P of the Case 3 quad, scaled into the unit ball.
    let spec = presets::quad("gaussian-case3")?;
    let q = sample_quad(&spec, 2_000, 4)?;
    let ds = q.to_dataset()?;
    let scale = ds.features.iter_rows().map(|r| r[0].abs()).fold(0.0, f64::max);
    let mut x = ds.features.clone();
    for i in 0..x.rows() {
        x.row_mut(i)[0] /= scale;
    }
    for eta2 in [0.0, 0.05, 0.5] {
        let cfg = SgdConfig { batch_size: 64, learning_rate: 0.5, steps: 3_000, eta2, seed: 8 };
        let theta = noisy_sgd(&x, &ds.labels, Loss::Logistic, &cfg, &[0.0, 0.0])?;
        let acc = (0..x.rows())
            .filter(|&i| ((theta[0] * x.row(i)[0] + theta[1] > 0.0) as u8) == ds.labels[i])
            .count() as f64
            / x.rows() as f64;
        println!("eta2 = {eta2:<4}: w = {:+.3}, b = {:+.3}, clean accuracy {acc:.4}", theta[0], theta[1]);
    }
    Ok(())
}
