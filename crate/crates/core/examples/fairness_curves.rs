//! Split-GNB fairness-accuracy curves on the Case 1 quad at a few noise levels,
//! with the Pareto points and the accuracy-on-gap slope of each curve.
//!
//!     cargo run --release --example fairness_curves

use triad::classify::{curve_slope, sweep_curves, SweepConfig};
use triad::data::sample_quad;
use triad::presets;

fn main() -> triad::Result<()> {
    let spec = presets::quad("gaussian-case1")?;
    let train = sample_quad(&spec, 20_000, 1)?;
    let test = sample_quad(&spec, 20_000, 2)?;
    let cfg = SweepConfig { seed: 5, ..SweepConfig::default() };
    let curves = sweep_curves(&train, Some(&test), &[0.0, 0.5, 1.1], &cfg)?;
    for c in &curves {
        let slope = curve_slope(&c.points, c.gap).unwrap_or(f64::NAN);
        println!("eta2 = {}: {} Pareto points, slope {slope:.4} (swept {}, {} gap)", c.eta2, c.points.len(), c.swept_group, c.gap.name());
        for p in &c.points {
            println!("    acc {:.4}  gap {:.4}", p.accuracy, c.gap.of(p));
        }
    }
    Ok(())
}
