//! Full neural pipeline: trains a telescoping ratio estimator on samples only,
//! estimates the Chernoff Information, and round-trips the estimator file.
//!
//!     cargo run --release --example cine_neural

use triad::cine::{estimate_chernoff, estimate_group, EstimationConfig};
use triad::density::Density;
use triad::dre::{self, BridgeSchedule, TrainConfig};
use triad::gaussian::IsoGaussian;
use triad::rng::SeededRng;

fn main() -> triad::Result<()> {
    let sigma2 = 1.0;
    let d0 = IsoGaussian::new(vec![0.0, 0.0], sigma2)?;
    let d1 = IsoGaussian::new(vec![1.0, 1.0], sigma2)?;
    let x0 = d0.sample(10_000, &mut SeededRng::with_stream(3, 0));
    let x1 = d1.sample(10_000, &mut SeededRng::with_stream(3, 1));
    let truth = 2.0 / (8.0 * sigma2);

    let cfg = EstimationConfig { repeats: 3, ..EstimationConfig::fast() };
    let e = estimate_group(&x0, &x1, &cfg, 42)?;
    println!("C = {:.4} ± {:.4} (closed form {truth:.4}), u* = {:.3}", e.value, e.std, e.optimal_u);
    println!("per repeat: {:?}", e.repeats);

    // One estimator by hand, saved and reloaded.
    let schedule = BridgeSchedule::uniform(cfg.bridges)?;
    let train = TrainConfig { seed: 9, ..TrainConfig::fast() };
    let est = dre::train_ratio_estimator(&x0, &x1, &schedule, &train, cfg.clip)?;
    let path = std::env::temp_dir().join("triad-example.dre");
    dre::save_estimator(&est, &path)?;
    let back = dre::load_estimator(&path)?;
    let lr = back.log_ratios(&x0)?;
    println!("reloaded estimator: C = {:.4}", estimate_chernoff(&lr, cfg.tol)?.value);
    println!("log r at origin {:.4}, exact {:.4}", back.log_ratio(&[0.0, 0.0])?, -1.0 / sigma2);
    Ok(())
}
