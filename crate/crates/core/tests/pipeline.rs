use triad::density::Density;
use triad::dre::{analytic_log_ratio, train_ratio_estimator, BridgeSchedule, TrainConfig};
use triad::gaussian::FullGaussian;
use triad::rng::SeededRng;

const CLIP: (f64, f64) = (1e-6, 1e6);

fn small(steps: usize, seed: u64) -> TrainConfig {
    TrainConfig { hidden: vec![32, 32], steps, seed, ..TrainConfig::fast() }
}

#[test]
fn training_is_deterministic_per_seed() {
    let d0 = FullGaussian::isotropic(vec![0.0, 0.0], 1.0).unwrap();
    let d1 = FullGaussian::isotropic(vec![1.0, -1.0], 1.5).unwrap();
    let x0 = d0.sample(500, &mut SeededRng::new(1));
    let x1 = d1.sample(500, &mut SeededRng::new(2));
    let s = BridgeSchedule::uniform(4).unwrap();
    let a = train_ratio_estimator(&x0, &x1, &s, &small(200, 9), CLIP).unwrap();
    let b = train_ratio_estimator(&x0, &x1, &s, &small(200, 9), CLIP).unwrap();
    let c = train_ratio_estimator(&x0, &x1, &s, &small(200, 10), CLIP).unwrap();
    assert_eq!(a.log_ratios(&x0).unwrap(), b.log_ratios(&x0).unwrap());
    assert_ne!(a.log_ratios(&x0).unwrap(), c.log_ratios(&x0).unwrap());
}

#[test]
fn identical_samples_give_flat_ratio() {
    let d = FullGaussian::isotropic(vec![0.5], 1.0).unwrap();
    let x = d.sample(2000, &mut SeededRng::new(3));
    let s = BridgeSchedule::uniform(4).unwrap();
    let est = train_ratio_estimator(&x, &x, &s, &small(1000, 4), CLIP).unwrap();
    let lr = est.log_ratios(&x).unwrap();
    let mean = lr.iter().sum::<f64>() / lr.len() as f64;
    let mean_sq = lr.iter().map(|v| v * v).sum::<f64>() / lr.len() as f64;
    assert!(mean.abs() < 0.1 && mean_sq < 0.05, "mean {mean}, mean square {mean_sq}");
}

#[test]
fn one_dimensional_ratio_tracks_closed_form() {
    let d0 = FullGaussian::isotropic(vec![0.0], 1.0).unwrap();
    let d1 = FullGaussian::isotropic(vec![1.0], 1.0).unwrap();
    let x0 = d0.sample(4000, &mut SeededRng::new(5));
    let x1 = d1.sample(4000, &mut SeededRng::new(6));
    let s = BridgeSchedule::uniform(8).unwrap();
    let est = train_ratio_estimator(&x0, &x1, &s, &small(4000, 7), CLIP).unwrap();
    // Mean squared error over the bulk of the mixture.
    let grid: Vec<f64> = (0..=40).map(|i| -1.5 + 4.0 * i as f64 / 40.0).collect();
    let mse = grid
        .iter()
        .map(|&x| {
            let e = est.log_ratio(&[x]).unwrap() - analytic_log_ratio(&d0, &d1, &[x]).unwrap();
            e * e
        })
        .sum::<f64>()
        / grid.len() as f64;
    assert!(mse < 0.05, "mse {mse}");
}
