//! Tabular pipeline: read a CSV with a preset's row rule, standardize, split
//! into the four cells and draw logistic-regression curves.
//!
//!     cargo run --release --example csv_pipeline [path/to/adult.csv]

use std::path::PathBuf;

use triad::classify::{sweep_curves, ClassifierKind, SweepConfig};
use triad::data::{load_csv, split_groups, ScalerParams};
use triad::presets;

fn main() -> triad::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata/adult_sample.csv"));
    let preset = presets::dataset("adult-cols")?;
    let (ds, report) = load_csv(&path, &preset.csv)?;
    println!("{}: kept {} of {} rows ({} skipped, {} filtered)", path.display(), report.rows_kept, report.rows_read, report.rows_skipped, report.rows_filtered);

    let (train, test) = ds.train_test_split(0.2, 1)?;
    let scaler = ScalerParams::fit(&train.features, &train.columns)?;
    let (mut train, mut test) = (train, test);
    train.features = scaler.transform(&train.features)?;
    test.features = scaler.transform(&test.features)?;
    let (tr, te) = (split_groups(&train)?, split_groups(&test)?);
    println!("cell sizes (train): {:?}", tr.sizes());

    let cfg = SweepConfig { classifier: ClassifierKind::LogReg, swept_group: preset.swept_group, seed: 1, ..SweepConfig::default() };
    for c in sweep_curves(&tr, Some(&te), &[0.0, 0.5, 1.0], &cfg)? {
        let best = c.points.iter().map(|p| p.accuracy).fold(0.0, f64::max);
        println!("eta2 = {}: {} Pareto points, best accuracy {best:.3}", c.eta2, c.points.len());
    }
    Ok(())
}
