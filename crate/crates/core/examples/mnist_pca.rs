//! Digit images as a four-cell problem: 784 pixels projected onto two
//! principal components, then split-GNB curves under growing noise.
//!
//!     cargo run --release --example mnist_pca [path/to/mnist.csv]

use std::path::PathBuf;

use triad::classify::{curve_slope, sweep_curves, SweepConfig};
use triad::data::{load_csv, pca_project, split_groups, ScalerParams};
use triad::presets;

fn main() -> triad::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata/mnist_sample.csv"));
    let preset = presets::dataset("mnist-pca")?;
    let (mut ds, report) = load_csv(&path, &preset.csv)?;
    println!("{} rows x {} pixels", report.rows_kept, ds.dim());

    let (z, pca) = pca_project(&ds.features, preset.pca.unwrap_or(2))?;
    println!("explained variance: {:?}", pca.explained_variance);
    let names = vec!["pc1".to_string(), "pc2".to_string()];
    ds.features = ScalerParams::fit(&z, &names)?.transform(&z)?;
    ds.columns = names;

    let quad = split_groups(&ds)?;
    let cfg = SweepConfig { seed: 3, ..SweepConfig::default() };
    for c in sweep_curves(&quad, None, &[0.0, 0.5, 1.0, 2.0], &cfg)? {
        println!("eta2 = {}: slope {:?}", c.eta2, curve_slope(&c.points, c.gap));
    }
    Ok(())
}
