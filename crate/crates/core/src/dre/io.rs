//! On-disk estimator format: one magic line `TRIAD-DRE <version>` followed by
//! the estimator as a JSON document (schedule, MLP widths and flat weights,
//! clip bounds, input standardization).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::RatioEstimator;
use crate::error::{Result, TriadError};

pub const FORMAT_NAME: &str = "TRIAD-DRE";
pub const FORMAT_VERSION: u8 = 1;

pub fn write_estimator<W: Write>(est: &RatioEstimator, mut w: W) -> Result<()> {
    writeln!(w, "{FORMAT_NAME} {FORMAT_VERSION}")?;
    serde_json::to_writer(&mut w, est)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_estimator<R: Read>(r: R) -> Result<RatioEstimator> {
    let mut r = BufReader::new(r);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(FORMAT_NAME) {
        return Err(TriadError::Format("missing TRIAD-DRE magic header".into()));
    }
    let version: u8 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| TriadError::Format("unreadable format version".into()))?;
    if version != FORMAT_VERSION {
        return Err(TriadError::Format(format!("unsupported version {version}")));
    }
    let est: RatioEstimator = serde_json::from_reader(r)?;
    est.validate()?;
    Ok(est)
}

pub fn save_estimator(est: &RatioEstimator, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_estimator(est, std::io::BufWriter::new(f))
}

pub fn load_estimator(path: &Path) -> Result<RatioEstimator> {
    read_estimator(std::fs::File::open(path)?)
}
