use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Writes run artifacts into one directory, stamping each CSV with a comment
/// line carrying the tool version, config hash and seeds.
pub struct OutputDir {
    dir: PathBuf,
    header: String,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path, config_hash: &str, seeds: &[u64]) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let seeds = seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        Ok(Self {
            dir: dir.to_path_buf(),
            header: format!("# triad {} config_hash={config_hash} seeds={seeds}", crate::VERSION),
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// File names written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn csv<R: AsRef<[String]>>(&mut self, name: &str, columns: &[&str], rows: &[R]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path)?;
        writeln!(f, "{}", self.header)?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(columns)?;
        for r in rows {
            w.write_record(r.as_ref())?;
        }
        w.flush()?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn jsonl<T: Serialize>(&mut self, name: &str, records: &[T]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
        for r in records {
            serde_json::to_writer(&mut f, r)?;
            writeln!(f)?;
        }
        f.flush()?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.written.push(name.to_string());
        Ok(path)
    }
}

/// Shortest round-trip text for a float; empty for `None`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
