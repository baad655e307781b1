//! Built-in parameter sets, compiled in from `presets/*.json`.

use serde::{Deserialize, Serialize};

use crate::data::{CsvSpec, Group, QuadSpec};
use crate::error::{Result, TriadError};

const PRESETS: &[(&str, &str)] = &[
    ("gaussian-case1", include_str!("../presets/gaussian-case1.json")),
    ("gaussian-case2", include_str!("../presets/gaussian-case2.json")),
    ("gaussian-case3", include_str!("../presets/gaussian-case3.json")),
    ("gaussian-2d", include_str!("../presets/gaussian-2d.json")),
    ("mixture1", include_str!("../presets/mixture1.json")),
    ("mixture2", include_str!("../presets/mixture2.json")),
    ("adult-cols", include_str!("../presets/adult-cols.json")),
    ("hsls-cols", include_str!("../presets/hsls-cols.json")),
    ("mnist-pca", include_str!("../presets/mnist-pca.json")),
];

/// How a tabular dataset maps onto the four cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetPreset {
    pub csv: CsvSpec,
    /// Number of principal components kept before scaling.
    #[serde(default)]
    pub pca: Option<usize>,
    #[serde(default)]
    pub swept_group: Option<Group>,
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Raw JSON text of a preset.
pub fn text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| TriadError::Unknown { kind: "preset", name: name.into() })
}

/// A generator preset (`gaussian-*`, `mixture*`).
pub fn quad(name: &str) -> Result<QuadSpec> {
    let t = text(name)?;
    serde_json::from_str(t).map_err(|_| TriadError::Unknown { kind: "generator preset", name: name.into() })
}

/// A dataset preset (`adult-cols`, `hsls-cols`, `mnist-pca`).
pub fn dataset(name: &str) -> Result<DatasetPreset> {
    let t = text(name)?;
    serde_json::from_str(t).map_err(|_| TriadError::Unknown { kind: "dataset preset", name: name.into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_as_its_kind() {
        for n in names() {
            let ok = if n.ends_with("-cols") || n == "mnist-pca" { dataset(n).is_ok() } else { quad(n).is_ok() };
            assert!(ok, "{n}");
        }
        assert!(quad("adult-cols").is_err());
        assert!(matches!(quad("nope"), Err(TriadError::Unknown { .. })));
    }
}
