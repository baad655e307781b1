use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{invalid, Result, TriadError};
use crate::linalg::Matrix;

/// Maps a raw cell to true/false. Cells are compared after trimming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueRule {
    Equals(String),
    In(Vec<String>),
    NotIn(Vec<String>),
    /// Numeric column; true when the value is at or above this quantile
    /// (linear interpolation) of the loaded rows.
    AboveQuantile(f64),
}

/// How a row gets its label and group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowRule {
    /// `Y = label_rule(label)`, `S = group_rule(group)`.
    LabelGroup {
        label: String,
        label_rule: ValueRule,
        group: String,
        group_rule: ValueRule,
    },
    /// One categorical column assigns the whole `(S, Y)` cell, e.g. digit
    /// classes. Rows matching none of the lists are dropped.
    CellMap {
        column: String,
        p0: Vec<String>,
        p1: Vec<String>,
        q0: Vec<String>,
        q1: Vec<String>,
    },
}

impl RowRule {
    fn columns(&self) -> Vec<&str> {
        match self {
            RowRule::LabelGroup { label, group, .. } => vec![label, group],
            RowRule::CellMap { column, .. } => vec![column],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSpec {
    /// Feature columns in order; `None` takes every column the row rule does
    /// not use.
    #[serde(default)]
    pub features: Option<Vec<String>>,
    pub rows: RowRule,
}

/// Row accounting for one load.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    /// Rows with a non-numeric feature or an unreadable rule cell.
    pub rows_skipped: usize,
    /// Rows a cell map deliberately excludes.
    pub rows_filtered: usize,
}

pub fn load_csv(path: &Path, spec: &CsvSpec) -> Result<(Dataset, LoadReport)> {
    read_csv(std::fs::File::open(path)?, spec)
}

/// Reads a headered CSV into a dataset. Rows whose features do not parse as
/// finite numbers are skipped and counted.
pub fn read_csv<R: Read>(reader: R, spec: &CsvSpec) -> Result<(Dataset, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(false).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| TriadError::MissingColumn(name.to_string()))
    };
    let used = spec.rows.columns();
    let feature_names: Vec<String> = match &spec.features {
        Some(f) => f.clone(),
        None => header.iter().filter(|h| !used.contains(&h.as_str())).cloned().collect(),
    };
    if feature_names.is_empty() {
        return Err(invalid("features", "no feature columns selected"));
    }
    let feature_idx = feature_names.iter().map(|f| find(f)).collect::<Result<Vec<_>>>()?;
    let rule_idx = used.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;

    let mut report = LoadReport::default();
    let mut features = Matrix::empty(feature_idx.len());
    let mut rule_cells: Vec<Vec<String>> = Vec::new();
    let mut row = vec![0.0; feature_idx.len()];
    for rec in rdr.records() {
        let rec = rec?;
        report.rows_read += 1;
        let ok = feature_idx.iter().zip(row.iter_mut()).all(|(&j, v)| {
            match rec.get(j).and_then(|s| s.parse::<f64>().ok()) {
                Some(x) if x.is_finite() => {
                    *v = x;
                    true
                }
                _ => false,
            }
        });
        let cells: Option<Vec<String>> = rule_idx.iter().map(|&j| rec.get(j).filter(|s| !s.is_empty()).map(str::to_string)).collect();
        match (ok, cells) {
            (true, Some(c)) => {
                features.push_row(&row)?;
                rule_cells.push(c);
            }
            _ => report.rows_skipped += 1,
        }
    }

    let (labels, groups, keep) = apply_rule(&spec.rows, &rule_cells, &mut report)?;
    let features = if keep.len() == features.rows() { features } else { features.select_rows(&keep) };
    report.rows_kept = keep.len();
    if report.rows_skipped > 0 {
        log::warn!("skipped {} of {} rows with unreadable values", report.rows_skipped, report.rows_read);
    }
    Ok((Dataset::new(features, labels, groups, feature_names)?, report))
}

type Assigned = (Vec<u8>, Vec<u8>, Vec<usize>);

fn apply_rule(rule: &RowRule, cells: &[Vec<String>], report: &mut LoadReport) -> Result<Assigned> {
    match rule {
        RowRule::LabelGroup { label_rule, group_rule, label, group } => {
            let y = eval(label_rule, cells.iter().map(|c| c[0].as_str()), label)?;
            let s = eval(group_rule, cells.iter().map(|c| c[1].as_str()), group)?;
            Ok((y, s, (0..cells.len()).collect()))
        }
        RowRule::CellMap { p0, p1, q0, q1, .. } => {
            let (mut y, mut s, mut keep) = (Vec::new(), Vec::new(), Vec::new());
            for (i, c) in cells.iter().enumerate() {
                let v = c[0].as_str();
                let hit = [(p0, 0, 0), (p1, 0, 1), (q0, 1, 0), (q1, 1, 1)]
                    .into_iter()
                    .find(|(list, _, _)| list.iter().any(|l| l == v));
                match hit {
                    Some((_, si, yi)) => {
                        s.push(si);
                        y.push(yi);
                        keep.push(i);
                    }
                    None => report.rows_filtered += 1,
                }
            }
            Ok((y, s, keep))
        }
    }
}

fn eval<'a>(rule: &ValueRule, values: impl Iterator<Item = &'a str>, column: &str) -> Result<Vec<u8>> {
    let values: Vec<&str> = values.collect();
    Ok(match rule {
        ValueRule::Equals(t) => values.iter().map(|v| u8::from(v == t)).collect(),
        ValueRule::In(set) => values.iter().map(|v| u8::from(set.iter().any(|t| t == v))).collect(),
        ValueRule::NotIn(set) => values.iter().map(|v| u8::from(!set.iter().any(|t| t == v))).collect(),
        ValueRule::AboveQuantile(q) => {
            if !(0.0..=1.0).contains(q) {
                return Err(invalid("quantile", format!("{q} must lie in [0, 1]")));
            }
            let nums = values
                .iter()
                .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| TriadError::Format(format!("column `{column}` has non-numeric values")))?;
            let cut = quantile(&nums, *q);
            nums.iter().map(|&x| u8::from(x >= cut)).collect()
        }
    })
}

/// Linear-interpolation quantile; NaN for empty input.
fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label_group(label_rule: ValueRule, group_rule: ValueRule) -> CsvSpec {
        CsvSpec {
            features: Some(vec!["a".into(), "b".into()]),
            rows: RowRule::LabelGroup { label: "y".into(), label_rule, group: "g".into(), group_rule },
        }
    }

    const TEXT: &str = "a,b,y,g\n1,2,>50K,Female\n3,?,<=50K,Male\n5,6, <=50K ,Male\n7,8,>50K,Male\n";

    #[test]
    fn skips_bad_rows_and_applies_rules() {
        let spec = label_group(ValueRule::Equals(">50K".into()), ValueRule::Equals("Female".into()));
        let (ds, rep) = read_csv(TEXT.as_bytes(), &spec).unwrap();
        assert_eq!((rep.rows_read, rep.rows_kept, rep.rows_skipped), (4, 3, 1));
        assert_eq!(ds.labels, vec![1, 0, 1]);
        assert_eq!(ds.groups, vec![1, 0, 0]);
        assert_eq!(ds.features.row(1), &[5.0, 6.0]);
    }

    #[test]
    fn missing_column_is_named() {
        let mut spec = label_group(ValueRule::Equals("x".into()), ValueRule::Equals("x".into()));
        spec.features = Some(vec!["a".into(), "zzz".into()]);
        match read_csv(TEXT.as_bytes(), &spec) {
            Err(TriadError::MissingColumn(c)) => assert_eq!(c, "zzz"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quantile_and_not_in_rules() {
        let text = "a,score,race\n1,10,1\n2,20,2\n3,30,8\n4,40,3\n";
        let spec = CsvSpec {
            features: Some(vec!["a".into()]),
            rows: RowRule::LabelGroup {
                label: "score".into(),
                label_rule: ValueRule::AboveQuantile(0.5),
                group: "race".into(),
                group_rule: ValueRule::NotIn(vec!["2".into(), "8".into()]),
            },
        };
        let (ds, _) = read_csv(text.as_bytes(), &spec).unwrap();
        assert_eq!(ds.labels, vec![0, 0, 1, 1]);
        assert_eq!(ds.groups, vec![1, 0, 0, 1]);
    }

    #[test]
    fn cell_map_filters_other_values() {
        let text = "label,p0,p1\n0,1,2\n2,3,4\n5,0,0\n3,1,1\n7,9,9\n";
        let spec = CsvSpec {
            features: None,
            rows: RowRule::CellMap {
                column: "label".into(),
                p0: vec!["0".into()],
                p1: vec!["2".into()],
                q0: vec!["3".into()],
                q1: vec!["7".into()],
            },
        };
        let (ds, rep) = read_csv(text.as_bytes(), &spec).unwrap();
        assert_eq!(ds.columns, vec!["p0", "p1"]);
        assert_eq!(rep.rows_filtered, 1);
        assert_eq!(ds.labels, vec![0, 1, 0, 1]);
        assert_eq!(ds.groups, vec![0, 0, 1, 1]);
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[4.0, 1.0, 3.0, 2.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0], 0.3), 1.0);
    }
}
