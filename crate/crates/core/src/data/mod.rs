//! Datasets, group/label quads, synthetic generators, CSV ingestion, scaling
//! and PCA.
//!
//! The sensitive attribute `S` picks the group (`S = 0` is P, `S = 1` is Q)
//! and `Y` the class, so `P₀ = X | S=0, Y=0` and so on.

mod ingest;
mod pca;
mod scale;
mod synthetic;

pub use ingest::{load_csv, read_csv, CsvSpec, LoadReport, RowRule, ValueRule};
pub use pca::{pca_project, Pca};
pub use scale::ScalerParams;
pub use synthetic::{sample_quad, MixtureQuad, QuadSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TriadError};
use crate::linalg::Matrix;
use crate::privacy;
use crate::rng::{self, SeededRng};

/// One of the four `(S, Y)` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    P0,
    P1,
    Q0,
    Q1,
}

impl Cell {
    pub const ALL: [Cell; 4] = [Cell::P0, Cell::P1, Cell::Q0, Cell::Q1];

    pub fn from_sy(s: u8, y: u8) -> Self {
        match (s, y) {
            (0, 0) => Cell::P0,
            (0, _) => Cell::P1,
            (_, 0) => Cell::Q0,
            _ => Cell::Q1,
        }
    }

    /// `(S, Y)` of the cell.
    pub fn sy(self) -> (u8, u8) {
        match self {
            Cell::P0 => (0, 0),
            Cell::P1 => (0, 1),
            Cell::Q0 => (1, 0),
            Cell::Q1 => (1, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cell::P0 => "P0 (S=0, Y=0)",
            Cell::P1 => "P1 (S=0, Y=1)",
            Cell::Q0 => "Q0 (S=1, Y=0)",
            Cell::Q1 => "Q1 (S=1, Y=1)",
        }
    }
}

/// Group identifier: P is `S = 0`, Q is `S = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    P,
    Q,
}

impl Group {
    pub fn s(self) -> u8 {
        match self {
            Group::P => 0,
            Group::Q => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Group::P => Group::Q,
            Group::Q => Group::P,
        }
    }

    pub fn cells(self) -> (Cell, Cell) {
        match self {
            Group::P => (Cell::P0, Cell::P1),
            Group::Q => (Cell::Q0, Cell::Q1),
        }
    }
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::P => "P",
            Group::Q => "Q",
        }
    }
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Feature matrix with binary labels and binary group membership.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub groups: Vec<u8>,
    pub columns: Vec<String>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<u8>, groups: Vec<u8>, columns: Vec<String>) -> Result<Self> {
        let n = features.rows();
        for len in [labels.len(), groups.len()] {
            if len != n {
                return Err(TriadError::DimMismatch { expected: n, got: len });
            }
        }
        if columns.len() != features.cols() {
            return Err(TriadError::DimMismatch { expected: features.cols(), got: columns.len() });
        }
        if labels.iter().chain(&groups).any(|&v| v > 1) {
            return Err(crate::error::invalid("labels/groups", "must be 0 or 1"));
        }
        Ok(Self { features, labels, groups, columns })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            groups: idx.iter().map(|&i| self.groups[i]).collect(),
            columns: self.columns.clone(),
        }
    }

    /// Seeded shuffle into `(train, test)` with `round(n · test_fraction)`
    /// test rows.
    pub fn train_test_split(&self, test_fraction: f64, seed: u64) -> Result<(Self, Self)> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(crate::error::invalid("test_fraction", format!("{test_fraction} must lie in (0, 1)")));
        }
        let perm = SeededRng::new(seed).permutation(self.len());
        let n_test = ((self.len() as f64) * test_fraction).round() as usize;
        let (test, train) = perm.split_at(n_test);
        Ok((self.select(train), self.select(test)))
    }

    /// Row indices falling into each cell, in row order.
    pub fn cell_indices(&self) -> [Vec<usize>; 4] {
        let mut out: [Vec<usize>; 4] = Default::default();
        for i in 0..self.len() {
            let c = Cell::from_sy(self.groups[i], self.labels[i]);
            out[c as usize].push(i);
        }
        out
    }
}

/// Partitions a dataset into its four `(S, Y)` cells.
pub fn split_groups(ds: &Dataset) -> Result<QuadSamples> {
    let idx = ds.cell_indices();
    let empty: Vec<&str> = Cell::ALL.iter().filter(|c| idx[**c as usize].is_empty()).map(|c| c.name()).collect();
    if !empty.is_empty() {
        return Err(TriadError::EmptyCell {
            cell: empty.join(", "),
            reason: format!("no rows among {} with that (S, Y)", ds.len()),
        });
    }
    QuadSamples::new(
        ds.features.select_rows(&idx[0]),
        ds.features.select_rows(&idx[1]),
        ds.features.select_rows(&idx[2]),
        ds.features.select_rows(&idx[3]),
    )
}

/// Samples for each of the four conditionals.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadSamples {
    pub p0: Matrix,
    pub p1: Matrix,
    pub q0: Matrix,
    pub q1: Matrix,
}

impl QuadSamples {
    pub fn new(p0: Matrix, p1: Matrix, q0: Matrix, q1: Matrix) -> Result<Self> {
        let d = p0.cols();
        for m in [&p1, &q0, &q1] {
            if m.cols() != d {
                return Err(TriadError::DimMismatch { expected: d, got: m.cols() });
            }
        }
        Ok(Self { p0, p1, q0, q1 })
    }

    pub fn dim(&self) -> usize {
        self.p0.cols()
    }

    pub fn cell(&self, c: Cell) -> &Matrix {
        match c {
            Cell::P0 => &self.p0,
            Cell::P1 => &self.p1,
            Cell::Q0 => &self.q0,
            Cell::Q1 => &self.q1,
        }
    }

    pub fn group(&self, g: Group) -> (&Matrix, &Matrix) {
        let (a, b) = g.cells();
        (self.cell(a), self.cell(b))
    }

    pub fn sizes(&self) -> [usize; 4] {
        Cell::ALL.map(|c| self.cell(c).rows())
    }

    /// Fails naming every empty cell.
    pub fn check_nonempty(&self) -> Result<()> {
        let empty: Vec<&str> = Cell::ALL.iter().filter(|c| self.cell(**c).is_empty()).map(|c| c.name()).collect();
        if empty.is_empty() {
            Ok(())
        } else {
            Err(TriadError::EmptyCell { cell: empty.join(", "), reason: "no samples".into() })
        }
    }

    /// Every cell perturbed with independent `N(0, eta2 I)` noise.
    pub fn with_noise(&self, eta2: f64, seed: u64) -> Result<Self> {
        let noisy = |c: Cell| privacy::perturb_inputs(self.cell(c), eta2, rng::derive_seed(seed, c as u64));
        Self::new(noisy(Cell::P0)?, noisy(Cell::P1)?, noisy(Cell::Q0)?, noisy(Cell::Q1)?)
    }

    /// Stacks the cells back into one dataset (cell order P0, P1, Q0, Q1).
    pub fn to_dataset(&self) -> Result<Dataset> {
        let mut features = Matrix::empty(self.dim());
        let mut labels = Vec::new();
        let mut groups = Vec::new();
        for c in Cell::ALL {
            let (s, y) = c.sy();
            for r in self.cell(c).iter_rows() {
                features.push_row(r)?;
                labels.push(y);
                groups.push(s);
            }
        }
        let columns = (0..self.dim()).map(|j| format!("x{j}")).collect();
        Dataset::new(features, labels, groups, columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_rows() -> Dataset {
        let f = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
        Dataset::new(f, vec![0, 1, 0, 1], vec![0, 0, 1, 1], vec!["x".into()]).unwrap()
    }

    #[test]
    fn one_row_per_cell() {
        let q = split_groups(&four_rows()).unwrap();
        assert_eq!(q.sizes(), [1, 1, 1, 1]);
        assert_eq!(q.q1.row(0), &[3.0]);
    }

    #[test]
    fn empty_cells_are_named() {
        let mut ds = four_rows();
        ds.groups = vec![0; 4];
        match split_groups(&ds) {
            Err(TriadError::EmptyCell { cell, .. }) => {
                assert!(cell.contains("Q0") && cell.contains("Q1") && !cell.contains("P0"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_through_dataset_is_partition() {
        let q = split_groups(&four_rows()).unwrap();
        let back = split_groups(&q.to_dataset().unwrap()).unwrap();
        assert_eq!(q, back);
    }

    #[test]
    fn split_sizes() {
        let f = Matrix::from_vec(10, 1, (0..10).map(f64::from).collect()).unwrap();
        let ds = Dataset::new(f, vec![0; 10], vec![0; 10], vec!["x".into()]).unwrap();
        let (tr, te) = ds.train_test_split(0.2, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        let mut all: Vec<f64> = tr.features.as_slice().iter().chain(te.features.as_slice()).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(f64::from).collect::<Vec<_>>());
    }
}
