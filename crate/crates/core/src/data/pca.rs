use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TriadError};
use crate::linalg::{self, Matrix};

/// Fitted projection: `k` orthonormal components (rows) and the centering
/// mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
}

impl Pca {
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(TriadError::DimMismatch { expected: self.mean.len(), got: x.cols() });
        }
        let k = self.components.rows();
        let mut out = Matrix::zeros(x.rows(), k);
        let mut centered = vec![0.0; x.cols()];
        for i in 0..x.rows() {
            for ((c, v), m) in centered.iter_mut().zip(x.row(i)).zip(&self.mean) {
                *c = v - m;
            }
            for j in 0..k {
                out.row_mut(i)[j] = linalg::dot(self.components.row(j), &centered);
            }
        }
        Ok(out)
    }
}

/// Projects `x` onto its top-`k` principal components, computed from the
/// population covariance (Jacobi, or subspace iteration above 64 features).
pub fn pca_project(x: &Matrix, k: usize) -> Result<(Matrix, Pca)> {
    let d = x.cols();
    if k == 0 || k > d {
        return Err(invalid("k", format!("{k} must lie in 1..={d}")));
    }
    if x.rows() < 2 {
        return Err(invalid("rows", "PCA needs at least 2 rows"));
    }
    let eig = linalg::top_eigen(&x.covariance(), k)?;
    let mut components = Matrix::zeros(k, d);
    for j in 0..k {
        for i in 0..d {
            components.row_mut(j)[i] = eig.vectors[(i, j)];
        }
    }
    let explained_variance = eig.values[..k].iter().map(|v| v.max(0.0)).collect();
    let pca = Pca { mean: x.column_means(), components, explained_variance };
    Ok((pca.transform(x)?, pca))
}
