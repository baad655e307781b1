use serde::{Deserialize, Serialize};

use crate::error::{Result, TriadError};
use crate::linalg::Matrix;

/// Per-column standardization `(x − mean) / std` with the population std
/// (divide by n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub std_convention: String,
}

impl ScalerParams {
    /// Fits on `x`; `columns` only names a constant column in the error.
    pub fn fit(x: &Matrix, columns: &[String]) -> Result<Self> {
        if x.rows() == 0 {
            return Err(TriadError::Empty("scaler fit set".into()));
        }
        let n = x.rows() as f64;
        let mean = x.column_means();
        let mut std = vec![0.0; x.cols()];
        for r in x.iter_rows() {
            for (s, (v, m)) in std.iter_mut().zip(r.iter().zip(&mean)) {
                *s += (v - m) * (v - m);
            }
        }
        for (j, s) in std.iter_mut().enumerate() {
            *s = (*s / n).sqrt();
            if !(*s > 1e-12 * mean[j].abs().max(1.0)) {
                let name = columns.get(j).cloned().unwrap_or_else(|| format!("#{j}"));
                return Err(TriadError::ConstantColumn(name));
            }
        }
        Ok(Self { mean, std, std_convention: "population".into() })
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        self.apply(x, |v, m, s| (v - m) / s)
    }

    pub fn inverse_transform(&self, x: &Matrix) -> Result<Matrix> {
        self.apply(x, |v, m, s| v * s + m)
    }

    fn apply(&self, x: &Matrix, f: impl Fn(f64, f64, f64) -> f64) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(TriadError::DimMismatch { expected: self.mean.len(), got: x.cols() });
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = f(*v, self.mean[j], self.std[j]);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Matrix {
        Matrix::from_vec(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn one_two_three() {
        let x = col(&[1.0, 2.0, 3.0]);
        let s = ScalerParams::fit(&x, &[]).unwrap();
        let z = s.transform(&x).unwrap();
        for (a, b) in z.as_slice().iter().zip([-1.224_744_871, 0.0, 1.224_744_871]) {
            assert!((a - b).abs() < 1e-9);
        }
        let back = s.inverse_transform(&z).unwrap();
        for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
        let again = ScalerParams::fit(&z, &[]).unwrap().transform(&z).unwrap();
        for (a, b) in again.as_slice().iter().zip(z.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_column_rejected_by_name() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [2.0, 5.0]]).unwrap();
        match ScalerParams::fit(&x, &["a".into(), "b".into()]) {
            Err(TriadError::ConstantColumn(c)) => assert_eq!(c, "b"),
            other => panic!("{other:?}"),
        }
    }
}
