//! Small dense linear algebra: a row-major matrix, Cholesky factorization for
//! SPD matrices, and a cyclic Jacobi eigensolver for symmetric matrices.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TriadError};

/// Largest dimension accepted by the SPD routines.
pub const MAX_SPD_DIM: usize = 64;

/// Dense row-major matrix. Also used as an `n x d` sample container, one
/// sample per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(TriadError::DimMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from rows; all rows must share a length. An empty
    /// slice gives a `0 x 0` matrix.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(TriadError::DimMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// An empty matrix with a fixed column count, for accumulating rows.
    pub fn empty(cols: usize) -> Self {
        Self {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact panics on a zero chunk size
        let cols = self.cols.max(1);
        self.data.chunks_exact(cols).take(self.rows)
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(TriadError::DimMismatch {
                expected: self.cols,
                got: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(TriadError::DimMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(TriadError::DimMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok(self.iter_rows().map(|r| dot(r, v)).collect())
    }

    pub fn scaled(&self, k: f64) -> Matrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|x| *x *= k);
        m
    }

    /// `self * a + other * b`, element-wise.
    pub fn lin_comb(&self, a: f64, other: &Matrix, b: f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(TriadError::DimMismatch {
                expected: self.data.len(),
                got: other.data.len(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += v;
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Column means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.cols];
        for r in self.iter_rows() {
            for (a, &x) in m.iter_mut().zip(r) {
                *a += x;
            }
        }
        let n = self.rows.max(1) as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Population covariance (divide by n).
    pub fn covariance(&self) -> Matrix {
        let mean = self.column_means();
        let d = self.cols;
        let mut c = Matrix::zeros(d, d);
        for r in self.iter_rows() {
            for i in 0..d {
                let di = r[i] - mean[i];
                for j in i..d {
                    c[(i, j)] += di * (r[j] - mean[j]);
                }
            }
        }
        let n = self.rows.max(1) as f64;
        for i in 0..d {
            for j in i..d {
                let v = c[(i, j)] / n;
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        c
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = a.rows();
        if n != a.cols() {
            return Err(TriadError::NotSpd(format!("{}x{} is not square", n, a.cols())));
        }
        if n > MAX_SPD_DIM {
            return Err(invalid(
                "dim",
                format!("{n} exceeds the supported maximum of {MAX_SPD_DIM}"),
            ));
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut s = a[(j, j)];
            for k in 0..j {
                s -= l[(j, k)] * l[(j, k)];
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(TriadError::NotSpd(format!(
                    "non-positive pivot {s:e} at column {j}"
                )));
            }
            let d = s.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.l.rows()).map(|i| self.l[(i, i)].ln()).sum::<f64>()
    }

    /// Solves `L y = b` in place.
    fn forward(&self, b: &mut [f64]) {
        let n = self.l.rows();
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut x = b.to_vec();
        self.forward(&mut x);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// `bᵀ A⁻¹ b`, computed as `‖L⁻¹ b‖²`.
    pub fn quad_form_inv(&self, b: &[f64]) -> f64 {
        let mut y = b.to_vec();
        self.forward(&mut y);
        dot(&y, &y)
    }
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues sorted in non-increasing order.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the same order as `values`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
/// `1e-14` of the total, or 100 sweeps.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    let n = a.rows();
    if !a.is_symmetric(1e-10 * (1.0 + max_abs(a))) {
        return Err(invalid("matrix", "symmetric input required"));
    }
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let total: f64 = m.as_slice().iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off <= 1e-28 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Leading `k` eigenpairs of a symmetric positive semi-definite matrix.
/// Up to [`MAX_SPD_DIM`] this is a full Jacobi solve; above it, blocked
/// subspace iteration with a Jacobi Rayleigh–Ritz step, so large covariance
/// matrices (e.g. 784 pixels) stay cheap when only a few components are
/// needed.
pub fn top_eigen(a: &Matrix, k: usize) -> Result<SymmetricEigen> {
    let n = a.rows();
    if k == 0 || k > n {
        return Err(invalid("k", format!("{k} must lie in 1..={n}")));
    }
    if n <= MAX_SPD_DIM {
        let full = symmetric_eigen(a)?;
        let mut vectors = Matrix::zeros(n, k);
        for i in 0..n {
            vectors.row_mut(i).copy_from_slice(&full.vectors.row(i)[..k]);
        }
        return Ok(SymmetricEigen { values: full.values[..k].to_vec(), vectors });
    }
    if !a.is_symmetric(1e-10 * (1.0 + max_abs(a))) {
        return Err(invalid("matrix", "symmetric input required"));
    }
    let m = n.min(2 * k + 8);
    let mut rng = crate::rng::SeededRng::new(0x5eed);
    let mut q = Matrix::from_vec(n, m, (0..n * m).map(|_| rng.standard_normal()).collect())?;
    orthonormalize_columns(&mut q);
    let mut prev = vec![f64::INFINITY; k];
    for _ in 0..5000 {
        let z = a.matmul(&q)?;
        let h = q.transpose().matmul(&z)?;
        let h = h.lin_comb(0.5, &h.transpose(), 0.5)?;
        let ritz = symmetric_eigen(&h)?;
        q = z;
        orthonormalize_columns(&mut q);
        let scale = ritz.values[0].abs().max(f64::MIN_POSITIVE);
        let settled = ritz.values[..k].iter().zip(&prev).all(|(v, p)| (v - p).abs() <= 1e-14 * scale);
        prev.copy_from_slice(&ritz.values[..k]);
        if settled {
            break;
        }
    }
    // final Rayleigh–Ritz on the converged basis
    let h = q.transpose().matmul(&a.matmul(&q)?)?;
    let h = h.lin_comb(0.5, &h.transpose(), 0.5)?;
    let ritz = symmetric_eigen(&h)?;
    let w = ritz.vectors;
    let mut vectors = Matrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            vectors[(i, j)] = (0..m).map(|t| q[(i, t)] * w[(t, j)]).sum();
        }
    }
    Ok(SymmetricEigen { values: ritz.values[..k].to_vec(), vectors })
}

/// Modified Gram–Schmidt on the columns, in place.
fn orthonormalize_columns(q: &mut Matrix) {
    let (n, m) = (q.rows(), q.cols());
    for j in 0..m {
        for i in 0..j {
            let d: f64 = (0..n).map(|r| q[(r, i)] * q[(r, j)]).sum();
            for r in 0..n {
                let v = q[(r, i)];
                q[(r, j)] -= d * v;
            }
        }
        let norm = (0..n).map(|r| q[(r, j)] * q[(r, j)]).sum::<f64>().sqrt();
        let inv = if norm > 1e-300 { 1.0 / norm } else { 0.0 };
        for r in 0..n {
            q[(r, j)] *= inv;
        }
    }
}

fn max_abs(a: &Matrix) -> f64 {
    a.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_and_log_det() {
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]).unwrap();
        let ch = Cholesky::new(&a).unwrap();
        assert!((ch.log_det() - 8f64.ln()).abs() < 1e-12);
        let x = ch.solve(&[1.0, 2.0]);
        let back = a.mat_vec(&x).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-12 && (back[1] - 2.0).abs() < 1e-12);
        assert!((ch.quad_form_inv(&[1.0, 2.0]) - dot(&x, &[1.0, 2.0])).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite_and_oversized() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(Cholesky::new(&a), Err(TriadError::NotSpd(_))));
        assert!(Cholesky::new(&Matrix::identity(MAX_SPD_DIM + 1)).is_err());
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let a = Matrix::from_rows(&[[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]]).unwrap();
        let e = symmetric_eigen(&a).unwrap();
        let want = [5.0, 3.0, 1.0];
        for (v, w) in e.values.iter().zip(want) {
            assert!((v - w).abs() < 1e-12, "{v} vs {w}");
        }
        let vtv = e.vectors.transpose().matmul(&e.vectors).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[(i, j)] - id).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subspace_iteration_matches_jacobi() {
        let n = 80;
        let mut rng = crate::rng::SeededRng::new(4);
        let mut b = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = rng.standard_normal() / (1.0 + j as f64);
            }
        }
        let a = b.matmul(&b.transpose()).unwrap();
        let top = top_eigen(&a, 3).unwrap();
        let full = symmetric_eigen(&a).unwrap();
        for j in 0..3 {
            assert!((top.values[j] - full.values[j]).abs() < 1e-9 * full.values[0]);
            let d: f64 = (0..n).map(|i| top.vectors[(i, j)] * full.vectors[(i, j)]).sum();
            assert!((d.abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn covariance_is_population() {
        let m = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        assert!((m.covariance()[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
    }
}
