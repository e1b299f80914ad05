use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh, SymMat, Vector};
use crate::Scalar;

/// Dense row-major matrix. Serialized as an array of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn scalar_identity(n: usize, alpha: T) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = alpha;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim(c, row.len())?;
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Input("non-finite matrix entry".into()));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { rows: r, cols: c, data })
    }

    pub fn from_f64_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&x| T::lit(x)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[T]) -> Vector<T> {
        debug_assert_eq!(x.len(), self.cols);
        Vector::from_fn(self.rows, |i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
    }

    /// `selfᵀ x`
    pub fn tmatvec(&self, x: &[T]) -> Vector<T> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * xi;
            }
        }
        Vector::from_vec(out)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dim(self.cols, other.rows)?;
        Ok(Self::from_fn(self.rows, other.cols, |i, j| (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()))
    }

    /// `self selfᵀ` as a symmetric matrix.
    pub fn gram_rows(&self) -> SymMat<T> {
        SymMat::from_fn(self.rows, |i, j| self.row(i).iter().zip(self.row(j)).map(|(&a, &b)| a * b).sum())
    }

    /// `selfᵀ self` as a symmetric matrix.
    pub fn gram_cols(&self) -> SymMat<T> {
        self.transpose().gram_rows()
    }

    pub fn frobenius(&self) -> T {
        Vector::from_vec(self.data.clone()).norm()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x == T::zero())
    }

    /// Moore-Penrose pseudo-inverse, through the eigendecomposition of
    /// `self selfᵀ`. Eigenvalues below `rel_cutoff * λ_max` are dropped.
    pub fn pseudo_inverse(&self, rel_cutoff: T) -> Result<Self> {
        let gram = self.gram_rows();
        let eig = eigh(&gram)?;
        let lmax = eig.values.iter().fold(T::zero(), |m, &l| m.max(l.abs()));
        let cutoff = rel_cutoff * lmax;
        let m = self.rows;
        // (A Aᵀ)^+ = Q diag(1/λ) Qᵀ on the retained spectrum
        let mut inv = Matrix::zeros(m, m);
        for (k, &l) in eig.values.iter().enumerate() {
            if l > cutoff && l > T::zero() {
                for i in 0..m {
                    for j in 0..m {
                        inv[(i, j)] = inv[(i, j)] + eig.vectors[(i, k)] * eig.vectors[(j, k)] / l;
                    }
                }
            }
        }
        self.transpose().matmul(&inv)
    }

    /// Solves `self x = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[T]) -> Result<Vector<T>> {
        if self.rows != self.cols {
            return Err(Error::Input("solve needs a square matrix".into()));
        }
        check_dim(self.rows, rhs.len())?;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        let scale = self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        let tiny = T::epsilon() * T::lit(n.max(1) as f64) * scale;
        for col in 0..n {
            let (piv, pmax) =
                (col..n)
                    .map(|r| (r, a[r * n + col].abs()))
                    .fold((col, T::zero()), |best, c| if c.1 > best.1 { c } else { best });
            if pmax <= tiny {
                return Err(Error::Input("singular linear system".into()));
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                b.swap(col, piv);
            }
            for r in (col + 1)..n {
                let factor = a[r * n + col] / a[col * n + col];
                if factor != T::zero() {
                    for j in col..n {
                        a[r * n + j] = a[r * n + j] - factor * a[col * n + j];
                    }
                    b[r] = b[r] - factor * b[col];
                }
            }
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let s: T = ((i + 1)..n).map(|j| a[i * n + j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i * n + i];
        }
        Ok(Vector::from_vec(x))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Serialize for Matrix<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<T>>::deserialize(d)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
