use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::Scalar;

/// Position of entry `(i, j)`, `i >= j`, in packed lower-triangular storage
/// (row by row). The same ordering is used by [`svec`].
#[inline]
pub fn packed_index(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

/// Number of svec coordinates of an `n × n` symmetric matrix.
#[inline]
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Symmetric matrix stored as its lower triangle, so symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat<T> {
    n: usize,
    packed: Vec<T>,
}

impl<T: Scalar> SymMat<T> {
    pub fn zeros(n: usize) -> Self {
        SymMat { n, packed: vec![T::zero(); svec_len(n)] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(d: &[T]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { T::zero() })
    }

    /// Builds from a function evaluated on the lower triangle only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut packed = Vec::with_capacity(svec_len(n));
        for i in 0..n {
            for j in 0..=i {
                packed.push(f(i, j));
            }
        }
        SymMat { n, packed }
    }

    /// Builds from a dense square matrix, rejecting asymmetry beyond `tol`.
    pub fn from_dense(m: &Matrix<T>, tol: T) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Input("symmetric matrix must be square".into()));
        }
        for i in 0..m.rows() {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > tol {
                    return Err(Error::Input(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_fn(m.rows(), |i, j| m[(i, j)]))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.packed[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.packed[packed_index(i, j)] = v;
    }

    pub fn to_dense(&self) -> Matrix<T> {
        Matrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> T {
        svec(self).norm()
    }

    /// `trace(self · other)`
    pub fn trace_product(&self, other: &Self) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                s = s + self.get(i, j) * other.get(j, i);
            }
        }
        s
    }
}

/// Isometric vectorization: diagonal entries as-is, each off-diagonal pair
/// once scaled by √2, so `⟨svec A, svec B⟩ = trace(AB)`.
pub fn svec<T: Scalar>(m: &SymMat<T>) -> Vector<T> {
    let r2 = T::two().sqrt();
    let mut out = Vec::with_capacity(svec_len(m.n));
    for i in 0..m.n {
        for j in 0..=i {
            let v = m.get(i, j);
            out.push(if i == j { v } else { v * r2 });
        }
    }
    Vector::from_vec(out)
}

/// Inverse of [`svec`]. Fails when the length is not a triangular number.
pub fn smat<T: Scalar>(v: &[T]) -> Result<SymMat<T>> {
    let n = order_from_svec_len(v.len())
        .ok_or_else(|| Error::Input(format!("svec length {} is not a triangular number", v.len())))?;
    let r2 = T::two().sqrt();
    Ok(SymMat::from_fn(n, |i, j| {
        let x = v[packed_index(i, j)];
        if i == j {
            x
        } else {
            x / r2
        }
    }))
}

pub fn order_from_svec_len(len: usize) -> Option<usize> {
    let mut n = 0;
    while svec_len(n) < len {
        n += 1;
    }
    (svec_len(n) == len).then_some(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_identity_2x2() {
        let v = svec(&SymMat::<f64>::identity(2));
        assert_eq!(v.as_slice(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn svec_inner_products_are_traces() {
        let a = SymMat::<f64>::diag(&[1.0, 2.0]);
        assert_eq!(svec(&a).norm_sq(), 5.0);
        assert_eq!(a.trace_product(&a), 5.0);

        let swap = SymMat::<f64>::from_fn(2, |i, j| if i != j { 1.0 } else { 0.0 });
        assert!((svec(&swap).norm_sq() - 2.0).abs() < 1e-15);
        assert_eq!(swap.trace_product(&swap), 2.0);
    }

    #[test]
    fn smat_rejects_non_triangular_length() {
        assert!(smat(&[1.0f64, 2.0]).is_err());
        assert!(smat(&[1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]).is_ok());
    }

    #[test]
    fn from_dense_checks_symmetry() {
        let m = Matrix::<f64>::from_f64_rows(&[&[1.0, 2.0], &[2.5, 1.0]]).unwrap();
        assert!(SymMat::from_dense(&m, 1e-12).is_err());
    }
}
