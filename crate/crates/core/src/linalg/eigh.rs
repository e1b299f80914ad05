use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMat};
use crate::Scalar;

/// Largest order the eigensolver accepts.
pub const MAX_EIGH_ORDER: usize = 64;

const MAX_SWEEPS: usize = 100;

/// Symmetric eigendecomposition `M = Q diag(λ) Qᵀ`.
#[derive(Debug, Clone)]
pub struct EigDecomp<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: Matrix<T>,
}

impl<T: Scalar> EigDecomp<T> {
    /// `Q diag(f(λ)) Qᵀ`
    pub fn reconstruct_with(&self, mut f: impl FnMut(T) -> T) -> SymMat<T> {
        let n = self.values.len();
        let mapped: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        SymMat::from_fn(n, |i, j| (0..n).map(|k| self.vectors[(i, k)] * mapped[k] * self.vectors[(j, k)]).sum())
    }

    pub fn reconstruct(&self) -> SymMat<T> {
        self.reconstruct_with(|l| l)
    }
}

/// Cyclic Jacobi eigenvalue algorithm.
///
/// Each sweep zeroes every off-diagonal entry once with a plane rotation;
/// the off-diagonal mass decreases quadratically once small. Stops when
/// the off-diagonal Frobenius norm falls below `ε·‖M‖_F`.
pub fn eigh<T: Scalar>(m: &SymMat<T>) -> Result<EigDecomp<T>> {
    let n = m.order();
    if n > MAX_EIGH_ORDER {
        return Err(Error::Input(format!("eigh supports order <= {MAX_EIGH_ORDER}, got {n}")));
    }
    let mut a = m.to_dense();
    let mut q = Matrix::identity(n);
    let norm = m.frobenius();
    let target = T::epsilon() * norm;

    let mut converged = n <= 1 || norm == T::zero();
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: T = {
            let mut s = T::zero();
            for i in 0..n {
                for j in 0..i {
                    s = s + a[(i, j)] * a[(i, j)];
                }
            }
            (T::two() * s).sqrt()
        };
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[(p, r)];
                if apr == T::zero() {
                    continue;
                }
                let theta = (a[(r, r)] - a[(p, p)]) / (T::two() * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                rotate(&mut a, &mut q, p, r, c, s, t);
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence { routine: "eigh (cyclic Jacobi)", iterations: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, k| q[(i, order[k])]);
    Ok(EigDecomp { values, vectors })
}

/// Applies the rotation annihilating `a[(p, r)]` and accumulates it into `q`.
fn rotate<T: Scalar>(a: &mut Matrix<T>, q: &mut Matrix<T>, p: usize, r: usize, c: T, s: T, t: T) {
    let n = a.rows();
    let apr = a[(p, r)];
    let app = a[(p, p)];
    let arr = a[(r, r)];
    a[(p, p)] = app - t * apr;
    a[(r, r)] = arr + t * apr;
    a[(p, r)] = T::zero();
    a[(r, p)] = T::zero();
    for k in 0..n {
        if k != p && k != r {
            let akp = a[(k, p)];
            let akr = a[(k, r)];
            let np = c * akp - s * akr;
            let nr = s * akp + c * akr;
            a[(k, p)] = np;
            a[(p, k)] = np;
            a[(k, r)] = nr;
            a[(r, k)] = nr;
        }
    }
    for k in 0..n {
        let qkp = q[(k, p)];
        let qkr = q[(k, r)];
        q[(k, p)] = c * qkp - s * qkr;
        q[(k, r)] = s * qkp + c * qkr;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let e = eigh(&SymMat::<f64>::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        // eigenvectors are the coordinate axes, reordered
        assert_eq!(e.vectors[(1, 0)].abs(), 1.0);
        assert_eq!(e.vectors[(2, 1)].abs(), 1.0);
        assert_eq!(e.vectors[(0, 2)].abs(), 1.0);
    }

    #[test]
    fn identity_any_order() {
        for n in [1, 4, 9] {
            let e = eigh(&SymMat::<f64>::identity(n)).unwrap();
            assert!(e.values.iter().all(|&l| l == 1.0));
        }
    }

    #[test]
    fn swap_matrix() {
        let m = SymMat::<f64>::from_fn(2, |i, j| if i != j { 1.0 } else { 0.0 });
        let e = eigh(&m).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_precision() {
        let m = SymMat::<f32>::from_fn(3, |i, j| (i + 2 * j) as f32 + if i == j { 4.0 } else { 0.0 });
        let e = eigh(&m).unwrap();
        let r = e.reconstruct();
        for i in 0..3 {
            for j in 0..3 {
                assert!((r.get(i, j) - m.get(i, j)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn order_limit() {
        assert!(eigh(&SymMat::<f64>::identity(65)).is_err());
    }
}
