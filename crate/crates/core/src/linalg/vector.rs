use std::ops::{Add, Deref, DerefMut, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Dense real vector.
///
/// [`Vector::new`] rejects non-finite entries. Arithmetic does not re-check;
/// the iteration engines watch iterate norms for overflow instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<T>(Vec<T>);

impl<T: Scalar> Vector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::Input(format!("non-finite vector entry at index {i}")));
        }
        Ok(Vector(entries))
    }

    pub(crate) fn from_vec(entries: Vec<T>) -> Self {
        Vector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![T::zero(); n])
    }

    pub fn from_f64(xs: &[f64]) -> Self {
        Vector(xs.iter().map(|&x| T::lit(x)).collect())
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> T) -> Self {
        Vector((0..n).map(f).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    /// Euclidean norm, computed with scaling so that huge iterates do not
    /// overflow before the engines get to flag them.
    pub fn norm(&self) -> T {
        let scale = self.norm_inf();
        if scale == T::zero() || !scale.is_finite() {
            return scale;
        }
        let s: T = self.0.iter().map(|&x| (x / scale) * (x / scale)).sum();
        scale * s.sqrt()
    }

    pub fn norm_inf(&self) -> T {
        self.0.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Vector(self.0.iter().map(|&x| alpha * x).collect())
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: T, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| a + alpha * b).collect())
    }

    pub fn dist(&self, other: &Self) -> T {
        (self - other).norm()
    }

    pub fn map(&self, f: impl FnMut(T) -> T) -> Self {
        Vector(self.0.iter().copied().map(f).collect())
    }

    pub fn cast<U: Scalar>(&self) -> Vector<U> {
        Vector(self.0.iter().map(|&x| U::lit(x.as_f64())).collect())
    }
}

impl<T> Deref for Vector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for Vector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Scalar> Add for &Vector<T> {
    type Output = Vector<T>;
    fn add(self, rhs: &Vector<T>) -> Vector<T> {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect())
    }
}

impl<T: Scalar> Sub for &Vector<T> {
    type Output = Vector<T>;
    fn sub(self, rhs: &Vector<T>) -> Vector<T> {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect())
    }
}

impl<T: Scalar> Mul<T> for &Vector<T> {
    type Output = Vector<T>;
    fn mul(self, rhs: T) -> Vector<T> {
        self.scaled(rhs)
    }
}

impl<T: Scalar> Neg for &Vector<T> {
    type Output = Vector<T>;
    fn neg(self) -> Vector<T> {
        self.map(|x| -x)
    }
}
