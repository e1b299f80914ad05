use serde::{Deserialize, Serialize};

use crate::atoms::solve::{monotone_root, prox_exp_neg_sqrt_prod};
use crate::ext::ExtReal;
use crate::Scalar;

/// Stationarity tolerance of the 1-D prox solvers, relative to `1 + |z|`.
pub const PROX_TOL: f64 = 1e-12;

/// Nonlinear building blocks of a [`crate::FunctionSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarAtom {
    /// `-log x` on `x > 0`
    NegLog,
    /// `1/√(-x)` on `x < 0`
    InvSqrtNeg,
    /// `exp(-√(x₁x₂))` on `x₁, x₂ ≥ 0`
    ExpNegSqrtProd,
    /// `|x|`
    Abs,
}

/// Interval `[lo, hi]`, either end possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn full() -> Self {
        Interval { lo: T::neg_infinity(), hi: T::infinity() }
    }

    pub fn clamp(&self, x: T) -> T {
        x.max(self.lo).min(self.hi)
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Interval { lo: self.lo.max(other.lo), hi: self.hi.min(other.hi) }
    }
}

impl ScalarAtom {
    /// Number of coordinates the atom acts on.
    pub fn arity(self) -> usize {
        match self {
            ScalarAtom::ExpNegSqrtProd => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarAtom::NegLog => "-log(x)",
            ScalarAtom::InvSqrtNeg => "1/sqrt(-x)",
            ScalarAtom::ExpNegSqrtProd => "exp(-sqrt(x1*x2))",
            ScalarAtom::Abs => "|x|",
        }
    }

    /// Closure of the domain, per coordinate.
    pub fn domain<T: Scalar>(self) -> Interval<T> {
        match self {
            ScalarAtom::NegLog | ScalarAtom::ExpNegSqrtProd => Interval { lo: T::zero(), hi: T::infinity() },
            ScalarAtom::InvSqrtNeg => Interval { lo: T::neg_infinity(), hi: T::zero() },
            ScalarAtom::Abs => Interval::full(),
        }
    }

    /// Whether the domain excludes its boundary.
    pub fn open_domain(self) -> bool {
        matches!(self, ScalarAtom::NegLog | ScalarAtom::InvSqrtNeg)
    }

    /// A point in the (open) domain, per coordinate.
    pub fn interior_point<T: Scalar>(self) -> T {
        match self {
            ScalarAtom::NegLog | ScalarAtom::ExpNegSqrtProd => T::one(),
            ScalarAtom::InvSqrtNeg => -T::one(),
            ScalarAtom::Abs => T::zero(),
        }
    }

    pub fn value<T: Scalar>(self, x: &[T]) -> ExtReal<T> {
        let zero = T::zero();
        match self {
            ScalarAtom::NegLog if x[0] > zero => ExtReal::Finite(-x[0].ln()),
            ScalarAtom::InvSqrtNeg if x[0] < zero => ExtReal::Finite(T::one() / (-x[0]).sqrt()),
            ScalarAtom::ExpNegSqrtProd if x[0] >= zero && x[1] >= zero => {
                ExtReal::Finite((-(x[0] * x[1]).sqrt()).exp())
            }
            ScalarAtom::Abs => ExtReal::Finite(x[0].abs()),
            _ => ExtReal::PosInf,
        }
    }

    /// Recession function at `d`.
    pub fn recession<T: Scalar>(self, d: &[T]) -> ExtReal<T> {
        let zero = T::zero();
        match self {
            ScalarAtom::NegLog if d[0] >= zero => ExtReal::Finite(zero),
            ScalarAtom::InvSqrtNeg if d[0] <= zero => ExtReal::Finite(zero),
            ScalarAtom::ExpNegSqrtProd if d[0] >= zero && d[1] >= zero => ExtReal::Finite(zero),
            ScalarAtom::Abs => ExtReal::Finite(d[0].abs()),
            _ => ExtReal::PosInf,
        }
    }

    /// Prox of `γ·atom` at the scalar `z` (arity-1 atoms only).
    pub fn prox1<T: Scalar>(self, gamma: T, z: T) -> T {
        let zero = T::zero();
        let two = T::two();
        match self {
            ScalarAtom::NegLog => {
                // x - z = γ/x, positive root; rationalized when z < 0 to avoid cancellation
                let r = (z * z + T::lit(4.0) * gamma).sqrt();
                if z >= zero {
                    (z + r) / two
                } else {
                    two * gamma / (r - z)
                }
            }
            ScalarAtom::InvSqrtNeg => {
                // x - z + (γ/2)(-x)^{-3/2} = 0 on x < 0
                let h = |x: T| {
                    let t = -x;
                    let val = x - z + gamma / two * t.powf(T::lit(-1.5));
                    let der = T::one() + T::lit(0.75) * gamma * t.powf(T::lit(-2.5));
                    (val, der)
                };
                let hi = z.min(zero);
                let lo = hi - T::one() - gamma;
                let start = if hi < zero { hi } else { -(gamma / two).powf(T::lit(0.4)) };
                monotone_root(h, lo, hi, start, T::lit(PROX_TOL) * (T::one() + z.abs()))
            }
            ScalarAtom::Abs => z.signum() * (z.abs() - gamma).max(zero),
            ScalarAtom::ExpNegSqrtProd => panic!("prox1 called on a two-coordinate atom"),
        }
    }

    /// Prox of `γ·atom` at `z`, any arity.
    pub fn prox<T: Scalar>(self, gamma: T, z: &[T]) -> Vec<T> {
        match self {
            ScalarAtom::ExpNegSqrtProd => prox_exp_neg_sqrt_prod(gamma, [z[0], z[1]]).to_vec(),
            _ => vec![self.prox1(gamma, z[0])],
        }
    }

    /// Prox of `σ·atom*` at `w`, when the conjugate has a closed form.
    ///
    /// * `(-log)*(y) = -1 - log(-y)` on `y < 0`
    /// * `(1/√(-x))*(y) = -(3/2)(2y)^{1/3}` on `y ≥ 0`
    /// * `|·|* = δ_{[-1, 1]}`
    pub fn conjugate_prox1<T: Scalar>(self, sigma: T, w: T) -> Option<T> {
        let zero = T::zero();
        let two = T::two();
        match self {
            ScalarAtom::NegLog => {
                // y - w - σ/y = 0, negative root
                let r = (w * w + T::lit(4.0) * sigma).sqrt();
                Some(if w <= zero { (w - r) / two } else { -two * sigma / (w + r) })
            }
            ScalarAtom::InvSqrtNeg => {
                // y - w - σ(2y)^{-2/3} = 0 on y > 0
                let h = |y: T| {
                    let t = two * y;
                    let val = y - w - sigma * t.powf(T::lit(-2.0 / 3.0));
                    let der = T::one() + T::lit(4.0 / 3.0) * sigma * t.powf(T::lit(-5.0 / 3.0));
                    (val, der)
                };
                let lo = w.max(zero);
                let hi = lo + T::one() + sigma;
                let start = if lo > zero { lo } else { sigma.powf(T::lit(0.6)) };
                Some(monotone_root(h, lo, hi, start, T::lit(PROX_TOL) * (T::one() + w.abs())))
            }
            ScalarAtom::Abs => Some(w.max(-T::one()).min(T::one())),
            ScalarAtom::ExpNegSqrtProd => None,
        }
    }
}
