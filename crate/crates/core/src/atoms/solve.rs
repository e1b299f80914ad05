//! Inner solvers for proximal subproblems without a closed form.

use crate::linalg::Vector;
use crate::Scalar;

const MAX_NEWTON: usize = 100;
const MAX_BISECT: usize = 400;

/// Root of a strictly increasing function on the open interval `(lo, hi)`.
///
/// `h` returns `(h(x), h'(x))`; it must be negative near `lo` and positive
/// near `hi` (either may be an open boundary where `h` is infinite).
/// Newton steps are taken from `start` while they stay inside the bracket,
/// bisection otherwise. Stops when `|h(x)| <= tol`.
pub(crate) fn monotone_root<T: Scalar>(h: impl Fn(T) -> (T, T), mut lo: T, mut hi: T, start: T, tol: T) -> T {
    let mut x = if start > lo && start < hi { start } else { (lo + hi) * T::half() };
    for it in 0..(MAX_NEWTON + MAX_BISECT) {
        let (hx, dhx) = h(x);
        if hx.abs() <= tol {
            return x;
        }
        if hx > T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        let mid = (lo + hi) * T::half();
        if mid == lo || mid == hi {
            return x;
        }
        let newton = x - hx / dhx;
        x = if it < MAX_NEWTON && newton > lo && newton < hi && newton.is_finite() { newton } else { mid };
    }
    x
}

/// Prox of `γ·exp(-√(x₁x₂))` (domain: the closed nonnegative quadrant) at `z`.
///
/// The minimizer is either the origin or an interior point: on the rest of
/// the boundary the partial derivative towards the interior is `-∞`. The
/// origin is optimal exactly when `z ≤ 0` and `2√(z₁z₂) ≥ γ`. An interior
/// stationary point satisfies `xᵢ(xᵢ − zᵢ) = κ` with `κ = γ s e^{-s}/2` and
/// `s = √(x₁x₂)`, so it is found by bisection on the scalar `s`.
pub(crate) fn prox_exp_neg_sqrt_prod<T: Scalar>(gamma: T, z: [T; 2]) -> [T; 2] {
    let zero = T::zero();
    let two = T::two();
    if z[0] <= zero && z[1] <= zero && two * (z[0] * z[1]).sqrt() >= gamma {
        return [zero, zero];
    }
    // positive root of x(x − zᵢ) = κ, written without cancellation
    let coord = |zi: T, kappa: T| {
        let r = (zi * zi + T::lit(4.0) * kappa).sqrt();
        if zi >= zero {
            (zi + r) * T::half()
        } else {
            two * kappa / (r - zi)
        }
    };
    let point = |s: T| {
        let kappa = gamma * s * (-s).exp() * T::half();
        [coord(z[0], kappa), coord(z[1], kappa)]
    };
    // negative below the root, positive above it
    let h = |s: T| {
        let x = point(s);
        s - (x[0] * x[1]).sqrt()
    };
    let mut lo = T::one();
    for _ in 0..MAX_BISECT {
        if h(lo) < zero || lo == zero {
            break;
        }
        lo = lo * T::half();
    }
    let mut hi = T::one();
    for _ in 0..MAX_BISECT {
        if h(hi) > zero || !hi.is_finite() {
            break;
        }
        hi = hi * two;
    }
    for _ in 0..MAX_BISECT {
        let mid = (lo + hi) * T::half();
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < zero {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    point((lo + hi) * T::half())
}

/// Dykstra's alternating projection onto an intersection of closed convex
/// sets. Returns the final iterate, the number of sweeps and whether the
/// change in a sweep dropped below `tol·(1 + ‖x‖)`.
pub(crate) fn dykstra<T: Scalar>(
    start: &Vector<T>,
    projectors: &[&dyn Fn(&Vector<T>) -> Vector<T>],
    max_sweeps: usize,
    tol: T,
) -> (Vector<T>, usize, bool) {
    let n = start.dim();
    let mut x = start.clone();
    let mut increments = vec![Vector::zeros(n); projectors.len()];
    for sweep in 1..=max_sweeps {
        let before = x.clone();
        for (proj, inc) in projectors.iter().zip(increments.iter_mut()) {
            let y = &x + inc;
            let p = proj(&y);
            *inc = &y - &p;
            x = p;
        }
        if before.dist(&x) <= tol * (T::one() + x.norm()) {
            return (x, sweep, true);
        }
    }
    (x, max_sweeps, false)
}
