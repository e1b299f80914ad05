use serde::Serialize;

use crate::engine::drs::DrsTrace;
use crate::engine::stats::tail_window;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::Scalar;

/// Norm below which an estimated displacement vector is reported as zero.
pub const IDV_TOL: f64 = 1e-4;

/// Decay exponent of `‖Δz‖` (per doubling of `k`) below which the
/// displacement is treated as vanishing even if still above [`IDV_TOL`].
pub const DECAY_EXPONENT_ZERO: f64 = -0.2;

/// Two estimates of the infimal displacement vector `v`, where
/// `z^k = −kv + o(k)` and `z^{k+1} − z^k → −v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct IdvEstimate<T> {
    /// `−(z^K − z^0)/K`
    pub v_from_slope: Vector<T>,
    /// `−(z^K − z^{K−w})/w`
    pub v_from_diff: Vector<T>,
    /// `‖v_from_slope − v_from_diff‖`
    pub agreement: T,
    pub window: usize,
    /// `log₂` of the ratio of mean `‖Δz‖` over `[K/2, K)` to that over `[K/4, K/2)`:
    /// about 0 for a nonzero displacement vector, negative when `Δz → 0`.
    pub decay_exponent: T,
    /// The verdict `v = 0`.
    pub vanishing: bool,
}

impl<T: Scalar> IdvEstimate<T> {
    /// Norm of the difference-based estimate (the one used downstream).
    pub fn norm(&self) -> T {
        self.v_from_diff.norm()
    }

    /// Estimated `v`, zeroed when the verdict is `v = 0`.
    pub fn v(&self) -> Vector<T> {
        if self.vanishing {
            Vector::zeros(self.v_from_diff.dim())
        } else {
            self.v_from_diff.clone()
        }
    }
}

fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::lit(xs.len().max(1) as f64)
}

/// Estimates `v` from a completed trace.
///
/// Runs that stopped at a fixed point give `v = 0` regardless of length;
/// otherwise the trace must be at least twice the tail window long.
pub fn estimate_idv<T: Scalar>(trace: &DrsTrace<T>, idv_tol: T) -> Result<IdvEstimate<T>> {
    let k = trace.iterations();
    if k == 0 {
        return Err(Error::Input("empty trace".into()));
    }
    let z_last = &trace.last.z;
    let v_from_slope = (z_last - &trace.z0).scaled(-T::one() / T::lit(k as f64));
    if trace.converged {
        let v_from_diff = Vector::zeros(z_last.dim());
        let agreement = v_from_slope.dist(&v_from_diff);
        return Ok(IdvEstimate {
            v_from_slope,
            v_from_diff,
            agreement,
            window: k,
            decay_exponent: T::neg_infinity(),
            vanishing: true,
        });
    }
    let wanted = tail_window(k);
    if k < 2 * wanted || k < 4 {
        return Err(Error::Input(format!("trace of {k} steps is shorter than twice the window {wanted}")));
    }
    let (k0, z0) = trace.snapshot_at_or_before(k - wanted);
    let window = k - k0;
    let v_from_diff = (z_last - z0).scaled(-T::one() / T::lit(window as f64));
    let agreement = v_from_slope.dist(&v_from_diff);
    let recent = mean(&trace.dz_norm[k / 2..]);
    let earlier = mean(&trace.dz_norm[k / 4..k / 2]);
    let decay_exponent = if earlier > T::zero() { (recent / earlier).log2() } else { T::neg_infinity() };
    let vanishing =
        v_from_slope.norm().max(v_from_diff.norm()) <= idv_tol || decay_exponent <= T::lit(DECAY_EXPONENT_ZERO);
    Ok(IdvEstimate { v_from_slope, v_from_diff, agreement, window, decay_exponent, vanishing })
}
