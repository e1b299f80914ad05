use serde::Serialize;

use crate::atoms::solve::dykstra;
use crate::atoms::{CpcFunction, DYKSTRA_MAX_SWEEPS, DYKSTRA_TOL};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::pathology::types::{Feasibility, GroundTruth};
use crate::Scalar;

/// Iteration cap of the inner solvers (Dykstra sweeps, inner DRS steps,
/// alternating projections).
pub const INNER_MAX_ITER: usize = 100_000;
/// Alternating projections stop when the gap changes by less than this.
pub const GAP_STALL_TOL: f64 = 1e-12;

/// `d = Prox_{rec f + rec g}(0)`, the canonical primal improving direction
/// (zero when none exists).
pub fn improving_direction<T: Scalar>(f: &CpcFunction<T>, g: &CpcFunction<T>) -> Result<Vector<T>> {
    let rf = f.recession_function();
    let rg = g.recession_function();
    // one side linear: fold it into the other side's prox
    if let Some(a) = rf.pure_linear() {
        return Ok(rg.prox(T::one(), &-&a));
    }
    if let Some(a) = rg.pure_linear() {
        return Ok(rf.prox(T::one(), &-&a));
    }
    if let (Some(a1), Some(a2)) = (rf.linear_plus_set(), rg.linear_plus_set()) {
        let start = -&(&a1 + &a2);
        let p1 = |v: &Vector<T>| rf.project_set(v);
        let p2 = |v: &Vector<T>| rg.project_set(v);
        let (d, _, ok) = dykstra(&start, &[&p1, &p2], DYKSTRA_MAX_SWEEPS, T::lit(DYKSTRA_TOL));
        if !ok {
            return Err(Error::Capability("Dykstra did not converge for the recession-cone intersection".into()));
        }
        return Ok(d);
    }
    inner_drs(rf, rg)
}

/// DRS on `min rec f(x) + ½‖x‖² + rec g(x)`, strongly convex so it converges.
fn inner_drs<T: Scalar>(rf: &CpcFunction<T>, rg: &CpcFunction<T>) -> Result<Vector<T>> {
    let one = T::one();
    let half_step = T::half();
    let mut z = Vector::zeros(rf.dim());
    for _ in 0..INNER_MAX_ITER {
        // prox of γ(φ + ½‖·‖²) at z is prox of γ/(1+γ)·φ at z/(1+γ), with γ = 1
        let x_half = rf.prox(half_step, &z.scaled(half_step));
        let x_full = rg.prox(one, &(&x_half.scaled(T::two()) - &z));
        let step = &x_full - &x_half;
        z = z.axpy(one, &step);
        if step.norm() <= T::lit(1e-13) * (one + z.norm()) {
            return Ok(rf.prox(half_step, &z.scaled(half_step)));
        }
    }
    Err(Error::Capability("inner DRS for the improving direction did not converge".into()))
}

/// Result of the alternating projections between the two domains.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct DualDirection<T> {
    /// `d′ = −Π_{cl(dom f − dom g)}(0)`
    pub d_prime: Vector<T>,
    /// `dist(dom f, dom g)`
    pub gap: T,
    pub iterations: usize,
    /// Whether the final pair passed the optimality check; `false` means undetermined.
    pub certified: bool,
}

/// `d′` by alternating projections `a = Π_{dom f}(b)`, `b = Π_{dom g}(a)`.
pub fn dual_improving_direction<T: Scalar>(f: &CpcFunction<T>, g: &CpcFunction<T>) -> DualDirection<T> {
    let mut b = g.witness();
    let mut a = f.project_domain(&b);
    let mut gap = a.dist(&b);
    let mut iterations = 0;
    for it in 1..=INNER_MAX_ITER {
        iterations = it;
        b = g.project_domain(&a);
        a = f.project_domain(&b);
        let next = a.dist(&b);
        let change = (gap - next).abs();
        gap = next;
        if change <= T::lit(GAP_STALL_TOL) {
            break;
        }
    }
    let w = &a - &b;
    // w is the minimum-norm element of cl(dom f − dom g) iff a minimizes ⟨w, ·⟩
    // over dom f and b maximizes it over dom g
    let tol = T::lit(1e-6) * (T::one() + w.norm() + a.norm().max(b.norm()) * T::lit(1e-3));
    let certified = f.project_domain(&(&a - &w)).dist(&a) <= tol && g.project_domain(&(&b + &w)).dist(&b) <= tol;
    DualDirection { d_prime: -&w, gap, iterations, certified }
}

/// Infimal displacement vector from the feasibility statuses:
/// `−γd` when the primal is feasible, `−d′` when the dual is feasible.
///
/// Without ground truth the primal is recognized as feasible when a domain
/// witness of one function lies in the domain of the other.
pub fn analytic_idv<T: Scalar>(
    f: &CpcFunction<T>,
    g: &CpcFunction<T>,
    gamma: T,
    gt: Option<&GroundTruth<T>>,
) -> Result<Vector<T>> {
    let tol = T::lit(1e-12);
    let (primal, dual) = match gt {
        Some(gt) => (gt.primal, gt.dual),
        None => {
            let feasible = g.value(&f.witness(), tol).is_finite() || f.value(&g.witness(), tol).is_finite();
            (if feasible { Feasibility::Feasible } else { Feasibility::Unknown }, Feasibility::Unknown)
        }
    };
    if primal == Feasibility::Feasible {
        return Ok(improving_direction(f, g)?.scaled(-gamma));
    }
    if dual == Feasibility::Feasible {
        let dd = dual_improving_direction(f, g);
        if !dd.certified {
            return Err(Error::Undetermined("alternating projections stalled without certifying d'".into()));
        }
        return Ok(-&dd.d_prime);
    }
    Err(Error::Undetermined("feasibility status of the primal and dual is unknown".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{FunctionSpec, ScalarAtom, SetKind};

    fn lin(c: f64) -> CpcFunction<f64> {
        FunctionSpec::linear(Vector::from_f64(&[c])).compile().unwrap()
    }

    fn neglog() -> CpcFunction<f64> {
        FunctionSpec::zero(1).with_atom(ScalarAtom::NegLog, &[0]).compile().unwrap()
    }

    #[test]
    fn linear_pair_direction() {
        assert_eq!(improving_direction(&lin(1.0), &lin(1.0)).unwrap().as_slice(), &[-2.0]);
    }

    #[test]
    fn x_minus_log_has_none() {
        assert_eq!(improving_direction(&lin(1.0), &neglog()).unwrap().as_slice(), &[0.0]);
    }

    #[test]
    fn bounded_below_log_has_none() {
        let ge1 = FunctionSpec::indicator(1, SetKind::lower_bounds(vec![Some(1.0)])).compile().unwrap();
        assert_eq!(improving_direction(&ge1, &neglog()).unwrap().as_slice(), &[0.0]);
    }

    #[test]
    fn inner_drs_fallback() {
        // rec(|x| + x/2) = |d| + d/2 ≥ 0 and rec(-log) = [d ≥ 0]: d = 0;
        // with slope -2 instead the direction is prox of |d| - 2d at 0 restricted to d ≥ 0: d = 1
        let f = FunctionSpec::linear(Vector::from_f64(&[-2.0])).with_atom(ScalarAtom::Abs, &[0]).compile().unwrap();
        let d = improving_direction(&f, &neglog()).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-9, "{d:?}");
        let f = FunctionSpec::linear(Vector::from_f64(&[0.5])).with_atom(ScalarAtom::Abs, &[0]).compile().unwrap();
        assert!(improving_direction(&f, &neglog()).unwrap()[0].abs() < 1e-9);
    }

    #[test]
    fn interval_gap() {
        let le0 = FunctionSpec::indicator(1, SetKind::upper_bounds(vec![Some(0.0)])).compile().unwrap();
        let ge1 = FunctionSpec::indicator(1, SetKind::lower_bounds(vec![Some(1.0)])).compile().unwrap();
        let dd = dual_improving_direction(&le0, &ge1);
        assert!(dd.certified);
        assert_eq!(dd.d_prime.as_slice(), &[1.0]);
        assert_eq!(dd.gap, 1.0);
    }

    #[test]
    fn full_domains_no_gap() {
        let dd = dual_improving_direction(&lin(1.0), &lin(2.0));
        assert!(dd.certified);
        assert_eq!(dd.d_prime.norm(), 0.0);
    }

    #[test]
    fn open_half_lines_touch() {
        let f = FunctionSpec::zero(1).with_atom(ScalarAtom::InvSqrtNeg, &[0]).compile().unwrap();
        let dd = dual_improving_direction(&f, &neglog());
        assert!(dd.certified);
        assert_eq!(dd.d_prime.norm(), 0.0);
    }

    #[test]
    fn analytic_idv_scaling() {
        for gamma in [0.25, 0.5, 1.0, 4.0] {
            let v = analytic_idv(&lin(1.0), &lin(1.0), gamma, None).unwrap();
            assert_eq!(v[0], 2.0 * gamma);
        }
    }
}
