use std::fmt::Write as _;

use serde::Serialize;

use crate::atoms::CpcFunction;
use crate::engine::stats::{objective_stats_from, ObjectiveStats, RunningStats};
use crate::error::{check_dim, Error, Result};
use crate::ext::ExtReal;
use crate::linalg::Vector;
use crate::Scalar;

/// Iterate norm beyond which a run is truncated.
pub const OVERFLOW_NORM: f64 = 1e300;

/// Number of `z` snapshots kept per run (plus the final iterate).
const SNAPSHOTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct DrsState<T> {
    pub z: Vector<T>,
    pub x_half: Vector<T>,
    pub x_full: Vector<T>,
    pub k: usize,
    pub gamma: T,
}

impl<T: Scalar> DrsState<T> {
    /// State before the first step; the shadow iterates are placeholders.
    pub fn initial(z0: Vector<T>, gamma: T) -> Self {
        let n = z0.dim();
        DrsState { z: z0, x_half: Vector::zeros(n), x_full: Vector::zeros(n), k: 0, gamma }
    }
}

/// One pass of
///
/// ```text
/// x^{k+1/2} = Prox_{γf}(z^k)
/// x^{k+1}   = Prox_{γg}(2x^{k+1/2} − z^k)
/// z^{k+1}   = z^k + x^{k+1} − x^{k+1/2}
/// ```
pub fn drs_step<T: Scalar>(state: &DrsState<T>, f: &CpcFunction<T>, g: &CpcFunction<T>) -> DrsState<T> {
    let gamma = state.gamma;
    let x_half = f.prox(gamma, &state.z);
    let reflected = &x_half.scaled(T::two()) - &state.z;
    let x_full = g.prox(gamma, &reflected);
    let z = state.z.axpy(T::one(), &(&x_full - &x_half));
    DrsState { z, x_half, x_full, k: state.k + 1, gamma }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ProbeConfig<T> {
    /// Early stop when `‖z^{k+1} − z^k‖ ≤ fp_tol`.
    pub fp_tol: T,
    /// Indicator violations up to this (relative) distance count as satisfied
    /// when sampling the objective.
    pub feas_tol: T,
    /// CSV record stride; `None` picks `max(1, max_iter/1000)`.
    pub stride: Option<usize>,
    /// Record `dist(x^{k+1}, dom f)` and `dist(x^{k+1/2}, dom g)` per step.
    pub domain_distances: bool,
}

impl<T: Scalar> Default for ProbeConfig<T> {
    fn default() -> Self {
        ProbeConfig { fp_tol: T::lit(1e-10), feas_tol: T::lit(1e-9), stride: None, domain_distances: false }
    }
}

/// Per-iteration record of a DRS run. Index `i` refers to step `i → i + 1`.
#[derive(Debug, Clone)]
pub struct DrsTrace<T> {
    pub gamma: T,
    pub z0: Vector<T>,
    /// `‖z^{k+1} − z^k‖`
    pub dz_norm: Vec<T>,
    /// `f(x^{k+1/2}) + g(x^{k+1})`
    pub objective: Vec<ExtReal<T>>,
    pub running_mean: Vec<T>,
    pub running_min: Vec<T>,
    /// `‖x^{k+3/2} − x^{k+1/2}‖`, one entry shorter than the others.
    pub shadow_step: Vec<T>,
    /// `‖x^{k+1/2}‖`
    pub x_half_norm: Vec<T>,
    pub dist_dom_f: Option<Vec<T>>,
    pub dist_dom_g: Option<Vec<T>>,
    /// `(k, z^k)` at regular intervals, always including `k = 0` and the last iterate.
    pub z_snapshots: Vec<(usize, Vector<T>)>,
    pub last: DrsState<T>,
    pub converged: bool,
    pub overflow: bool,
    pub stride: usize,
}

impl<T: Scalar> DrsTrace<T> {
    pub fn iterations(&self) -> usize {
        self.dz_norm.len()
    }

    /// `z^k` from the snapshots, if recorded.
    pub fn z_at(&self, k: usize) -> Option<&Vector<T>> {
        self.z_snapshots.iter().find(|(j, _)| *j == k).map(|(_, z)| z)
    }

    /// Largest snapshot index `≤ k`.
    pub fn snapshot_at_or_before(&self, k: usize) -> &(usize, Vector<T>) {
        self.z_snapshots.iter().rev().find(|(j, _)| *j <= k).unwrap_or(&self.z_snapshots[0])
    }

    pub fn objective_stats(&self) -> Option<ObjectiveStats<T>> {
        objective_stats_from(&self.objective)
    }

    /// Tail mean of `‖x^{k+1} − x^{k+1/2}‖` (equal to `‖Δz‖`); the last
    /// value when the run stopped at a fixed point.
    pub fn tail_displacement(&self) -> T {
        if self.converged {
            return self.dz_norm.last().copied().unwrap_or(T::zero());
        }
        tail_mean(&self.dz_norm)
    }

    pub fn tail_shadow_step(&self) -> T {
        tail_mean(&self.shadow_step)
    }

    /// CSV with one row per `stride` iterations: `⌈K/stride⌉` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,dz_norm,obj,obj_runmean,obj_runmin,distdom_f,distdom_g\n");
        let opt = |v: &Option<Vec<T>>, k: usize| v.as_ref().map(|d| d[k].to_string()).unwrap_or_default();
        for k in (0..self.iterations()).step_by(self.stride) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                k + 1,
                self.dz_norm[k],
                self.objective[k],
                self.running_mean[k],
                self.running_min[k],
                opt(&self.dist_dom_f, k),
                opt(&self.dist_dom_g, k),
            );
        }
        out
    }
}

pub(crate) fn tail_mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    let w = crate::engine::stats::tail_window(xs.len()).max(1);
    xs[xs.len() - w..].iter().copied().sum::<T>() / T::lit(w as f64)
}

/// Runs DRS from `z0` for at most `max_iter` steps.
pub fn run<T: Scalar>(
    f: &CpcFunction<T>,
    g: &CpcFunction<T>,
    gamma: T,
    z0: Vector<T>,
    max_iter: usize,
    probes: &ProbeConfig<T>,
) -> Result<DrsTrace<T>> {
    check_dim(f.dim(), g.dim())?;
    check_dim(f.dim(), z0.dim())?;
    if !(gamma > T::zero() && gamma.is_finite()) {
        return Err(Error::Input(format!("gamma must be positive, got {gamma}")));
    }
    if max_iter == 0 {
        return Err(Error::Input("max_iter must be at least 1".into()));
    }
    if !z0.is_finite() {
        return Err(Error::Input("z0 must be finite".into()));
    }
    let stride = probes.stride.unwrap_or((max_iter / SNAPSHOTS).max(1)).max(1);
    let snap_every = (max_iter / SNAPSHOTS).max(1);
    let mut trace = DrsTrace {
        gamma,
        z0: z0.clone(),
        dz_norm: Vec::with_capacity(max_iter),
        objective: Vec::with_capacity(max_iter),
        running_mean: Vec::with_capacity(max_iter),
        running_min: Vec::with_capacity(max_iter),
        shadow_step: Vec::with_capacity(max_iter),
        x_half_norm: Vec::with_capacity(max_iter),
        dist_dom_f: probes.domain_distances.then(Vec::new),
        dist_dom_g: probes.domain_distances.then(Vec::new),
        z_snapshots: vec![(0, z0.clone())],
        last: DrsState::initial(z0, gamma),
        converged: false,
        overflow: false,
        stride,
    };
    let mut stats = RunningStats::new();
    let limit = T::lit(OVERFLOW_NORM);
    let mut state = trace.last.clone();
    for _ in 0..max_iter {
        let next = drs_step(&state, f, g);
        let znorm = next.z.norm();
        if !(znorm < limit) || !next.x_half.is_finite() || !next.x_full.is_finite() {
            trace.overflow = true;
            break;
        }
        let dz = next.z.dist(&state.z);
        let obj = f.value(&next.x_half, probes.feas_tol) + g.value(&next.x_full, probes.feas_tol);
        stats.push(obj);
        if next.k > 1 {
            trace.shadow_step.push(next.x_half.dist(&state.x_half));
        }
        trace.dz_norm.push(dz);
        trace.objective.push(obj);
        trace.running_mean.push(stats.mean());
        trace.running_min.push(stats.min());
        trace.x_half_norm.push(next.x_half.norm());
        if let Some(d) = trace.dist_dom_f.as_mut() {
            d.push(f.domain_distance(&next.x_full));
        }
        if let Some(d) = trace.dist_dom_g.as_mut() {
            d.push(g.domain_distance(&next.x_half));
        }
        if next.k % snap_every == 0 {
            trace.z_snapshots.push((next.k, next.z.clone()));
        }
        state = next;
        if dz <= probes.fp_tol {
            trace.converged = true;
            break;
        }
    }
    if trace.z_snapshots.last().map(|s| s.0) != Some(state.k) {
        trace.z_snapshots.push((state.k, state.z.clone()));
    }
    trace.last = state;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{FunctionSpec, SetKind};

    fn v(xs: &[f64]) -> Vector<f64> {
        Vector::from_f64(xs)
    }

    #[test]
    fn zero_functions_fixed_immediately() {
        let f = FunctionSpec::zero(2).compile().unwrap();
        let s = drs_step(&DrsState::initial(v(&[1.0, -4.0]), 1.0), &f, &f);
        assert_eq!(s.z, v(&[1.0, -4.0]));
    }

    #[test]
    fn linear_pair_hand_step() {
        let f = FunctionSpec::linear(v(&[1.0])).compile().unwrap();
        let s = drs_step(&DrsState::initial(v(&[0.0]), 1.0), &f, &f);
        assert_eq!((s.x_half[0], s.x_full[0], s.z[0]), (-1.0, -3.0, -2.0));
    }

    #[test]
    fn point_projections_converge() {
        let f = FunctionSpec::indicator(1, SetKind::point(&[0.0])).compile().unwrap();
        let t = run(&f, &f, 1.0, v(&[5.0]), 100, &ProbeConfig::default()).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterations(), 1);
        // every z is fixed here; the shadow iterates sit at the point
        assert_eq!(t.last.x_half[0], 0.0);
        assert_eq!(t.last.x_full[0], 0.0);
    }

    #[test]
    fn csv_row_count() {
        let f = FunctionSpec::linear(v(&[1.0])).compile().unwrap();
        let probes = ProbeConfig { stride: Some(7), domain_distances: true, ..ProbeConfig::default() };
        let t = run(&f, &f, 1.0, v(&[0.0]), 100, &probes).unwrap();
        let csv = t.to_csv();
        assert_eq!(csv.lines().count() - 1, 100usize.div_ceil(7));
        assert!(csv.lines().nth(1).unwrap().starts_with("1,2,"));
    }

    #[test]
    fn rejects_bad_gamma() {
        let f = FunctionSpec::<f64>::zero(1).compile().unwrap();
        assert!(run(&f, &f, 0.0, v(&[0.0]), 10, &ProbeConfig::default()).is_err());
    }
}
