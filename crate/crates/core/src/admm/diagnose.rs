use serde::Serialize;

use crate::admm::iterate::{run_admm, AdmmState, AdmmTrace};
use crate::admm::problem::{AdmmProblem, Regularity};
use crate::admm::reduce::{reduce_to_drs, AdmmCase};
use crate::engine::ObjectiveStats;
use crate::error::Result;
use crate::pathology::{diagnose, DiagnoseConfig, Diagnosis, GroundTruth, Report};
use crate::Scalar;

/// Residual tail above which the direct run alone reports infeasibility.
pub const RESIDUAL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct AdmmReport<T> {
    pub id: Option<String>,
    pub gamma: T,
    pub iterations: usize,
    pub converged: bool,
    pub case: AdmmCase,
    pub case_definition: &'static str,
    pub regularity_f: Regularity<T>,
    pub regularity_g: Regularity<T>,
    /// Tail mean of `‖Ax^k + By^k − c‖`.
    pub residual_tail: T,
    pub objective: Option<ObjectiveStats<T>>,
    /// Growth exponent of `‖(x^k, y^k)‖` per doubling of `k`.
    pub primal_growth: T,
    pub tail_primal_step: T,
    /// Diagnosis of DRS on `(g̃, f̃)`, when the reduction is supported.
    pub reduced: Option<Report<T>>,
    pub reduction_error: Option<String>,
}

impl<T: Scalar> AdmmReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct AdmmDiagnosis<T> {
    pub trace: AdmmTrace<T>,
    pub reduced: Option<Diagnosis<T>>,
    pub report: AdmmReport<T>,
}

/// Runs ADMM directly and, when possible, DRS on the reduced pair; the case
/// label comes from the reduced run, falling back to the residual alone.
///
/// `config.z0` is ignored: both paths start from `ν⁰ = 0`, `y⁰ ∈ dom g`.
pub fn diagnose_admm<T: Scalar>(
    prob: &AdmmProblem<T>,
    config: &DiagnoseConfig<T>,
    gt: Option<&GroundTruth<T>>,
) -> Result<AdmmDiagnosis<T>> {
    let gamma = config.gamma;
    let trace = run_admm(prob, gamma, None, config.max_iter, &config.probes)?;
    let (reduced, reduction_error) = match reduce_to_drs(prob) {
        Ok(pair) => {
            let (first, second) = pair.drs_pair()?;
            let s0 = AdmmState::initial(prob, gamma);
            let x1 = prob.x_update(gamma, &s0.y, &s0.nu);
            let mut cfg = config.clone();
            cfg.z0 = Some(pair.z_from(gamma, &s0.nu, &x1));
            (Some(diagnose(&first, &second, &cfg, gt)?), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let residual_tail = trace.tail_residual();
    let case = match &reduced {
        Some(d) => AdmmCase::from_drs(d.classification.label),
        None if trace.converged => AdmmCase::A,
        None if residual_tail > T::lit(RESIDUAL_TOL) => AdmmCase::D,
        None => AdmmCase::Undetermined,
    };
    let report = AdmmReport {
        id: None,
        gamma,
        iterations: trace.iterations(),
        converged: trace.converged,
        case,
        case_definition: case.definition(),
        regularity_f: prob.regularity_f.clone(),
        regularity_g: prob.regularity_g.clone(),
        residual_tail,
        objective: trace.objective_stats(),
        primal_growth: trace.primal_growth(),
        tail_primal_step: trace.tail_primal_step(),
        reduced: reduced.as_ref().map(|d| d.report.clone()),
        reduction_error,
    };
    Ok(AdmmDiagnosis { trace, reduced, report })
}
