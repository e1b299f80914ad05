use serde::Serialize;

use crate::atoms::CpcFunction;
use crate::engine::{estimate_idv, run, DrsTrace, IdvEstimate, ObjectiveStats, ProbeConfig, IDV_TOL};
use crate::error::Result;
use crate::linalg::Vector;
use crate::pathology::classify::{classify, gather_evidence, Classification, Evidence};
use crate::pathology::directions::analytic_idv;
use crate::pathology::types::{CaseLabel, GroundTruth};
use crate::{ExtReal, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseConfig<T> {
    pub gamma: T,
    pub max_iter: usize,
    /// Defaults to the origin.
    pub z0: Option<Vector<T>>,
    pub probes: ProbeConfig<T>,
    pub idv_tol: T,
}

impl<T: Scalar> DiagnoseConfig<T> {
    pub fn new(gamma: T, max_iter: usize) -> Self {
        DiagnoseConfig { gamma, max_iter, z0: None, probes: ProbeConfig::default(), idv_tol: T::lit(IDV_TOL) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelDefinition {
    pub label: CaseLabel,
    pub definition: &'static str,
}

/// Comparison of the observed behavior with the attached ground truth.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct GroundTruthComparison<T> {
    pub expected_case: CaseLabel,
    pub label_matches: bool,
    pub p_star: ExtReal<T>,
    pub d_star: ExtReal<T>,
    /// `|observed limit − p*|` when both are finite.
    pub limit_error: Option<T>,
    /// `‖v_estimate − v_known(γ)‖` when a displacement is known.
    pub idv_error: Option<T>,
}

/// Machine-readable outcome of one diagnosis. Serializes deterministically.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Report<T> {
    pub id: Option<String>,
    pub gamma: T,
    pub iterations: usize,
    pub converged: bool,
    pub overflow: bool,
    pub label: CaseLabel,
    pub label_definition: &'static str,
    pub b_or_a: bool,
    pub taxonomy: Vec<LabelDefinition>,
    pub reasons: Vec<String>,
    pub idv: Option<IdvEstimate<T>>,
    pub idv_analytic: Option<Vector<T>>,
    pub evidence: Evidence<T>,
    pub objective: Option<ObjectiveStats<T>>,
    pub observed_limit: Option<T>,
    pub solution: Option<Vector<T>>,
    pub ground_truth: Option<GroundTruthComparison<T>>,
}

impl<T: Scalar> Report<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct Diagnosis<T> {
    pub trace: DrsTrace<T>,
    pub classification: Classification<T>,
    pub report: Report<T>,
}

/// Runs the splitting, estimates the displacement, gathers certificates and
/// classifies. `f` is resolved first in each step.
pub fn diagnose<T: Scalar>(
    f: &CpcFunction<T>,
    g: &CpcFunction<T>,
    config: &DiagnoseConfig<T>,
    gt: Option<&GroundTruth<T>>,
) -> Result<Diagnosis<T>> {
    let z0 = config.z0.clone().unwrap_or_else(|| Vector::zeros(f.dim()));
    let trace = run(f, g, config.gamma, z0, config.max_iter, &config.probes)?;
    Ok(diagnose_trace(f, g, trace, config.idv_tol, gt))
}

/// Same as [`diagnose`] on an existing trace.
pub fn diagnose_trace<T: Scalar>(
    f: &CpcFunction<T>,
    g: &CpcFunction<T>,
    trace: DrsTrace<T>,
    idv_tol: T,
    gt: Option<&GroundTruth<T>>,
) -> Diagnosis<T> {
    let idv = estimate_idv(&trace, idv_tol).ok();
    let evidence = gather_evidence(f, g, &trace, idv.as_ref());
    let classification = classify(&trace, idv.as_ref(), &evidence, gt);
    let idv_analytic = analytic_idv(f, g, trace.gamma, gt).ok();
    let label = classification.label;
    let ground_truth = gt.map(|gt| {
        let limit_error = match (classification.observed_limit, gt.p_star) {
            (Some(l), ExtReal::Finite(p)) => Some((l - p).abs()),
            _ => None,
        };
        let idv_error = match (&idv, &gt.known_v) {
            (Some(e), Some(v)) => Some(e.v().dist(&v.scaled(trace.gamma))),
            _ => None,
        };
        GroundTruthComparison {
            expected_case: gt.case,
            label_matches: gt.case == label,
            p_star: gt.p_star,
            d_star: gt.d_star,
            limit_error,
            idv_error,
        }
    });
    let report = Report {
        id: None,
        gamma: trace.gamma,
        iterations: trace.iterations(),
        converged: trace.converged,
        overflow: trace.overflow,
        label,
        label_definition: label.definition(),
        b_or_a: classification.b_or_a,
        taxonomy: CaseLabel::taxonomy()
            .into_iter()
            .map(|(label, definition)| LabelDefinition { label, definition })
            .collect(),
        reasons: classification.reasons.clone(),
        idv: idv.clone(),
        idv_analytic,
        objective: evidence.objective.clone(),
        evidence,
        observed_limit: classification.observed_limit,
        solution: trace.converged.then(|| trace.last.x_half.clone()),
        ground_truth,
    };
    Diagnosis { trace, classification, report }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::entry;

    fn label_of(id: &str, iters: usize) -> CaseLabel {
        let e = entry::<f64>(id).unwrap();
        let (f, g) = e.drs_pair().unwrap();
        let (f, g) = (f.compile().unwrap(), g.compile().unwrap());
        let mut cfg = DiagnoseConfig::new(1.0, iters);
        cfg.z0 = e.z0.clone();
        diagnose(&f, &g, &cfg, None).unwrap().classification.label
    }

    #[test]
    fn small_cases_without_ground_truth() {
        assert_eq!(label_of("case-a", 1000), CaseLabel::A);
        assert_eq!(label_of("case-e", 2000), CaseLabel::E);
        assert_eq!(label_of("case-f", 20_000), CaseLabel::F);
    }

    #[test]
    fn report_is_deterministic() {
        let e = entry::<f64>("case-e").unwrap();
        let (f, g) = e.drs_pair().unwrap();
        let (f, g) = (f.compile().unwrap(), g.compile().unwrap());
        let cfg = DiagnoseConfig::new(1.0, 1000);
        let a = diagnose(&f, &g, &cfg, Some(&e.ground_truth)).unwrap().report.to_json();
        let b = diagnose(&f, &g, &cfg, Some(&e.ground_truth)).unwrap().report.to_json();
        assert_eq!(a, b);
        assert!(a.contains("\"label\": \"E\""));
    }
}
