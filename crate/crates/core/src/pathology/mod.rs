//! Improving directions, analytic displacement vectors, certificates and the
//! case classifier.

mod certificate;
mod classify;
mod diagnose;
mod directions;
mod types;

pub use certificate::{check_certificate, make_certificate, CertificateCheck, CERT_DIST_TOL};
pub use classify::{
    classify, gather_evidence, Classification, Evidence, GROWTH_TOL, LIMIT_MARGIN, LOG_SLOPE_TOL, RATE_TOL,
};
pub use diagnose::{
    diagnose, diagnose_trace, DiagnoseConfig, Diagnosis, GroundTruthComparison, LabelDefinition, Report,
};
pub use directions::{
    analytic_idv, dual_improving_direction, improving_direction, DualDirection, GAP_STALL_TOL, INNER_MAX_ITER,
};
pub use types::{CaseLabel, Certificate, CertificateKind, Feasibility, GroundTruth};
