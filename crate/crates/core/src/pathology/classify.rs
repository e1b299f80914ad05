use serde::Serialize;

use crate::atoms::CpcFunction;
use crate::engine::{DrsTrace, IdvEstimate, ObjectiveStats};
use crate::linalg::Vector;
use crate::pathology::certificate::{check_certificate, make_certificate, CertificateCheck};
use crate::pathology::directions::{dual_improving_direction, improving_direction, DualDirection};
use crate::pathology::types::{CaseLabel, Certificate, CertificateKind, GroundTruth};
use crate::Scalar;

/// Objective log-slope beyond which the objective is taken to diverge.
pub const LOG_SLOPE_TOL: f64 = 0.1;
/// Growth exponent of `‖x^{k+1/2}‖` (per doubling of `k`) that counts as divergence.
pub const GROWTH_TOL: f64 = 0.1;
/// Relative tolerance when matching observed rates against predicted ones.
pub const RATE_TOL: f64 = 1e-3;
/// Margin used when comparing an observed limit with `d*` and `p*`.
pub const LIMIT_MARGIN: f64 = 0.05;

/// Everything the classifier looks at besides the trace itself.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Evidence<T> {
    /// `Prox_{rec f + rec g}(0)`, when computable.
    pub improving_direction: Option<Vector<T>>,
    /// Certificate built from the limiting displacement `z^{k+1} − z^k → −v`.
    pub primal_certificate: Option<(Certificate<T>, CertificateCheck<T>)>,
    pub dual_direction: DualDirection<T>,
    pub dual_certificate: Option<(Certificate<T>, CertificateCheck<T>)>,
    pub objective: Option<ObjectiveStats<T>>,
    pub tail_displacement: T,
    pub tail_shadow_step: T,
    /// `log₂(‖x^{K+1/2}‖ / ‖x^{K/2+1/2}‖)`
    pub shadow_growth: T,
    /// Decay exponent of the shadow steps, as for `‖Δz‖`.
    pub shadow_decay: T,
}

fn log2_ratio<T: Scalar>(late: T, early: T) -> T {
    if early > T::zero() && late > T::zero() {
        (late / early).log2()
    } else if late > T::zero() {
        T::infinity()
    } else {
        T::neg_infinity()
    }
}

fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::lit(xs.len().max(1) as f64)
}

pub fn gather_evidence<T: Scalar>(
    f: &CpcFunction<T>,
    g: &CpcFunction<T>,
    trace: &DrsTrace<T>,
    idv: Option<&IdvEstimate<T>>,
) -> Evidence<T> {
    let improving = improving_direction(f, g).ok();
    let primal_certificate = idv.filter(|e| !e.vanishing).and_then(|e| {
        let dir = -&e.v_from_diff;
        let cert = make_certificate(CertificateKind::DualStrongInfeasibility, dir, f, g);
        check_certificate(&cert, f, g).ok().map(|c| (cert, c))
    });
    let dual_direction = dual_improving_direction(f, g);
    let dual_certificate = (dual_direction.d_prime.norm() > T::lit(1e-9)).then(|| {
        let cert = make_certificate(CertificateKind::PrimalStrongInfeasibility, dual_direction.d_prime.clone(), f, g);
        check_certificate(&cert, f, g).ok().map(|c| (cert, c))
    });
    let k = trace.x_half_norm.len();
    let shadow_growth = if k >= 4 { log2_ratio(trace.x_half_norm[k - 1], trace.x_half_norm[k / 2]) } else { T::zero() };
    let s = &trace.shadow_step;
    let shadow_decay =
        if s.len() >= 8 { log2_ratio(mean(&s[s.len() / 2..]), mean(&s[s.len() / 4..s.len() / 2])) } else { T::zero() };
    Evidence {
        improving_direction: improving,
        primal_certificate,
        dual_direction,
        dual_certificate: dual_certificate.flatten(),
        objective: trace.objective_stats(),
        tail_displacement: trace.tail_displacement(),
        tail_shadow_step: trace.tail_shadow_step(),
        shadow_growth,
        shadow_decay,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Classification<T> {
    pub label: CaseLabel,
    /// Set when the run cannot separate case B from case A.
    pub b_or_a: bool,
    /// Tail mean of the objective samples.
    pub observed_limit: Option<T>,
    pub reasons: Vec<String>,
}

/// Assigns a case label. Pure: the same inputs always give the same label.
///
/// Order of checks: ground truth with `d* < p*`; fixed point found; nonzero
/// displacement (certificates); vanishing displacement (objective and shadow
/// behavior).
pub fn classify<T: Scalar>(
    trace: &DrsTrace<T>,
    idv: Option<&IdvEstimate<T>>,
    evidence: &Evidence<T>,
    gt: Option<&GroundTruth<T>>,
) -> Classification<T> {
    let observed_limit = evidence.objective.as_ref().map(|s| s.tail_mean);
    let mut reasons = Vec::new();
    let done = |label, b_or_a, reasons| Classification { label, b_or_a, observed_limit, reasons };

    if let Some(gt) = gt.filter(|gt| gt.strong_duality_fails()) {
        reasons.push(format!("ground truth d* = {} < p* = {}", gt.d_star, gt.p_star));
        if let Some(lim) = observed_limit {
            let inside =
                gt.d_star.lt(crate::ext::ExtReal::Finite(lim)) && crate::ext::ExtReal::Finite(lim).lt(gt.p_star);
            reasons.push(format!("observed objective limit {lim} (strictly between d* and p*: {inside})"));
        }
        return done(CaseLabel::G, false, reasons);
    }
    if trace.converged {
        reasons.push(format!("fixed point reached after {} iterations", trace.iterations()));
        return done(CaseLabel::A, false, reasons);
    }
    let Some(idv) = idv else {
        reasons.push("no displacement estimate (trace too short)".into());
        return done(CaseLabel::Undetermined, false, reasons);
    };
    let rate_ok =
        |observed: T, predicted: T| (observed - predicted).abs() <= T::lit(RATE_TOL) * (T::one() + predicted.abs());

    if !idv.vanishing {
        let vnorm = idv.norm();
        reasons.push(format!("displacement does not vanish: |v| = {vnorm}"));
        if let Some((_, check)) = &evidence.primal_certificate {
            let predicted = -vnorm * vnorm / trace.gamma;
            let slope = evidence.objective.as_ref().map_or(T::nan(), |s| s.slope);
            if check.valid && rate_ok(slope, predicted) {
                reasons.push(format!(
                    "improving direction certified (margin {}), objective slope {slope} matches {predicted}",
                    check.margin
                ));
                return done(CaseLabel::E, false, reasons);
            }
            reasons.push(format!("primal certificate valid: {}, objective slope {slope} vs {predicted}", check.valid));
        }
        if let Some((_, check)) = &evidence.dual_certificate {
            if check.valid && rate_ok(evidence.tail_displacement, vnorm) {
                reasons.push(format!(
                    "domains separated by {}, |dz| tail {} matches |v|",
                    check.margin, evidence.tail_displacement
                ));
                return done(CaseLabel::F, false, reasons);
            }
            reasons.push(format!("dual certificate valid: {}", check.valid));
        }
        reasons.push("nonzero displacement without a matching certificate".into());
        return done(CaseLabel::Undetermined, false, reasons);
    }

    reasons.push(format!("displacement vanishes (|v| estimate {}, decay exponent {})", idv.norm(), idv.decay_exponent));
    let Some(stats) = evidence.objective.as_ref() else {
        reasons.push("no finite objective sample".into());
        return done(CaseLabel::Undetermined, false, reasons);
    };
    let diverging_shadows = evidence.shadow_growth >= T::lit(GROWTH_TOL)
        || (evidence.tail_shadow_step > T::lit(1e-6) && evidence.shadow_decay > T::lit(-0.2));
    if stats.log_slope < -T::lit(LOG_SLOPE_TOL) && stats.tail_mean < stats.running_mean {
        reasons.push(format!("objective decreases like {} ln k", stats.log_slope));
        if diverging_shadows {
            reasons.push(format!("shadow iterates diverge (growth exponent {})", evidence.shadow_growth));
            return done(CaseLabel::D, false, reasons);
        }
    }
    if stats.log_slope > T::lit(LOG_SLOPE_TOL) {
        reasons.push(format!("objective increases like {} ln k: primal infeasible", stats.log_slope));
        return done(CaseLabel::F, false, reasons);
    }
    if diverging_shadows {
        reasons.push(format!(
            "objective settles near {}, shadow iterates do not converge (growth exponent {}, tail step {})",
            stats.tail_mean, evidence.shadow_growth, evidence.tail_shadow_step
        ));
        return done(CaseLabel::C, false, reasons);
    }
    reasons.push(format!("objective settles near {}, shadow iterates settle", stats.tail_mean));
    match gt.map(|g| g.case) {
        Some(case @ (CaseLabel::A | CaseLabel::B)) => {
            reasons.push(format!("case {case} taken from ground truth"));
            done(case, false, reasons)
        }
        _ => {
            reasons.push("finite data cannot separate case B from case A".into());
            done(CaseLabel::B, true, reasons)
        }
    }
}
