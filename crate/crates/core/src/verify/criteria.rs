use std::time::Instant;

use rayon::prelude::*;

use crate::admm::diagnose_admm;
use crate::engine::{drs_step, estimate_idv, run, DrsState, DrsTrace, ProbeConfig, IDV_TOL};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::pathology::{
    check_certificate, diagnose, gather_evidence, make_certificate, CaseLabel, CertificateKind, DiagnoseConfig,
    Evidence, GROWTH_TOL,
};
use crate::verify::properties::{
    eigen_reconstruction_worst, equivalence_worst, firm_nonexpansive_worst, monotonicity_worst, moreau_worst,
    prox_oracle_worst, zoo_functions,
};
use crate::verify::{Check, CriterionResult, VerifyOptions};
use crate::zoo::{catalog, entry, ZooEntry};
use crate::{CpcFunction, ExtReal};

const LONG_RUN: usize = 100_000;
const SDP_RUN: usize = 200_000;
const SD_FAIL: [&str; 5] = ["sd-fail-soc", "sd-fail-bertsekas", "sd-fail-drusvyatskiy", "sd-fail-ye", "sd-fail-tuncel"];
const SMALL_CASES: [&str; 6] = ["case-a", "case-b", "case-c", "case-d", "case-e", "case-f"];

fn title(n: u8) -> &'static str {
    match n {
        1 => "case a: solution and optimal value",
        2 => "case b: feasibility and mean objective",
        3 => "cases c/d: vanishing displacement, objective, shadow divergence",
        4 => "case e: displacement, estimators, certificate, slope",
        5 => "case f: vanishing displacement",
        6 => "strong infeasibility through the ADMM reduction",
        7 => "closed-form SOC example",
        8 => "SDP step-size thresholds",
        9 => "property suites",
        10 => "strong-duality-failure detection",
        _ => "unknown",
    }
}

fn entries(n: u8) -> Vec<&'static str> {
    match n {
        1 => vec!["case-a"],
        2 => vec!["case-b"],
        3 => vec!["case-c", "case-d"],
        4 => vec!["case-e"],
        5 => vec!["case-f"],
        6 => vec!["admm-d"],
        7 => vec!["sd-fail-soc"],
        8 => vec!["sd-fail-drusvyatskiy", "sd-fail-ye", "sd-fail-tuncel"],
        9 => catalog::<f64>().iter().map(|e| e.id).collect(),
        10 => SMALL_CASES.iter().chain(SD_FAIL.iter()).copied().collect(),
        _ => vec![],
    }
}

pub(crate) fn touches(n: u8, opts: &VerifyOptions) -> bool {
    entries(n).iter().any(|id| opts.wants(id))
}

/// Evaluates criterion `n`.
pub fn criterion(n: u8, opts: &VerifyOptions) -> CriterionResult {
    let body = match n {
        1 => case_a(opts),
        2 => case_b(opts),
        3 => cases_c_d(opts),
        4 => case_e(opts),
        5 => case_f(opts),
        6 => strong_infeasibility(opts),
        7 => soc_example(opts),
        8 => sdp_thresholds(opts),
        9 => property_suites(opts),
        10 => g_detection(opts),
        _ => Err(Error::Input(format!("no criterion {n}"))),
    };
    let (checks, error) = match body {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    CriterionResult { number: n, title: title(n), entries: entries(n), checks, error }
}

struct Run {
    entry: ZooEntry<f64>,
    f: CpcFunction<f64>,
    g: CpcFunction<f64>,
    trace: DrsTrace<f64>,
}

fn pair(e: &ZooEntry<f64>) -> Result<(CpcFunction<f64>, CpcFunction<f64>)> {
    let (f, g) = e.drs_pair().ok_or_else(|| Error::Input(format!("{} is not a DRS entry", e.id)))?;
    Ok((f.compile()?, g.compile()?))
}

fn drs_run(id: &str, gamma: f64, iters: usize) -> Result<Run> {
    let entry = entry::<f64>(id)?;
    let (f, g) = pair(&entry)?;
    let z0 = entry.z0.clone().unwrap_or_else(|| Vector::zeros(f.dim()));
    let trace = run(&f, &g, gamma, z0, iters, &ProbeConfig::default())?;
    Ok(Run { entry, f, g, trace })
}

fn last_objective(trace: &DrsTrace<f64>) -> f64 {
    trace.objective.last().map_or(f64::NAN, |o| o.to_scalar())
}

fn evidence(r: &Run) -> Evidence<f64> {
    let idv = estimate_idv(&r.trace, IDV_TOL).ok();
    gather_evidence(&r.f, &r.g, &r.trace, idv.as_ref())
}

/// Tail shadow step bounded away from zero, or `‖x^{k+1/2}‖` growing.
fn shadow_nonconvergent(ev: &Evidence<f64>) -> bool {
    ev.shadow_growth >= GROWTH_TOL || (ev.tail_shadow_step > 1e-6 && ev.shadow_decay > -0.2)
}

fn case_a(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let start = Instant::now();
    let r = drs_run("case-a", 1.0, LONG_RUN)?;
    let secs = start.elapsed().as_secs_f64();
    Ok(vec![
        Check::flag("fixed point reached", r.trace.converged),
        Check::near("x^{k+1/2}", r.trace.last.x_half[0], 1.0, opts.tol(1e-6)),
        Check::near("objective", last_objective(&r.trace), 1.0, opts.tol(1e-6)),
        Check::at_most("runtime [s]", secs, 1.0),
    ])
}

fn case_b(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let r = drs_run("case-b", 1.0, LONG_RUN)?;
    Ok(vec![
        Check::at_most("tail |x^{k+1} - x^{k+1/2}|", r.trace.tail_displacement(), opts.tol(1e-3)),
        Check::near(
            "running mean of objective",
            *r.trace.running_mean.last().unwrap_or(&f64::NAN),
            0.0,
            opts.tol(1e-2),
        ),
    ])
}

fn cases_c_d(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    if opts.wants("case-c") {
        let r = drs_run("case-c", 1.0, LONG_RUN)?;
        let ev = evidence(&r);
        checks.push(Check::at_most("case-c tail displacement", r.trace.tail_displacement(), opts.tol(1e-2)));
        checks.push(Check::near(
            "case-c running mean",
            *r.trace.running_mean.last().unwrap_or(&f64::NAN),
            0.0,
            opts.tol(1e-2),
        ));
        checks.push(Check::flag("case-c shadow iterates nonconvergent", shadow_nonconvergent(&ev)));
    }
    if opts.wants("case-d") {
        let r = drs_run("case-d", 1.0, LONG_RUN)?;
        let ev = evidence(&r);
        let rm = &r.trace.running_mean;
        let marks: Vec<f64> = [1_000, 10_000, LONG_RUN].iter().filter_map(|&k| rm.get(k - 1).copied()).collect();
        let decreasing = marks.len() == 3 && marks.windows(2).all(|w| w[1] < w[0]);
        checks.push(Check::at_most("case-d tail displacement", r.trace.tail_displacement(), opts.tol(1e-2)));
        checks.push(Check::flag("case-d running mean decreasing at k = 1e3, 1e4, 1e5", decreasing));
        checks.push(Check::at_most("case-d running mean", *rm.last().unwrap_or(&f64::NAN), -10.0));
        checks.push(Check::flag("case-d shadow iterates nonconvergent", shadow_nonconvergent(&ev)));
    }
    Ok(checks)
}

fn case_e(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for gamma in [0.25, 1.0, 4.0] {
        let r = drs_run("case-e", gamma, 1_000)?;
        let idv = estimate_idv(&r.trace, IDV_TOL)?;
        let displacement = -idv.v_from_diff[0];
        checks.push(Check::near(format!("gamma={gamma} displacement"), displacement, -2.0 * gamma, opts.tol(1e-10)));
        checks.push(Check::at_most(format!("gamma={gamma} estimator agreement"), idv.agreement, opts.tol(1e-8)));
        let cert = make_certificate(CertificateKind::DualStrongInfeasibility, -&idv.v_from_diff, &r.f, &r.g);
        let check = check_certificate(&cert, &r.f, &r.g)?;
        checks.push(Check::flag(format!("gamma={gamma} certificate valid"), check.valid));
        checks.push(Check::near(
            format!("gamma={gamma} certificate margin"),
            check.margin,
            4.0 * gamma,
            opts.tol(1e-8),
        ));
        let slope = r.trace.objective_stats().map_or(f64::NAN, |s| s.slope);
        checks.push(Check::near(format!("gamma={gamma} objective slope"), slope, -4.0 * gamma, opts.tol(1e-6)));
    }
    Ok(checks)
}

fn case_f(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let r = drs_run("case-f", 1.0, LONG_RUN)?;
    Ok(vec![Check::at_most("tail |x^{k+1} - x^{k+1/2}|", r.trace.tail_displacement(), opts.tol(1e-2))])
}

fn strong_infeasibility(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let e = entry::<f64>("admm-d")?;
    let prob = e.admm().ok_or_else(|| Error::Input("admm-d is not an ADMM entry".into()))?.compile()?;
    let mut checks = Vec::new();
    let mut vs = Vec::new();
    for gamma in [0.5, 1.0, 2.0] {
        let d = diagnose_admm(&prob, &DiagnoseConfig::new(gamma, LONG_RUN), Some(&e.ground_truth))?;
        let drs = d.reduced.ok_or_else(|| Error::Capability("admm-d did not reduce".into()))?;
        checks.push(Check::near(
            format!("gamma={gamma} tail |dz|"),
            drs.trace.tail_displacement(),
            1.0,
            opts.tol(1e-3),
        ));
        checks.push(Check::near(
            format!("gamma={gamma} ADMM residual tail"),
            d.report.residual_tail,
            1.0,
            opts.tol(1e-3),
        ));
        let idv = drs.report.idv.ok_or_else(|| Error::Undetermined("no displacement estimate".into()))?;
        vs.push(idv.v_from_diff);
    }
    let spread = vs.iter().flat_map(|a| vs.iter().map(move |b| a.dist(b))).fold(0.0, f64::max);
    checks.push(Check::at_most("spread of v across gamma", spread, opts.tol(1e-8)));
    Ok(checks)
}

fn soc_example(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let gamma = 1.0;
    let e = entry::<f64>("sd-fail-soc")?;
    let (f, g) = pair(&e)?;
    let z0 = Vector::from_f64(&[1.0, 1.0, 0.0]);
    let mut state = DrsState::initial(z0.clone(), gamma);
    let mut predicted = z0[0];
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        state = drs_step(&state, &f, &g);
        predicted = predicted / 2.0 - gamma;
        worst = worst.max((state.z[0] - predicted).abs());
    }
    let trace = run(&f, &g, gamma, z0, 10_000, &ProbeConfig::default())?;
    Ok(vec![
        Check::at_most("recursion z1 <- z1/2 - gamma, 50 steps", worst, opts.tol(1e-12)),
        Check::near("objective at k = 1e4", last_objective(&trace), -2.0 * gamma, opts.tol(1e-3)),
        Check::near("x1^{k+1/2} at k = 1e4", trace.last.x_half[0], -2.0 * gamma, opts.tol(1e-3)),
    ])
}

struct ThresholdCase {
    id: &'static str,
    at_d_star: [f64; 2],
    between: [f64; 2],
}

const THRESHOLDS: [ThresholdCase; 3] = [
    ThresholdCase { id: "sd-fail-drusvyatskiy", at_d_star: [0.5, 1.0], between: [0.1, 0.25] },
    ThresholdCase { id: "sd-fail-ye", at_d_star: [1.0, 2.0], between: [0.2, 0.5] },
    ThresholdCase { id: "sd-fail-tuncel", at_d_star: [0.8, 1.6], between: [0.16, 0.4] },
];

fn sdp_thresholds(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let margin = opts.tol(0.05);
    let jobs: Vec<(&ThresholdCase, f64, bool)> = THRESHOLDS
        .iter()
        .filter(|t| opts.wants(t.id))
        .flat_map(|t| {
            t.at_d_star.iter().map(move |&g| (t, g, true)).chain(t.between.iter().map(move |&g| (t, g, false)))
        })
        .collect();
    let results: Vec<Result<Vec<Check>>> = jobs
        .par_iter()
        .map(|&(t, gamma, at_d)| {
            let r = drs_run(t.id, gamma, SDP_RUN)?;
            let (p, d) = match (r.entry.ground_truth.p_star, r.entry.ground_truth.d_star) {
                (ExtReal::Finite(p), ExtReal::Finite(d)) => (p, d),
                _ => return Err(Error::Input(format!("{} needs finite p* and d*", t.id))),
            };
            let stats = r.trace.objective_stats().ok_or_else(|| Error::Undetermined("no finite objective".into()))?;
            let limit = stats.tail_mean;
            let mut out = vec![if at_d {
                Check::near(format!("{} gamma={gamma} limit at d*", t.id), limit, d, margin)
            } else {
                Check::inside(format!("{} gamma={gamma} limit strictly between", t.id), limit, d + margin, p - margin)
            }];
            out.push(Check::at_most(format!("{} gamma={gamma} running min", t.id), stats.running_min, p - margin));
            Ok(out)
        })
        .collect();
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    Ok(checks)
}

fn property_suites(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let only = opts.only.as_deref();
    let funcs = zoo_functions(only)?;
    let mut checks = Vec::new();

    let moreau: Vec<(String, f64)> =
        funcs.par_iter().filter_map(|(name, f)| moreau_worst(f, 50, 11).map(|w| (name.clone(), w))).collect();
    checks.push(worst_check("Moreau residual", &moreau, opts.tol(1e-10)));

    let firm: Vec<(String, f64)> =
        funcs.par_iter().map(|(name, f)| (name.clone(), firm_nonexpansive_worst(f, 1.0, 1000, 12))).collect();
    checks.push(worst_check("firm nonexpansiveness excess", &firm, opts.tol(1e-10)));

    let oracle: Vec<(String, f64)> =
        funcs.par_iter().map(|(name, f)| (name.clone(), prox_oracle_worst(f, 1.0, 10, 13))).collect();
    checks.push(worst_check("oracle improvement over prox", &oracle, opts.tol(1e-8)));

    let runs: Vec<Result<(String, f64)>> = catalog::<f64>()
        .into_par_iter()
        .filter(|e| e.drs_pair().is_some() && opts.wants(e.id))
        .map(|e| {
            let r = drs_run(e.id, 1.0, 10_000)?;
            Ok((e.id.to_string(), monotonicity_worst(&r.trace)))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    if !runs.is_empty() {
        checks.push(worst_check("displacement increase", &runs, opts.tol(1e-12)));
    }

    if only.is_none() {
        checks.push(Check::at_most("eigen reconstruction", eigen_reconstruction_worst(1000, 14)?, opts.tol(1e-12)));
    }

    let eq = equivalence_worst(1000, only)?;
    if !eq.is_empty() {
        checks.push(worst_check("ADMM/DRS iterate mismatch", &eq, opts.tol(1e-10)));
    }
    Ok(checks)
}

fn worst_check(what: &str, values: &[(String, f64)], bound: f64) -> Check {
    let (name, worst) =
        values
            .iter()
            .fold((String::from("-"), f64::NEG_INFINITY), |acc, (n, v)| if *v > acc.1 { (n.clone(), *v) } else { acc });
    Check::at_most(format!("{what} (worst: {name}, {} cases)", values.len()), worst, bound)
}

fn g_detection(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let ids: Vec<&str> = SMALL_CASES.iter().chain(SD_FAIL.iter()).copied().filter(|id| opts.wants(id)).collect();
    let labels: Vec<Result<(String, CaseLabel, bool)>> = ids
        .par_iter()
        .map(|&id| {
            let e = entry::<f64>(id)?;
            let (f, g) = pair(&e)?;
            let mut cfg = DiagnoseConfig::new(1.0, 20_000);
            cfg.z0 = e.z0.clone();
            let d = diagnose(&f, &g, &cfg, Some(&e.ground_truth))?;
            Ok((id.to_string(), d.classification.label, SD_FAIL.contains(&id)))
        })
        .collect();
    let mut checks = Vec::new();
    for l in labels {
        let (id, label, expect_g) = l?;
        let ok = (label == CaseLabel::G) == expect_g;
        let what = if expect_g {
            format!("{id} labelled G (got {label})")
        } else {
            format!("{id} not labelled G (got {label})")
        };
        checks.push(Check::flag(what, ok));
    }
    Ok(checks)
}
