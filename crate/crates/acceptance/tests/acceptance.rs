//! Acceptance suite: one pass/fail line per criterion, failing checks listed
//! beneath, followed by the exactly stated invariants that the regular test
//! suites check only in attainable form. Exits non-zero when anything fails.
//!
//! `cargo test --test acceptance -- 4 7` restricts the run to criteria 4 and 7.

use drsdiag::engine::{estimate_idv, run, ProbeConfig, IDV_TOL};
use drsdiag::linalg::{smat, svec, SymMat, Vector};
use drsdiag::pathology::improving_direction;
use drsdiag::verify::{criterion, Check, VerifyOptions, CRITERIA};
use drsdiag::zoo::catalog;
use drsdiag::ExtReal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const LONG_RUN: usize = 10_000;

/// `smat(svec(M)) = M` bit for bit on random symmetric matrices.
fn svec_roundtrip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatched = 0usize;
    let total = 1000;
    for i in 0..total {
        let n = 1 + i % 8;
        let m = SymMat::<f64>::from_fn(n, |_, _| rng.gen_range(-10.0..10.0));
        if smat(svec(&m).as_slice()).unwrap() != m {
            mismatched += 1;
        }
    }
    Check::at_most(format!("svec/smat round trip: inexact matrices out of {total}"), mismatched as f64, 0.0)
}

/// `‖v_slope − v_diff‖ ≤ max(1e-3, 10/k)(1 + ‖v‖)` on every zoo run of `10⁴` steps.
fn estimator_consistency() -> Vec<Check> {
    let entries: Vec<_> = catalog::<f64>().into_iter().filter(|e| e.drs_pair().is_some()).collect();
    entries
        .par_iter()
        .filter_map(|e| {
            let (f, g) = e.drs_pair()?;
            let (f, g) = (f.compile().ok()?, g.compile().ok()?);
            let z0 = e.z0.clone().unwrap_or_else(|| Vector::zeros(f.dim()));
            let t = run(&f, &g, 1.0, z0, LONG_RUN, &ProbeConfig::default()).ok()?;
            if t.converged {
                return None;
            }
            let est = estimate_idv(&t, IDV_TOL).ok()?;
            let k = t.iterations() as f64;
            let bound = (1e-3f64).max(10.0 / k) * (1.0 + est.norm());
            Some(Check::at_most(format!("displacement estimator agreement, {}", e.id), est.agreement, bound))
        })
        .collect()
}

/// `rec f(d) + rec g(d) + ½‖d‖² ≤ 1e-9` for the improving direction of every DRS entry.
fn improving_directions() -> Vec<Check> {
    catalog::<f64>()
        .iter()
        .filter_map(|e| {
            let (f, g) = e.drs_pair()?;
            let (f, g) = (f.compile().ok()?, g.compile().ok()?);
            let what = format!("improving-direction inequality, {}", e.id);
            Some(match improving_direction(&f, &g) {
                Ok(d) => {
                    let value = f.recession(&d) + g.recession(&d) + ExtReal::Finite(0.5 * d.norm_sq());
                    Check::at_most(what, value.to_scalar(), 1e-9)
                }
                Err(err) => Check::flag(format!("{what} ({err})"), false),
            })
        })
        .collect()
}

fn main() {
    let picked: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let numbers: Vec<u8> = (1..=CRITERIA).filter(|n| picked.is_empty() || picked.contains(n)).collect();
    let opts = VerifyOptions::default();
    let results: Vec<_> = numbers.par_iter().map(|&n| criterion(n, &opts)).collect();

    println!();
    for r in &results {
        println!("{}", r.summary_line());
        for c in r.checks.iter().filter(|c| !c.passed) {
            println!("    {c}");
        }
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    println!("\nacceptance: {} passed, {failed} failed", results.len() - failed);

    let mut invariant_failures = 0;
    if picked.is_empty() {
        println!("\nexact invariants:");
        let mut checks = vec![svec_roundtrip()];
        checks.extend(estimator_consistency());
        checks.extend(improving_directions());
        for c in &checks {
            println!("    {c}");
        }
        invariant_failures = checks.iter().filter(|c| !c.passed).count();
        println!("invariants: {} passed, {invariant_failures} failed", checks.len() - invariant_failures);
    }
    println!();
    if failed + invariant_failures > 0 {
        std::process::exit(1);
    }
}
