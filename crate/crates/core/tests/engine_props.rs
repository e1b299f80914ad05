#![allow(clippy::type_complexity)]

use drsdiag::engine::{drs_step, estimate_idv, run, DrsState, DrsTrace, ProbeConfig, IDV_TOL};
use drsdiag::linalg::Vector;
use drsdiag::zoo::catalog;
use drsdiag::CpcFunction;
use proptest::prelude::*;
use rayon::prelude::*;

const RUN: usize = 10_000;

fn drs_entries() -> Vec<(&'static str, CpcFunction<f64>, CpcFunction<f64>, Vector<f64>)> {
    catalog::<f64>()
        .into_iter()
        .filter_map(|e| {
            let (f, g) = e.drs_pair()?;
            let (f, g) = (f.compile().unwrap(), g.compile().unwrap());
            let z0 = e.z0.clone().unwrap_or_else(|| Vector::zeros(f.dim()));
            Some((e.id, f, g, z0))
        })
        .collect()
}

fn zoo_runs() -> Vec<(&'static str, DrsTrace<f64>)> {
    drs_entries()
        .into_par_iter()
        .map(|(id, f, g, z0)| (id, run(&f, &g, 1.0, z0, RUN, &ProbeConfig::default()).unwrap()))
        .collect()
}

#[test]
fn displacement_never_increases_on_zoo_runs() {
    for (id, t) in zoo_runs() {
        for (k, w) in t.dz_norm.windows(2).enumerate() {
            assert!(w[1] <= w[0] + 1e-12, "{id}: ‖Δz‖ rose from {} to {} at k = {}", w[0], w[1], k + 1);
        }
    }
}

#[test]
fn step_identity_is_exact() {
    for (id, f, g, z0) in drs_entries() {
        let mut s = DrsState::initial(z0, 0.7);
        for _ in 0..200 {
            let next = drs_step(&s, &f, &g);
            assert_eq!(next.x_half, f.prox(0.7, &s.z), "{id}");
            let reflected = next.x_half.scaled(2.0).axpy(-1.0, &s.z);
            assert_eq!(next.x_full, g.prox(0.7, &reflected), "{id}");
            assert_eq!(next.z, s.z.axpy(1.0, &(&next.x_full - &next.x_half)), "{id}");
            s = next;
        }
    }
}

#[test]
fn shadow_steps_vanish_when_displacement_does() {
    for (id, t) in zoo_runs() {
        if t.converged {
            continue;
        }
        let est = estimate_idv(&t, IDV_TOL).unwrap();
        if !est.vanishing {
            continue;
        }
        let s = &t.shadow_step;
        let early = s[s.len() / 10..s.len() / 5].iter().sum::<f64>() / (s.len() / 10) as f64;
        let late = s[s.len() * 9 / 10..].iter().sum::<f64>() / (s.len() - s.len() * 9 / 10) as f64;
        assert!(late <= early.max(1e-12), "{id}: shadow step {early} -> {late}");
    }
}

#[test]
fn trace_csv_row_count() {
    let (_, f, g, z0) = drs_entries().into_iter().find(|e| e.0 == "case-b").unwrap();
    for (iters, stride) in [(100, 1), (100, 7), (1000, 1000), (999, 10)] {
        let probes = ProbeConfig { stride: Some(stride), ..ProbeConfig::default() };
        let t = run(&f, &g, 1.0, z0.clone(), iters, &probes).unwrap();
        let rows = t.to_csv().lines().count() - 1;
        assert_eq!(rows, t.iterations().div_ceil(stride));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn composed_step_is_firmly_nonexpansive(
        which in 0usize..64,
        raw in proptest::collection::vec(-5.0f64..5.0, 32),
        gamma in 0.2f64..3.0,
    ) {
        let entries = drs_entries();
        let (id, f, g, _) = &entries[which % entries.len()];
        let n = f.dim();
        let z = Vector::from_f64(&raw[..n]);
        let w = Vector::from_f64(&raw[16..16 + n]);
        let tz = drs_step(&DrsState::initial(z.clone(), gamma), f, g).z;
        let tw = drs_step(&DrsState::initial(w.clone(), gamma), f, g).z;
        let d = &tz - &tw;
        let excess = d.norm_sq() - (&z - &w).dot(&d);
        prop_assert!(excess <= 1e-10, "{id}: excess {excess}");
    }
}
