use drsdiag::admm::{admm_step, check_equivalence, run_admm, AdmmState};
use drsdiag::engine::ProbeConfig;
use drsdiag::zoo::{catalog, entry};
use proptest::prelude::*;

#[test]
fn dual_update_identity_every_step() {
    for e in catalog::<f64>() {
        let Some(spec) = e.admm() else { continue };
        let prob = spec.compile().unwrap();
        let mut s = AdmmState::initial(&prob, 0.8);
        for _ in 0..500 {
            let next = admm_step(&s, &prob);
            assert_eq!(next.r, prob.residual(&next.x, &next.y), "{}", e.id);
            assert_eq!(next.nu, s.nu.axpy(1.0 / 0.8, &next.r), "{}", e.id);
            s = next;
        }
    }
}

#[test]
fn reduced_drs_reproduces_admm_iterates() {
    let mut seen = 0;
    for e in catalog::<f64>() {
        let Some(spec) = e.admm() else { continue };
        let prob = spec.compile().unwrap();
        for gamma in [0.5, 1.0, 2.0] {
            let eq = check_equivalence(&prob, gamma, 1000).unwrap();
            assert!(eq.iterate_mismatch <= 1e-10, "{} at γ = {gamma}: {}", e.id, eq.iterate_mismatch);
            assert!(eq.roundtrip_mismatch <= 1e-10, "{} at γ = {gamma}: {}", e.id, eq.roundtrip_mismatch);
        }
        seen += 1;
    }
    assert!(seen >= 3);
}

#[test]
fn residual_vanishes_when_a_solution_exists() {
    let prob = entry::<f64>("admm-a").unwrap().admm().unwrap().compile().unwrap();
    let t = run_admm(&prob, 1.0, None, 100_000, &ProbeConfig::default()).unwrap();
    assert!(t.tail_residual() <= 1e-3, "{}", t.tail_residual());
}

#[test]
fn residual_approaches_the_infeasibility_gap() {
    // dist({x ≤ 0}, {y ≥ 1}) = 1
    let prob = entry::<f64>("admm-d").unwrap().admm().unwrap().compile().unwrap();
    let t = run_admm(&prob, 1.0, None, 100_000, &ProbeConfig::default()).unwrap();
    assert!((t.tail_residual() - 1.0).abs() <= 1e-3, "{}", t.tail_residual());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equivalence_for_random_step_sizes(gamma in 0.05f64..20.0) {
        for id in ["admm-a", "admm-d", "admm-c"] {
            let prob = entry::<f64>(id).unwrap().admm().unwrap().compile().unwrap();
            let eq = check_equivalence(&prob, gamma, 200).unwrap();
            prop_assert!(eq.relative_mismatch <= 1e-10, "{id}: {}", eq.relative_mismatch);
        }
    }
}
