//! Property measurements over the zoo. Each returns the worst observed
//! violation so callers can compare it against their own tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::admm::check_equivalence;
use crate::atoms::CpcFunction;
use crate::engine::DrsTrace;
use crate::error::Result;
use crate::linalg::{eigh, SymMat, Vector};
use crate::verify::oracle::oracle_improvement;
use crate::zoo::{catalog, Problem};

/// Every function appearing in the zoo, labelled `entry/f` or `entry/g`.
pub fn zoo_functions(only: Option<&str>) -> Result<Vec<(String, CpcFunction<f64>)>> {
    let mut out = Vec::new();
    for e in catalog::<f64>() {
        if only.is_some_and(|o| o != e.id) {
            continue;
        }
        let (f, g) = match &e.problem {
            Problem::Drs { f, g } => (f, g),
            Problem::Admm(p) => (&p.f, &p.g),
        };
        out.push((format!("{}/f", e.id), f.compile()?));
        out.push((format!("{}/g", e.id), g.compile()?));
    }
    Ok(out)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector<f64> {
    Vector::from_fn(n, |_| rng.gen_range(-scale..=scale))
}

/// Largest `‖Prox_{γf}(z) + γ Prox_{f*/γ}(z/γ) − z‖` over random `z` and
/// `γ ∈ {0.5, 1, 2}`; `None` when `f*` has no closed-form prox.
pub fn moreau_worst(f: &CpcFunction<f64>, samples: usize, seed: u64) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<f64> = None;
    for _ in 0..samples {
        let z = random_point(&mut rng, f.dim(), 3.0);
        for gamma in [0.5, 1.0, 2.0] {
            let r = f.moreau_check(&z, gamma)?;
            worst = Some(worst.map_or(r, |w| w.max(r)));
        }
    }
    worst
}

/// Largest `‖P z − P z′‖² − ⟨z − z′, P z − P z′⟩` over random pairs, `P = Prox_{γf}`.
pub fn firm_nonexpansive_worst(f: &CpcFunction<f64>, gamma: f64, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..pairs {
        // mix of nearby and far-apart pairs
        let scale = if i % 2 == 0 { 3.0 } else { 1e-3 };
        let z = random_point(&mut rng, f.dim(), 3.0);
        let w = z.axpy(1.0, &random_point(&mut rng, f.dim(), scale));
        let (pz, pw) = (f.prox(gamma, &z), f.prox(gamma, &w));
        let dp = &pz - &pw;
        worst = worst.max(dp.norm_sq() - (&z - &w).dot(&dp));
    }
    worst
}

/// Largest `φ(x*) − min φ` found by the brute-force oracle around prox outputs.
pub fn prox_oracle_worst(f: &CpcFunction<f64>, gamma: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let z = random_point(&mut rng, f.dim(), 3.0);
        let x = f.prox(gamma, &z);
        worst = worst.max(oracle_improvement(f, gamma, &z, &x, &mut rng));
    }
    worst
}

/// Largest increase `‖z^{k+2} − z^{k+1}‖ − ‖z^{k+1} − z^k‖` along a trace.
pub fn monotonicity_worst(trace: &DrsTrace<f64>) -> f64 {
    trace.dz_norm.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

/// Largest entrywise `|Q Λ Qᵀ − M|` over random symmetric matrices of order 1 to 8.
pub fn eigen_reconstruction_worst(count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let n = 1 + i % 8;
        let m = SymMat::<f64>::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0));
        let r = eigh(&m)?.reconstruct();
        for a in 0..n {
            for b in 0..=a {
                worst = worst.max((r.get(a, b) - m.get(a, b)).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest ADMM/DRS iterate mismatch over the zoo ADMM entries, `γ ∈ {0.5, 1, 2}`.
pub fn equivalence_worst(steps: usize, only: Option<&str>) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for e in catalog::<f64>() {
        if only.is_some_and(|o| o != e.id) {
            continue;
        }
        let Some(spec) = e.admm() else { continue };
        let prob = spec.compile()?;
        let mut worst: f64 = 0.0;
        for gamma in [0.5, 1.0, 2.0] {
            worst = worst.max(check_equivalence(&prob, gamma, steps)?.iterate_mismatch);
        }
        out.push((e.id.to_string(), worst));
    }
    Ok(out)
}
