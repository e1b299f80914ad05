//! Brute-force check of proximal outputs: grid and random search in shrinking
//! neighborhoods, followed by a compass-search polish.

use rand::Rng;

use crate::atoms::CpcFunction;
use crate::linalg::Vector;

/// Feasibility slack used when the oracle evaluates `f`.
pub const ORACLE_FEAS_TOL: f64 = 1e-12;
const RADII: [f64; 4] = [1.0, 1e-1, 1e-3, 1e-6];
const GRID_PER_AXIS: usize = 11;
const RANDOM_PER_RADIUS: usize = 400;

/// `f(x) + ‖x − z‖²/(2γ)`, `+∞` outside the domain.
pub fn prox_objective(f: &CpcFunction<f64>, gamma: f64, z: &Vector<f64>, x: &Vector<f64>) -> f64 {
    f.value(x, ORACLE_FEAS_TOL).to_scalar() + x.dist(z).powi(2) / (2.0 * gamma)
}

fn grid_offsets(n: usize, r: f64) -> Vec<Vec<f64>> {
    let ticks: Vec<f64> = (0..GRID_PER_AXIS).map(|i| -r + 2.0 * r * i as f64 / (GRID_PER_AXIS - 1) as f64).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                ticks.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    out
}

/// How much lower than `φ(x*)` the search gets, `φ(x*) − min φ` (so `≤ 0`
/// when nothing better than the prox output was found).
pub fn oracle_improvement<R: Rng>(
    f: &CpcFunction<f64>,
    gamma: f64,
    z: &Vector<f64>,
    x_star: &Vector<f64>,
    rng: &mut R,
) -> f64 {
    let n = x_star.dim();
    let phi = |x: &Vector<f64>| prox_objective(f, gamma, z, x);
    let base = phi(x_star);
    let mut best = (base, x_star.clone());
    let consider = |cand: Vector<f64>, best: &mut (f64, Vector<f64>)| {
        for c in [f.project_domain(&cand), cand] {
            let v = phi(&c);
            if v < best.0 {
                *best = (v, c);
            }
        }
    };
    for r in RADII {
        if n <= 3 {
            for off in grid_offsets(n, r) {
                consider(x_star.axpy(1.0, &Vector::from_f64(&off)), &mut best);
            }
        }
        for _ in 0..RANDOM_PER_RADIUS {
            let off = Vector::from_fn(n, |_| rng.gen_range(-r..=r));
            consider(x_star.axpy(1.0, &off), &mut best);
        }
    }
    // compass search from the best point found
    let mut step = 1e-2;
    let mut rounds = 0;
    while step > 1e-12 && rounds < 10_000 {
        rounds += 1;
        let mut moved = false;
        for i in 0..n {
            for s in [step, -step] {
                let mut c = best.1.clone();
                c[i] += s;
                let before = best.0;
                consider(c, &mut best);
                moved |= best.0 < before;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    base - best.0
}
