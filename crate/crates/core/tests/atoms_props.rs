use drsdiag::atoms::{CpcFunction, SetKind};
use drsdiag::linalg::{Matrix, Vector};
use drsdiag::verify::oracle::oracle_improvement;
use drsdiag::verify::properties::zoo_functions;
use drsdiag::{ExtReal, FunctionSpec, ScalarAtom};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MAXDIM: usize = 16;

fn functions() -> Vec<(String, CpcFunction<f64>)> {
    let mut out = zoo_functions(None).unwrap();
    for a in [ScalarAtom::NegLog, ScalarAtom::InvSqrtNeg, ScalarAtom::ExpNegSqrtProd, ScalarAtom::Abs] {
        let coords: Vec<usize> = (0..a.arity()).collect();
        let f = FunctionSpec::zero(a.arity()).with_atom(a, &coords).compile().unwrap();
        out.push((a.name().to_string(), f));
    }
    out
}

fn sets() -> Vec<SetKind<f64>> {
    vec![
        SetKind::Affine {
            a: Matrix::from_f64_rows(&[&[1.0, 2.0, 0.0, -1.0], &[0.0, 1.0, 1.0, 0.0]]).unwrap(),
            b: Vector::from_f64(&[1.0, -2.0]),
        },
        SetKind::Halfspace { a: Vector::from_f64(&[1.0, -1.0, 0.5, 0.0]), b: 0.3 },
        SetKind::Bounds {
            lower: vec![Some(0.0), None, Some(-1.0), None],
            upper: vec![Some(1.0), Some(2.0), None, None],
        },
        SetKind::Ball { center: Vector::from_f64(&[1.0, 0.0, -1.0, 0.0]), radius: 0.5 },
        SetKind::SecondOrderCone { t: 0, cone: vec![1, 2, 3] },
        SetKind::PsdCone { order: 2, start: 1 },
    ]
}

fn point(n: usize) -> impl Strategy<Value = Vector<f64>> {
    proptest::collection::vec(-5.0f64..5.0, n).prop_map(|v| Vector::from_f64(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn prox_is_firmly_nonexpansive(
        pair in (point(MAXDIM), point(MAXDIM), 0.0f64..1.0),
        gamma in prop::sample::select(vec![0.25, 1.0, 4.0]),
    ) {
        let (zs, ws, near) = pair;
        for (name, f) in functions() {
            let n = f.dim();
            let z = Vector::from_f64(&zs.as_slice()[..n]);
            // half the pairs are close together
            let mut w = Vector::from_f64(&ws.as_slice()[..n]);
            if near < 0.5 {
                w = z.axpy(1e-3, &w);
            }
            let (pz, pw) = (f.prox(gamma, &z), f.prox(gamma, &w));
            let dp = &pz - &pw;
            let excess = dp.norm_sq() - (&z - &w).dot(&dp);
            prop_assert!(excess <= 1e-10, "{name}: excess {excess} at {z:?}, {w:?}");
        }
    }

    #[test]
    fn projection_is_idempotent(z in point(4)) {
        for s in sets() {
            let c = s.compile(4).unwrap();
            let p = c.project(&z);
            let pp = c.project(&p);
            prop_assert!(pp.dist(&p) <= 1e-12 * (1.0 + p.norm()), "{s:?}: {p:?} -> {pp:?}");
            prop_assert!(c.contains(&p, 1e-12));
        }
    }

    #[test]
    fn recession_is_positively_homogeneous(d in point(MAXDIM)) {
        for (name, f) in functions() {
            let d = Vector::from_f64(&d.as_slice()[..f.dim()]);
            let base = f.recession(&d);
            for alpha in [0.5, 2.0, 10.0] {
                let scaled = f.recession(&d.scaled(alpha));
                match (base, scaled) {
                    (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                        prop_assert!((b - alpha * a).abs() <= 1e-12 * (1.0 + b.abs()), "{name}: {b} vs {alpha}·{a}");
                    }
                    (a, b) => prop_assert_eq!(a, b, "{}", name),
                }
            }
        }
    }

    #[test]
    fn moreau_decomposition_holds(z in point(MAXDIM), gamma in 0.1f64..5.0) {
        for (name, f) in functions() {
            let z = Vector::from_f64(&z.as_slice()[..f.dim()]);
            if let Some(r) = f.moreau_check(&z, gamma) {
                prop_assert!(r <= 1e-10 * (1.0 + z.norm()), "{name}: residual {r}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prox_beats_brute_force_oracle(z in point(MAXDIM), gamma in 0.2f64..3.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, f) in functions() {
            let z = Vector::from_f64(&z.as_slice()[..f.dim()]);
            let x = f.prox(gamma, &z);
            let gain = oracle_improvement(&f, gamma, &z, &x, &mut rng);
            prop_assert!(gain <= 1e-8, "{name}: oracle lowers the objective by {gain}");
        }
    }
}
