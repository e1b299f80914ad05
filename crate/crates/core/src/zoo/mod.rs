//! Catalog of reference problems with known primal-dual status.

mod format;

use serde::{Deserialize, Serialize};

use crate::admm::AdmmSpec;
use crate::atoms::{FunctionSpec, ScalarAtom, SetKind};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{packed_index, svec_len, Matrix, Vector};
use crate::pathology::{CaseLabel, Feasibility, GroundTruth};
use crate::Scalar;

pub use format::{ProblemFile, SCHEMA_VERSION};

/// The two ways a problem can be posed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Problem<T> {
    /// `minimize f(x) + g(x)`
    Drs {
        f: FunctionSpec<T>,
        g: FunctionSpec<T>,
    },
    Admm(AdmmSpec<T>),
}

impl<T: Scalar> Problem<T> {
    pub fn dim(&self) -> usize {
        match self {
            Problem::Drs { f, .. } => f.dim,
            Problem::Admm(p) => p.c.dim(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZooEntry<T> {
    pub id: &'static str,
    pub source: &'static str,
    pub problem: Problem<T>,
    pub ground_truth: GroundTruth<T>,
    /// Starting point used by the reference experiments; zero otherwise.
    pub z0: Option<Vector<T>>,
}

impl<T: Scalar> ZooEntry<T> {
    pub fn drs_pair(&self) -> Option<(&FunctionSpec<T>, &FunctionSpec<T>)> {
        match &self.problem {
            Problem::Drs { f, g } => Some((f, g)),
            Problem::Admm(_) => None,
        }
    }

    pub fn admm(&self) -> Option<&AdmmSpec<T>> {
        match &self.problem {
            Problem::Admm(p) => Some(p),
            Problem::Drs { .. } => None,
        }
    }

    pub fn to_file(&self) -> ProblemFile<T> {
        ProblemFile {
            schema: SCHEMA_VERSION,
            id: Some(self.id.to_string()),
            problem: self.problem.clone(),
            ground_truth: Some(self.ground_truth.clone()),
            z0: self.z0.clone(),
        }
    }
}

fn v<T: Scalar>(xs: &[f64]) -> Vector<T> {
    Vector::from_f64(xs)
}

fn fin<T: Scalar>(x: f64) -> ExtReal<T> {
    ExtReal::Finite(T::lit(x))
}

fn linear<T: Scalar>(c: &[f64]) -> FunctionSpec<T> {
    FunctionSpec::linear(v(c))
}

fn atom<T: Scalar>(a: ScalarAtom) -> FunctionSpec<T> {
    FunctionSpec::zero(a.arity()).with_atom(a, &(0..a.arity()).collect::<Vec<_>>())
}

/// Box fixing the listed coordinates and leaving the rest free.
fn fix<T: Scalar>(n: usize, fixed: &[(usize, f64)]) -> SetKind<T> {
    let mut b = vec![None; n];
    for &(i, x) in fixed {
        b[i] = Some(T::lit(x));
    }
    SetKind::Bounds { lower: b.clone(), upper: b }
}

/// `minimize ⟨C, X⟩ subject to X ⪰ 0 and linear constraints`, over svec
/// coordinates of `𝐒ⁿ`. Entries are given for the upper triangle as
/// `(i, j, coefficient)` of the matrix entry `X_ij` (1-based).
fn sdp<T: Scalar>(
    order: usize,
    objective: &[(usize, usize, f64)],
    rows: &[(&[(usize, usize, f64)], f64)],
) -> Problem<T> {
    let n = svec_len(order);
    let coef = |terms: &[(usize, usize, f64)]| {
        let mut out = vec![T::zero(); n];
        for &(i, j, c) in terms {
            let (r, s) = (i.max(j) - 1, i.min(j) - 1);
            // svec stores √2·X_ij off the diagonal
            let scale = if r == s { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
            out[packed_index(r, s)] = out[packed_index(r, s)] + T::lit(c * scale);
        }
        out
    };
    let a = Matrix::from_rows(&rows.iter().map(|(t, _)| coef(t)).collect::<Vec<_>>()).expect("rectangular");
    let b = Vector::from_fn(rows.len(), |i| T::lit(rows[i].1));
    let f = FunctionSpec::indicator(n, SetKind::PsdCone { order, start: 0 });
    let g = FunctionSpec::linear(Vector::from_fn(n, |i| coef(objective)[i])).with_indicator(SetKind::affine(a, b));
    Problem::Drs { f, g }
}

fn gt<T: Scalar>(
    p: ExtReal<T>,
    d: ExtReal<T>,
    case: CaseLabel,
    primal: Feasibility,
    dual: Feasibility,
) -> GroundTruth<T> {
    GroundTruth::new(p, d, case, primal, dual)
}

/// Every reference problem, in a fixed order.
pub fn catalog<T: Scalar>() -> Vec<ZooEntry<T>> {
    use CaseLabel::*;
    use Feasibility::*;
    let inf = ExtReal::PosInf;
    let ninf = ExtReal::NegInf;
    let mut out = Vec::new();
    let mut push = |id, source, problem, ground_truth, z0| out.push(ZooEntry { id, source, problem, ground_truth, z0 });

    let mut a = gt(fin(1.0), fin(1.0), A, Feasible, Feasible);
    a.known_v = Some(v(&[0.0]));
    a.known_solution = Some(v(&[1.0]));
    push(
        "case-a",
        "total duality: minimize x - log x",
        Problem::Drs { f: linear(&[1.0]), g: atom(ScalarAtom::NegLog) },
        a,
        None,
    );

    let mut b = gt(fin(0.0), fin(0.0), B, Feasible, Feasible);
    b.known_v = Some(v(&[0.0, 0.0]));
    b.known_solution = Some(v(&[1.0, 0.0]));
    push(
        "case-b",
        "dual without solution: unit disk + (x2 + [x1 = 1])",
        Problem::Drs {
            f: FunctionSpec::indicator(2, SetKind::Ball { center: Vector::zeros(2), radius: T::one() }),
            g: linear(&[0.0, 1.0]).with_indicator(fix(2, &[(0, 1.0)])),
        },
        b,
        None,
    );

    let mut c = gt(fin(0.0), fin(0.0), C, Feasible, Feasible);
    c.known_v = Some(v(&[0.0, 0.0, 0.0]));
    push(
        "case-c",
        "primal without solution: the case-b dual, lifted to (a, b, t) with t >= |(a, b)|",
        Problem::Drs {
            f: FunctionSpec::indicator(3, SetKind::SecondOrderCone { t: 2, cone: vec![0, 1] }),
            g: linear(&[-1.0, 0.0, 1.0]).with_indicator(fix(3, &[(1, -1.0)])),
        },
        c,
        None,
    );

    let mut d = gt(ninf, ninf, D, Feasible, WeaklyInfeasible);
    d.known_v = Some(v(&[0.0]));
    d.known_direction = Some(v(&[0.0]));
    push(
        "case-d",
        "unbounded without improving direction: [x >= 1] - log x",
        Problem::Drs {
            f: FunctionSpec::indicator(1, SetKind::lower_bounds(vec![Some(T::one())])),
            g: atom(ScalarAtom::NegLog),
        },
        d,
        None,
    );

    let mut e = gt(ninf, ninf, E, Feasible, StronglyInfeasible);
    e.known_v = Some(v(&[2.0]));
    e.known_direction = Some(v(&[-2.0]));
    push(
        "case-e",
        "improving direction: minimize x + x",
        Problem::Drs { f: linear(&[1.0]), g: linear(&[1.0]) },
        e,
        None,
    );

    let mut f = gt(inf, inf, F, WeaklyInfeasible, Feasible);
    f.known_v = Some(v(&[0.0]));
    f.known_direction = Some(v(&[0.0]));
    push(
        "case-f",
        "weakly infeasible: 1/sqrt(-x) - log x",
        Problem::Drs { f: atom(ScalarAtom::InvSqrtNeg), g: atom(ScalarAtom::NegLog) },
        f,
        None,
    );

    let soc = gt(fin(0.0), ninf, G, Feasible, WeaklyInfeasible);
    let a_eq = Matrix::from_rows(&[vec![T::zero(), T::one(), -T::one()]]).expect("1x3");
    push(
        "sd-fail-soc",
        "strong duality failure, closed-form iterates: [x3 >= |(x1, x2)|] + x1 + [x2 = x3]",
        Problem::Drs {
            f: FunctionSpec::indicator(3, SetKind::SecondOrderCone { t: 2, cone: vec![0, 1] }),
            g: linear(&[1.0, 0.0, 0.0]).with_indicator(SetKind::affine(a_eq, Vector::zeros(1))),
        },
        soc,
        Some(v(&[1.0, 1.0, 0.0])),
    );

    push(
        "sd-fail-bertsekas",
        "strong duality failure: exp(-sqrt(x1 x2)) + [x1 = 0]",
        Problem::Drs { f: atom(ScalarAtom::ExpNegSqrtProd), g: FunctionSpec::indicator(2, fix(2, &[(0, 0.0)])) },
        gt(fin(1.0), fin(0.0), G, Feasible, Feasible),
        None,
    );

    let mut dr = gt(fin(1.0), fin(0.0), G, Feasible, Feasible);
    dr.gamma_thresholds = Some(vec![T::lit(0.5)]);
    push(
        "sd-fail-drusvyatskiy",
        "strong duality failure, S^3 SDP: X22 s.t. X33 = 0, X22 + 2 X13 = 1",
        sdp(3, &[(2, 2, 1.0)], &[(&[(3, 3, 1.0)], 0.0), (&[(2, 2, 1.0), (1, 3, 2.0)], 1.0)]),
        dr,
        None,
    );

    let mut ye = gt(fin(0.0), fin(-2.0), G, Feasible, Feasible);
    ye.gamma_thresholds = Some(vec![T::one()]);
    push(
        "sd-fail-ye",
        "strong duality failure, S^3 SDP: 2 X12 s.t. X22 = 0, -2 X12 + 2 X33 = 2",
        sdp(3, &[(1, 2, 2.0)], &[(&[(2, 2, 1.0)], 0.0), (&[(1, 2, -2.0), (3, 3, 2.0)], 2.0)]),
        ye,
        None,
    );

    let mut tu = gt(fin((5f64.sqrt() - 1.0) / 2.0), fin(0.0), G, Feasible, Feasible);
    tu.gamma_thresholds = Some(vec![T::lit(0.8)]);
    push(
        "sd-fail-tuncel",
        "strong duality failure, S^5 SDP: X44 + X55 s.t. X11 = 0, X22 = 1, X34 = 1, 2 X13 + 2 X45 + X55 = 1",
        sdp(
            5,
            &[(4, 4, 1.0), (5, 5, 1.0)],
            &[
                (&[(1, 1, 1.0)], 0.0),
                (&[(2, 2, 1.0)], 1.0),
                (&[(3, 4, 1.0)], 1.0),
                (&[(1, 3, 2.0), (4, 5, 2.0), (5, 5, 1.0)], 1.0),
            ],
        ),
        tu,
        None,
    );

    let one = || Matrix::from_rows(&[vec![T::one()]]).expect("1x1");
    let minus_one = || Matrix::from_rows(&[vec![-T::one()]]).expect("1x1");
    let mut aa = gt(fin(1.0), fin(1.0), A, Feasible, Feasible);
    aa.known_v = Some(v(&[0.0]));
    push(
        "admm-a",
        "ADMM, total duality: |x| + |y| s.t. x - y = 1",
        Problem::Admm(AdmmSpec {
            f: atom(ScalarAtom::Abs),
            g: atom(ScalarAtom::Abs),
            a: one(),
            b: minus_one(),
            c: v(&[1.0]),
        }),
        aa,
        None,
    );

    let mut ad = gt(inf, inf, F, StronglyInfeasible, Feasible);
    ad.known_v = Some(v(&[-1.0]));
    ad.known_direction = Some(v(&[1.0]));
    push(
        "admm-d",
        "ADMM, strongly infeasible: [x <= 0] + [y >= 1] s.t. x - y = 0",
        Problem::Admm(AdmmSpec {
            f: FunctionSpec::indicator(1, SetKind::upper_bounds(vec![Some(T::zero())])),
            g: FunctionSpec::indicator(1, SetKind::lower_bounds(vec![Some(T::one())])),
            a: one(),
            b: minus_one(),
            c: v(&[0.0]),
        }),
        ad,
        None,
    );

    let mut ac = gt(fin(0.0), fin(0.0), C, Feasible, Feasible);
    ac.known_v = Some(v(&[0.0, 0.0, 0.0]));
    push(
        "admm-c",
        "ADMM, primal without solution: the case-c pair split as x - y = 0",
        Problem::Admm(AdmmSpec {
            f: FunctionSpec::indicator(3, SetKind::SecondOrderCone { t: 2, cone: vec![0, 1] }),
            g: linear(&[-1.0, 0.0, 1.0]).with_indicator(fix(3, &[(1, -1.0)])),
            a: Matrix::identity(3),
            b: Matrix::scalar_identity(3, -T::one()),
            c: Vector::zeros(3),
        }),
        ac,
        None,
    );
    out
}

/// Looks up an entry by id.
pub fn entry<T: Scalar>(id: &str) -> Result<ZooEntry<T>> {
    catalog().into_iter().find(|e| e.id == id).ok_or_else(|| Error::Input(format!("no zoo entry named {id:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{svec, SymMat};

    #[test]
    fn ids_unique_and_complete() {
        let cat = catalog::<f64>();
        assert!(cat.len() >= 12);
        let mut ids: Vec<_> = cat.iter().map(|e| e.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), cat.len());
    }

    #[test]
    fn ground_truth_consistent() {
        for e in catalog::<f64>() {
            e.ground_truth.validate().unwrap_or_else(|err| panic!("{}: {err}", e.id));
        }
    }

    #[test]
    fn functions_compile() {
        for e in catalog::<f64>() {
            match &e.problem {
                Problem::Drs { f, g } => {
                    f.compile().unwrap_or_else(|err| panic!("{}: {err}", e.id));
                    g.compile().unwrap_or_else(|err| panic!("{}: {err}", e.id));
                }
                Problem::Admm(p) => {
                    p.f.compile().unwrap();
                    p.g.compile().unwrap();
                }
            }
        }
    }

    #[test]
    fn sdp_encoding_matches_matrix_form() {
        // X with X13 = 0.5, X22 = 0: satisfies X22 + 2 X13 = 1 and X33 = 0
        let e = entry::<f64>("sd-fail-drusvyatskiy").unwrap();
        let (_, g) = e.drs_pair().unwrap();
        let mut x = SymMat::zeros(3);
        x.set(2, 0, 0.5);
        x.set(0, 0, 4.0);
        let g = g.compile().unwrap();
        assert_eq!(g.value(&svec(&x), 1e-12), ExtReal::Finite(0.0));
        // objective picks X22
        x.set(1, 1, 0.25);
        x.set(2, 0, 0.375);
        let val = g.value(&svec(&x), 1e-12).finite().unwrap();
        assert!((val - 0.25).abs() < 1e-15);
    }

    #[test]
    fn tuncel_optimal_point_is_feasible() {
        // X44 + X55 = (√5 − 1)/2 is attained; check the constraint rows on a feasible X
        let e = entry::<f64>("sd-fail-tuncel").unwrap();
        let (_, g) = e.drs_pair().unwrap();
        let g = g.compile().unwrap();
        let mut x = SymMat::zeros(5);
        x.set(1, 1, 1.0);
        x.set(3, 2, 1.0);
        x.set(4, 4, 0.2);
        x.set(4, 3, 0.4);
        let val = g.value(&svec(&x), 1e-12).finite().unwrap();
        assert!((val - 0.2).abs() < 1e-15);
    }
}
