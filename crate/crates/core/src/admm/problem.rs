use serde::Serialize;

use crate::admm::spec::AdmmSpec;
use crate::atoms::{CpcFunction, SetKind};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh, Matrix, Vector};
use crate::{ExtReal, Scalar};

/// Relative tolerance for `MᵀM = α²I`.
pub const ISOMETRY_TOL: f64 = 1e-12;
/// Residual tolerance of the least-squares membership tests in the regularity check.
pub const REGULARITY_TOL: f64 = 1e-9;

/// How `argmin_x φ(x) + ‖Mx + w‖²/(2γ)` is resolved.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SubproblemRule<T> {
    /// `MᵀM = α²I`: `x = prox_{(γ/α²)φ}(−Mᵀw/α²)`.
    ScaledIsometry { alpha2: T },
    /// `φ = cᵀx + δ_{Fx = h}`: one linear solve of the KKT system
    /// `[MᵀM Fᵀ; F 0] [x; γλ] = [−γc − Mᵀw; h]`.
    Kkt { kkt: Matrix<T>, lin: Vector<T>, h: Vector<T> },
}

#[derive(Debug, Clone)]
pub(crate) struct Subproblem<T> {
    pub func: CpcFunction<T>,
    pub mat: Matrix<T>,
    pub rule: SubproblemRule<T>,
}

/// `Some(α²)` when `MᵀM = α²I` with `α > 0`.
pub(crate) fn isometry_scale<T: Scalar>(m: &Matrix<T>) -> Option<T> {
    let p = m.cols();
    if p == 0 || m.rows() < p {
        return None;
    }
    let g = m.gram_cols();
    let alpha2 = (0..p).map(|i| g.get(i, i)).sum::<T>() / T::lit(p as f64);
    if alpha2 <= T::zero() {
        return None;
    }
    let tol = T::lit(ISOMETRY_TOL) * alpha2;
    for i in 0..p {
        for j in 0..=i {
            let target = if i == j { alpha2 } else { T::zero() };
            if (g.get(i, j) - target).abs() > tol {
                return None;
            }
        }
    }
    Some(alpha2)
}

impl<T: Scalar> Subproblem<T> {
    pub fn new(func: CpcFunction<T>, mat: Matrix<T>, name: &str) -> Result<Self> {
        if let Some(alpha2) = isometry_scale(&mat) {
            return Ok(Subproblem { func, mat, rule: SubproblemRule::ScaledIsometry { alpha2 } });
        }
        let spec = func.spec();
        let structured = spec.atoms.is_empty()
            && spec.map.is_none()
            && matches!(spec.indicator.as_ref().map(|s| &s.kind), None | Some(SetKind::Affine { .. }));
        if !structured {
            return Err(Error::Capability(format!(
                "{name}-subproblem: the matrix is not a scaled isometry and the function is not linear plus an affine indicator"
            )));
        }
        let p = mat.cols();
        let (f, h) = match spec.indicator.as_ref().map(|s| &s.kind) {
            Some(SetKind::Affine { a, b }) => (a.clone(), b.clone()),
            _ => (Matrix::zeros(0, p), Vector::zeros(0)),
        };
        let m = f.rows();
        let gram = mat.gram_cols();
        let kkt = Matrix::from_fn(p + m, p + m, |i, j| match (i < p, j < p) {
            (true, true) => gram.get(i, j),
            (true, false) => f[(j - p, i)],
            (false, true) => f[(i - p, j)],
            (false, false) => T::zero(),
        });
        if kkt.solve(&vec![T::zero(); p + m]).is_err() {
            return Err(Error::Capability(format!("{name}-subproblem: singular KKT system")));
        }
        let lin = spec.linear.clone().unwrap_or_else(|| Vector::zeros(p));
        Ok(Subproblem { func, mat, rule: SubproblemRule::Kkt { kkt, lin, h } })
    }

    /// `argmin_x φ(x) + ‖Mx + w‖²/(2γ)`
    pub fn solve(&self, gamma: T, w: &Vector<T>) -> Vector<T> {
        match &self.rule {
            SubproblemRule::ScaledIsometry { alpha2 } => {
                let center = self.mat.tmatvec(w).scaled(-T::one() / *alpha2);
                self.func.prox(gamma / *alpha2, &center)
            }
            SubproblemRule::Kkt { kkt, lin, h } => {
                let p = self.mat.cols();
                let mtw = self.mat.tmatvec(w);
                let mut rhs: Vec<T> = (0..p).map(|i| -gamma * lin[i] - mtw[i]).collect();
                rhs.extend_from_slice(h);
                let sol = kkt.solve(&rhs).expect("KKT system checked nonsingular at validation");
                Vector::from_vec(sol.as_slice()[..p].to_vec())
            }
        }
    }
}

/// Outcome of the regularity check `ran Mᵀ ∩ ri dom φ* ≠ ∅`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Regularity<T> {
    /// The witness lies in `ran Mᵀ ∩ ri dom φ*`; it is omitted when the
    /// check succeeded because `ran Mᵀ` is the whole space.
    Certified {
        witness: Option<Vector<T>>,
    },
    Violated {
        reason: String,
    },
    Undetermined {
        reason: String,
    },
}

impl<T> Regularity<T> {
    pub fn is_violated(&self) -> bool {
        matches!(self, Regularity::Violated { .. })
    }
}

/// Analytic descriptions of `dom φ*` that the check understands.
enum ConjugateDomain<T> {
    /// Closure is a product of intervals `[lo_i, hi_i]`.
    Intervals(Vec<(T, T)>),
    /// `c + ran Fᵀ`.
    AffineRange {
        c: Vector<T>,
        f: Matrix<T>,
    },
    Whole,
}

fn conjugate_domain<T: Scalar>(func: &CpcFunction<T>) -> Option<ConjugateDomain<T>> {
    let spec = func.spec();
    if spec.map.is_some() {
        return None;
    }
    let n = func.dim();
    let kind = spec.indicator.as_ref().map(|s| &s.kind);
    let separable =
        spec.atoms.iter().all(|t| t.atom.arity() == 1) && matches!(kind, None | Some(SetKind::Bounds { .. }));
    if separable {
        let unit = |i: usize, s: T| Vector::from_fn(n, |j| if i == j { s } else { T::zero() });
        let ext = |e: ExtReal<T>| e.to_scalar();
        let ivs = (0..n)
            .map(|i| (-ext(func.recession(&unit(i, -T::one()))), ext(func.recession(&unit(i, T::one())))))
            .collect();
        return Some(ConjugateDomain::Intervals(ivs));
    }
    if !spec.atoms.is_empty() {
        return None;
    }
    let c = spec.linear.clone().unwrap_or_else(|| Vector::zeros(n));
    match kind {
        Some(SetKind::Affine { a, .. }) => Some(ConjugateDomain::AffineRange { c, f: a.clone() }),
        Some(SetKind::Ball { .. }) => Some(ConjugateDomain::Whole),
        _ => None,
    }
}

fn full_column_rank<T: Scalar>(m: &Matrix<T>) -> bool {
    if m.cols() == 0 {
        return true;
    }
    match eigh(&m.gram_cols()) {
        Ok(e) => {
            let max = e.values.iter().fold(T::zero(), |a, &l| a.max(l.abs()));
            max > T::zero() && e.values[0] > T::lit(1e-12) * max
        }
        Err(_) => false,
    }
}

/// Least-squares solvability of `G u = rhs`.
fn in_range<T: Scalar>(g: &Matrix<T>, rhs: &Vector<T>) -> Result<Option<Vector<T>>> {
    if g.cols() == 0 {
        return Ok((rhs.norm() <= T::lit(REGULARITY_TOL) * T::one().max(rhs.norm())).then(|| Vector::zeros(0)));
    }
    let pinv = g.pseudo_inverse(T::lit(1e-12))?;
    let u = pinv.matvec(rhs);
    let res = (&g.matvec(&u) - rhs).norm();
    Ok((res <= T::lit(REGULARITY_TOL) * T::one().max(rhs.norm())).then_some(u))
}

fn interval_interior<T: Scalar>(lo: T, hi: T) -> T {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo + hi) / T::lit(2.0),
        (true, false) => lo + T::one(),
        (false, true) => hi - T::one(),
        (false, false) => T::zero(),
    }
}

/// Checks `ran Mᵀ ∩ ri dom φ* ≠ ∅` for the pair `(φ, M)`.
pub fn check_regularity_side<T: Scalar>(func: &CpcFunction<T>, mat: &Matrix<T>) -> Regularity<T> {
    let full_rank = full_column_rank(mat);
    match conjugate_domain(func) {
        Some(ConjugateDomain::Whole) => Regularity::Certified { witness: Some(Vector::zeros(func.dim())) },
        Some(ConjugateDomain::Intervals(ivs)) => {
            let relint = |y: &Vector<T>| {
                ivs.iter().zip(y.iter()).all(|(&(lo, hi), &v)| {
                    if lo == hi {
                        (v - lo).abs() <= T::lit(REGULARITY_TOL) * T::one().max(lo.abs())
                    } else {
                        v > lo && v < hi
                    }
                })
            };
            if full_rank {
                let y = Vector::from_fn(ivs.len(), |i| interval_interior(ivs[i].0, ivs[i].1));
                return Regularity::Certified { witness: Some(y) };
            }
            if ivs.iter().all(|(lo, hi)| lo == hi) {
                let y = Vector::from_fn(ivs.len(), |i| ivs[i].0);
                return match in_range(&mat.transpose(), &y) {
                    Ok(Some(_)) => Regularity::Certified { witness: Some(y) },
                    Ok(None) => Regularity::Violated { reason: "the only point of dom f* is outside ran Aᵀ".into() },
                    Err(e) => Regularity::Undetermined { reason: e.to_string() },
                };
            }
            if mat.is_zero() {
                let zero = Vector::zeros(ivs.len());
                return if relint(&zero) {
                    Regularity::Certified { witness: Some(zero) }
                } else {
                    Regularity::Violated { reason: "ran Aᵀ = {0} misses ri dom f*".into() }
                };
            }
            Regularity::Undetermined { reason: "rank-deficient map with an interval conjugate domain".into() }
        }
        Some(ConjugateDomain::AffineRange { c, f }) => {
            // Mᵀu − Fᵀλ = c
            let mt = mat.transpose();
            let ft = f.transpose();
            let p = c.dim();
            let g = Matrix::from_fn(p, mt.cols() + ft.cols(), |i, j| {
                if j < mt.cols() {
                    mt[(i, j)]
                } else {
                    -ft[(i, j - mt.cols())]
                }
            });
            match in_range(&g, &c) {
                Ok(Some(u)) => {
                    let w = mt.matvec(&u.as_slice()[..mt.cols()]);
                    Regularity::Certified { witness: Some(w) }
                }
                Ok(None) => Regularity::Violated { reason: "ran Aᵀ misses the affine conjugate domain".into() },
                Err(e) => Regularity::Undetermined { reason: e.to_string() },
            }
        }
        None if full_rank => Regularity::Certified { witness: None },
        None => Regularity::Undetermined { reason: "no analytic description of dom f*".into() },
    }
}

/// Validated ADMM problem with resolved subproblem solvers.
#[derive(Debug, Clone)]
pub struct AdmmProblem<T> {
    pub spec: AdmmSpec<T>,
    pub(crate) x_sub: Subproblem<T>,
    pub(crate) y_sub: Subproblem<T>,
    pub regularity_f: Regularity<T>,
    pub regularity_g: Regularity<T>,
}

impl<T: Scalar> AdmmSpec<T> {
    pub fn compile(&self) -> Result<AdmmProblem<T>> {
        AdmmProblem::new(self.clone())
    }
}

impl<T: Scalar> AdmmProblem<T> {
    pub fn new(spec: AdmmSpec<T>) -> Result<Self> {
        let n = spec.c.dim();
        check_dim(n, spec.a.rows())?;
        check_dim(n, spec.b.rows())?;
        check_dim(spec.f.dim, spec.a.cols())?;
        check_dim(spec.g.dim, spec.b.cols())?;
        let f = spec.f.compile()?;
        let g = spec.g.compile()?;
        let regularity_f = check_regularity_side(&f, &spec.a);
        let regularity_g = check_regularity_side(&g, &spec.b);
        let x_sub = Subproblem::new(f, spec.a.clone(), "x")?;
        let y_sub = Subproblem::new(g, spec.b.clone(), "y")?;
        Ok(AdmmProblem { spec, x_sub, y_sub, regularity_f, regularity_g })
    }

    pub fn f(&self) -> &CpcFunction<T> {
        &self.x_sub.func
    }

    pub fn g(&self) -> &CpcFunction<T> {
        &self.y_sub.func
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.spec.a
    }

    pub fn b(&self) -> &Matrix<T> {
        &self.spec.b
    }

    pub fn c(&self) -> &Vector<T> {
        &self.spec.c
    }

    /// `Ax + By − c`
    pub fn residual(&self, x: &Vector<T>, y: &Vector<T>) -> Vector<T> {
        let ax = self.spec.a.matvec(x);
        let by = self.spec.b.matvec(y);
        Vector::from_fn(ax.dim(), |i| ax[i] + by[i] - self.spec.c[i])
    }

    /// Both regularity conditions, `true` unless one is known to fail.
    pub fn regular(&self) -> bool {
        !self.regularity_f.is_violated() && !self.regularity_g.is_violated()
    }

    /// `x^{k+1}` given `(y^k, ν^k)`.
    pub fn x_update(&self, gamma: T, y: &Vector<T>, nu: &Vector<T>) -> Vector<T> {
        let w = self.residual(&Vector::zeros(self.spec.f.dim), y).axpy(gamma, nu);
        self.x_sub.solve(gamma, &w)
    }

    /// `y^{k+1}` given `(x^{k+1}, ν^k)`.
    pub fn y_update(&self, gamma: T, x: &Vector<T>, nu: &Vector<T>) -> Vector<T> {
        let w = self.residual(x, &Vector::zeros(self.spec.g.dim)).axpy(gamma, nu);
        self.y_sub.solve(gamma, &w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{FunctionSpec, ScalarAtom};

    fn scalar(x: f64) -> Matrix<f64> {
        Matrix::from_f64_rows(&[&[x]]).unwrap()
    }

    fn abs1() -> CpcFunction<f64> {
        FunctionSpec::zero(1).with_atom(ScalarAtom::Abs, &[0]).compile().unwrap()
    }

    #[test]
    fn regularity_of_abs_has_witness_zero() {
        match check_regularity_side(&abs1(), &scalar(1.0)) {
            Regularity::Certified { witness: Some(w) } => assert_eq!(w[0], 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn regularity_of_nonpositive_orthant() {
        let f = FunctionSpec::indicator(1, SetKind::upper_bounds(vec![Some(0.0)])).compile().unwrap();
        match check_regularity_side(&f, &scalar(1.0)) {
            Regularity::Certified { witness: Some(w) } => assert!(w[0] > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_map_violates_regularity() {
        let f = FunctionSpec::linear(Vector::from_f64(&[1.0])).compile().unwrap();
        assert!(check_regularity_side(&f, &scalar(0.0)).is_violated());
        // |x| has 0 in ri dom f*, so the zero map is fine
        assert!(!check_regularity_side(&abs1(), &scalar(0.0)).is_violated());
    }

    #[test]
    fn affine_conjugate_domain() {
        // f = x1 + δ{x1 + x2 = 1}: dom f* = (1, 0) + span{(1, 1)}
        let f = FunctionSpec::<f64>::linear(Vector::from_f64(&[1.0, 0.0]))
            .with_indicator(SetKind::affine(Matrix::from_f64_rows(&[&[1.0, 1.0]]).unwrap(), Vector::from_f64(&[1.0])))
            .compile()
            .unwrap();
        // ran Aᵀ = span{(0, 1)} meets it at (0, −1)
        let a = Matrix::from_f64_rows(&[&[0.0, 1.0]]).unwrap();
        match check_regularity_side(&f, &a) {
            Regularity::Certified { witness: Some(w) } => {
                assert!(w[0].abs() < 1e-12 && (w[1] + 1.0).abs() < 1e-12, "{w:?}")
            }
            other => panic!("{other:?}"),
        }
        // ran Aᵀ = span{(1, 1)} is parallel to it
        let a = Matrix::from_f64_rows(&[&[1.0, 1.0]]).unwrap();
        assert!(check_regularity_side(&f, &a).is_violated());
    }

    #[test]
    fn isometry_detection() {
        let a = Matrix::<f64>::from_f64_rows(&[&[0.0, 2.0], &[-2.0, 0.0]]).unwrap();
        assert_eq!(isometry_scale(&a), Some(4.0));
        let tall = Matrix::<f64>::from_f64_rows(&[&[1.0], &[1.0]]).unwrap();
        assert_eq!(isometry_scale(&tall), Some(2.0));
        let skew = Matrix::<f64>::from_f64_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(isometry_scale(&skew), None);
    }

    #[test]
    fn kkt_subproblem_matches_closed_form() {
        // min x1 + ‖Mx + w‖²/2 s.t. x1 + x2 = 1 with M = [[1, 1]]
        let f = FunctionSpec::linear(Vector::from_f64(&[1.0, 0.0]))
            .with_indicator(SetKind::affine(Matrix::from_f64_rows(&[&[1.0, -1.0]]).unwrap(), Vector::from_f64(&[0.0])));
        let m = Matrix::from_f64_rows(&[&[1.0, 1.0]]).unwrap();
        let sub = Subproblem::new(f.compile().unwrap(), m, "x").unwrap();
        assert!(matches!(sub.rule, SubproblemRule::Kkt { .. }));
        // x1 = x2 = t: t + (2t + w)²/2 → 1 + 2(2t + w) = 0
        let w = 3.0;
        let x = sub.solve(1.0, &Vector::from_f64(&[w]));
        let t = (-1.0 / 2.0 - w) / 2.0;
        assert!((x[0] - t).abs() < 1e-12 && (x[1] - t).abs() < 1e-12, "{x:?}");
    }

    #[test]
    fn unsupported_subproblem_is_a_capability_error() {
        let f = FunctionSpec::<f64>::zero(2).with_atom(ScalarAtom::Abs, &[0]);
        let m = Matrix::from_f64_rows(&[&[1.0, 1.0]]).unwrap();
        assert!(matches!(Subproblem::new(f.compile().unwrap(), m, "x"), Err(Error::Capability(_))));
    }
}
