use serde::Serialize;

use crate::admm::iterate::{admm_step, AdmmState};
use crate::admm::problem::{isometry_scale, AdmmProblem};
use crate::atoms::{CpcFunction, FunctionSpec, IsometryMap, SetKind, SetSpec};
use crate::engine::{drs_step, DrsState};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::pathology::CaseLabel;
use crate::Scalar;

/// The ADMM problem rewritten as `minimize f̃(z) + g̃(z)` with
/// `f̃(z) = inf {f(x) | Ax + z = 0}` and `g̃(z) = inf {g(y) | By − c = z}`.
///
/// DRS runs on it with `g̃` resolved first.
#[derive(Debug, Clone)]
pub struct ReducedPair<T> {
    pub f_tilde: FunctionSpec<T>,
    pub g_tilde: FunctionSpec<T>,
    a: Matrix<T>,
    b: Matrix<T>,
    c: Vector<T>,
    alpha2: T,
    beta2: T,
}

/// `φ̃(z) = φ(Mᵀ(σz + s)/μ²)` restricted to `σz + s ∈ ran M`.
fn infimal_image<T: Scalar>(
    phi: &FunctionSpec<T>,
    m: &Matrix<T>,
    sigma: T,
    s: &Vector<T>,
    name: &str,
) -> Result<(FunctionSpec<T>, T)> {
    let mu2 = isometry_scale(m).ok_or_else(|| Error::Capability(format!("{name}: infimal image needs MᵀM = μ²I")))?;
    let (n, p) = (m.rows(), m.cols());
    let mu = mu2.sqrt();
    // u = L z + t
    let l = Matrix::from_fn(p, n, |i, j| sigma * m[(j, i)] / mu2);
    let t = m.tmatvec(s).scaled(T::one() / mu2);
    if n == p {
        let q = Matrix::from_fn(p, n, |i, j| sigma * m[(j, i)] / mu);
        let inner = IsometryMap { scale: T::one() / mu, q, shift: t };
        let map = match &phi.map {
            Some(outer) => outer.compose(&inner)?,
            None => inner,
        };
        let mut out = phi.clone();
        out.map = Some(map);
        return Ok((out, mu2));
    }
    let plain = phi.atoms.is_empty()
        && phi.map.is_none()
        && matches!(phi.indicator.as_ref().map(|s| &s.kind), None | Some(SetKind::Affine { .. }));
    if !plain {
        return Err(Error::Capability(format!(
            "{name}: infimal image under a non-square map is only supported for linear plus affine functions"
        )));
    }
    // (I − MMᵀ/μ²)(σz + s) = 0
    let perp = Matrix::from_fn(n, n, |i, j| {
        let proj: T = (0..p).map(|k| m[(i, k)] * m[(j, k)]).sum::<T>() / mu2;
        (if i == j { T::one() } else { T::zero() }) - proj
    });
    let perp_s = perp.matvec(s);
    let mut rows: Vec<Vec<T>> = (0..n).map(|i| perp.row(i).iter().map(|&x| sigma * x).collect()).collect();
    let mut rhs: Vec<T> = perp_s.iter().map(|&x| -x).collect();
    if let Some(SetKind::Affine { a, b }) = phi.indicator.as_ref().map(|s| &s.kind) {
        let fl = a.matmul(&l)?;
        let ft = a.matvec(&t);
        rows.extend(fl.to_rows());
        rhs.extend((0..b.dim()).map(|i| b[i] - ft[i]));
    }
    let mut out = FunctionSpec::zero(n);
    if let Some(cf) = &phi.linear {
        out.linear = Some(l.tmatvec(cf));
        out.offset = phi.offset + cf.dot(&t);
    } else {
        out.offset = phi.offset;
    }
    out.indicator = Some(SetSpec::new(SetKind::affine(Matrix::from_rows(&rows)?, Vector::new(rhs)?)));
    Ok((out, mu2))
}

/// Builds `f̃` and `g̃`. Capability error when either leaves the supported algebra.
pub fn reduce_to_drs<T: Scalar>(prob: &AdmmProblem<T>) -> Result<ReducedPair<T>> {
    let n = prob.c().dim();
    let (f_tilde, alpha2) = infimal_image(&prob.spec.f, prob.a(), -T::one(), &Vector::zeros(n), "f")?;
    let (g_tilde, beta2) = infimal_image(&prob.spec.g, prob.b(), T::one(), prob.c(), "g")?;
    Ok(ReducedPair { f_tilde, g_tilde, a: prob.a().clone(), b: prob.b().clone(), c: prob.c().clone(), alpha2, beta2 })
}

impl<T: Scalar> ReducedPair<T> {
    /// `(g̃, f̃)`, in the order DRS resolves them.
    pub fn drs_pair(&self) -> Result<(CpcFunction<T>, CpcFunction<T>)> {
        Ok((self.g_tilde.compile()?, self.f_tilde.compile()?))
    }

    /// `z^k = −γν^k − Ax^{k+1}`
    pub fn z_from(&self, gamma: T, nu: &Vector<T>, x_next: &Vector<T>) -> Vector<T> {
        &nu.scaled(-gamma) - &self.a.matvec(x_next)
    }

    /// `y^{k+1}` from `x̃^{k+1/2} = By^{k+1} − c`.
    pub fn y_from(&self, x_half: &Vector<T>) -> Vector<T> {
        self.b.tmatvec(&(x_half + &self.c)).scaled(T::one() / self.beta2)
    }

    /// `x^{k+2}` from `x̃^{k+1} = −Ax^{k+2}`.
    pub fn x_from(&self, x_full: &Vector<T>) -> Vector<T> {
        self.a.tmatvec(x_full).scaled(-T::one() / self.alpha2)
    }

    /// `ν^k` from `z^k` and `x̃^k = −Ax^{k+1}`.
    pub fn nu_from(&self, gamma: T, z: &Vector<T>, x_full_prev: &Vector<T>) -> Vector<T> {
        (z - x_full_prev).scaled(-T::one() / gamma)
    }
}

/// Largest discrepancies between ADMM and DRS on the reduced pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equivalence<T> {
    pub steps: usize,
    /// `max ‖x̃^{k+1/2} − (By^{k+1} − c)‖, ‖x̃^{k+1} + Ax^{k+2}‖, ‖z^k + γν^k + Ax^{k+1}‖`
    pub iterate_mismatch: T,
    /// Same, divided by `max(1, ‖expected iterate‖)`.
    pub relative_mismatch: T,
    /// Mismatch of `(x, y, ν)` recovered through the substitution maps.
    pub roundtrip_mismatch: T,
}

/// Runs both paths side by side for `steps` DRS iterations from the default
/// ADMM initialization.
pub fn check_equivalence<T: Scalar>(prob: &AdmmProblem<T>, gamma: T, steps: usize) -> Result<Equivalence<T>> {
    let pair = reduce_to_drs(prob)?;
    let (first, second) = pair.drs_pair()?;
    let mut admm = vec![AdmmState::initial(prob, gamma)];
    for k in 0..=steps {
        let next = admm_step(&admm[k], prob);
        admm.push(next);
    }
    let c = prob.c();
    let z0 = pair.z_from(gamma, &admm[0].nu, &admm[1].x);
    let mut drs = DrsState::initial(z0, gamma);
    let mut worst = T::zero();
    let mut relative = T::zero();
    let mut roundtrip = T::zero();
    let mut prev_full = prob.a().matvec(&admm[1].x).scaled(-T::one());
    for k in 0..steps {
        let nu = pair.nu_from(gamma, &drs.z, &prev_full);
        roundtrip = roundtrip.max(nu.dist(&admm[k].nu));
        let z_expected = pair.z_from(gamma, &admm[k].nu, &admm[k + 1].x);
        let dz = drs.z.dist(&z_expected);
        worst = worst.max(dz);
        relative = relative.max(dz / T::one().max(z_expected.norm()));
        drs = drs_step(&drs, &first, &second);
        let by = prob.b().matvec(&admm[k + 1].y);
        let half_expected = Vector::from_fn(by.dim(), |i| by[i] - c[i]);
        let full_expected = prob.a().matvec(&admm[k + 2].x).scaled(-T::one());
        let (dh, df) = (drs.x_half.dist(&half_expected), drs.x_full.dist(&full_expected));
        worst = worst.max(dh).max(df);
        relative = relative.max(dh / T::one().max(half_expected.norm())).max(df / T::one().max(full_expected.norm()));
        roundtrip = roundtrip
            .max(pair.y_from(&drs.x_half).dist(&admm[k + 1].y))
            .max(pair.x_from(&drs.x_full).dist(&admm[k + 2].x));
        prev_full = drs.x_full.clone();
    }
    Ok(Equivalence { steps, iterate_mismatch: worst, relative_mismatch: relative, roundtrip_mismatch: roundtrip })
}

/// Five-way taxonomy of the ADMM primal-dual pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AdmmCase {
    A,
    B,
    C,
    D,
    E,
    Undetermined,
}

impl AdmmCase {
    /// DRS case on the reduced pair to ADMM case: c, d and e merge.
    pub fn from_drs(label: CaseLabel) -> Self {
        match label {
            CaseLabel::A => AdmmCase::A,
            CaseLabel::B => AdmmCase::B,
            CaseLabel::C | CaseLabel::D | CaseLabel::E => AdmmCase::C,
            CaseLabel::F => AdmmCase::D,
            CaseLabel::G => AdmmCase::E,
            CaseLabel::Undetermined => AdmmCase::Undetermined,
        }
    }

    pub fn definition(self) -> &'static str {
        match self {
            AdmmCase::A => "d* = p*, primal and dual solutions exist",
            AdmmCase::B => "d* = p*, a primal solution exists, no dual solution",
            AdmmCase::C => "d* = p* < +inf, primal feasible without a solution",
            AdmmCase::D => "p* = d* = +inf, primal infeasible",
            AdmmCase::E => "d* < p*, strong duality fails",
            AdmmCase::Undetermined => "the run was inconclusive",
        }
    }
}

impl std::fmt::Display for AdmmCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AdmmCase::A => "a",
            AdmmCase::B => "b",
            AdmmCase::C => "c",
            AdmmCase::D => "d",
            AdmmCase::E => "e",
            AdmmCase::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admm::AdmmSpec;
    use crate::atoms::ScalarAtom;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_f64_rows(rows).unwrap()
    }

    #[test]
    fn identity_maps_give_reflected_f() {
        let f = FunctionSpec::<f64>::linear(Vector::from_f64(&[1.0, -2.0]));
        let g = FunctionSpec::zero(2).with_atom(ScalarAtom::Abs, &[0]).with_atom(ScalarAtom::Abs, &[1]);
        let prob =
            AdmmSpec { f, g, a: Matrix::identity(2), b: Matrix::identity(2), c: Vector::zeros(2) }.compile().unwrap();
        let pair = reduce_to_drs(&prob).unwrap();
        let (gt, ft) = pair.drs_pair().unwrap();
        let z = Vector::from_f64(&[0.3, -1.1]);
        // f̃(z) = f(−z)
        assert!((ft.value(&z, 1e-12).to_scalar() - (-0.3 - 2.2)).abs() < 1e-14);
        assert!((gt.value(&z, 1e-12).to_scalar() - 1.4).abs() < 1e-14);
        let eq = check_equivalence(&prob, 1.0, 1000).unwrap();
        assert!(eq.iterate_mismatch <= 1e-10, "{eq:?}");
    }

    #[test]
    fn abs_pair_equivalence() {
        let abs = FunctionSpec::zero(1).with_atom(ScalarAtom::Abs, &[0]);
        let prob = AdmmSpec { f: abs.clone(), g: abs, a: m(&[&[1.0]]), b: m(&[&[-1.0]]), c: Vector::from_f64(&[1.0]) }
            .compile()
            .unwrap();
        for gamma in [0.3, 1.0, 2.5] {
            let eq = check_equivalence(&prob, gamma, 1000).unwrap();
            assert!(eq.iterate_mismatch <= 1e-10 && eq.roundtrip_mismatch <= 1e-10, "{eq:?}");
        }
    }

    #[test]
    fn inconsistent_constraints_agree_on_residual() {
        // x + y = 0 and x + y = 1 at once
        let z = FunctionSpec::zero(1);
        let col = m(&[&[1.0], &[1.0]]);
        let prob = AdmmSpec { f: z.clone(), g: z, a: col.clone(), b: col, c: Vector::from_f64(&[0.0, 1.0]) }
            .compile()
            .unwrap();
        // iterates grow linearly here, so rounding is compared relative to their size
        let eq = check_equivalence(&prob, 1.0, 1000).unwrap();
        assert!(eq.relative_mismatch <= 1e-12, "{eq:?}");
        let pair = reduce_to_drs(&prob).unwrap();
        let (gt, ft) = pair.drs_pair().unwrap();
        let probes = crate::engine::ProbeConfig::default();
        let drs = crate::engine::run(&gt, &ft, 1.0, Vector::zeros(2), 2000, &probes).unwrap();
        let admm = crate::admm::run_admm(&prob, 1.0, None, 2000, &probes).unwrap();
        // gap between the lines x + y ∈ {0, 1} measured in ℝ²: 1/√2
        let gap = 0.5f64.sqrt();
        assert!((drs.tail_displacement() - gap).abs() < 1e-6, "{}", drs.tail_displacement());
        assert!((admm.tail_residual() - gap).abs() < 1e-6, "{}", admm.tail_residual());
    }

    #[test]
    fn scaled_rotation_reduction() {
        let abs = FunctionSpec::zero(2).with_atom(ScalarAtom::Abs, &[0]).with_atom(ScalarAtom::NegLog, &[1]);
        let rot = m(&[&[0.0, 2.0], &[-2.0, 0.0]]);
        let g = FunctionSpec::zero(2).with_atom(ScalarAtom::Abs, &[0]).with_atom(ScalarAtom::Abs, &[1]);
        let prob =
            AdmmSpec { f: abs, g, a: rot, b: Matrix::scalar_identity(2, -3.0), c: Vector::from_f64(&[1.0, 2.0]) }
                .compile()
                .unwrap();
        let eq = check_equivalence(&prob, 0.8, 1000).unwrap();
        assert!(eq.iterate_mismatch <= 1e-10 && eq.roundtrip_mismatch <= 1e-10, "{eq:?}");
    }

    #[test]
    fn case_mapping() {
        assert_eq!(AdmmCase::from_drs(CaseLabel::D), AdmmCase::C);
        assert_eq!(AdmmCase::from_drs(CaseLabel::E), AdmmCase::C);
        assert_eq!(AdmmCase::from_drs(CaseLabel::F), AdmmCase::D);
        assert_eq!(AdmmCase::from_drs(CaseLabel::G), AdmmCase::E);
    }
}
