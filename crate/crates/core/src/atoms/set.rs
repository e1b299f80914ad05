use serde::{Deserialize, Serialize};

use crate::atoms::solve::dykstra;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh, smat, svec, svec_len, Matrix, Vector, MAX_EIGH_ORDER};
use crate::Scalar;

/// Sweep cap for Dykstra projections onto intersections.
pub const DYKSTRA_MAX_SWEEPS: usize = 100_000;
/// Dykstra stops when a sweep moves the iterate less than this (relative).
pub const DYKSTRA_TOL: f64 = 1e-12;

/// Closed convex set acting on an ambient vector of fixed dimension.
///
/// Cones that live on a subset of coordinates (second-order, PSD) leave the
/// other coordinates free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetKind<T> {
    /// `{x | A x = b}`
    Affine {
        a: Matrix<T>,
        b: Vector<T>,
    },
    /// `{x | aᵀx ≤ b}`
    Halfspace {
        a: Vector<T>,
        b: T,
    },
    /// Coordinate bounds; `null` means unbounded.
    #[serde(rename = "box")]
    Bounds {
        lower: Vec<Option<T>>,
        upper: Vec<Option<T>>,
    },
    /// `{x | ‖x − center‖ ≤ radius}`
    Ball {
        center: Vector<T>,
        radius: T,
    },
    /// `{x | x[t] ≥ ‖x[cone]‖}`
    SecondOrderCone {
        t: usize,
        cone: Vec<usize>,
    },
    /// svec block `x[start .. start + order(order+1)/2]` is a PSD matrix.
    PsdCone {
        order: usize,
        start: usize,
    },
    Intersection {
        sets: Vec<SetKind<T>>,
    },
}

/// A set together with a point certifying that it is nonempty.
///
/// The witness may be omitted in JSON input; validation then derives one
/// in closed form (or by Dykstra for intersections) and checks it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SetSpec<T> {
    #[serde(flatten)]
    pub kind: SetKind<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vector<T>>,
}

impl<T: Scalar> SetSpec<T> {
    pub fn new(kind: SetKind<T>) -> Self {
        SetSpec { kind, witness: None }
    }

    pub fn with_witness(kind: SetKind<T>, witness: Vector<T>) -> Self {
        SetSpec { kind, witness: Some(witness) }
    }
}

impl<T: Scalar> SetKind<T> {
    pub fn affine(a: Matrix<T>, b: Vector<T>) -> Self {
        SetKind::Affine { a, b }
    }

    pub fn lower_bounds(lower: Vec<Option<T>>) -> Self {
        let upper = vec![None; lower.len()];
        SetKind::Bounds { lower, upper }
    }

    pub fn upper_bounds(upper: Vec<Option<T>>) -> Self {
        let lower = vec![None; upper.len()];
        SetKind::Bounds { lower, upper }
    }

    /// The singleton `{point}` as a box.
    pub fn point(point: &[T]) -> Self {
        let b: Vec<Option<T>> = point.iter().map(|&x| Some(x)).collect();
        SetKind::Bounds { lower: b.clone(), upper: b }
    }

    /// Largest convex cone `K` with `C + K ⊆ C`.
    pub fn recession_cone(&self) -> SetKind<T> {
        match self {
            SetKind::Affine { a, b } => SetKind::Affine { a: a.clone(), b: Vector::zeros(b.dim()) },
            SetKind::Halfspace { a, .. } => SetKind::Halfspace { a: a.clone(), b: T::zero() },
            SetKind::Bounds { lower, upper } => SetKind::Bounds {
                lower: lower.iter().map(|l| l.map(|_| T::zero())).collect(),
                upper: upper.iter().map(|u| u.map(|_| T::zero())).collect(),
            },
            SetKind::Ball { center, .. } => SetKind::point(&vec![T::zero(); center.dim()]),
            SetKind::SecondOrderCone { .. } | SetKind::PsdCone { .. } => self.clone(),
            SetKind::Intersection { sets } => {
                SetKind::Intersection { sets: sets.iter().map(SetKind::recession_cone).collect() }
            }
        }
    }

    /// True when the set is a cone (contains 0 and is closed under scaling).
    pub fn is_cone(&self) -> bool {
        match self {
            SetKind::Affine { b, .. } => b.iter().all(|x| *x == T::zero()),
            SetKind::Halfspace { b, .. } => *b == T::zero(),
            SetKind::Bounds { lower, upper } => lower.iter().chain(upper).all(|v| v.is_none_or(|x| x == T::zero())),
            SetKind::Ball { radius, .. } => *radius == T::zero(),
            SetKind::SecondOrderCone { .. } | SetKind::PsdCone { .. } => true,
            SetKind::Intersection { sets } => sets.iter().all(SetKind::is_cone),
        }
    }

    /// Checks dimensions and indices against the ambient dimension.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            SetKind::Affine { a, b } => {
                check_dim(n, a.cols())?;
                check_dim(a.rows(), b.dim())
            }
            SetKind::Halfspace { a, b } => {
                check_dim(n, a.dim())?;
                if a.norm() == T::zero() || !b.is_finite() {
                    return Err(Error::Input("halfspace normal must be nonzero".into()));
                }
                Ok(())
            }
            SetKind::Bounds { lower, upper } => {
                check_dim(n, lower.len())?;
                check_dim(n, upper.len())?;
                for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if let (Some(l), Some(u)) = (l, u) {
                        if l > u {
                            return Err(Error::Input(format!("empty box: lower > upper at {i}")));
                        }
                    }
                }
                Ok(())
            }
            SetKind::Ball { center, radius } => {
                check_dim(n, center.dim())?;
                if !(*radius >= T::zero()) {
                    return Err(Error::Input("ball radius must be nonnegative".into()));
                }
                Ok(())
            }
            SetKind::SecondOrderCone { t, cone } => {
                let mut seen = vec![false; n];
                for &i in cone.iter().chain(std::iter::once(t)) {
                    if i >= n || seen[i] {
                        return Err(Error::Input(format!("second-order cone index {i} invalid or repeated")));
                    }
                    seen[i] = true;
                }
                Ok(())
            }
            SetKind::PsdCone { order, start } => {
                if *order == 0 || *order > MAX_EIGH_ORDER || start + svec_len(*order) > n {
                    return Err(Error::Input(format!("PSD block of order {order} at {start} does not fit in {n}")));
                }
                Ok(())
            }
            SetKind::Intersection { sets } => {
                if sets.is_empty() {
                    return Err(Error::Input("empty intersection list".into()));
                }
                sets.iter().try_for_each(|s| s.validate(n))
            }
        }
    }

    pub fn compile(&self, n: usize) -> Result<CompiledSet<T>> {
        self.validate(n)?;
        Ok(match self {
            SetKind::Affine { a, b } => {
                let pinv = a.pseudo_inverse(T::lit(1e-12))?;
                CompiledSet::Affine { a: a.clone(), b: b.clone(), pinv }
            }
            SetKind::Intersection { sets } => {
                CompiledSet::Intersection(sets.iter().map(|s| s.compile(n)).collect::<Result<_>>()?)
            }
            other => CompiledSet::Simple(other.clone()),
        })
    }
}

/// A validated set with cached factorizations, ready for repeated projection.
#[derive(Debug, Clone)]
pub enum CompiledSet<T> {
    Affine { a: Matrix<T>, b: Vector<T>, pinv: Matrix<T> },
    Simple(SetKind<T>),
    Intersection(Vec<CompiledSet<T>>),
}

impl<T: Scalar> CompiledSet<T> {
    /// Euclidean projection.
    pub fn project(&self, z: &Vector<T>) -> Vector<T> {
        match self {
            CompiledSet::Affine { a, b, pinv } => {
                let r = &a.matvec(z) - b;
                z - &pinv.matvec(&r)
            }
            CompiledSet::Simple(kind) => project_simple(kind, z),
            CompiledSet::Intersection(parts) => {
                let closures: Vec<Box<dyn Fn(&Vector<T>) -> Vector<T> + '_>> =
                    parts.iter().map(|p| Box::new(move |v: &Vector<T>| p.project(v)) as Box<_>).collect();
                let refs: Vec<&dyn Fn(&Vector<T>) -> Vector<T>> = closures.iter().map(|b| b.as_ref()).collect();
                dykstra(z, &refs, DYKSTRA_MAX_SWEEPS, T::lit(DYKSTRA_TOL)).0
            }
        }
    }

    pub fn distance(&self, z: &Vector<T>) -> T {
        z.dist(&self.project(z))
    }

    /// Membership up to `tol·max(1, ‖z‖)` in distance.
    pub fn contains(&self, z: &Vector<T>, tol: T) -> bool {
        match self {
            CompiledSet::Intersection(parts) => parts.iter().all(|p| p.contains(z, tol)),
            // the projection of an inconsistent system is a least-squares point, so check the residual
            CompiledSet::Affine { a, b, .. } => {
                let r = (&a.matvec(z) - b).norm();
                r <= tol * T::one().max(b.norm()).max(a.frobenius() * z.norm())
            }
            _ => self.distance(z) <= tol * T::one().max(z.norm()),
        }
    }

    /// A point of the set, derived in closed form where possible.
    pub fn canonical_point(&self, n: usize) -> Result<Vector<T>> {
        let zero = Vector::zeros(n);
        let p = self.project(&zero);
        if self.contains(&p, T::lit(1e-9)) {
            Ok(p)
        } else {
            Err(Error::Input("set appears to be empty (no witness found)".into()))
        }
    }
}

fn project_simple<T: Scalar>(kind: &SetKind<T>, z: &Vector<T>) -> Vector<T> {
    match kind {
        SetKind::Halfspace { a, b } => {
            let excess = a.dot(z) - *b;
            if excess <= T::zero() {
                z.clone()
            } else {
                z.axpy(-excess / a.norm_sq(), a)
            }
        }
        SetKind::Bounds { lower, upper } => Vector::from_fn(z.dim(), |i| {
            let mut v = z[i];
            if let Some(l) = lower[i] {
                v = v.max(l);
            }
            if let Some(u) = upper[i] {
                v = v.min(u);
            }
            v
        }),
        SetKind::Ball { center, radius } => {
            let d = z - center;
            let nd = d.norm();
            if nd <= *radius {
                z.clone()
            } else {
                center.axpy(*radius / nd, &d)
            }
        }
        SetKind::SecondOrderCone { t, cone } => {
            let mut out = z.clone();
            let xs: Vec<T> = cone.iter().map(|&i| z[i]).collect();
            let (head, tail) = project_soc(z[*t], &xs);
            out[*t] = head;
            for (&i, v) in cone.iter().zip(tail) {
                out[i] = v;
            }
            out
        }
        SetKind::PsdCone { order, start } => {
            let len = svec_len(*order);
            let mut out = z.clone();
            let block = project_psd_svec(&z.as_slice()[*start..start + len]);
            out.as_mut_slice()[*start..start + len].copy_from_slice(&block);
            out
        }
        SetKind::Affine { .. } | SetKind::Intersection { .. } => {
            unreachable!("compiled separately")
        }
    }
}

/// Projection of `(t, x)` onto `{t ≥ ‖x‖}`.
pub fn project_soc<T: Scalar>(t: T, x: &[T]) -> (T, Vec<T>) {
    let nx = Vector::from_vec(x.to_vec()).norm();
    if nx <= t {
        (t, x.to_vec())
    } else if nx <= -t {
        (T::zero(), vec![T::zero(); x.len()])
    } else {
        let a = (nx + t) * T::half();
        (a, x.iter().map(|&v| a * v / nx).collect())
    }
}

/// Projection of an svec-encoded symmetric matrix onto the PSD cone.
pub fn project_psd_svec<T: Scalar>(v: &[T]) -> Vec<T> {
    let m = smat(v).expect("block length is triangular by validation");
    match eigh(&m) {
        Ok(e) => {
            if e.values.first().is_none_or(|&l| l >= T::zero()) {
                return v.to_vec();
            }
            svec(&e.reconstruct_with(|l| l.max(T::zero()))).into_inner()
        }
        // Jacobi on a symmetric matrix of validated order always converges
        Err(err) => panic!("PSD projection failed: {err}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMat;

    fn compile(kind: SetKind<f64>, n: usize) -> CompiledSet<f64> {
        kind.compile(n).unwrap()
    }

    #[test]
    fn soc_examples() {
        let soc = compile(SetKind::SecondOrderCone { t: 2, cone: vec![0, 1] }, 3);
        let p = soc.project(&Vector::from_f64(&[1.0, 0.0, 0.0]));
        assert!((p[0] - 0.5).abs() < 1e-15 && p[1] == 0.0 && (p[2] - 0.5).abs() < 1e-15);
        let p = soc.project(&Vector::from_f64(&[0.0, 0.0, -1.0]));
        assert_eq!(p.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn psd_clips_negative_eigenvalues() {
        let psd = compile(SetKind::PsdCone { order: 2, start: 0 }, 3);
        let z = svec(&SymMat::diag(&[1.0, -2.0]));
        let p = psd.project(&z);
        let expect = svec(&SymMat::diag(&[1.0, 0.0]));
        assert!(p.dist(&expect) < 1e-15);
    }

    #[test]
    fn affine_projection_lands_in_set() {
        let a = Matrix::from_f64_rows(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, -1.0]]).unwrap();
        let set = compile(SetKind::affine(a.clone(), Vector::from_f64(&[1.0, 2.0])), 3);
        let p = set.project(&Vector::from_f64(&[5.0, -3.0, 0.5]));
        let r = &a.matvec(&p) - &Vector::from_f64(&[1.0, 2.0]);
        assert!(r.norm() < 1e-14);
        // already inside: unchanged
        assert!(set.project(&p).dist(&p) < 1e-14);
    }

    #[test]
    fn inconsistent_affine_set_has_no_witness() {
        let a = Matrix::from_f64_rows(&[&[1.0, 0.0], &[1.0, 0.0]]).unwrap();
        let set = compile(SetKind::affine(a, Vector::from_f64(&[0.0, 1.0])), 2);
        assert!(set.canonical_point(2).is_err());
    }

    #[test]
    fn intersection_by_dykstra() {
        // unit disk ∩ {x₀ ≥ 0.5}
        let set = compile(
            SetKind::Intersection {
                sets: vec![
                    SetKind::Ball { center: Vector::zeros(2), radius: 1.0 },
                    SetKind::lower_bounds(vec![Some(0.5), None]),
                ],
            },
            2,
        );
        let p = set.project(&Vector::from_f64(&[0.0, 3.0]));
        // closest point is (0.5, √0.75)
        assert!((p[0] - 0.5).abs() < 1e-6 && (p[1] - 0.75f64.sqrt()).abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn recession_cones() {
        let b = SetKind::<f64>::Bounds { lower: vec![Some(1.0), None], upper: vec![Some(2.0), Some(-3.0)] };
        assert_eq!(
            b.recession_cone(),
            SetKind::Bounds { lower: vec![Some(0.0), None], upper: vec![Some(0.0), Some(0.0)] }
        );
        assert!(b.recession_cone().is_cone());
        assert!(!b.is_cone());
    }

    #[test]
    fn json_shape() {
        let s = SetSpec::new(SetKind::<f64>::lower_bounds(vec![Some(1.0), None]));
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"type":"box","lower":[1.0,null],"upper":[null,null]}"#);
        let back: SetSpec<f64> = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
