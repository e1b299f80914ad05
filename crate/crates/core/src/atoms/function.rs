use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::atoms::scalar_atom::{Interval, ScalarAtom};
use crate::atoms::set::{CompiledSet, SetKind, SetSpec};
use crate::error::{check_dim, Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{Matrix, Vector};
use crate::Scalar;

/// Tolerance for the exact recession-cone membership test.
const REC_TOL: f64 = 1e-12;
/// Tolerance when checking user-supplied witnesses and isometries.
const WITNESS_TOL: f64 = 1e-9;

/// Scalar atom applied to one coordinate (or a coordinate pair).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomTerm {
    pub atom: ScalarAtom,
    pub coords: Vec<usize>,
}

/// Change of variables `x ↦ scale·Q x + shift` with `Q` orthogonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IsometryMap<T> {
    pub scale: T,
    pub q: Matrix<T>,
    pub shift: Vector<T>,
}

impl<T: Scalar> IsometryMap<T> {
    pub fn apply(&self, x: &Vector<T>) -> Vector<T> {
        self.q.matvec(x).scaled(self.scale).axpy(T::one(), &self.shift)
    }

    /// Linear part only, for directions.
    pub fn apply_linear(&self, d: &Vector<T>) -> Vector<T> {
        self.q.matvec(d).scaled(self.scale)
    }

    pub fn invert(&self, u: &Vector<T>) -> Vector<T> {
        self.q.tmatvec(&(u - &self.shift)).scaled(T::one() / self.scale)
    }

    /// `self ∘ inner`, i.e. `x ↦ self.apply(inner.apply(x))`.
    pub fn compose(&self, inner: &IsometryMap<T>) -> Result<IsometryMap<T>> {
        Ok(IsometryMap {
            scale: self.scale * inner.scale,
            q: self.q.matmul(&inner.q)?,
            shift: self.apply(&inner.shift),
        })
    }

    fn validate(&self, n: usize) -> Result<()> {
        check_dim(n, self.q.rows())?;
        check_dim(n, self.q.cols())?;
        check_dim(n, self.shift.dim())?;
        if !(self.scale > T::zero() && self.scale.is_finite()) {
            return Err(Error::Input("map scale must be positive".into()));
        }
        let qtq = self.q.gram_cols();
        let dev = (&svec_dense(&qtq.to_dense()) - &svec_dense(&Matrix::identity(n))).norm_inf();
        if dev > T::lit(WITNESS_TOL) {
            return Err(Error::Capability(format!("map matrix is not orthogonal (deviation {dev})")));
        }
        Ok(())
    }
}

fn svec_dense<T: Scalar>(m: &Matrix<T>) -> Vector<T> {
    Vector::from_vec(m.to_rows().concat())
}

/// Symbolic description of a closed proper convex function on `ℝⁿ`:
///
/// `φ(u) = cᵀu + offset + δ_C(u) + Σ atoms(u)`, optionally composed with an
/// isometry map `u = αQx + s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FunctionSpec<T> {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Vector<T>>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub offset: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indicator: Option<SetSpec<T>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<IsometryMap<T>>,
}

fn is_zero<T: Scalar>(x: &T) -> bool {
    *x == T::zero()
}

impl<T: Scalar> FunctionSpec<T> {
    pub fn zero(dim: usize) -> Self {
        FunctionSpec { dim, linear: None, offset: T::zero(), indicator: None, atoms: Vec::new(), map: None }
    }

    pub fn linear(c: Vector<T>) -> Self {
        let mut f = Self::zero(c.dim());
        f.linear = Some(c);
        f
    }

    pub fn indicator(dim: usize, set: SetKind<T>) -> Self {
        let mut f = Self::zero(dim);
        f.indicator = Some(SetSpec::new(set));
        f
    }

    pub fn with_linear(mut self, c: Vector<T>) -> Self {
        self.linear = Some(c);
        self
    }

    pub fn with_offset(mut self, offset: T) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_indicator(mut self, set: SetKind<T>) -> Self {
        self.indicator = Some(SetSpec::new(set));
        self
    }

    pub fn with_atom(mut self, atom: ScalarAtom, coords: &[usize]) -> Self {
        self.atoms.push(AtomTerm { atom, coords: coords.to_vec() });
        self
    }

    pub fn with_map(mut self, map: IsometryMap<T>) -> Self {
        self.map = Some(map);
        self
    }

    pub fn compile(&self) -> Result<CpcFunction<T>> {
        CpcFunction::new(self.clone())
    }
}

#[derive(Debug, Clone)]
enum ProxRule<T> {
    /// `Π_C(u − γc)`
    Project { set: CompiledSet<T> },
    /// Per-coordinate atoms on `u − γc`, clamped to a box.
    Separable { bounds: Vec<Interval<T>> },
}

/// A validated [`FunctionSpec`] with a resolved proximal rule.
#[derive(Debug, Clone)]
pub struct CpcFunction<T> {
    spec: FunctionSpec<T>,
    linear: Vector<T>,
    rule: ProxRule<T>,
    domain_kind: SetKind<T>,
    domain: CompiledSet<T>,
    /// Witness of the domain in inner coordinates.
    inner_witness: Vector<T>,
    recession: OnceLock<Box<CpcFunction<T>>>,
}

impl<T: Scalar> CpcFunction<T> {
    pub fn new(spec: FunctionSpec<T>) -> Result<Self> {
        let n = spec.dim;
        if n == 0 {
            return Err(Error::Input("function dimension must be positive".into()));
        }
        let linear = match &spec.linear {
            Some(c) => {
                check_dim(n, c.dim())?;
                if !c.is_finite() {
                    return Err(Error::Input("non-finite linear coefficient".into()));
                }
                c.clone()
            }
            None => Vector::zeros(n),
        };
        if !spec.offset.is_finite() {
            return Err(Error::Input("non-finite offset".into()));
        }
        if let Some(map) = &spec.map {
            map.validate(n)?;
        }
        let mut owner = vec![None; n];
        for (k, term) in spec.atoms.iter().enumerate() {
            if term.coords.len() != term.atom.arity() {
                return Err(Error::Input(format!(
                    "atom {} needs {} coordinate(s)",
                    term.atom.name(),
                    term.atom.arity()
                )));
            }
            for &i in &term.coords {
                if i >= n || owner[i].is_some() {
                    return Err(Error::Input(format!("atom coordinate {i} out of range or shared")));
                }
                owner[i] = Some(k);
            }
        }

        let (rule, domain_kind, inner_witness) = if spec.atoms.is_empty() {
            let set_spec = spec
                .indicator
                .clone()
                .unwrap_or_else(|| SetSpec::new(SetKind::Bounds { lower: vec![None; n], upper: vec![None; n] }));
            let set = set_spec.kind.compile(n)?;
            let witness = match &set_spec.witness {
                Some(w) => {
                    check_dim(n, w.dim())?;
                    if !set.contains(w, T::lit(WITNESS_TOL)) {
                        return Err(Error::Input("supplied witness is not in the set".into()));
                    }
                    w.clone()
                }
                None => set.canonical_point(n)?,
            };
            (ProxRule::Project { set }, set_spec.kind, witness)
        } else {
            let mut bounds = vec![Interval::full(); n];
            if let Some(ind) = &spec.indicator {
                match &ind.kind {
                    SetKind::Bounds { lower, upper } => {
                        ind.kind.validate(n)?;
                        for i in 0..n {
                            bounds[i] = Interval {
                                lo: lower[i].unwrap_or(T::neg_infinity()),
                                hi: upper[i].unwrap_or(T::infinity()),
                            };
                        }
                    }
                    _ => {
                        return Err(Error::Capability(
                            "atoms combine only with box indicators (prox not resolvable)".into(),
                        ))
                    }
                }
            }
            let mut witness = Vector::zeros(n);
            let mut closure = bounds.clone();
            for i in 0..n {
                let b = bounds[i];
                match owner[i].map(|k| spec.atoms[k].atom) {
                    None => witness[i] = b.clamp(T::zero()),
                    Some(ScalarAtom::ExpNegSqrtProd) => {
                        if b != Interval::full() {
                            return Err(Error::Capability(
                                "box constraints on exp(-sqrt(x1*x2)) coordinates are not supported".into(),
                            ));
                        }
                        witness[i] = T::one();
                        closure[i] = ScalarAtom::ExpNegSqrtProd.domain();
                    }
                    Some(atom) => {
                        let dom = atom.domain();
                        let c = b.intersect(&dom);
                        closure[i] = c;
                        witness[i] = open_interval_point(atom, c).ok_or_else(|| {
                            Error::Input(format!("domain of {} on coordinate {i} is empty", atom.name()))
                        })?;
                    }
                }
            }
            let kind = SetKind::Bounds {
                lower: closure.iter().map(|b| b.lo.is_finite().then_some(b.lo)).collect(),
                upper: closure.iter().map(|b| b.hi.is_finite().then_some(b.hi)).collect(),
            };
            (ProxRule::Separable { bounds }, kind, witness)
        };
        let domain = domain_kind.compile(n)?;
        Ok(CpcFunction { spec, linear, rule, domain_kind, domain, inner_witness, recession: OnceLock::new() })
    }

    pub fn spec(&self) -> &FunctionSpec<T> {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    fn to_inner(&self, x: &Vector<T>) -> Vector<T> {
        match &self.spec.map {
            Some(m) => m.apply(x),
            None => x.clone(),
        }
    }

    fn to_outer(&self, u: Vector<T>) -> Vector<T> {
        match &self.spec.map {
            Some(m) => m.invert(&u),
            None => u,
        }
    }

    /// `argmin_x f(x) + ‖x − z‖²/(2γ)`
    pub fn prox(&self, gamma: T, z: &Vector<T>) -> Vector<T> {
        debug_assert_eq!(z.dim(), self.dim());
        match &self.spec.map {
            None => self.inner_prox(gamma, z),
            Some(m) => {
                let a = m.scale;
                let p = self.inner_prox(a * a * gamma, &m.apply(z));
                m.invert(&p)
            }
        }
    }

    fn inner_prox(&self, gamma: T, u: &Vector<T>) -> Vector<T> {
        let w = u.axpy(-gamma, &self.linear);
        match &self.rule {
            ProxRule::Project { set } => set.project(&w),
            ProxRule::Separable { bounds } => {
                let mut out = Vector::from_fn(w.dim(), |i| bounds[i].clamp(w[i]));
                for term in &self.spec.atoms {
                    let zs: Vec<T> = term.coords.iter().map(|&i| w[i]).collect();
                    let xs = term.atom.prox(gamma, &zs);
                    for (&i, x) in term.coords.iter().zip(xs) {
                        out[i] = bounds[i].clamp(x);
                    }
                }
                out
            }
        }
    }

    /// `f(x)`; set constraints are accepted within `tol·max(1, ‖u‖)`.
    pub fn value(&self, x: &Vector<T>, tol: T) -> ExtReal<T> {
        let u = self.to_inner(x);
        let mut total = ExtReal::from_scalar(self.linear.dot(&u) + self.spec.offset);
        let slack = tol * T::one().max(u.norm());
        match &self.rule {
            ProxRule::Project { set } => {
                if !set.contains(&u, tol) {
                    return ExtReal::PosInf;
                }
            }
            ProxRule::Separable { bounds } => {
                for (b, &ui) in bounds.iter().zip(u.iter()) {
                    if ui < b.lo - slack || ui > b.hi + slack {
                        return ExtReal::PosInf;
                    }
                }
            }
        }
        for term in &self.spec.atoms {
            let xs: Vec<T> = term.coords.iter().map(|&i| u[i]).collect();
            total = total + term.atom.value(&xs);
        }
        total
    }

    /// Recession function as a function in the same algebra.
    pub fn recession_function(&self) -> &CpcFunction<T> {
        self.recession.get_or_init(|| Box::new(self.build_recession().expect("recession of a valid function is valid")))
    }

    fn build_recession(&self) -> Result<CpcFunction<T>> {
        let n = self.dim();
        let mut spec = FunctionSpec::zero(n);
        spec.linear = self.spec.linear.clone();
        spec.map = self.spec.map.clone().map(|mut m| {
            m.shift = Vector::zeros(n);
            m
        });
        match &self.rule {
            ProxRule::Project { .. } => {
                let cone = self.domain_kind.recession_cone();
                spec.indicator = Some(SetSpec::with_witness(cone, Vector::zeros(n)));
            }
            ProxRule::Separable { .. } => {
                // atom domains and the box recede to a box cone; |x| recedes to itself
                spec.indicator = Some(SetSpec::new(self.domain_kind.recession_cone()));
                spec.atoms = self.spec.atoms.iter().filter(|t| t.atom == ScalarAtom::Abs).cloned().collect();
            }
        }
        CpcFunction::new(spec)
    }

    /// `rec f(d)`
    pub fn recession(&self, d: &Vector<T>) -> ExtReal<T> {
        self.recession_function().value(d, T::lit(REC_TOL))
    }

    /// Closure of the domain, in inner coordinates when a map is present.
    pub fn domain_set(&self) -> &SetKind<T> {
        &self.domain_kind
    }

    /// `Π_{cl dom f}(x)`
    pub fn project_domain(&self, x: &Vector<T>) -> Vector<T> {
        let u = self.to_inner(x);
        self.to_outer(self.domain.project(&u))
    }

    /// `dist(x, cl dom f)`
    pub fn domain_distance(&self, x: &Vector<T>) -> T {
        x.dist(&self.project_domain(x))
    }

    /// A point of the domain.
    pub fn witness(&self) -> Vector<T> {
        self.to_outer(self.inner_witness.clone())
    }

    /// When `f(x) = aᵀx + const` everywhere, returns `a`.
    pub fn pure_linear(&self) -> Option<Vector<T>> {
        if !self.spec.atoms.is_empty() {
            return None;
        }
        let unconstrained = match &self.domain_kind {
            SetKind::Bounds { lower, upper } => lower.iter().chain(upper).all(Option::is_none),
            _ => false,
        };
        if !unconstrained {
            return None;
        }
        Some(self.outer_gradient())
    }

    /// `f = aᵀx + const + δ_C(x)`: returns `a`; `None` when atoms are present.
    pub fn linear_plus_set(&self) -> Option<Vector<T>> {
        matches!(self.rule, ProxRule::Project { .. }).then(|| self.outer_gradient())
    }

    /// Projection onto the indicator set in outer coordinates
    /// (for [`Self::linear_plus_set`] functions, equal to the domain projection).
    pub fn project_set(&self, x: &Vector<T>) -> Vector<T> {
        self.project_domain(x)
    }

    fn outer_gradient(&self) -> Vector<T> {
        match &self.spec.map {
            Some(m) => m.q.tmatvec(&self.linear).scaled(m.scale),
            None => self.linear.clone(),
        }
    }

    /// Prox of `σ·f*` at `w`, when it has an independent closed form.
    ///
    /// Unavailable for mapped functions and for the two-coordinate atom.
    pub fn conjugate_prox(&self, sigma: T, w: &Vector<T>) -> Option<Vector<T>> {
        if self.spec.map.is_some() {
            return None;
        }
        let c = &self.linear;
        let v = w - c;
        match &self.rule {
            // (cᵀx + δ_C)*(y) = σ_C(y − c); prox of a support function via the projection
            ProxRule::Project { set } => {
                let p = set.project(&v.scaled(T::one() / sigma));
                Some(&(c + &v) - &p.scaled(sigma))
            }
            ProxRule::Separable { bounds } => {
                let mut out = Vector::zeros(self.dim());
                let mut owner = vec![None; self.dim()];
                for term in &self.spec.atoms {
                    for &i in &term.coords {
                        owner[i] = Some(term.atom);
                    }
                }
                for i in 0..self.dim() {
                    out[i] = c[i]
                        + match owner[i] {
                            None => v[i] - sigma * bounds[i].clamp(v[i] / sigma),
                            Some(atom) => {
                                if bounds[i] != Interval::full() {
                                    return None;
                                }
                                atom.conjugate_prox1(sigma, v[i])?
                            }
                        };
                }
                Some(out)
            }
        }
    }

    /// `‖Prox_{γf}(z) + γ·Prox_{f*/γ}(z/γ) − z‖`, or `None` when the
    /// conjugate prox has no closed form.
    pub fn moreau_check(&self, z: &Vector<T>, gamma: T) -> Option<T> {
        let p = self.prox(gamma, z);
        let q = self.conjugate_prox(T::one() / gamma, &z.scaled(T::one() / gamma))?;
        Some((&(&p + &q.scaled(gamma)) - z).norm())
    }
}

/// A point of `c` (a closed interval) that lies in the open domain of `atom`.
fn open_interval_point<T: Scalar>(atom: ScalarAtom, c: Interval<T>) -> Option<T> {
    if c.lo > c.hi {
        return None;
    }
    let (lo, hi) = (c.lo, c.hi);
    if !atom.open_domain() {
        return Some(c.clamp(atom.interior_point()));
    }
    let zero = T::zero();
    // open side of the domain is at 0: lo = 0 for -log, hi = 0 for 1/sqrt(-x)
    let p = match atom {
        ScalarAtom::NegLog => {
            if hi <= zero {
                return None;
            }
            if hi.is_finite() {
                (lo + hi) * T::half()
            } else {
                lo + T::one()
            }
        }
        _ => {
            if lo >= zero {
                return None;
            }
            if lo.is_finite() {
                (lo + hi) * T::half()
            } else {
                hi - T::one()
            }
        }
    };
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector<f64> {
        Vector::from_f64(xs)
    }

    #[test]
    fn prox_examples() {
        let neglog = FunctionSpec::zero(1).with_atom(ScalarAtom::NegLog, &[0]).compile().unwrap();
        assert_eq!(neglog.prox(1.0, &v(&[0.0])).as_slice(), &[1.0]);
        let lin = FunctionSpec::linear(v(&[1.0, -2.0])).compile().unwrap();
        assert_eq!(lin.prox(1.0, &v(&[3.0, 3.0])).as_slice(), &[2.0, 5.0]);
        let a = Matrix::from_f64_rows(&[&[1.0, 1.0]]).unwrap();
        let aff = FunctionSpec::indicator(2, SetKind::affine(a, v(&[1.0]))).compile().unwrap();
        let z = v(&[0.25, 0.75]);
        assert!(aff.prox(7.0, &z).dist(&z) < 1e-15);
    }

    #[test]
    fn recession_examples() {
        let lin = FunctionSpec::linear(v(&[1.0])).compile().unwrap();
        assert_eq!(lin.recession(&v(&[-1.0])), ExtReal::Finite(-1.0));
        let neglog = FunctionSpec::zero(1).with_atom(ScalarAtom::NegLog, &[0]).compile().unwrap();
        assert_eq!(neglog.recession(&v(&[1.0])), ExtReal::Finite(0.0));
        let ge1 = FunctionSpec::indicator(1, SetKind::lower_bounds(vec![Some(1.0)])).compile().unwrap();
        assert_eq!(ge1.recession(&v(&[-1.0])), ExtReal::PosInf);
        assert_eq!(ge1.recession(&v(&[3.0])), ExtReal::Finite(0.0));
    }

    #[test]
    fn domain_distance_examples() {
        let ge1 = FunctionSpec::indicator(1, SetKind::lower_bounds(vec![Some(1.0)])).compile().unwrap();
        assert_eq!(ge1.domain_distance(&v(&[0.0])), 1.0);
        let neglog = FunctionSpec::zero(1).with_atom(ScalarAtom::NegLog, &[0]).compile().unwrap();
        assert_eq!(neglog.domain_distance(&v(&[2.0])), 0.0);
        let soc = FunctionSpec::indicator(3, SetKind::SecondOrderCone { t: 2, cone: vec![0, 1] }).compile().unwrap();
        assert!((soc.domain_distance(&v(&[1.0, 0.0, 0.0])) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn moreau_examples() {
        let ball = FunctionSpec::indicator(2, SetKind::Ball { center: v(&[1.0, 0.0]), radius: 1.0 }).compile().unwrap();
        assert!(ball.moreau_check(&v(&[4.0, -2.0]), 0.7).unwrap() < 1e-15);
        let lin = FunctionSpec::linear(v(&[0.3, -1.1])).compile().unwrap();
        assert!(lin.moreau_check(&v(&[0.9, 2.0]), 1.3).unwrap() <= 1e-12);
        let neglog = FunctionSpec::zero(1).with_atom(ScalarAtom::NegLog, &[0]).compile().unwrap();
        assert!(neglog.moreau_check(&v(&[3.0]), 2.0).unwrap() <= 1e-10);
        let exp = FunctionSpec::zero(2).with_atom(ScalarAtom::ExpNegSqrtProd, &[0, 1]).compile().unwrap();
        assert!(exp.moreau_check(&v(&[1.0, 1.0]), 1.0).is_none());
    }

    #[test]
    fn indicator_with_atoms_needs_box() {
        let soc = SetKind::<f64>::SecondOrderCone { t: 1, cone: vec![0] };
        let err = FunctionSpec::indicator(2, soc).with_atom(ScalarAtom::NegLog, &[0]).compile().unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
    }

    #[test]
    fn empty_atom_domain_rejected() {
        let f = FunctionSpec::indicator(1, SetKind::upper_bounds(vec![Some(0.0)])).with_atom(ScalarAtom::NegLog, &[0]);
        assert!(matches!(f.compile().unwrap_err(), Error::Input(_)));
    }

    #[test]
    fn mapped_prox_matches_direct_minimization() {
        // h(x) = |−x/2 + 1| ; prox by the composition rule vs golden section
        let map = IsometryMap { scale: 0.5, q: Matrix::from_f64_rows(&[&[-1.0]]).unwrap(), shift: v(&[1.0]) };
        let h = FunctionSpec::zero(1).with_atom(ScalarAtom::Abs, &[0]).with_map(map).compile().unwrap();
        for z in [-3.0, 0.0, 1.5, 2.0, 2.2, 7.0] {
            let p = h.prox(0.8, &v(&[z]))[0];
            let obj = |x: f64| (-x / 2.0 + 1.0).abs() + (x - z).powi(2) / 1.6;
            assert!(obj(p) <= obj(p + 1e-6) && obj(p) <= obj(p - 1e-6), "{z} -> {p}");
        }
        assert_eq!(h.witness().as_slice(), &[2.0]);
    }

    #[test]
    fn separable_with_box_clamps() {
        let f = FunctionSpec::indicator(1, SetKind::lower_bounds(vec![Some(1.0)])).with_atom(ScalarAtom::NegLog, &[0]);
        let f = f.compile().unwrap();
        assert_eq!(f.prox(1.0, &v(&[-5.0]))[0], 1.0);
        assert_eq!(f.witness()[0], 2.0);
    }

    #[test]
    fn json_round_trip() {
        let f = FunctionSpec::linear(v(&[1.0, 0.0])).with_indicator(SetKind::point(&[1.0, 2.0])).with_offset(0.5);
        let s = serde_json::to_string(&f).unwrap();
        let back: FunctionSpec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let minimal: FunctionSpec<f64> =
            serde_json::from_str(r#"{"dim":1,"atoms":[{"atom":"neg_log","coords":[0]}]}"#).unwrap();
        assert_eq!(minimal.compile().unwrap().prox(1.0, &v(&[0.0]))[0], 1.0);
    }
}
