use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::Vector;
use crate::Scalar;

/// Primal-dual status of a problem pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    Undetermined,
}

impl CaseLabel {
    pub fn definition(self) -> &'static str {
        match self {
            CaseLabel::A => "total duality: primal and dual both have solutions and d* = p*",
            CaseLabel::B => "d* = p* finite, the primal has a solution, the dual has none",
            CaseLabel::C => "d* = p* finite, the primal is feasible but has no solution",
            CaseLabel::D => {
                "d* = p* = -inf, the primal is feasible with no improving direction (dual weakly infeasible)"
            }
            CaseLabel::E => "d* = p* = -inf, the primal has an improving direction (dual strongly infeasible)",
            CaseLabel::F => "d* = p* = +inf, the primal is infeasible",
            CaseLabel::G => "d* < p*: strong duality fails",
            CaseLabel::Undetermined => "finite-run evidence is insufficient to assign a case",
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            CaseLabel::A => "a",
            CaseLabel::B => "b",
            CaseLabel::C => "c",
            CaseLabel::D => "d",
            CaseLabel::E => "e",
            CaseLabel::F => "f",
            CaseLabel::G => "g",
            CaseLabel::Undetermined => "?",
        }
    }

    /// All labels with their definitions, for embedding in reports.
    pub fn taxonomy() -> Vec<(CaseLabel, &'static str)> {
        use CaseLabel::*;
        [A, B, C, D, E, F, G].into_iter().map(|c| (c, c.definition())).collect()
    }
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseLabel::Undetermined => f.write_str("Undetermined"),
            other => write!(f, "{}", other.letter().to_uppercase()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Feasible,
    WeaklyInfeasible,
    StronglyInfeasible,
    Unknown,
}

impl Feasibility {
    pub fn is_infeasible(self) -> bool {
        matches!(self, Feasibility::WeaklyInfeasible | Feasibility::StronglyInfeasible)
    }
}

/// Known facts about a problem pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GroundTruth<T> {
    pub p_star: ExtReal<T>,
    pub d_star: ExtReal<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_minus: Option<ExtReal<T>>,
    pub case: CaseLabel,
    pub primal: Feasibility,
    pub dual: Feasibility,
    /// Infimal displacement vector at `γ = 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_v: Option<Vector<T>>,
    /// Canonical primal improving direction, or the dual one `d′` when the primal is infeasible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_direction: Option<Vector<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_solution: Option<Vector<T>>,
    /// Reported `γ` thresholds separating limit behaviors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_thresholds: Option<Vec<T>>,
}

impl<T: Scalar> GroundTruth<T> {
    pub fn new(
        p_star: ExtReal<T>,
        d_star: ExtReal<T>,
        case: CaseLabel,
        primal: Feasibility,
        dual: Feasibility,
    ) -> Self {
        GroundTruth {
            p_star,
            d_star,
            p_minus: Some(d_star),
            case,
            primal,
            dual,
            known_v: None,
            known_direction: None,
            known_solution: None,
            gamma_thresholds: None,
        }
    }

    pub fn strong_duality_fails(&self) -> bool {
        self.d_star.lt(self.p_star)
    }

    /// Weak duality, `p⁻ = d*`, and agreement of the case label with the
    /// pattern of optimal values and feasibility statuses.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Input(format!("inconsistent ground truth: {m}")));
        if self.p_star.lt(self.d_star) {
            return bad("d* > p*");
        }
        if let Some(pm) = self.p_minus {
            if pm != self.d_star {
                return bad("p- differs from d*");
            }
        }
        let equal = self.p_star == self.d_star;
        let finite = self.p_star.is_finite();
        let ok = match self.case {
            CaseLabel::A | CaseLabel::B | CaseLabel::C => equal && finite && self.primal == Feasibility::Feasible,
            CaseLabel::D => equal && self.p_star == ExtReal::NegInf && self.dual == Feasibility::WeaklyInfeasible,
            CaseLabel::E => equal && self.p_star == ExtReal::NegInf && self.dual == Feasibility::StronglyInfeasible,
            CaseLabel::F => equal && self.p_star == ExtReal::PosInf && self.primal.is_infeasible(),
            CaseLabel::G => self.strong_duality_fails(),
            CaseLabel::Undetermined => true,
        };
        if !ok {
            return bad(&format!("case {} does not match p*={}, d*={}", self.case, self.p_star, self.d_star));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    /// A primal improving direction `d`: `rec f(d) + rec g(d) < 0`.
    DualStrongInfeasibility,
    /// A dual improving direction `d′ = −Π_{cl(dom f − dom g)}(0)`.
    PrimalStrongInfeasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Certificate<T> {
    pub kind: CertificateKind,
    pub direction: Vector<T>,
    /// Direction scaled to unit norm.
    pub unit_direction: Vector<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rec_f: Option<ExtReal<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rec_g: Option<ExtReal<T>>,
    /// `dist(dom f, dom g)` for primal infeasibility certificates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_gap: Option<T>,
}

impl<T: Scalar> Certificate<T> {
    pub fn new(kind: CertificateKind, direction: Vector<T>) -> Self {
        let n = direction.norm();
        let unit_direction = if n > T::zero() { direction.scaled(T::one() / n) } else { direction.clone() };
        Certificate { kind, direction, unit_direction, rec_f: None, rec_g: None, domain_gap: None }
    }
}
