use serde::Serialize;

use crate::atoms::CpcFunction;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::pathology::directions::dual_improving_direction;
use crate::pathology::types::{Certificate, CertificateKind};
use crate::Scalar;

/// Absolute slack of the distance comparison for primal infeasibility certificates.
pub const CERT_DIST_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CertificateCheck<T> {
    pub valid: bool,
    /// `−(rec f(d) + rec g(d))` for primal directions, `dist(dom f, dom g)` for dual ones.
    pub margin: T,
}

/// Builds a certificate, filling in the recession values or the domain gap.
pub fn make_certificate<T: Scalar>(
    kind: CertificateKind,
    direction: crate::linalg::Vector<T>,
    f: &CpcFunction<T>,
    g: &CpcFunction<T>,
) -> Certificate<T> {
    let mut cert = Certificate::new(kind, direction);
    match kind {
        CertificateKind::DualStrongInfeasibility => {
            cert.rec_f = Some(f.recession(&cert.direction));
            cert.rec_g = Some(g.recession(&cert.direction));
        }
        CertificateKind::PrimalStrongInfeasibility => {
            cert.domain_gap = Some(dual_improving_direction(f, g).gap);
        }
    }
    cert
}

/// Verifies a certificate against the oracles.
///
/// A primal improving direction needs `rec f(d) + rec g(d) < 0`. A dual
/// improving direction has no conjugate recession oracle, so it is checked
/// against the domain gap: `0 < ‖d′‖ ≤ dist(dom f, dom g) + tol`.
pub fn check_certificate<T: Scalar>(
    cert: &Certificate<T>,
    f: &CpcFunction<T>,
    g: &CpcFunction<T>,
) -> Result<CertificateCheck<T>> {
    if cert.direction.norm() == T::zero() {
        return Err(Error::Input("certificate direction must be nonzero".into()));
    }
    Ok(match cert.kind {
        CertificateKind::DualStrongInfeasibility => {
            let total = f.recession(&cert.direction) + g.recession(&cert.direction);
            match total {
                ExtReal::Finite(s) => CertificateCheck { valid: s < T::zero(), margin: -s },
                ExtReal::PosInf => CertificateCheck { valid: false, margin: T::neg_infinity() },
                ExtReal::NegInf => CertificateCheck { valid: true, margin: T::infinity() },
            }
        }
        CertificateKind::PrimalStrongInfeasibility => {
            let dd = dual_improving_direction(f, g);
            let tol = T::lit(CERT_DIST_TOL);
            let valid = dd.certified && dd.gap > tol && cert.direction.norm() <= dd.gap + tol;
            CertificateCheck { valid, margin: dd.gap }
        }
    })
}
