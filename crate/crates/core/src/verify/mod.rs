//! Acceptance criteria over the zoo, shared by the `acceptance` test target
//! and `drsdiag zoo verify`.

mod criteria;
pub mod oracle;
pub mod properties;

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

pub use criteria::criterion;

/// Number of acceptance criteria.
pub const CRITERIA: u8 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Multiplies every numeric tolerance.
    pub tol_scale: f64,
    /// Restricts the run to criteria (and loops inside them) that touch this zoo entry.
    pub only: Option<String>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { tol_scale: 1.0, only: None }
    }
}

impl VerifyOptions {
    pub(crate) fn tol(&self, t: f64) -> f64 {
        t * self.tol_scale
    }

    pub(crate) fn wants(&self, id: &str) -> bool {
        self.only.as_deref().is_none_or(|o| o == id)
    }
}

/// One measured quantity compared against its target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub what: String,
    pub observed: f64,
    pub target: String,
    pub passed: bool,
}

impl Check {
    /// `|observed − expected| ≤ tol`
    pub fn near(what: impl Into<String>, observed: f64, expected: f64, tol: f64) -> Self {
        Check {
            what: what.into(),
            observed,
            target: format!("{expected} ± {tol:e}"),
            passed: (observed - expected).abs() <= tol,
        }
    }

    /// `observed ≤ bound`
    pub fn at_most(what: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check { what: what.into(), observed, target: format!("<= {bound:e}"), passed: observed <= bound }
    }

    /// `observed ≥ bound`
    pub fn at_least(what: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check { what: what.into(), observed, target: format!(">= {bound}"), passed: observed >= bound }
    }

    /// `lo < observed < hi`
    pub fn inside(what: impl Into<String>, observed: f64, lo: f64, hi: f64) -> Self {
        Check {
            what: what.into(),
            observed,
            target: format!("in ({lo}, {hi})"),
            passed: observed > lo && observed < hi,
        }
    }

    pub fn flag(what: impl Into<String>, ok: bool) -> Self {
        Check { what: what.into(), observed: if ok { 1.0 } else { 0.0 }, target: "true".into(), passed: ok }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{mark} {}: {} (target {})", self.what, self.observed, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub number: u8,
    pub title: &'static str,
    pub entries: Vec<&'static str>,
    pub checks: Vec<Check>,
    /// Set when the criterion could not run at all.
    pub error: Option<String>,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    /// `criterion N [title]: PASS|FAIL`
    pub fn summary_line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        match &self.error {
            Some(e) => format!("criterion {:>2} [{}]: {verdict} (error: {e})", self.number, self.title),
            None => format!(
                "criterion {:>2} [{}]: {verdict} ({}/{} checks)",
                self.number,
                self.title,
                self.checks.len() - failed,
                self.checks.len()
            ),
        }
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary_line())?;
        for c in &self.checks {
            writeln!(f, "    {c}")?;
        }
        Ok(())
    }
}

/// Criteria that touch `opts.only` (all when unset), evaluated in parallel
/// and returned in order.
pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionResult> {
    let numbers: Vec<u8> = (1..=CRITERIA).filter(|&n| criteria::touches(n, opts)).collect();
    numbers.par_iter().map(|&n| criterion(n, opts)).collect()
}
