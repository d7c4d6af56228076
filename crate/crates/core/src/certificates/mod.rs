//! Sufficient conditions for wovenness, each evaluated as a [`Certificate`].
//!
//! A certificate lists the strict inequalities it checked as [`Margin`]s and,
//! when all of them hold, the universal lower frame bound the corresponding
//! argument guarantees. A failing certificate says nothing about wovenness.

mod dual;
mod operator;
mod perturbation;

use serde::{Deserialize, Serialize};

pub use dual::{cert_approx_dual_weaving, cert_canonical_dual_woven, cert_dual_weaving, RieszPartOperator};
pub use operator::{
    cert_admissible, cert_invertible_operator, cert_two_operator, cert_two_operator_canonical, AdmissibleSpec,
};
pub use perturbation::{
    cert_equal_norm_parseval, cert_perturbation, cert_rank_one, paulsen_distance_bound, paulsen_threshold,
    rank_one_perturbation, remark_mu_bound, PerturbationMode,
};

/// Relative slack a strict inequality must clear.
pub const STRICT_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    InvertibleOperator,
    DualWeaving,
    ApproxDualWeaving,
    CanonicalDualWoven,
    TwoOperator,
    Admissible,
    Perturbation,
    EqualNormParseval,
}

impl CertificateKind {
    pub const ALL: [CertificateKind; 8] = [
        CertificateKind::InvertibleOperator,
        CertificateKind::DualWeaving,
        CertificateKind::ApproxDualWeaving,
        CertificateKind::CanonicalDualWoven,
        CertificateKind::TwoOperator,
        CertificateKind::Admissible,
        CertificateKind::Perturbation,
        CertificateKind::EqualNormParseval,
    ];
}

/// One strict inequality `lhs < rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Margin {
    pub fn new(inequality: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            inequality: inequality.into(),
            lhs,
            rhs,
        }
    }

    /// `rhs - lhs`, the reported slack.
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn satisfied(&self) -> bool {
        self.lhs.is_finite() && self.rhs.is_finite() && self.slack() > STRICT_SLACK * self.rhs.abs().max(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub holds: bool,
    pub margins: Vec<Margin>,
    /// Universal lower frame bound guaranteed when `holds`.
    pub implied_lower: Option<f64>,
    pub message: String,
    /// Non-binding quantities computed along the way.
    pub diagnostics: Vec<(String, f64)>,
    /// True when the hypothesis was only probed, never proved.
    pub falsification_only: bool,
}

impl Certificate {
    pub(crate) fn from_margins(
        kind: CertificateKind,
        margins: Vec<Margin>,
        implied: f64,
        message: impl Into<String>,
    ) -> Self {
        let holds = margins.iter().all(Margin::satisfied);
        let mut message = message.into();
        if !holds {
            let failing: Vec<&str> = margins
                .iter()
                .filter(|m| !m.satisfied())
                .map(|m| m.inequality.as_str())
                .collect();
            message = format!("{message}; failing: {}", failing.join(", "));
        }
        Self {
            kind,
            holds,
            margins,
            implied_lower: holds.then_some(implied.max(0.0)),
            message,
            diagnostics: Vec::new(),
            falsification_only: false,
        }
    }

    pub(crate) fn with_diagnostic(mut self, name: impl Into<String>, value: f64) -> Self {
        self.diagnostics.push((name.into(), value));
        self
    }

    pub fn margin(&self, inequality: &str) -> Option<&Margin> {
        self.margins.iter().find(|m| m.inequality == inequality)
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_margins() {
        assert!(Margin::new("a<b", 0.5, 1.0).satisfied());
        assert!(!Margin::new("a<b", 1.0, 1.0).satisfied());
        assert!(!Margin::new("a<b", 1.0 - 1e-14, 1.0).satisfied());
        assert!(!Margin::new("a<b", f64::NAN, 1.0).satisfied());
    }

    #[test]
    fn implied_lower_only_when_holding() {
        let c = Certificate::from_margins(
            CertificateKind::Perturbation,
            vec![Margin::new("x", 2.0, 1.0)],
            0.3,
            "m",
        );
        assert!(!c.holds && c.implied_lower.is_none());
        assert!(c.message.contains("failing: x"));
        let c = Certificate::from_margins(
            CertificateKind::Perturbation,
            vec![Margin::new("x", 0.0, 1.0)],
            0.3,
            "m",
        );
        assert_eq!(c.implied_lower, Some(0.3));
    }
}
