use serde::{Deserialize, Serialize};

use super::{Certificate, CertificateKind, Margin};
use crate::duality::{
    approx_dual_constants, canonical_dual, dual_weaving_constants, excess_and_kernel, frame_operator_inverse,
    null_residual, null_tolerance, riesz_decompose, BesselSequence,
};
use crate::error::{FrameError, Result};
use crate::frame::Frame;
use crate::linalg::{self, CMatrix};
use crate::weaving::{assignment_count, woven_oracle_with_cap};

const IMP4: &str = "|I-S^-1|^2<A/B";

/// Wovenness of `phi` with the alternate dual `{S^{-1} phi_i + alpha u_i}`.
pub fn cert_dual_weaving(phi: &Frame, u: &BesselSequence, alpha: f64) -> Result<Certificate> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(FrameError::InvalidArgument(format!(
            "alpha must be finite and nonnegative, got {alpha}"
        )));
    }
    let k = dual_weaving_constants(phi)?;
    let residual = null_residual(phi, u)?;
    if residual > null_tolerance(phi, linalg::op_norm(u.matrix())) {
        return Err(FrameError::DirectionNotNull(residual));
    }
    let b_u = u.upper_bound();
    let load = alpha * alpha * b_u + 2.0 * alpha * (b_u / k.lower).sqrt();
    let margins = vec![
        Margin::new(IMP4, k.inverse_gap.powi(2), k.lower / k.upper),
        Margin::new("alpha^2 B_U + 2 alpha sqrt(B_U/A) < calA", load, k.universal_lower),
    ];
    let cert = Certificate::from_margins(
        CertificateKind::DualWeaving,
        margins,
        k.universal_lower - load,
        format!("phi woven with S^-1 phi + {alpha} U"),
    );
    Ok(cert
        .with_diagnostic("calA", k.universal_lower)
        .with_diagnostic("B_U", b_u))
}

/// Wovenness of `phi` with the approximate dual `{T^* S^{-1} phi_i + alpha theta^* delta_i}`.
/// `theta` is `m x dim`.
pub fn cert_approx_dual_weaving(phi: &Frame, t: &CMatrix, theta: &CMatrix, alpha: f64) -> Result<Certificate> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(FrameError::InvalidArgument(format!(
            "alpha must be finite and nonnegative, got {alpha}"
        )));
    }
    let k = approx_dual_constants(phi, t, theta)?;
    if k.theta_residual > null_tolerance(phi, k.theta_norm) {
        return Err(FrameError::ThetaNotNull(k.theta_residual));
    }
    let load = k.alpha_load(alpha);
    let margins = vec![
        Margin::new("|I-T|<1", k.t_gap, 1.0),
        Margin::new("|I-T*S^-1|^2<A/B", k.base_gap.powi(2), k.lower / k.upper),
        Margin::new(
            "alpha^2|theta|^2 + 2 alpha |theta| |S^-1 T| sqrt(B) < (sqrt(A) - sqrt(B)|I-T*S^-1|)^2",
            load,
            k.universal_lower,
        ),
    ];
    let cert = Certificate::from_margins(
        CertificateKind::ApproxDualWeaving,
        margins,
        k.universal_lower - load,
        format!("phi woven with T* S^-1 phi + {alpha} theta* delta"),
    );
    Ok(cert
        .with_diagnostic("theta_norm", k.theta_norm)
        .with_diagnostic("base_lower", k.universal_lower))
}

/// Which operator produces the image of the Riesz part in the small-redundancy test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RieszPartOperator {
    /// The frame operator of the whole frame.
    #[default]
    FullFrame,
    /// The frame operator of the Riesz part alone.
    RieszPart,
}

struct Condition {
    name: &'static str,
    margins: Vec<Margin>,
    implied: f64,
}

impl Condition {
    fn fired(&self) -> bool {
        self.margins.iter().all(Margin::satisfied)
    }
}

/// Wovenness of a frame with its canonical dual. Tries, in order: zero excess,
/// small redundant norms, and (`S^{-1} >= I` with per-index commutation).
pub fn cert_canonical_dual_woven(phi: &Frame, reading: RieszPartOperator, cap: u64) -> Result<Certificate> {
    let bounds = phi.require_frame()?;
    let (a, b) = (bounds.lower, bounds.upper);
    let tol = phi.tol();
    let excess = excess_and_kernel(phi).excess;
    let mut notes: Vec<String> = Vec::new();
    let mut diagnostics: Vec<(String, f64)> = vec![("excess".into(), excess as f64)];

    let riesz = Condition {
        name: "riesz-basis",
        margins: vec![Margin::new("excess<1", excess as f64, 1.0)],
        implied: a.min(1.0 / b),
    };

    let mut conditions = vec![riesz];

    if excess > 0 {
        let split = riesz_decompose(phi)?;
        let part = phi.select(&split.riesz_indices)?;
        let op = match reading {
            RieszPartOperator::FullFrame => phi.frame_operator(),
            RieszPartOperator::RieszPart => part.frame_operator(),
        };
        if assignment_count(2, part.len()) <= cap as u128 {
            let image = part.apply_operator(&op)?;
            let report = woven_oracle_with_cap(&[part, image], tol, cap)?;
            let a_part = report.universal_lower;
            let redundant: f64 = split
                .redundant_indices
                .iter()
                .map(|&i| phi.vector(i).norm_squared())
                .sum();
            let root = a_part.sqrt() - b.sqrt() * redundant;
            diagnostics.push(("riesz_part_universal_lower".into(), a_part));
            conditions.push(Condition {
                name: "small-redundancy",
                margins: vec![Margin::new(
                    "sum |phi_i|^2 (redundant) < sqrt(A/B)",
                    redundant,
                    (a_part / b).sqrt(),
                )],
                // bound for (phi, S phi) carried to (phi, S^-1 phi) through S^-1
                implied: root * root / (b * b),
            });
        } else {
            notes.push("small-redundancy skipped: Riesz part too large to enumerate".into());
        }
    }

    let s = phi.frame_operator();
    let s_inv = frame_operator_inverse(phi)?;
    let commutation = (0..phi.len())
        .map(|i| {
            let v = phi.vector(i);
            let p = &v * v.adjoint();
            linalg::op_norm(&(&s * &p - &p * &s))
        })
        .fold(0.0, f64::max);
    let scale = b * phi.norms().iter().map(|n| n * n).fold(0.0, f64::max);
    let inv_floor = linalg::hermitian_eigenvalues(&(s_inv - linalg::identity(phi.dim())))[0];
    conditions.push(Condition {
        name: "commuting-contraction",
        margins: vec![
            Margin::new("-lambda_min(S^-1 - I) < tol", -inv_floor, tol),
            Margin::new("max_i |S P_i - P_i S| < tol", commutation, tol * scale.max(1.0)),
        ],
        implied: a,
    });

    let fired = conditions.iter().position(Condition::fired);
    for c in &conditions {
        for m in &c.margins {
            diagnostics.push((format!("{}: {}", c.name, m.inequality), m.slack()));
        }
    }
    let (margins, implied, mut message) = match fired {
        Some(i) => {
            let c = &conditions[i];
            (
                c.margins.clone(),
                c.implied,
                format!("phi woven with its canonical dual via {}", c.name),
            )
        }
        None => {
            let failing = conditions
                .iter()
                .flat_map(|c| c.margins.iter().filter(|m| !m.satisfied()).cloned())
                .collect();
            (failing, 0.0, "no sufficient condition applies".to_string())
        }
    };

    if fired == Some(0) && assignment_count(2, phi.len()) <= cap as u128 {
        let dual = canonical_dual(phi)?;
        let report = woven_oracle_with_cap(&[phi.clone(), dual], tol, cap)?;
        diagnostics.push(("oracle_universal_lower".into(), report.universal_lower));
        if !report.is_woven || report.universal_lower < implied - 1e-8 {
            notes.push(format!(
                "DISCREPANCY: oracle reports woven={} with universal lower {:.6e}",
                report.is_woven, report.universal_lower
            ));
        }
    }
    if !notes.is_empty() {
        message = format!("{message} ({})", notes.join("; "));
    }
    let mut cert = Certificate::from_margins(CertificateKind::CanonicalDualWoven, margins, implied, message);
    cert.diagnostics = diagnostics;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::DEFAULT_TOL;
    use crate::generators::{example_family, random_frame};
    use crate::weaving::DEFAULT_ENUMERATION_CAP;

    fn rf(dim: usize, v: &[&[f64]]) -> Frame {
        Frame::from_real(dim, &v.iter().map(|x| x.to_vec()).collect::<Vec<_>>(), DEFAULT_TOL).unwrap()
    }

    #[test]
    fn tight_frame_imp4_margin() {
        let (phi, _) = example_family(3);
        let tight = Frame::from_synthesis(phi.synthesis().scale(0.8f64.sqrt()), DEFAULT_TOL).unwrap();
        let zero = BesselSequence::zeros(3, 6);
        let c = cert_dual_weaving(&tight, &zero, 0.0).unwrap();
        let m = c.margin(IMP4).unwrap();
        assert!((m.lhs - 0.0625).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn example_dual_margin() {
        let (phi, u) = example_family(3);
        let c = cert_dual_weaving(&phi, &u, 0.3).unwrap();
        assert!(c.holds);
        assert!((c.margins[1].lhs - 0.69).abs() < 1e-12);
        assert!((c.implied_lower.unwrap() - 0.31).abs() < 1e-12);
        let c0 = cert_dual_weaving(&phi, &u, 0.0).unwrap();
        assert!((c0.implied_lower.unwrap() - 1.0).abs() < 1e-12);
        assert!(!cert_dual_weaving(&phi, &u, 0.5).unwrap().holds);
    }

    #[test]
    fn dual_weaving_rejects_non_null_direction() {
        let (phi, _) = example_family(3);
        let bad = BesselSequence::from_matrix(phi.synthesis().clone()).unwrap();
        assert!(matches!(
            cert_dual_weaving(&phi, &bad, 0.1),
            Err(FrameError::DirectionNotNull(_))
        ));
    }

    #[test]
    fn approx_dual_example_margin() {
        let (phi, u) = example_family(3);
        let t = linalg::identity(3).scale(0.5);
        let c = cert_approx_dual_weaving(&phi, &t, &u.analysis(), 0.2).unwrap();
        assert!(c.holds);
        let m = &c.margins[2];
        assert!((m.lhs - 6.0 / 25.0).abs() < 1e-15 && (m.rhs - 0.25).abs() < 1e-15);
    }

    #[test]
    fn approx_dual_reduces_to_dual_weaving() {
        let (phi, u) = example_family(3);
        let a = cert_approx_dual_weaving(&phi, &linalg::identity(3), &CMatrix::zeros(6, 3), 0.4).unwrap();
        let b = cert_dual_weaving(&phi, &BesselSequence::zeros(3, 6), 0.4).unwrap();
        assert_eq!(a.holds, b.holds);
        assert!((a.implied_lower.unwrap() - b.implied_lower.unwrap()).abs() < 1e-12);
        let t = linalg::identity(3).scale(-0.2);
        let c = cert_approx_dual_weaving(&phi, &t, &u.analysis(), 0.1).unwrap();
        assert!(!c.holds);
        assert!(!c.margin("|I-T|<1").unwrap().satisfied());
    }

    #[test]
    fn canonical_riesz_basis() {
        let f = random_frame(3, 3, (0.4, 2.5), 5).unwrap();
        let c = cert_canonical_dual_woven(&f, RieszPartOperator::FullFrame, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(c.holds, "{}", c.message);
        assert!(c.message.contains("riesz-basis") && !c.message.contains("DISCREPANCY"));
        assert!((c.implied_lower.unwrap() - 0.4f64.min(1.0 / 2.5)).abs() < 1e-9);
    }

    #[test]
    fn canonical_orthonormal_also_commutes() {
        let f = rf(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let c = cert_canonical_dual_woven(&f, RieszPartOperator::FullFrame, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(c.holds);
        let slack = c
            .diagnostic("commuting-contraction: max_i |S P_i - P_i S| < tol")
            .unwrap();
        assert!(slack > 0.0);
    }

    #[test]
    fn canonical_small_redundancy() {
        let f = rf(2, &[&[1.0, 0.0], &[0.0, 1.0], &[1e-2, 0.0]]);
        for reading in [RieszPartOperator::FullFrame, RieszPartOperator::RieszPart] {
            let c = cert_canonical_dual_woven(&f, reading, DEFAULT_ENUMERATION_CAP).unwrap();
            assert!(c.holds, "{}", c.message);
            assert!(c.message.contains("small-redundancy"));
        }
    }

    #[test]
    fn canonical_commuting_contraction() {
        // S = diag(1, 0.5): vectors lie in eigenspaces, B = 1.
        let h = 0.5f64.sqrt();
        let f = rf(2, &[&[h, 0.0], &[h, 0.0], &[0.0, 0.5], &[0.0, 0.5]]);
        let c = cert_canonical_dual_woven(&f, RieszPartOperator::FullFrame, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(c.holds, "{}", c.message);
        assert!(
            c.diagnostic("commuting-contraction: -lambda_min(S^-1 - I) < tol")
                .unwrap()
                > 0.0
        );
        assert!(
            c.diagnostic("commuting-contraction: max_i |S P_i - P_i S| < tol")
                .unwrap()
                > 0.0
        );
    }

    #[test]
    fn canonical_no_condition() {
        let f = random_frame(2, 5, (1.5, 3.0), 3).unwrap();
        let c = cert_canonical_dual_woven(&f, RieszPartOperator::FullFrame, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(!c.holds);
        assert!(c.implied_lower.is_none());
    }
}
