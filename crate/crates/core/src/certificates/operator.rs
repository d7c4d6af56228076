use super::{Certificate, CertificateKind, Margin};
use crate::duality::frame_operator_inverse;
use crate::error::{FrameError, Result};
use crate::frame::{check_square, Frame};
use crate::linalg::{self, CMatrix};
use crate::weaving::{min_partition_distance, woven_oracle_with_cap};

fn require_invertible(t: &CMatrix, tol: f64, what: &str) -> Result<CMatrix> {
    let s = linalg::singular_values(t);
    let (smax, smin) = (s[0], s[s.len() - 1]);
    if !linalg::is_significant(smin, smax, tol) {
        return Err(FrameError::SingularOperator(smin));
    }
    linalg::inverse(t).ok_or_else(|| FrameError::InvalidArgument(format!("{what} could not be inverted")))
}

/// `phi` and `T phi` are woven when `|I - T|^2 < A/B`.
pub fn cert_invertible_operator(phi: &Frame, t: &CMatrix) -> Result<Certificate> {
    let b = phi.require_frame()?;
    check_square(t, phi.dim(), "T")?;
    require_invertible(t, phi.tol(), "T")?;
    let id = linalg::identity(phi.dim());
    let gap = linalg::op_norm(&(&id - t));
    let gap_adj = linalg::op_norm(&(&id - t.adjoint()));
    let root = b.lower.sqrt() - b.upper.sqrt() * gap_adj;
    Ok(Certificate::from_margins(
        CertificateKind::InvertibleOperator,
        vec![Margin::new("|I-T|^2<A/B", gap * gap, b.lower / b.upper)],
        root * root,
        "phi woven with T phi",
    ))
}

/// `T1 phi` and `T2 psi` are woven for woven Riesz bases `phi`, `psi` when the
/// smallest partition distance beats `|T1 - T2| max(|T1^-1|, |T2^-1|)`.
///
/// The implied bound converts the separation `c = min(d1, d2)` of the image
/// subspaces into a frame bound: `c^2 min(sigma_min(T1 Phi)^2, sigma_min(T2 Psi)^2) / 2`.
pub fn cert_two_operator(phi: &Frame, psi: &Frame, t1: &CMatrix, t2: &CMatrix, cap: u64) -> Result<Certificate> {
    let tol = phi.tol();
    let partition = min_partition_distance(phi, psi, cap)?;
    check_square(t1, phi.dim(), "T1")?;
    check_square(t2, phi.dim(), "T2")?;
    let t1_inv = require_invertible(t1, tol, "T1")?;
    let t2_inv = require_invertible(t2, tol, "T2")?;
    let oracle = woven_oracle_with_cap(&[phi.clone(), psi.clone()], tol, cap)?;
    if !oracle.is_woven {
        return Err(FrameError::NotWovenInput);
    }
    let gap = linalg::op_norm(&(t1 - t2));
    let (n1_inv, n2_inv) = (linalg::op_norm(&t1_inv), linalg::op_norm(&t2_inv));
    let (n1, n2) = (linalg::op_norm(t1), linalg::op_norm(t2));
    let c_min = partition.min_d;
    let threshold = (gap * n1_inv).max(gap * n2_inv);
    let d1 = (c_min / n1_inv - gap) / n2;
    let d2 = (c_min / n2_inv - gap) / n1;
    let sep = d1.min(d2);
    let s1 = linalg::sigma_min(&(t1 * phi.synthesis()));
    let s2 = linalg::sigma_min(&(t2 * psi.synthesis()));
    let implied = sep.max(0.0).powi(2) * (s1 * s1).min(s2 * s2) / 2.0;
    let cert = Certificate::from_margins(
        CertificateKind::TwoOperator,
        vec![Margin::new("|T1-T2| max(|T1^-1|,|T2^-1|) < min_J d", threshold, c_min)],
        implied,
        "T1 phi woven with T2 psi",
    );
    Ok(cert
        .with_diagnostic("min_partition_distance", c_min)
        .with_diagnostic("separation", sep)
        .with_diagnostic("input_universal_lower", oracle.universal_lower))
}

/// The canonical-dual case `T1 = S_phi^-1`, `T2 = S_psi^-1`.
pub fn cert_two_operator_canonical(phi: &Frame, psi: &Frame, cap: u64) -> Result<Certificate> {
    let t1 = frame_operator_inverse(phi)?;
    let t2 = frame_operator_inverse(psi)?;
    let mut cert = cert_two_operator(phi, psi, &t1, &t2, cap)?;
    cert.message = "canonical duals S_phi^-1 phi and S_psi^-1 psi woven".into();
    if !cert.holds {
        let failing: Vec<&str> = cert
            .margins
            .iter()
            .filter(|m| !m.satisfied())
            .map(|m| m.inequality.as_str())
            .collect();
        cert.message = format!("{}; failing: {}", cert.message, failing.join(", "));
    }
    Ok(cert)
}

/// Admissibility data: orthonormal families as columns, positive weights.
#[derive(Clone, Debug)]
pub struct AdmissibleSpec {
    pub lambda_basis: CMatrix,
    pub omega_basis: CMatrix,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub e_basis: CMatrix,
}

fn orthonormality_defect(q: &CMatrix) -> f64 {
    linalg::max_abs_entry(&(q.adjoint() * q - linalg::identity(q.ncols())))
}

/// `phi` and `T phi` are woven when every rank-one term is preserved:
/// `T phi_i (T phi_i)^* = phi_i phi_i^*`. Then every weaving has frame operator `S_phi`.
///
/// The weaker global identity `T S T^* = S` is reported as a diagnostic; on its
/// own it does not control the weavings.
pub fn cert_admissible(phi: &Frame, t: &CMatrix, spec: Option<&AdmissibleSpec>) -> Result<Certificate> {
    let b = phi.require_frame()?;
    check_square(t, phi.dim(), "T")?;
    require_invertible(t, phi.tol(), "T")?;
    let tol = phi.tol();
    let n = phi.dim();
    let s = phi.frame_operator();
    let global = linalg::max_abs_entry(&(&s - t * &s * t.adjoint()));
    let per_index = (0..phi.len())
        .map(|i| {
            let v = phi.vector(i);
            let w = t * &v;
            linalg::max_abs_entry(&(&w * w.adjoint() - &v * v.adjoint()))
        })
        .fold(0.0, f64::max);
    let scale = b.upper.max(1.0);
    let global_ok = global <= tol * scale;
    let mut margins = vec![Margin::new("max_i |T P_i T* - P_i| < tol", per_index, tol * scale)];

    if let Some(spec) = spec {
        let shapes_ok = [&spec.lambda_basis, &spec.omega_basis, &spec.e_basis]
            .iter()
            .all(|q| q.shape() == (n, n))
            && spec.alpha.len() == n
            && spec.beta.len() == n;
        if !shapes_ok {
            return Err(FrameError::SpecInconsistent(format!(
                "admissibility data must consist of {n} vectors and weights"
            )));
        }
        for (name, q) in [
            ("Lambda", &spec.lambda_basis),
            ("Omega", &spec.omega_basis),
            ("e", &spec.e_basis),
        ] {
            let defect = orthonormality_defect(q);
            if defect > tol.sqrt() {
                return Err(FrameError::SpecInconsistent(format!(
                    "{name} is not orthonormal (defect {defect:.3e})"
                )));
            }
        }
        if spec
            .alpha
            .iter()
            .chain(spec.beta.iter())
            .any(|&x| x.is_nan() || x <= 0.0)
        {
            return Err(FrameError::SpecInconsistent("weights must be strictly positive".into()));
        }
        for i in 0..n {
            let l = spec.lambda_basis.column(i);
            let resid = (&s * l - l * linalg::real(spec.alpha[i])).norm();
            if resid > tol.sqrt() * scale {
                return Err(FrameError::SpecInconsistent(format!(
                    "Lambda[{i}] is not an eigenvector of S with eigenvalue {} (residual {resid:.3e})",
                    spec.alpha[i]
                )));
            }
        }
        let t_adj = t.adjoint();
        let mut formula = 0.0f64;
        for i in 0..n {
            let lhs = &t_adj * spec.lambda_basis.column(i);
            let mut rhs = linalg::CVector::zeros(n);
            for k in 0..n {
                let g = spec.omega_basis.column(k);
                let inner = g.dotc(&spec.e_basis.column(i));
                rhs += g * (inner * (spec.alpha[i] / spec.beta[k]).sqrt());
            }
            formula = formula.max((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        margins.push(Margin::new(
            "admissibility formula residual < tol",
            formula,
            tol * scale,
        ));
    }

    let per_index_ok = margins[0].satisfied();
    let message = match (global_ok, per_index_ok) {
        (true, true) => "rank-one terms preserved; every weaving has frame operator S_phi".to_string(),
        (true, false) => {
            "global invariance T S T* = S holds but per-index invariance fails; weavings are not controlled".to_string()
        }
        (false, _) => "global invariance T S T* = S fails".to_string(),
    };
    let cert = Certificate::from_margins(CertificateKind::Admissible, margins, b.lower, message);
    Ok(cert
        .with_diagnostic("global_invariance_defect", global)
        .with_diagnostic("per_index_defect", per_index))
}
