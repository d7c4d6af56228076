use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Certificate, CertificateKind, Margin};
use crate::error::{FrameError, Result};
use crate::frame::Frame;
use crate::generators::{gaussian_matrix, rng_from_seed};
use crate::linalg::{self, CVector, Complex64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    /// `lambda1 = lambda2 = 0`, `mu = |T_phi - T_psi|`; the hypothesis holds by construction.
    ExactMu,
    /// User-supplied constants, hypothesis probed on random unit coefficient vectors.
    /// A pass means "not falsified", never "proved".
    Probe {
        lambda1: f64,
        lambda2: f64,
        mu: f64,
        probes: usize,
        seed: u64,
    },
}

fn check_pair(phi: &Frame, psi: &Frame) -> Result<()> {
    if phi.dim() != psi.dim() || phi.len() != psi.len() {
        return Err(FrameError::ShapeMismatch(format!(
            "phi is {}x{}, psi is {}x{}",
            phi.dim(),
            phi.len(),
            psi.dim(),
            psi.len()
        )));
    }
    Ok(())
}

const EXACT_MU: &str = "|T_phi - T_psi| < sqrt(A_phi)";

fn exact_mu_certificate(phi: &Frame, psi: &Frame, message: &str) -> Result<Certificate> {
    check_pair(phi, psi)?;
    let a = phi.require_frame()?.lower;
    let mu = linalg::op_norm(&(phi.synthesis() - psi.synthesis()));
    let root = a.sqrt() - mu;
    let cert = Certificate::from_margins(
        CertificateKind::Perturbation,
        vec![Margin::new(EXACT_MU, mu, a.sqrt())],
        root * root,
        message,
    );
    Ok(cert.with_diagnostic("mu", mu))
}

/// Wovenness of `phi` and a perturbation `psi` controlled by
/// `|sum c_i (phi_i - psi_i)| <= l1 |sum c_i phi_i| + l2 |sum c_i psi_i| + mu |c|`
/// and `l1 sqrt(B_phi) + l2 sqrt(B_psi) + mu < sqrt(A_phi)`.
pub fn cert_perturbation(phi: &Frame, psi: &Frame, mode: PerturbationMode) -> Result<Certificate> {
    match mode {
        PerturbationMode::ExactMu => exact_mu_certificate(phi, psi, "phi woven with psi (mu = |T_phi - T_psi|)"),
        PerturbationMode::Probe {
            lambda1,
            lambda2,
            mu,
            probes,
            seed,
        } => {
            check_pair(phi, psi)?;
            if [lambda1, lambda2, mu].iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                return Err(FrameError::InvalidArgument(
                    "lambda1, lambda2, mu must be finite and nonnegative".into(),
                ));
            }
            let bp = phi.require_frame()?;
            let b_psi = psi.optimal_bounds().upper;
            let diff = phi.synthesis() - psi.synthesis();
            let mut rng = rng_from_seed(seed);
            let mut worst = f64::NEG_INFINITY;
            let mut violations = 0usize;
            for _ in 0..probes {
                let c = random_unit(phi.len(), &mut rng);
                let lhs = (&diff * &c).norm();
                let rhs = lambda1 * phi.synthesize(&c).norm() + lambda2 * psi.synthesize(&c).norm() + mu;
                worst = worst.max(lhs - rhs);
                if lhs > rhs * (1.0 + 1e-12) + 1e-15 {
                    violations += 1;
                }
            }
            let total = lambda1 * bp.upper.sqrt() + lambda2 * b_psi.sqrt() + mu;
            let mut margins = vec![Margin::new(
                "lambda1 sqrt(B_phi) + lambda2 sqrt(B_psi) + mu < sqrt(A_phi)",
                total,
                bp.lower.sqrt(),
            )];
            margins.push(Margin::new("probe violations < 1", violations as f64, 1.0));
            let root = bp.lower.sqrt() - total;
            let message = if violations == 0 {
                format!("hypothesis not falsified by {probes} probes (not a proof)")
            } else {
                format!("hypothesis falsified by {violations} of {probes} probes")
            };
            let mut cert = Certificate::from_margins(CertificateKind::Perturbation, margins, root * root, message);
            cert.falsification_only = true;
            Ok(cert.with_diagnostic("worst_probe_excess", worst))
        }
    }
}

fn random_unit<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CVector {
    loop {
        let g = gaussian_matrix(m, 1, rng).column(0).into_owned();
        let n = g.norm();
        if n > 0.0 {
            return g.unscale(n);
        }
    }
}

/// `{phi_i + lambda_i h}`.
pub fn rank_one_perturbation(phi: &Frame, h: &CVector, lambdas: &[Complex64]) -> Result<Frame> {
    if h.len() != phi.dim() {
        return Err(FrameError::DimensionMismatch {
            context: "h".into(),
            expected: phi.dim(),
            found: h.len(),
        });
    }
    if lambdas.len() != phi.len() {
        return Err(FrameError::DimensionMismatch {
            context: "lambdas".into(),
            expected: phi.len(),
            found: lambdas.len(),
        });
    }
    let mut mat = phi.synthesis().clone();
    for (i, &l) in lambdas.iter().enumerate() {
        let mut col = mat.column_mut(i);
        col += h * l;
    }
    Frame::from_synthesis(mat, phi.tol())
}

/// Rank-one perturbation `psi_i = phi_i + lambda_i h` with `sum |lambda_i|^2 < alpha A / |h|^2`.
/// Certified with `mu = |lambda| |h|`.
pub fn cert_rank_one(phi: &Frame, h: &CVector, lambdas: &[Complex64], alpha: f64) -> Result<(Frame, Certificate)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FrameError::InvalidAlpha(alpha));
    }
    let a = phi.require_frame()?.lower;
    let hn = h.norm();
    if hn == 0.0 {
        return Err(FrameError::InvalidArgument("h must be nonzero".into()));
    }
    let psi = rank_one_perturbation(phi, h, lambdas)?;
    let l2: f64 = lambdas.iter().map(|l| l.norm_sqr()).sum();
    let mu = l2.sqrt() * hn;
    let root = a.sqrt() - mu;
    let cert = Certificate::from_margins(
        CertificateKind::Perturbation,
        vec![
            Margin::new("sum |lambda_i|^2 < alpha A/|h|^2", l2, alpha * a / (hn * hn)),
            Margin::new("|lambda| |h| < sqrt(A_phi)", mu, a.sqrt()),
        ],
        root * root,
        "phi woven with phi + lambda h",
    );
    Ok((psi, cert.with_diagnostic("mu", mu)))
}

/// The older perturbation bound `mu <= A / (2 (sqrt(B_phi) + sqrt(B_psi)))`.
pub fn remark_mu_bound(a_phi: f64, b_phi: f64, b_psi: f64) -> f64 {
    a_phi / (2.0 * (b_phi.sqrt() + b_psi.sqrt()))
}

fn paulsen_polynomial(dim: usize, size: usize) -> f64 {
    let (m, n) = (dim as f64, size as f64);
    27.0 * m * m * n * (n - 1.0).powi(8)
}

/// Upper limit on `eps` for an `eps`-nearly equal-norm, `eps`-nearly Parseval
/// frame of `size` vectors in dimension `dim`:
/// `min{1/2, 8 alpha sqrt(A) / (4 sqrt(dim) + 27 dim^2 size (size-1)^8)}`.
pub fn paulsen_threshold(dim: usize, size: usize, a_phi: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FrameError::InvalidAlpha(alpha));
    }
    if dim == 0 || size < dim {
        return Err(FrameError::InvalidArgument(format!(
            "need 1 <= dim <= size, got dim={dim}, size={size}"
        )));
    }
    if !(a_phi > 0.0 && a_phi.is_finite()) {
        return Err(FrameError::InvalidArgument(format!(
            "lower frame bound must be positive, got {a_phi}"
        )));
    }
    let denom = 4.0 * (dim as f64).sqrt() + paulsen_polynomial(dim, size);
    Ok(0.5f64.min(8.0 * alpha * a_phi.sqrt() / denom))
}

/// `(sqrt(dim)/2) eps + (27/8) dim^2 size (size-1)^8 eps`.
pub fn paulsen_distance_bound(dim: usize, size: usize, eps: f64) -> f64 {
    ((dim as f64).sqrt() / 2.0 + paulsen_polynomial(dim, size) / 8.0) * eps
}

/// Checks that `psi` is an equal-norm Parseval frame within the distance bound of
/// `phi` and certifies the pair through the perturbation argument with `mu` equal
/// to that bound.
pub fn cert_equal_norm_parseval(phi: &Frame, psi: &Frame, eps: f64, alpha: f64) -> Result<Certificate> {
    check_pair(phi, psi)?;
    let (dim, size) = (phi.dim(), phi.len());
    let a = phi.require_frame()?.lower;
    let threshold = paulsen_threshold(dim, size, a, alpha)?;
    if eps.is_nan() || eps <= 0.0 {
        return Err(FrameError::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let class = psi.classify();
    let phi_class = phi.classify();
    let bound = paulsen_distance_bound(dim, size, eps);
    let distance = (phi.synthesis() - psi.synthesis()).norm();
    let slack = phi.tol().sqrt();
    let margins = vec![
        Margin::new("eps < threshold", eps, threshold),
        Margin::new("psi Parseval defect < tol", class.nearly_parseval_eps, slack),
        Margin::new("psi equal-norm defect < tol", class.nearly_equal_norm_eps, slack),
        Margin::new(
            "(sum |phi_i - psi_i|^2)^(1/2) < distance bound",
            distance,
            bound * (1.0 + 1e-12),
        ),
        Margin::new("distance bound < sqrt(A_phi)", bound, a.sqrt()),
    ];
    let root = a.sqrt() - bound;
    let cert = Certificate::from_margins(
        CertificateKind::EqualNormParseval,
        margins,
        root * root,
        "phi woven with equal-norm Parseval psi",
    );
    Ok(cert
        .with_diagnostic("threshold", threshold)
        .with_diagnostic("distance", distance)
        .with_diagnostic("phi_nearly_parseval_eps", phi_class.nearly_parseval_eps)
        .with_diagnostic("phi_nearly_equal_norm_eps", phi_class.nearly_equal_norm_eps))
}
