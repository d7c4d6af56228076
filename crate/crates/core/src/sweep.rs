//! Randomized cross-check of every certificate kind against the oracle.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificates::{
    cert_admissible, cert_approx_dual_weaving, cert_canonical_dual_woven, cert_dual_weaving, cert_equal_norm_parseval,
    cert_invertible_operator, cert_perturbation, cert_rank_one, cert_two_operator, paulsen_threshold, Certificate,
    CertificateKind, PerturbationMode, RieszPartOperator,
};
use crate::duality::{canonical_dual, excess_and_kernel, frame_operator_inverse, null_bessel, DualFamily, DualKind};
use crate::error::Result;
use crate::frame::Frame;
use crate::generators::{gaussian_matrix, harmonic_frame, random_frame_with, random_unitary, rng_from_seed};
use crate::linalg::{self, c, real, CMatrix, CVector, Complex64};
use crate::weaving::{woven_oracle_with_cap, DEFAULT_ENUMERATION_CAP};
use crate::DEFAULT_TOL;

/// Tolerance on `universal_lower >= implied_lower`.
pub const SOUNDNESS_SLACK: f64 = 1e-8;
/// Tolerance on `universal_upper <= B_phi + B_psi`.
pub const BESSEL_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepCase {
    pub trial: usize,
    pub kind: CertificateKind,
    pub dim: usize,
    pub size: usize,
    pub holds: bool,
    pub implied_lower: Option<f64>,
    pub oracle_woven: bool,
    pub oracle_lower: f64,
    pub oracle_upper: f64,
    pub bessel_sum: f64,
    /// `holds` but the oracle disagrees.
    pub violation: bool,
    pub upper_violation: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KindTally {
    pub kind: CertificateKind,
    pub instances: usize,
    pub holds: usize,
    /// Oracle-woven pairs the certificate did not certify.
    pub woven_not_certified: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub trials: usize,
    pub violations: usize,
    pub upper_violations: usize,
    pub skipped: usize,
    pub tallies: Vec<KindTally>,
    pub cases: Vec<SweepCase>,
}

impl SweepReport {
    pub fn sound(&self) -> bool {
        self.violations == 0 && self.upper_violations == 0
    }
}

struct Instance {
    cert: Certificate,
    pair: [Frame; 2],
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

fn frame_with_bounds(rng: &mut ChaCha8Rng, dim: usize, size: usize, lo: f64, hi: f64) -> Result<Frame> {
    let a = lo + (hi - lo) * unit(rng);
    let b = a + (hi - a) * unit(rng);
    random_frame_with(dim, size, (a, b), rng)
}

fn scaled(mut e: CMatrix, norm: f64) -> CMatrix {
    let n = linalg::op_norm(&e);
    if n > 0.0 {
        e *= real(norm / n);
    }
    e
}

fn invertible_instance(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> Result<Instance> {
    let phi = frame_with_bounds(rng, dim, size, 0.5, 2.0)?;
    let b = phi.optimal_bounds();
    let s = 1.2 * (b.lower / b.upper).sqrt() * unit(rng);
    let t = linalg::identity(dim) + scaled(gaussian_matrix(dim, dim, rng), s);
    let cert = cert_invertible_operator(&phi, &t)?;
    let image = phi.apply_operator(&t)?;
    Ok(Instance {
        cert,
        pair: [phi, image],
    })
}

fn dual_instance(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> Result<Instance> {
    let phi = frame_with_bounds(rng, dim, size, 0.75, 1.35)?;
    let excess = size - dim;
    let scale = 0.2 + unit(rng);
    let coeffs: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| {
            (0..excess)
                .map(|_| c(scale * (unit(rng) - 0.5), scale * (unit(rng) - 0.5)))
                .collect()
        })
        .collect();
    let u = null_bessel(&phi, &coeffs)?;
    let alpha = 0.3 * unit(rng);
    let cert = cert_dual_weaving(&phi, &u, alpha)?;
    let family = DualFamily {
        base: canonical_dual(&phi)?,
        direction: u,
        epsilon_star: 0.0,
        kind: DualKind::Alternate,
    };
    let dual = family.member(alpha);
    Ok(Instance {
        cert,
        pair: [phi, dual],
    })
}

fn approx_dual_instance(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> Result<Instance> {
    let phi = frame_with_bounds(rng, dim, size, 0.7, 1.4)?;
    let t = if rng.random_bool(0.5) {
        linalg::identity(dim).scale(0.4 + 1.2 * unit(rng))
    } else {
        linalg::identity(dim) + scaled(gaussian_matrix(dim, dim, rng), 0.6 * unit(rng))
    };
    let kernel = excess_and_kernel(&phi).kernel_basis;
    let theta = scaled(&kernel * gaussian_matrix(kernel.ncols(), dim, rng), 0.5 * unit(rng));
    let alpha = 0.5 * unit(rng);
    let cert = cert_approx_dual_weaving(&phi, &t, &theta, alpha)?;
    let s_inv = frame_operator_inverse(&phi)?;
    let psi = Frame::from_synthesis(
        t.adjoint() * s_inv * phi.synthesis() + theta.adjoint().scale(alpha),
        phi.tol(),
    )?;
    Ok(Instance { cert, pair: [phi, psi] })
}

fn canonical_instance(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> Result<Instance> {
    let phi = match rng.random_range(0..3) {
        0 => frame_with_bounds(rng, dim, dim, 0.3, 3.0)?,
        1 => {
            let riesz = frame_with_bounds(rng, dim, dim, 0.6, 1.6)?;
            let extra = scaled(gaussian_matrix(dim, size - dim, rng), 0.05 + 0.3 * unit(rng));
            let mut mat = CMatrix::zeros(dim, size);
            mat.columns_mut(0, dim).copy_from(riesz.synthesis());
            mat.columns_mut(dim, size - dim).copy_from(&extra);
            Frame::from_synthesis(mat, DEFAULT_TOL)?
        }
        _ => {
            // vectors along a rotated orthonormal basis, each direction carrying total weight <= 1
            let q = random_unitary(dim, rng);
            let mut mat = CMatrix::zeros(dim, size);
            let weights: Vec<f64> = (0..dim).map(|_| 0.3 + 0.75 * unit(rng)).collect();
            let counts: Vec<usize> = (0..size).map(|i| i % dim).collect();
            for (i, &k) in counts.iter().enumerate() {
                let share = counts.iter().filter(|&&j| j == k).count() as f64;
                let col = q.column(k) * real((weights[k] / share).sqrt());
                mat.set_column(i, &col);
            }
            Frame::from_synthesis(mat, DEFAULT_TOL)?
        }
    };
    let cert = cert_canonical_dual_woven(&phi, RieszPartOperator::FullFrame, DEFAULT_ENUMERATION_CAP)?;
    let dual = canonical_dual(&phi)?;
    Ok(Instance {
        cert,
        pair: [phi, dual],
    })
}

fn two_operator_instance(rng: &mut ChaCha8Rng, dim: usize) -> Result<Instance> {
    let phi = frame_with_bounds(rng, dim, dim, 0.6, 1.6)?;
    let psi = Frame::from_synthesis(
        phi.synthesis() + scaled(gaussian_matrix(dim, dim, rng), 0.3 * unit(rng)),
        DEFAULT_TOL,
    )?;
    let t1 = linalg::identity(dim) + scaled(gaussian_matrix(dim, dim, rng), 0.3 * unit(rng));
    let t2 = &t1 + scaled(gaussian_matrix(dim, dim, rng), 0.8 * unit(rng));
    let cert = cert_two_operator(&phi, &psi, &t1, &t2, DEFAULT_ENUMERATION_CAP)?;
    Ok(Instance {
        cert,
        pair: [phi.apply_operator(&t1)?, psi.apply_operator(&t2)?],
    })
}

fn admissible_instance(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> Result<Instance> {
    let phi = frame_with_bounds(rng, dim, size, 0.5, 2.0)?;
    let theta = std::f64::consts::TAU * unit(rng);
    let t = match rng.random_range(0..3) {
        0 => linalg::identity(dim) * Complex64::from_polar(1.0, theta),
        1 => {
            // unitary close to a phase, usually not admissible
            let q = random_unitary(dim, rng);
            let d = CMatrix::from_diagonal(&CVector::from_fn(dim, |k, _| {
                Complex64::from_polar(1.0, theta + 0.3 * k as f64)
            }));
            &q * d * q.adjoint()
        }
        _ => linalg::identity(dim) * Complex64::from_polar(1.0 + 0.2 * (unit(rng) - 0.5), theta),
    };
    let cert = cert_admissible(&phi, &t, None)?;
    let image = phi.apply_operator(&t)?;
    Ok(Instance {
        cert,
        pair: [phi, image],
    })
}

fn perturbation_instance(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> Result<Instance> {
    let phi = frame_with_bounds(rng, dim, size, 0.5, 2.0)?;
    let a = phi.optimal_bounds().lower;
    if rng.random_bool(0.5) {
        let e = scaled(gaussian_matrix(dim, size, rng), 1.2 * a.sqrt() * unit(rng));
        let psi = Frame::from_synthesis(phi.synthesis() + e, DEFAULT_TOL)?;
        let cert = cert_perturbation(&phi, &psi, PerturbationMode::ExactMu)?;
        Ok(Instance { cert, pair: [phi, psi] })
    } else {
        let h: CVector = gaussian_matrix(dim, 1, rng).column(0).into_owned();
        let lam = gaussian_matrix(size, 1, rng);
        let target = (1.2 * a).sqrt() * unit(rng) / h.norm();
        let lambdas: Vec<Complex64> = lam.iter().map(|l| l * real(target / lam.norm())).collect();
        let (psi, cert) = cert_rank_one(&phi, &h, &lambdas, 0.99)?;
        Ok(Instance { cert, pair: [phi, psi] })
    }
}

fn paulsen_instance(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> Result<Instance> {
    let psi = harmonic_frame(dim, size)?;
    let e = gaussian_matrix(dim, size, rng);
    let fro = 0.5 * unit(rng);
    let e = e.scale(fro / e.norm());
    let phi = Frame::from_synthesis(psi.synthesis() + e, DEFAULT_TOL)?;
    let alpha = 0.1 + 0.85 * unit(rng);
    let a = phi.require_frame()?.lower;
    let eps = paulsen_threshold(dim, size, a, alpha)? * (0.5 + 0.7 * unit(rng));
    let cert = cert_equal_norm_parseval(&phi, &psi, eps, alpha)?;
    Ok(Instance { cert, pair: [phi, psi] })
}

fn instance(kind: CertificateKind, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let dim = rng.random_range(2..=4);
    let size = rng.random_range(dim + 1..=10);
    match kind {
        CertificateKind::InvertibleOperator => invertible_instance(rng, dim, size),
        CertificateKind::DualWeaving => dual_instance(rng, dim, size),
        CertificateKind::ApproxDualWeaving => approx_dual_instance(rng, dim, size),
        CertificateKind::CanonicalDualWoven => canonical_instance(rng, dim, size),
        CertificateKind::TwoOperator => two_operator_instance(rng, dim),
        CertificateKind::Admissible => admissible_instance(rng, dim, size),
        CertificateKind::Perturbation => perturbation_instance(rng, dim, size),
        CertificateKind::EqualNormParseval => paulsen_instance(rng, dim, size),
    }
}

/// Runs `trials` seeded instances, cycling through every certificate kind, and
/// checks each certified pair against the oracle.
pub fn soundness_sweep(seed: u64, trials: usize) -> Result<SweepReport> {
    let mut master = rng_from_seed(seed);
    let mut cases = Vec::with_capacity(trials);
    let mut skipped = 0;
    for trial in 0..trials {
        let kind = CertificateKind::ALL[trial % CertificateKind::ALL.len()];
        let mut rng = rng_from_seed(master.random());
        let inst = match instance(kind, &mut rng) {
            Ok(inst) => inst,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let oracle = woven_oracle_with_cap(&inst.pair, DEFAULT_TOL, DEFAULT_ENUMERATION_CAP)?;
        let bessel_sum: f64 = inst.pair.iter().map(|f| f.optimal_bounds().upper).sum();
        let violation = inst.cert.holds
            && !(oracle.is_woven && oracle.universal_lower >= inst.cert.implied_lower.unwrap_or(0.0) - SOUNDNESS_SLACK);
        cases.push(SweepCase {
            trial,
            kind,
            dim: inst.pair[0].dim(),
            size: inst.pair[0].len(),
            holds: inst.cert.holds,
            implied_lower: inst.cert.implied_lower,
            oracle_woven: oracle.is_woven,
            oracle_lower: oracle.universal_lower,
            oracle_upper: oracle.universal_upper,
            bessel_sum,
            violation,
            upper_violation: oracle.universal_upper > bessel_sum + BESSEL_SLACK,
        });
    }
    let tallies = CertificateKind::ALL
        .iter()
        .map(|&kind| {
            let of_kind: Vec<&SweepCase> = cases.iter().filter(|c| c.kind == kind).collect();
            KindTally {
                kind,
                instances: of_kind.len(),
                holds: of_kind.iter().filter(|c| c.holds).count(),
                woven_not_certified: of_kind.iter().filter(|c| c.oracle_woven && !c.holds).count(),
            }
        })
        .collect();
    Ok(SweepReport {
        seed,
        trials,
        violations: cases.iter().filter(|c| c.violation).count(),
        upper_violations: cases.iter().filter(|c| c.upper_violation).count(),
        skipped,
        tallies,
        cases,
    })
}
