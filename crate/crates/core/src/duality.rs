//! Canonical, alternate and approximate duals, frame excess and null Bessel
//! sequences.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{check_square, Frame};
use crate::linalg::{self, CMatrix, CVector, Complex64};

/// A finite Bessel sequence with its optimal Bessel bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BesselSequence {
    vectors: CMatrix,
    upper_bound: f64,
}

impl BesselSequence {
    /// `vectors` holds the sequence as columns (`dim x m`).
    pub fn from_matrix(vectors: CMatrix) -> Result<Self> {
        if vectors.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(FrameError::InvalidArgument(
                "Bessel sequence has a non-finite entry".into(),
            ));
        }
        let upper_bound = linalg::op_norm(&vectors).powi(2);
        Ok(Self { vectors, upper_bound })
    }

    pub fn from_vectors(dim: usize, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(FrameError::DimensionMismatch {
                    context: format!("Bessel vector {i}"),
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        Self::from_matrix(CMatrix::from_fn(dim, vectors.len(), |r, j| vectors[j][r]))
    }

    pub fn zeros(dim: usize, m: usize) -> Self {
        Self {
            vectors: CMatrix::zeros(dim, m),
            upper_bound: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    /// Columns are the sequence vectors.
    pub fn matrix(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vectors(&self) -> Vec<Vec<Complex64>> {
        (0..self.len())
            .map(|j| self.vectors.column(j).iter().copied().collect())
            .collect()
    }

    /// Optimal Bessel bound `B_U`.
    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    /// The analysis map `f -> (<f, u_i>)_i` as an `m x dim` matrix.
    pub fn analysis(&self) -> CMatrix {
        self.vectors.adjoint()
    }

    pub fn as_frame(&self, tol: f64) -> Result<Frame> {
        Frame::from_synthesis(self.vectors.clone(), tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualKind {
    Alternate,
    Approximate,
}

/// One-parameter family `base + alpha * direction`, valid for `0 < alpha < epsilon_star`.
#[derive(Clone, Debug)]
pub struct DualFamily {
    pub base: Frame,
    pub direction: BesselSequence,
    pub epsilon_star: f64,
    pub kind: DualKind,
}

impl DualFamily {
    pub fn member(&self, alpha: f64) -> Frame {
        let mat = self.base.synthesis() + self.direction.matrix().scale(alpha);
        Frame::from_synthesis(mat, self.base.tol()).expect("finite combination of finite families")
    }
}

#[derive(Clone, Debug)]
pub struct Excess {
    pub excess: usize,
    /// Orthonormal basis of `Ker T_phi` as columns of an `m x excess` matrix.
    pub kernel_basis: CMatrix,
}

impl Excess {
    pub fn kernel_vectors(&self) -> Vec<CVector> {
        (0..self.excess)
            .map(|k| self.kernel_basis.column(k).into_owned())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RieszSplit {
    pub riesz_indices: Vec<usize>,
    pub redundant_indices: Vec<usize>,
}

/// `{S^{-1} phi_i}`.
pub fn canonical_dual(frame: &Frame) -> Result<Frame> {
    let s_inv = frame_operator_inverse(frame)?;
    frame.apply_operator(&s_inv)
}

pub(crate) fn frame_operator_inverse(frame: &Frame) -> Result<CMatrix> {
    frame.require_frame()?;
    Ok(linalg::hermitian_function(&frame.frame_operator(), |x| 1.0 / x))
}

fn check_same_shape(frame: &Frame, psi: &Frame) -> Result<()> {
    if frame.dim() != psi.dim() {
        return Err(FrameError::DimensionMismatch {
            context: "dual dimension".into(),
            expected: frame.dim(),
            found: psi.dim(),
        });
    }
    if frame.len() != psi.len() {
        return Err(FrameError::DimensionMismatch {
            context: "dual length".into(),
            expected: frame.len(),
            found: psi.len(),
        });
    }
    Ok(())
}

/// Largest reconstruction error `|sum_i <e_k, psi_i> phi_i - e_k|` over standard basis probes.
pub fn dual_residual(frame: &Frame, psi: &Frame) -> Result<f64> {
    check_same_shape(frame, psi)?;
    let composite = frame.synthesis() * psi.synthesis().adjoint() - linalg::identity(frame.dim());
    Ok((0..frame.dim()).map(|k| composite.column(k).norm()).fold(0.0, f64::max))
}

pub fn is_dual(frame: &Frame, psi: &Frame, tol: f64) -> Result<bool> {
    Ok(dual_residual(frame, psi)? <= tol)
}

/// `|I - T_psi T_phi^*|`; below 1 makes `psi` an approximate dual.
pub fn approximate_dual_defect(frame: &Frame, psi: &Frame) -> Result<f64> {
    check_same_shape(frame, psi)?;
    let composite = psi.synthesis() * frame.synthesis().adjoint();
    Ok(linalg::op_norm(&(linalg::identity(frame.dim()) - composite)))
}

pub fn excess_and_kernel(frame: &Frame) -> Excess {
    let kernel_basis = linalg::null_space(frame.synthesis(), frame.tol());
    Excess {
        excess: kernel_basis.ncols(),
        kernel_basis,
    }
}

/// `|Phi U^H|`, zero exactly when `sum_i <f, u_i> phi_i = 0` for every `f`.
pub fn null_residual(frame: &Frame, u: &BesselSequence) -> Result<f64> {
    if u.dim() != frame.dim() || u.len() != frame.len() {
        return Err(FrameError::ShapeMismatch(format!(
            "Bessel sequence is {}x{}, frame is {}x{}",
            u.dim(),
            u.len(),
            frame.dim(),
            frame.len()
        )));
    }
    Ok(linalg::op_norm(&(frame.synthesis() * u.matrix().adjoint())))
}

pub(crate) fn null_tolerance(frame: &Frame, other_norm: f64) -> f64 {
    frame.tol() * (linalg::op_norm(frame.synthesis()) * other_norm).max(1.0)
}

/// Builds `U` with `U^H = K C`, where `K` is the kernel basis of the synthesis
/// operator and `C` has the given columns (one per ambient coordinate, each of
/// length `excess`). An empty coefficient list yields the zero sequence.
pub fn null_bessel(frame: &Frame, coefficients: &[Vec<Complex64>]) -> Result<BesselSequence> {
    let ex = excess_and_kernel(frame);
    if coefficients.is_empty() {
        return Ok(BesselSequence::zeros(frame.dim(), frame.len()));
    }
    if ex.excess == 0 {
        return Err(FrameError::ZeroExcess);
    }
    if coefficients.len() != frame.dim() {
        return Err(FrameError::DimensionMismatch {
            context: "number of kernel coefficient vectors".into(),
            expected: frame.dim(),
            found: coefficients.len(),
        });
    }
    for (k, col) in coefficients.iter().enumerate() {
        if col.len() != ex.excess {
            return Err(FrameError::DimensionMismatch {
                context: format!("kernel coefficient vector {k}"),
                expected: ex.excess,
                found: col.len(),
            });
        }
    }
    let coeff = CMatrix::from_fn(ex.excess, frame.dim(), |r, k| coefficients[k][r]);
    let u_adjoint = &ex.kernel_basis * coeff;
    BesselSequence::from_matrix(u_adjoint.adjoint())
}

/// Positive root of `a e^2 + 2 b e = rhs` (with `a, b >= 0`, `rhs > 0`); infinite
/// when both coefficients vanish.
pub fn positive_quadratic_root(a: f64, b: f64, rhs: f64) -> f64 {
    if rhs <= 0.0 {
        return 0.0;
    }
    let denom = b + (b * b + a * rhs).sqrt();
    if denom == 0.0 {
        f64::INFINITY
    } else {
        rhs / denom
    }
}

/// Quantities of the dual-weaving argument for a frame.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DualWeavingConstants {
    pub lower: f64,
    pub upper: f64,
    /// `|I - S^{-1}|`.
    pub inverse_gap: f64,
    /// `(sqrt(A) - sqrt(B) |I - S^{-1}|)^2`.
    pub universal_lower: f64,
}

impl DualWeavingConstants {
    pub fn hypothesis_holds(&self) -> bool {
        self.inverse_gap * self.inverse_gap < self.lower / self.upper
    }
}

pub fn dual_weaving_constants(frame: &Frame) -> Result<DualWeavingConstants> {
    let b = frame.require_frame()?;
    let s_inv = frame_operator_inverse(frame)?;
    let inverse_gap = linalg::op_norm(&(linalg::identity(frame.dim()) - s_inv));
    let root = b.lower.sqrt() - b.upper.sqrt() * inverse_gap;
    Ok(DualWeavingConstants {
        lower: b.lower,
        upper: b.upper,
        inverse_gap,
        universal_lower: root * root,
    })
}

/// Family `{S^{-1} phi_i + alpha u_i}` of duals woven with `phi`.
pub fn alternate_dual_family(frame: &Frame, u: &BesselSequence) -> Result<DualFamily> {
    let consts = dual_weaving_constants(frame)?;
    let residual = null_residual(frame, u)?;
    if residual > null_tolerance(frame, linalg::op_norm(u.matrix())) {
        return Err(FrameError::DirectionNotNull(residual));
    }
    if !consts.hypothesis_holds() {
        return Err(FrameError::HypothesisFailed(format!(
            "|I - S^-1|^2 < A/B fails: {:.6e} >= {:.6e}",
            consts.inverse_gap.powi(2),
            consts.lower / consts.upper
        )));
    }
    if u.upper_bound() == 0.0 {
        return Err(FrameError::ZeroDirection);
    }
    let b_u = u.upper_bound();
    let epsilon_star = positive_quadratic_root(b_u, (b_u / consts.lower).sqrt(), consts.universal_lower);
    Ok(DualFamily {
        base: canonical_dual(frame)?,
        direction: u.clone(),
        epsilon_star,
        kind: DualKind::Alternate,
    })
}

/// Quantities of the approximate-dual weaving argument for `(phi, T, theta)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ApproxDualConstants {
    pub lower: f64,
    pub upper: f64,
    /// `|I - T|`.
    pub t_gap: f64,
    /// `|I - T^* S^{-1}|`.
    pub base_gap: f64,
    pub theta_norm: f64,
    /// `|S^{-1} T|`.
    pub inv_s_t_norm: f64,
    /// `(sqrt(A) - sqrt(B) |I - T^* S^{-1}|)^2`.
    pub universal_lower: f64,
    /// `|T_phi theta|`.
    pub theta_residual: f64,
}

impl ApproxDualConstants {
    /// Left side of the alpha condition.
    pub fn alpha_load(&self, alpha: f64) -> f64 {
        alpha * alpha * self.theta_norm.powi(2) + 2.0 * alpha * self.theta_norm * self.inv_s_t_norm * self.upper.sqrt()
    }
}

/// `theta` is an `m x dim` matrix (a map from the ambient space into coefficients).
pub fn approx_dual_constants(frame: &Frame, t: &CMatrix, theta: &CMatrix) -> Result<ApproxDualConstants> {
    let b = frame.require_frame()?;
    check_square(t, frame.dim(), "T")?;
    if theta.nrows() != frame.len() || theta.ncols() != frame.dim() {
        return Err(FrameError::ShapeMismatch(format!(
            "theta must be {}x{}, got {}x{}",
            frame.len(),
            frame.dim(),
            theta.nrows(),
            theta.ncols()
        )));
    }
    let s_inv = frame_operator_inverse(frame)?;
    let id = linalg::identity(frame.dim());
    let t_gap = linalg::op_norm(&(&id - t));
    let base_gap = linalg::op_norm(&(&id - t.adjoint() * &s_inv));
    let theta_norm = linalg::op_norm(theta);
    let inv_s_t_norm = linalg::op_norm(&(&s_inv * t));
    let root = b.lower.sqrt() - b.upper.sqrt() * base_gap;
    let theta_residual = linalg::op_norm(&(frame.synthesis() * theta));
    Ok(ApproxDualConstants {
        lower: b.lower,
        upper: b.upper,
        t_gap,
        base_gap,
        theta_norm,
        inv_s_t_norm,
        universal_lower: root * root,
        theta_residual,
    })
}

/// Family `{T^* S^{-1} phi_i + alpha theta^* delta_i}` of approximate duals woven with `phi`.
pub fn approximate_dual_family(frame: &Frame, t: &CMatrix, theta: &CMatrix) -> Result<DualFamily> {
    let k = approx_dual_constants(frame, t, theta)?;
    if k.theta_residual > null_tolerance(frame, k.theta_norm) {
        return Err(FrameError::ThetaNotNull(k.theta_residual));
    }
    if k.t_gap >= 1.0 {
        return Err(FrameError::HypothesisFailed(format!(
            "|I-T|<1 fails: |I-T| = {:.6e}",
            k.t_gap
        )));
    }
    if k.base_gap.powi(2) >= k.lower / k.upper {
        return Err(FrameError::HypothesisFailed(format!(
            "|I-T*S^-1|^2<A/B fails: {:.6e} >= {:.6e}",
            k.base_gap.powi(2),
            k.lower / k.upper
        )));
    }
    let s_inv = frame_operator_inverse(frame)?;
    let base = frame.apply_operator(&(t.adjoint() * s_inv))?;
    let direction = BesselSequence::from_matrix(theta.adjoint())?;
    let epsilon_star = positive_quadratic_root(
        k.theta_norm.powi(2),
        k.theta_norm * k.inv_s_t_norm * k.upper.sqrt(),
        k.universal_lower,
    );
    Ok(DualFamily {
        base,
        direction,
        epsilon_star,
        kind: DualKind::Approximate,
    })
}

/// Splits a frame into a Riesz basis (chosen by column pivoting) and the redundant rest.
pub fn riesz_decompose(frame: &Frame) -> Result<RieszSplit> {
    frame.require_frame()?;
    let mut riesz_indices = linalg::pivoted_columns(frame.synthesis(), frame.dim(), frame.tol());
    if riesz_indices.len() < frame.dim() {
        let b = frame.optimal_bounds();
        return Err(FrameError::NotAFrame {
            lower: b.lower,
            upper: b.upper,
        });
    }
    riesz_indices.sort_unstable();
    let redundant_indices = (0..frame.len()).filter(|i| !riesz_indices.contains(i)).collect();
    Ok(RieszSplit {
        riesz_indices,
        redundant_indices,
    })
}
